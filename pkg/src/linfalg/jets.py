"""Truncated enveloping algebras, L-jets and the L-de Rham complex of jets.

``U_L`` is stored through its normal-ordered (PBW) basis: words
``e_{i_1}...e_{i_k}`` with ``i_1 <= ... <= i_k`` and functions on the left.
A jet of order ``N`` with values in ``E = R^m`` is its table of values on
words of length ``<= N``; the dual basis element of ``(word, a)`` is written
``(word)^v eps_a``.  Under the canonical PBW splitting ``y^b / b!``
corresponds to ``(e^b)^v``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product as iproduct
from math import comb, factorial
from typing import Mapping, Sequence

from . import linalg
from .algebra import Element, Generator, GradedAlgebra
from .algebroid import AlgebroidModel, check_algebroid, dual_name, to_nilcdga
from .errors import ArgumentError, PreconditionError, StructureError, WindowError
from .graded import GradedMap, GradedModule, cohomology
from .linf import CurvedLinf, check_structure, xi_name
from .report import Report

Word = tuple


def words(r: int, k: int) -> list[Word]:
    return list(combinations_with_replacement(range(r), k))


def exponents(r: int, w: Word) -> tuple[int, ...]:
    out = [0] * r
    for i in w:
        out[i] += 1
    return tuple(out)


def word_of(beta: Sequence[int]) -> Word:
    return tuple(i for i, b in enumerate(beta) for _ in range(b))


def word_factorial(w: Word) -> int:
    out = 1
    for i in set(w):
        out *= factorial(w.count(i))
    return out


def _acc(out: dict, key, v):
    if v.is_zero():
        return
    if key in out:
        s = out[key] + v
        if s.is_zero():
            del out[key]
        else:
            out[key] = s
    else:
        out[key] = v


class TruncatedUL:
    """Normal-ordered model of ``U_L`` with basis words of length ``<= N``."""

    def __init__(self, M: AlgebroidModel, N: int, verify: bool = True):
        if N < 0:
            raise ArgumentError("N must be non-negative")
        if verify:
            rep = check_algebroid(M)
            if not rep.ok:
                bad = rep.first_failure()
                raise PreconditionError(f"algebroid axioms fail: {bad.name} at {bad.witness}")
        self.M = M
        self.R = M.R
        self.N = N
        self.r = M.rank
        self.basis = [w for k in range(N + 1) for w in words(self.r, k)]
        self._words: dict = {}

    def __repr__(self):
        return f"TruncatedUL({self.M.name}, N={self.N})"

    def word(self, i: int, J: Word) -> dict:
        """``e_i * e_J`` in normal order."""
        key = (i, J)
        if key in self._words:
            return self._words[key]
        one = self.R.one()
        if not J or i <= J[0]:
            out = {(i,) + J: one}
        else:
            j, rest = J[0], J[1:]
            out = dict(self.mul_frame(j, self.word(i, rest)))
            for k, c in self.M.c(i, j).items():
                for w, v in self.word(k, rest).items():
                    _acc(out, w, c * v)
        self._words[key] = out
        return out

    def mul_frame(self, i: int, u: Mapping) -> dict:
        out: dict = {}
        for J, g in u.items():
            for w, v in self.word(i, J).items():
                _acc(out, w, g * v)
            _acc(out, J, self.M.rho(i, g))
        return out

    def mul_word(self, I: Word, u: Mapping) -> dict:
        for i in reversed(I):
            u = self.mul_frame(i, u)
        return dict(u)

    def product(self, u: Mapping, v: Mapping) -> dict:
        out: dict = {}
        for I, f in u.items():
            for w, c in self.mul_word(I, v).items():
                _acc(out, w, f * c)
        return out

    def act(self, u: Mapping, f) -> Element:
        """``u`` acting on a function through the anchor."""
        f = self.R.coerce(f)
        out = self.R.zero()
        for I, g in u.items():
            h = f
            for i in reversed(I):
                h = self.M.rho(i, h)
            out = out + g * h
        return out

    @staticmethod
    def coproduct(I: Word) -> list[tuple[Word, Word]]:
        out = []
        for mask in iproduct((0, 1), repeat=len(I)):
            out.append((tuple(i for i, b in zip(I, mask) if b == 0),
                        tuple(i for i, b in zip(I, mask) if b == 1)))
        return out

    def check(self) -> Report:
        rep = Report(f"U_L {self.M.name} N={self.N}")
        R, r, one = self.R, self.r, self.R.one()
        bad = None
        for i, j in combinations(range(r), 2):
            lhs = self.word(j, (i,))
            rhs = {(i, j): one}
            for k, c in self.M.c(j, i).items():
                _acc(rhs, (k,), c)
            if not _same(lhs, rhs):
                bad = (self.M.frame[j], self.M.frame[i])
        rep.add("straightening of frame pairs", bad is None, bad)
        bad = None
        for i in range(r):
            for v in self.M.variables:
                f = R.gen(v)
                lhs = self.mul_frame(i, {(): f})
                rhs = {(i,): f}
                _acc(rhs, (), self.M.rho(i, f))
                if not _same(lhs, rhs):
                    bad = (self.M.frame[i], v)
        rep.add("straightening against functions", bad is None, bad)
        bad_f = bad_g = bad_a = None
        small = [w for w in self.basis if w]
        for I in small:
            for J in small:
                if len(I) + len(J) > self.N:
                    continue
                p = self.mul_word(I, {J: one})
                if any(len(w) > len(I) + len(J) for w in p):
                    bad_f = (I, J)
                top = {w: c for w, c in p.items() if len(w) == len(I) + len(J)}
                if not _same(top, {tuple(sorted(I + J)): one}):
                    bad_g = (I, J)
                for K in small:
                    if len(I) + len(J) + len(K) > self.N:
                        continue
                    a = self.product(self.product({I: one}, {J: one}), {K: one})
                    b = self.product({I: one}, self.product({J: one}, {K: one}))
                    if not _same(a, b):
                        bad_a = (I, J, K)
        rep.add("filtration", bad_f is None, bad_f)
        rep.add("associated graded is symmetric", bad_g is None, bad_g)
        rep.add("associativity", bad_a is None, bad_a)
        bad = None
        for I in self.basis:
            left = sorted((a, b, c) for ab, c in self.coproduct(I) for a, b in self.coproduct(ab))
            right = sorted((a, b, c) for a, bc in self.coproduct(I) for b, c in self.coproduct(bc))
            if left != right:
                bad = I
        rep.add("coassociativity", bad is None, bad)
        return rep


def _same(u: Mapping, v: Mapping) -> bool:
    return all((u.get(k, 0) - v.get(k, 0)) == 0 for k in set(u) | set(v))


def build_UL(M: AlgebroidModel, N: int, verify: bool = True) -> TruncatedUL:
    U = TruncatedUL(M, N, verify)
    if verify:
        rep = U.check()
        if not rep.ok:
            bad = rep.first_failure()
            raise StructureError(bad.name, bad.witness)
    return U


class JetModule:
    """``J_L^{<=N}(E)`` for ``E = R^rank``; jets are dicts ``(word, a) -> R``."""

    def __init__(self, U: TruncatedUL, rank: int = 1, order: int | None = None):
        self.U = U
        self.M = U.M
        self.R = U.R
        self.rank = rank
        self.order = U.N if order is None else order

    def basis(self, order: int | None = None) -> list[tuple[Word, int]]:
        n = self.order if order is None else order
        return [(w, a) for w in self.U.basis if len(w) <= n for a in range(self.rank)]

    def level_ranks(self) -> list[int]:
        return [len(words(self.U.r, k)) * self.rank for k in range(self.order + 1)]

    def evaluate(self, phi: Mapping, u: Mapping) -> list[Element]:
        out = [self.R.zero() for _ in range(self.rank)]
        for I, f in u.items():
            for a in range(self.rank):
                v = phi.get((I, a))
                if v is not None:
                    out[a] = out[a] + f * v
        return out

    def product(self, phi: Mapping, psi: Mapping, order: int | None = None) -> dict:
        """Commutative product from the coproduct (scalar jets, or scalar times E-jet)."""
        n = self.order if order is None else order
        out: dict = {}
        for I in self.U.basis:
            if len(I) > n:
                continue
            for A, B in TruncatedUL.coproduct(I):
                for a in range(self.rank):
                    f = phi.get((A, 0))
                    g = psi.get((B, a))
                    if f is not None and g is not None:
                        _acc(out, (I, a), f * g)
        return out

    def connection(self, phi: Mapping, i: int, order: int | None = None) -> dict:
        """``(nabla_i phi)(D) = rho(e_i)(phi(D)) - phi(e_i D)``."""
        n = self.order - 1 if order is None else order
        out: dict = {}
        for J in self.U.basis:
            if len(J) > n:
                continue
            eJ = self.evaluate(phi, {J: self.R.one()})
            prod = self.evaluate(phi, self.U.word(i, J))
            for a in range(self.rank):
                _acc(out, (J, a), self.M.rho(i, eJ[a]) - prod[a])
        return out

    def prolong(self, f, a: int = 0) -> dict:
        """The jet ``D -> D.f`` (placed in component ``a``)."""
        f = self.R.coerce(f)
        out: dict = {}
        for I in self.U.basis:
            if len(I) <= self.order:
                _acc(out, (I, a), self.U.act({I: self.R.one()}, f))
        return out


def l_jet_prolongation(M: AlgebroidModel, f, N: int) -> dict:
    """Jet of ``f`` as a dict word -> value."""
    J = JetModule(TruncatedUL(M, N, verify=False))
    return {w: v for (w, _), v in J.prolong(f).items()}


class GrothendieckConnection:
    def __init__(self, M: AlgebroidModel, rank: int, N: int):
        if N < 1:
            raise ArgumentError("the connection needs N >= 1")
        self.U = TruncatedUL(M, N, verify=False)
        self.jets = JetModule(self.U, rank)
        self.M = M
        self.N = N
        self.rank = rank

    def table(self) -> dict:
        """``nabla_i`` of each dual basis jet, as dicts over order ``N-1``."""
        out = {}
        for i in range(self.M.rank):
            for b in self.jets.basis():
                out[(i, b)] = self.jets.connection({b: self.M.R.one()}, i)
        return out

    def check_flat(self, window: int = 1) -> Report:
        """``nabla_i nabla_j - nabla_j nabla_i - nabla_[e_i,e_j] = 0`` into order ``N-2``."""
        rep = Report(f"Grothendieck connection {self.M.name} N={self.N}")
        R = self.M.R
        mons = [R.monomial(m) for m in R.basis(window=window)] if R.n else [R.one()]
        J = self.jets
        bad = None
        for b in J.basis():
            for f in mons:
                phi = {b: f}
                for i, j in combinations(range(self.M.rank), 2):
                    lhs = J.connection(J.connection(phi, j, self.N - 1), i, self.N - 2)
                    rhs = J.connection(J.connection(phi, i, self.N - 1), j, self.N - 2)
                    diff = dict(lhs)
                    for k, v in rhs.items():
                        _acc(diff, k, -v)
                    for k, c in self.M.c(i, j).items():
                        for key, v in J.connection(phi, k, self.N - 2).items():
                            _acc(diff, key, -(c * v))
                    if diff:
                        bad = (b, str(f), self.M.frame[i], self.M.frame[j])
                        break
                if bad:
                    break
            if bad:
                break
        rep.add("flatness", bad is None, bad)
        return rep


def grothendieck_connection(M: AlgebroidModel, rank: int = 1, N: int = 2) -> GrothendieckConnection:
    return GrothendieckConnection(M, rank, N)


class DrLComplex:
    """``dR_L(J^{<=N}(E))`` truncated as ``K^m = C^m(L) (x) J^{<=N-m}(E)``.

    Elements are dicts ``(word, a) -> element of C*(L)``.
    """

    def __init__(self, M: AlgebroidModel, N: int, rank: int = 1, window: int | None = None):
        self.M = M
        self.N = N
        self.rank = rank
        self.window = window
        self.C = M.ce_algebra()
        self.U = TruncatedUL(M, N, verify=False)
        self.jets = JetModule(self.U, rank)
        if M.R.n and window is None:
            raise WindowError("a polynomial degree window is required")
        self._nabla: dict = {}

    def _nabla_basis(self, i: int, I: Word) -> dict:
        key = (i, I)
        if key not in self._nabla:
            out: dict = {}
            for J in self.U.basis:
                if len(J) >= self.N:
                    continue
                c = self.U.word(i, J).get(I)
                if c is not None:
                    out[J] = -c
            self._nabla[key] = out
        return self._nabla[key]

    def D(self, v: Mapping) -> dict:
        C = self.C
        out: dict = {}
        for (I, a), w in v.items():
            for m in self._form_degrees(w):
                part = w.filter(lambda mono, m=m: C.mono_degree(mono) == m)
                if len(I) > self.N - m:
                    continue
                if len(I) <= self.N - m - 1:
                    _acc(out, (I, a), C.d(part))
                sign = -1 if m % 2 else 1
                for i in range(self.M.rank):
                    for J, c in self._nabla_basis(i, I).items():
                        if len(J) <= self.N - m - 1:
                            _acc(out, (J, a), part * self.M.dual(i) * C.embed(c) * sign)
        return out

    def _form_degrees(self, w: Element) -> set[int]:
        return {self.C.mono_degree(m) for m in w.terms}

    def basis(self, m: int) -> list[tuple]:
        """Pairs ``(C-monomial, (word, a))`` spanning ``K^m``."""
        C = self.C
        mons = C.basis(window=self.window if self.M.R.n else None, degree=m)
        return [(mono, b) for b in self.jets.basis(self.N - m) for mono in mons]

    def element(self, b) -> dict:
        mono, key = b
        return {key: self.C.monomial(mono)}

    def weight(self, b) -> int:
        mono, (I, _) = b
        return self.C.mono_degree(mono) + len(I)

    def maps(self, max_weight: int | None = None) -> list[GradedMap]:
        top = min(self.M.rank, self.N)
        bases = []
        for m in range(top + 1):
            B = self.basis(m)
            if max_weight is not None:
                B = [b for b in B if self.weight(b) <= max_weight]
            bases.append(B)
        mods = [GradedModule(tuple(self._label(b) for b in B), (m,) * len(B))
                for m, B in enumerate(bases)]
        out = []
        for m in range(top):
            pos = {b: k for k, b in enumerate(bases[m + 1])}
            mat = linalg.zeros(len(bases[m + 1]), len(bases[m]))
            for col, b in enumerate(bases[m]):
                for key, w in self.D(self.element(b)).items():
                    for mono, c in w.terms.items():
                        tgt = (mono, key)
                        if tgt not in pos:
                            if max_weight is not None and self.weight(tgt) > max_weight:
                                continue
                            raise WindowError(f"D leaves the window at {self._label(tgt)}")
                        mat[pos[tgt]][col] = c
            out.append(GradedMap(mods[m], mods[m + 1], 1, mat))
        if not out:
            out.append(GradedMap(mods[0], GradedModule((), ()), 1, []))
        return out

    def _label(self, b) -> str:
        mono, (I, a) = b
        w = "".join(self.M.frame[i] for i in I) or "1"
        return f"{self.C.mono_str(mono)}*({w})^v[{a}]"

    def cohomology(self, max_weight: int | None = None) -> dict[int, int]:
        groups = cohomology(self.maps(max_weight))
        return {g.degree: g.dimension for g in groups}

    def faithful_weight(self) -> int:
        return self.N - self.M.rank

    def check(self) -> Report:
        rep = Report(f"dR_L jets {self.M.name} N={self.N}")
        bad = None
        for m in range(min(self.M.rank, self.N) - 1):
            for b in self.basis(m):
                if self.D(self.D(self.element(b))):
                    bad = self._label(b)
                    break
            if bad:
                break
        rep.add("D^2 = 0", bad is None, bad)
        return rep


def dr_L(M: AlgebroidModel, N: int, rank: int = 1, window: int | None = None,
         verify: bool = True) -> DrLComplex:
    K = DrLComplex(M, N, rank, window)
    if verify:
        if not grothendieck_connection(M, rank, max(N, 1)).check_flat(window or 0).ok:
            raise StructureError("flatness", M.name)
    return K


def dr_L_map(K1: DrLComplex, K2: DrLComplex, matrix: Sequence[Sequence]) -> list[list]:
    """Componentwise map induced by a constant ``E1 -> E2``; one Q-matrix per degree."""
    out = []
    for m in range(min(K1.M.rank, K1.N) + 1):
        B1, B2 = K1.basis(m), K2.basis(m)
        pos = {b: k for k, b in enumerate(B2)}
        mat = linalg.zeros(len(B2), len(B1))
        for col, (mono, (I, a)) in enumerate(B1):
            for b in range(K2.rank):
                c = matrix[b][a]
                if c:
                    mat[pos[(mono, (I, b))]][col] = c
        out.append(mat)
    return out


class JetIdentification:
    """``Sym^{<=N}(L^v) -> J^{<=N}`` induced by a splitting ``y_i -> s_i``."""

    def __init__(self, M: AlgebroidModel, N: int, splitting: Mapping | None = None):
        self.M = M
        self.N = N
        self.U = TruncatedUL(M, N, verify=False)
        self.jets = JetModule(self.U)
        R = M.R
        one = R.one()
        self.s = {}
        for i in range(M.rank):
            jet = {((i,), 0): one}
            for w, c in (splitting or {}).get(M.frame[i], {}).items():
                w = tuple(M.index(x) for x in w)
                if len(w) < 2:
                    raise ArgumentError("splitting corrections must have order >= 2")
                _acc(jet, (tuple(sorted(w)), 0), R.coerce(c))
            self.s[i] = jet
        self.monomials = [w for w in self.U.basis]
        self.images = {}
        for w in self.monomials:
            img = {((), 0): one}
            for i in w:
                img = self.jets.product(img, self.s[i], N)
            self.images[w] = img

    def matrix(self) -> list[list]:
        """Columns: images of ``y^b`` in the basis dual to PBW words (R = Q only)."""
        B = self.monomials
        pos = {w: k for k, w in enumerate(B)}
        mat = linalg.zeros(len(B), len(B))
        for col, w in enumerate(B):
            for (I, _), v in self.images[w].items():
                mat[pos[I]][col] = v.constant()
        return mat

    def check(self) -> Report:
        rep = Report(f"splitting {self.M.name} N={self.N}")
        r = self.M.rank
        sym = [comb(r + k - 1, k) for k in range(self.N + 1)]
        jet = [len(words(r, k)) for k in range(self.N + 1)]
        rep.add("graded ranks", sym == jet, (sym, jet))
        bad = None
        for w, img in self.images.items():
            lead = img.get((w, 0))
            low = [I for (I, _) in img if len(I) < len(w)]
            if lead is None or lead != word_factorial(w) or low:
                bad = w
        rep.add("associated graded is the identity", bad is None, bad)
        bad = None
        one = self.M.R.one()
        for a in self.monomials:
            for b in self.monomials:
                if len(a) + len(b) > self.N:
                    continue
                lhs = self.jets.product(self.images[a], self.images[b], self.N)
                rhs = self.images[tuple(sorted(a + b))]
                if not _same(lhs, rhs):
                    bad = (a, b)
        rep.add("multiplicative", bad is None, bad)
        return rep


def split_and_identify(M: AlgebroidModel, N: int, splitting: Mapping | None = None) -> JetIdentification:
    if N < 0:
        raise ArgumentError("N must be non-negative")
    return JetIdentification(M, N, splitting)


# -- transported structure on C*L[y] ------------------------------------------

def jet_generator_image(M: AlgebroidModel, j: int, arity: int, alg: GradedAlgebra) -> Element:
    """``D y_j = -sum_m e^m sum_b coeff_{e_j}(e_m e^b) y^b / b!`` up to ``|b| <= arity``."""
    U = TruncatedUL(M, arity + 1, verify=False)
    out = alg.zero()
    for m in range(M.rank):
        em = alg.gen(dual_name(M.frame[m]))
        for k in range(arity + 1):
            for w in words(M.rank, k):
                c = U.word(m, w).get((j,))
                if c is None:
                    continue
                y = alg.one()
                for i in w:
                    y = y * alg.gen(xi_name(M.frame[i]))
                out = out - em * alg.embed(c) * y * Fraction(1, word_factorial(w))
    return out


def jet_algebra(M: AlgebroidModel, N: int) -> GradedAlgebra:
    """``dR_L(J^{<=N})`` as ``C*L[y]`` modulo total weight ``> N``."""
    C = M.ce_algebra()
    gens = [Generator(g.name, g.degree, g.form, 1 if g.degree == 1 else 0) for g in C.gens]
    gens += [Generator(xi_name(l), 0, weight=1) for l in M.frame]

    def images(alg):
        out = {g.name: alg.embed(C.d_image(g.name)) for g in C.gens}
        for j, l in enumerate(M.frame):
            out[xi_name(l)] = jet_generator_image(M, j, N, alg)
        return out

    rels = [r + (0,) * M.rank for r in C.relations]
    return GradedAlgebra(gens, rels, N, images, name=f"dR_L(J^{N}({M.name}))")


def jets_to_algebra(K: DrLComplex, B: GradedAlgebra, v: Mapping) -> Element:
    out = B.zero()
    for (I, _), w in v.items():
        y = B.one()
        for i in I:
            y = y * B.gen(xi_name(K.M.frame[i]))
        out = out + B.embed(w) * y * Fraction(1, word_factorial(I))
    return out


def check_transport(M: AlgebroidModel, N: int, window: int | None = None) -> Report:
    """The jet differential agrees with the derivation on ``C*L[y]`` monomial by monomial."""
    K = DrLComplex(M, N, 1, window)
    B = jet_algebra(M, N)
    rep = Report(f"transport {M.name} N={N}")
    bad = None
    for m in range(min(M.rank, N) + 1):
        for b in K.basis(m):
            x = K.element(b)
            lhs = jets_to_algebra(K, B, K.D(x))
            rhs = B.d(jets_to_algebra(K, B, x))
            if lhs != rhs:
                bad = K._label(b)
                break
        if bad:
            break
    rep.add("transported differential is a derivation", bad is None, bad)
    return rep


class EnhancedCE:
    def __init__(self, M: AlgebroidModel, N: int, L: CurvedLinf, report: Report):
        self.M = M
        self.N = N
        self.L = L
        self.report = report

    def generator_images(self) -> dict[str, Element]:
        C = self.L.A
        alg = C.extend([Generator(xi_name(l), 0, weight=1) for l in self.M.frame],
                       weight_cap=self.N + 1)
        return {xi_name(l): jet_generator_image(self.M, j, self.N + 1, alg)
                for j, l in enumerate(self.M.frame)}


def enh_ce(M: AlgebroidModel, N: int, window: int | None = None, verify: bool = True) -> EnhancedCE:
    """Curved L-infinity algebra on ``C*L (x) L[-1]`` read off the jet differential."""
    if N < 1:
        raise ArgumentError("N must be at least 1")
    A = to_nilcdga(M, window)
    C = A.algebra
    U = TruncatedUL(M, N + 2, verify=False)
    brackets: dict = {}
    for k in range(N + 2):
        for w in words(M.rank, k):
            row = {}
            for j in range(M.rank):
                val = C.zero()
                for m in range(M.rank):
                    c = U.word(m, w).get((j,))
                    if c is not None:
                        val = val + M.dual(m) * C.embed(c)
                if not val.is_zero():
                    row[j] = val
            if row:
                brackets.setdefault(k, {})[w] = row
    L = CurvedLinf(A, M.frame, [1] * M.rank, brackets, name=f"g_X({M.name})")
    rep = Report(f"enhanced CE {M.name} N={N}")
    if verify:
        tr = check_transport(M, N, window)
        rep.checks.extend(tr.checks)
        st = check_structure(L, N, chains=False)
        rep.checks.extend(st.checks)
        if not rep.ok:
            bad = rep.first_failure()
            raise StructureError(bad.name, bad.witness)
    return EnhancedCE(M, N, L, rep)

