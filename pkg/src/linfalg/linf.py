"""Curved L-infinity algebras over a nilpotent cdga, in the shifted convention.

The module ``V`` is free over ``A`` on labels ``b_i`` of degree ``|b_i|``;
brackets act on ``V[1]`` whose basis ``s_i`` has degree ``|b_i| - 1`` and
every ``l_k`` has degree +1.  A bracket table entry ``L[k][I][j]`` is the
coefficient in ``A`` of ``s_j`` in ``l_k(s_I)`` for a sorted multi-index
``I`` (coefficients written on the left).

Classical dg Lie data converts by ``l_1(s x) = s(dx)`` and
``l_2(s x, s y) = (-1)**(|x|+1) s[x, y]``, so that the shifted
Maurer-Cartan equation is ``s(dx + [x, x]/2)`` on degree-one ``x``.

Multilinearity: ``l_k(c_1 s_1, ..., c_k s_k)`` equals
``prod_m (-1)**(|c_m| (1 + sum_{p<m} |s_p|)) * c_1...c_k l_k(s_1, ..., s_k)``.
The differential of ``A`` always acts on coefficients; it is not part of
the tables.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from math import factorial
from typing import Iterable, Mapping, Sequence

from .algebra import AlgebraMap, Element, Generator, GradedAlgebra
from .errors import ArgumentError, StructureError, WindowError
from .graded import GradedMap, GradedModule, cohomology, koszul_sign
from .nilcdga import NilCdga
from . import linalg
from .report import Report

Vec = dict  # index -> Element


def multiplicity_factorial(idx: Sequence[int]) -> int:
    out = 1
    for c in Counter(idx).values():
        out *= factorial(c)
    return out


def parity_parts(c: Element) -> list[tuple[int, Element]]:
    alg = c.alg
    even = {m: v for m, v in c.terms.items() if not alg.mono_parity(m)}
    odd = {m: v for m, v in c.terms.items() if alg.mono_parity(m)}
    out = []
    if even:
        out.append((0, Element(alg, even)))
    if odd:
        out.append((1, Element(alg, odd)))
    return out


def vec_add(x: Vec, y: Vec, scale=1) -> Vec:
    out = dict(x)
    for j, c in y.items():
        v = out[j] + c * scale if j in out else c * scale
        if v.is_zero():
            out.pop(j, None)
        else:
            out[j] = v
    return out


def vec_is_zero(x: Vec) -> bool:
    return all(c.is_zero() for c in x.values())


def vec_clean(x: Vec) -> Vec:
    return {j: c for j, c in x.items() if not c.is_zero()}


def vec_map(x: Vec, f) -> Vec:
    return vec_clean({j: f(c) for j, c in x.items()})


class CurvedLinf:
    """Curved L-infinity algebra; see the module docstring for conventions."""

    def __init__(self, base: NilCdga, labels: Sequence[str], degrees: Sequence[int],
                 brackets: Mapping[int, Mapping] | None = None, name: str = "",
                 check_degrees: bool = True):
        self.base = base
        self.A = base.algebra
        self.module = GradedModule(tuple(labels), tuple(degrees))
        self.labels = self.module.labels
        self.degrees = self.module.degrees
        self.rank = len(self.labels)
        self.sdeg = tuple(d - 1 for d in self.degrees)
        self.name = name
        self.brackets: dict[int, dict[tuple, dict[int, Element]]] = {}
        for k, table in (brackets or {}).items():
            for key, out in table.items():
                idx = tuple(self._index(i) for i in key)
                if len(idx) != k:
                    raise ArgumentError(f"bracket key {key} has arity {len(idx)}, not {k}")
                order = sorted(range(k), key=lambda p: idx[p])
                sidx = tuple(idx[p] for p in order)
                sign = koszul_sign(order, [self.sdeg[i] for i in idx])
                odd_rep = any(sidx[p] == sidx[p + 1] and self.sdeg[sidx[p]] % 2
                              for p in range(k - 1))
                row = self.brackets.setdefault(k, {}).setdefault(sidx, {})
                items = out.items() if isinstance(out, Mapping) else enumerate(out)
                for j, c in items:
                    j = self._index(j)
                    c = self.A.coerce(c)
                    if c.is_zero():
                        continue
                    if odd_rep:
                        raise StructureError("bracket symmetry",
                                             f"l_{k} on repeated odd {self.labels[sidx[0]]}")
                    c = c * sign
                    row[j] = row[j] + c if j in row else c
                    if row[j].is_zero():
                        del row[j]
        for k in list(self.brackets):
            self.brackets[k] = {I: r for I, r in self.brackets[k].items() if r}
            if not self.brackets[k]:
                del self.brackets[k]
        self.kmax = max(self.brackets, default=0)
        self._embedded: dict = {}
        if check_degrees:
            self.check_degrees()

    def _index(self, i) -> int:
        if isinstance(i, int):
            if not 0 <= i < self.rank:
                raise ArgumentError(f"basis index {i} out of range")
            return i
        try:
            return self.labels.index(i)
        except ValueError:
            raise ArgumentError(f"unknown basis label {i!r}") from None

    def __repr__(self):
        return f"CurvedLinf({self.name or '?'}, rank {self.rank}, kmax {self.kmax})"

    def check_degrees(self):
        for k, table in self.brackets.items():
            for I, row in table.items():
                for j, c in row.items():
                    want = sum(self.sdeg[i] for i in I) + 1 - self.sdeg[j]
                    if any(self.A.mono_degree(m) != want for m in c.terms):
                        raise StructureError(
                            "bracket degree",
                            f"l_{k}({', '.join(self.labels[i] for i in I)}) -> {self.labels[j]}")

    # -- coefficient access in other algebras --------------------------
    def table(self, k: int, alg: GradedAlgebra | None = None) -> dict:
        if alg is None or alg.same_space(self.A):
            return self.brackets.get(k, {})
        key = (k, alg.key)
        if key not in self._embedded:
            self._embedded[key] = {I: {j: alg.embed(c) for j, c in row.items()}
                                   for I, row in self.brackets.get(k, {}).items()}
        return self._embedded[key]

    def curvature(self, alg: GradedAlgebra | None = None) -> Vec:
        return dict(self.table(0, alg).get((), {}))

    # -- evaluation -------------------------------------------------------
    def bracket(self, k: int, xs: Sequence[Vec], alg: GradedAlgebra | None = None,
                op_degree: int = 1, tables=None) -> Vec:
        """``l_k(x_1, ..., x_k)`` for vectors with coefficients in ``alg``."""
        if len(xs) != k:
            raise ArgumentError("wrong number of arguments")
        alg = alg or self.A
        table = tables if tables is not None else self.table(k, alg)
        if k == 0:
            return dict(table.get((), {}))
        if not table:
            return {}
        out: Vec = {}
        expanded = []
        for x in xs:
            terms = []
            for i, c in x.items():
                for p, part in parity_parts(alg.coerce(c)):
                    terms.append((i, p, part))
            expanded.append(terms)
        for choice in product(*expanded):
            idx = [t[0] for t in choice]
            order = sorted(range(k), key=lambda p: idx[p])
            sidx = tuple(idx[p] for p in order)
            row = table.get(sidx)
            if not row:
                continue
            odd = 0
            run = 0
            for i, p, _ in choice:
                if p and (op_degree + run) % 2:
                    odd ^= 1
                run += self.sdeg[i]
            sign = (-1 if odd else 1) * koszul_sign(order, [self.sdeg[i] for i in idx])
            coeff = alg.one()
            for _, _, part in choice:
                coeff = coeff * part
                if coeff.is_zero():
                    break
            if coeff.is_zero():
                continue
            for j, L in row.items():
                v = coeff * L * sign
                if v.terms:
                    out = vec_add(out, {j: v})
        return out

    def power_term(self, k: int, alpha: Vec, alg: GradedAlgebra | None = None,
                   op_degree: int = 1, tables=None) -> Vec:
        """``l_k(alpha, ..., alpha) / k!`` for ``alpha`` of total degree 0."""
        alg = alg or self.A
        table = tables if tables is not None else self.table(k, alg)
        if k == 0:
            return dict(table.get((), {}))
        out: Vec = {}
        support = sorted(i for i, c in alpha.items() if not alg.coerce(c).is_zero())
        for I in combinations_with_replacement(support, k):
            row = table.get(I)
            if not row:
                continue
            odd = 0
            run = 0
            coeff = alg.one()
            for i in I:
                c = alg.coerce(alpha[i])
                if c.parity() and (op_degree + run) % 2:
                    odd ^= 1
                run += self.sdeg[i]
                coeff = coeff * c
                if coeff.is_zero():
                    break
            if coeff.is_zero():
                continue
            scale = Fraction(-1 if odd else 1, multiplicity_factorial(I))
            for j, L in row.items():
                v = coeff * L * scale
                if v.terms:
                    out = vec_add(out, {j: v})
        return out

    def nonlinear_part(self, alpha: Vec, alg: GradedAlgebra | None = None,
                       max_arity: int | None = None) -> Vec:
        """``l_0 + sum_k l_k(alpha^k)/k!`` without the coefficient differential."""
        alg = alg or self.A
        top = self.kmax if max_arity is None else min(self.kmax, max_arity)
        out: Vec = {}
        for k in range(top + 1):
            out = vec_add(out, self.power_term(k, alpha, alg))
        return out

    def differential_part(self, alpha: Vec, alg: GradedAlgebra | None = None) -> Vec:
        alg = alg or self.A
        return vec_map(alpha, lambda c: alg.d(alg.coerce(c)))

    def ell1(self, x: Vec, alg: GradedAlgebra | None = None) -> Vec:
        """``l~_1 = l_1 + d_A`` on vectors."""
        alg = alg or self.A
        return vec_add(self.bracket(1, [x], alg), self.differential_part(x, alg))

    def vec_degree(self, x: Vec, alg: GradedAlgebra | None = None) -> set[int]:
        alg = alg or self.A
        return {alg.mono_degree(m) + self.sdeg[i]
                for i, c in x.items() for m in alg.coerce(c).terms}

    def vec_str(self, x: Vec) -> str:
        parts = [f"({c})*{self.labels[i]}" for i, c in sorted(x.items()) if not c.is_zero()]
        return " + ".join(parts) if parts else "0"

    # -- derived objects --------------------------------------------------
    def with_brackets(self, brackets, name: str | None = None) -> "CurvedLinf":
        raw = {k: {I: dict(row) for I, row in t.items()} for k, t in self.brackets.items()}
        for k, t in brackets.items():
            raw[k] = t
        return CurvedLinf(self.base, self.labels, self.degrees, raw,
                          name if name is not None else self.name)

    def mutate(self, k: int, key: Sequence, target, delta) -> "CurvedLinf":
        """Copy with ``delta`` added to one table entry (used by mutation tests)."""
        raw = {kk: {I: dict(row) for I, row in t.items()} for kk, t in self.brackets.items()}
        idx = tuple(sorted(self._index(i) for i in key))
        j = self._index(target)
        row = raw.setdefault(k, {}).setdefault(idx, {})
        row[j] = row.get(j, self.A.zero()) + self.A.coerce(delta)
        return CurvedLinf(self.base, self.labels, self.degrees, raw, self.name + "*")

    def is_curved(self) -> bool:
        return bool(self.brackets.get(0))


# -- Chevalley-Eilenberg complexes ---------------------------------------

def xi_name(label: str) -> str:
    return "xi_" + label


class CEComplex:
    """Weight-truncated Chevalley-Eilenberg complex.

    ``direction`` is ``"cochains"`` (the algebra ``A[xi]`` with ``xi^j`` dual
    to ``s_j``) or ``"chains"`` (``A (x) Sym(V[1])`` with the coderivation).
    """

    def __init__(self, L: CurvedLinf, weight_cap: int, direction: str):
        if weight_cap < 0:
            raise ArgumentError("weight cap must be non-negative")
        if direction not in ("cochains", "chains"):
            raise ArgumentError(direction)
        self.L = L
        self.weight_cap = weight_cap
        self.direction = direction
        self.algebra: GradedAlgebra | None = None
        if direction == "cochains":
            self.algebra = _cochain_algebra(L, weight_cap)

    # chain side ----------------------------------------------------------
    def chain_basis(self) -> list[tuple[int, ...]]:
        L = self.L
        out = []
        for w in range(self.weight_cap + 1):
            for I in combinations_with_replacement(range(L.rank), w):
                if any(I[p] == I[p + 1] and L.sdeg[I[p]] % 2 for p in range(w - 1)):
                    continue
                out.append(I)
        return out

    def chain_d(self, x: Mapping[tuple, Element]) -> dict:
        return chain_differential(self.L, x)

    # matrices over Q -------------------------------------------------------
    def q_basis(self, window: int | None = None) -> list:
        L = self.L
        if self.direction == "cochains":
            return self.algebra.basis(window=window)
        amons = L.A.basis(window=window)
        return [(a, I) for I in self.chain_basis() for a in amons]

    def degree_of(self, b) -> int:
        L = self.L
        if self.direction == "cochains":
            return self.algebra.mono_degree(b)
        a, I = b
        return L.A.mono_degree(a) + sum(L.sdeg[i] for i in I)

    def apply(self, b) -> dict:
        """Differential of a Q-basis element, as a dict over Q-basis keys."""
        L = self.L
        if self.direction == "cochains":
            alg = self.algebra
            return alg.d(alg.monomial(b)).terms
        a, I = b
        img = chain_differential(L, {I: L.A.monomial(a)})
        out = {}
        for J, c in img.items():
            for m, v in c.terms.items():
                out[(m, J)] = v
        return out

    def matrices(self, window: int | None = None) -> list[GradedMap]:
        """Differential as consecutive GradedMaps (requires zero curvature).

        The first map starts one degree below the lowest nonzero degree.
        """
        if self.L.is_curved():
            raise StructureError("weight truncation is not a subcomplex for curved algebras",
                                 self.L.name)
        basis = self.q_basis(window)
        by_deg: dict[int, list] = {}
        for b in basis:
            by_deg.setdefault(self.degree_of(b), []).append(b)
        lo, hi = min(by_deg), max(by_deg)
        mods = {}
        for dgr in range(lo - 1, hi + 2):
            items = by_deg.get(dgr, [])
            mods[dgr] = (items, GradedModule(tuple(_label(b) for b in items),
                                             (dgr,) * len(items)))
        maps = []
        for dgr in range(lo - 1, hi + 1):
            src, smod = mods[dgr]
            tgt, tmod = mods[dgr + 1]
            pos = {b: r for r, b in enumerate(tgt)}
            m = linalg.zeros(len(tgt), len(src))
            for c, b in enumerate(src):
                for k, v in self.apply(b).items():
                    if k not in pos:
                        raise WindowError(f"differential leaves the window at {_label(b)}")
                    m[pos[k]][c] = v
            maps.append(GradedMap(smod, tmod, 1, m))
        self._start = lo - 1
        return maps

    def cohomology(self, window: int | None = None) -> dict[int, int]:
        """Nonzero cohomology dimensions by degree."""
        maps = self.matrices(window)
        groups = cohomology(maps, self._start)
        return {g.degree: g.dimension for g in groups if g.dimension}


def _label(b) -> str:
    return str(b)


def _cochain_algebra(L: CurvedLinf, cap: int) -> GradedAlgebra:
    new = [Generator(xi_name(lab), 1 - deg, weight=1) for lab, deg in zip(L.labels, L.degrees)]

    def images(alg):
        alpha = {i: alg.gen(xi_name(lab)) for i, lab in enumerate(L.labels)}
        D = L.nonlinear_part(alpha, alg)
        return {xi_name(L.labels[j]): -c for j, c in D.items()}

    return L.A.extend(new, differential=images, weight_cap=cap, name=f"C*({L.name})")


def ce_cochains(L: CurvedLinf, weight_cap: int) -> CEComplex:
    return CEComplex(L, weight_cap, "cochains")


def ce_chains(L: CurvedLinf, weight_cap: int) -> CEComplex:
    return CEComplex(L, weight_cap, "chains")


def _sort_sym(L: CurvedLinf, seq: Sequence[int]) -> tuple[int, tuple] | None:
    order = sorted(range(len(seq)), key=lambda p: seq[p])
    out = tuple(seq[p] for p in order)
    if any(out[p] == out[p + 1] and L.sdeg[out[p]] % 2 for p in range(len(out) - 1)):
        return None
    return koszul_sign(order, [L.sdeg[q] for q in seq]), out


def chain_monomial_d(L: CurvedLinf, I: tuple) -> dict:
    """Coderivation on ``s_I`` (coefficient 1)."""
    cache = L.__dict__.setdefault("_chain_cache", {})
    if I in cache:
        return cache[I]
    n = len(I)
    out: dict = {}
    degs = [L.sdeg[i] for i in I]
    for k in range(0, min(n, L.kmax) + 1):
        table = L.brackets.get(k)
        if not table:
            continue
        for S in combinations(range(n), k):
            key = tuple(I[p] for p in S)
            row = table.get(key)
            if not row:
                continue
            rest = [I[p] for p in range(n) if p not in S]
            eps = koszul_sign(list(S) + [p for p in range(n) if p not in S], degs)
            for j, c in row.items():
                srt = _sort_sym(L, [j] + rest)
                if srt is None:
                    continue
                s2, J = srt
                v = c * (eps * s2)
                out[J] = out[J] + v if J in out else v
    out = {J: c for J, c in out.items() if not c.is_zero()}
    cache[I] = out
    return out


def chain_differential(L: CurvedLinf, x: Mapping[tuple, Element]) -> dict:
    A = L.A
    out: dict = {}

    def acc(J, v):
        if v.is_zero():
            return
        out[J] = out[J] + v if J in out else v

    for I, c in x.items():
        c = A.coerce(c)
        acc(I, A.d(c))
        img = chain_monomial_d(L, I)
        if not img:
            continue
        for p, part in parity_parts(c):
            for J, v in img.items():
                acc(J, part * v * (-1 if p else 1))
    return {J: c for J, c in out.items() if not c.is_zero()}


# -- structure checks --------------------------------------------------------

def check_structure(L: CurvedLinf, weight_cap: int, chains: bool = True) -> Report:
    """Generalized Jacobi identities up to ``weight_cap`` (cochain and chain side)."""
    rep = Report(f"L-infinity structure {L.name}")
    C = _cochain_algebra(L, weight_cap + 1)
    bad = None
    for lab in L.labels:
        dd = C.d(C.d(C.gen(xi_name(lab))))
        for w in range(weight_cap + 1):
            part = dd.weight_part(w)
            if not part.is_zero():
                if bad is None or w < bad[0]:
                    bad = (w, lab, str(part))
                break
    for g in L.A.gens:
        if not L.A.d(L.A.d(L.A.gen(g.name))).is_zero():
            bad = bad or (0, g.name, "d_A^2")
    rep.add("cochain d^2 = 0", bad is None,
            None if bad is None else f"weight {bad[0]} at {xi_name(bad[1])}: {bad[2]}")
    if chains:
        bad = None
        E = CEComplex(L, weight_cap, "chains")
        for I in E.chain_basis():
            dd = chain_differential(L, chain_monomial_d(L, I))
            if dd:
                bad = (len(I), I, dd)
                break
        rep.add("chain d^2 = 0", bad is None,
                None if bad is None else
                f"weight {bad[0]} on {'*'.join(L.labels[i] for i in bad[1]) or '1'}")
    # curvature in I.V and the reduction condition
    bad = next((L.labels[j] for j, c in L.curvature().items() if not L.base.in_ideal(c)), None)
    rep.add("curvature in I.V", bad is None, bad)
    return rep


def coderivation(L: CurvedLinf, weight_cap: int, window: int | None = None):
    """Q-basis and matrix of the coderivation on ``A (x) Sym^{<= cap}(V[1])``.

    Columns index the basis; components landing above the cap (curvature
    raising the weight) are dropped.
    """
    E = CEComplex(L, weight_cap, "chains")
    basis = E.q_basis(window)
    pos = {b: i for i, b in enumerate(basis)}
    m = linalg.zeros(len(basis), len(basis))
    for c, b in enumerate(basis):
        for k, v in E.apply(b).items():
            if k in pos:
                m[pos[k]][c] = v
    return basis, m


# -- morphisms ---------------------------------------------------------------

class LinfMorphism:
    """Taylor components ``phi_k: Sym^k(V[1]) -> W[1]`` of degree 0, ``k >= 1``."""

    def __init__(self, source: CurvedLinf, target: CurvedLinf,
                 components: Mapping[int, Mapping], name: str = ""):
        if not source.A.same_space(target.A):
            raise ArgumentError("source and target have different bases")
        self.source = source
        self.target = target
        self.name = name
        self.components: dict[int, dict[tuple, dict[int, Element]]] = {}
        for k, table in components.items():
            if k < 1:
                raise ArgumentError("Taylor components start at arity 1")
            for key, out in table.items():
                idx = tuple(source._index(i) for i in key)
                order = sorted(range(k), key=lambda p: idx[p])
                sidx = tuple(idx[p] for p in order)
                sign = koszul_sign(order, [source.sdeg[i] for i in idx])
                row = self.components.setdefault(k, {}).setdefault(sidx, {})
                items = out.items() if isinstance(out, Mapping) else enumerate(out)
                for j, c in items:
                    j = target._index(j)
                    c = source.A.coerce(c)
                    if c.is_zero():
                        continue
                    want = sum(source.sdeg[i] for i in sidx) - target.sdeg[j]
                    if any(source.A.mono_degree(m) != want for m in c.terms):
                        raise StructureError("morphism degree", (k, key, target.labels[j]))
                    c = c * sign
                    row[j] = row[j] + c if j in row else c
        self.kmax = max(self.components, default=0)

    def table(self, k: int, alg: GradedAlgebra) -> dict:
        raw = self.components.get(k, {})
        if alg.same_space(self.source.A):
            return raw
        return {I: {j: alg.embed(c) for j, c in row.items()} for I, row in raw.items()}

    def push(self, alpha: Vec, alg: GradedAlgebra | None = None) -> Vec:
        """``sum_k phi_k(alpha^k)/k!`` for ``alpha`` of total degree 0."""
        alg = alg or self.source.A
        out: Vec = {}
        for k in range(1, self.kmax + 1):
            out = vec_add(out, self.source.power_term(k, alpha, alg, op_degree=0,
                                                      tables=self.table(k, alg)))
        return out

    def linear(self, x: Vec, alg: GradedAlgebra | None = None) -> Vec:
        alg = alg or self.source.A
        return self.source.bracket(1, [x], alg, op_degree=0, tables=self.table(1, alg))


def identity_morphism(L: CurvedLinf) -> LinfMorphism:
    return LinfMorphism(L, L, {1: {(i,): {i: 1} for i in range(L.rank)}}, "id")


def check_morphism(phi: LinfMorphism, weight_cap: int) -> Report:
    """``phi^* d_W = d_V phi^*`` on cochain generators, weight by weight."""
    V, W = phi.source, phi.target
    rep = Report(f"morphism {phi.name}")
    CV = _cochain_algebra(V, weight_cap + 1)
    CW = _cochain_algebra(W, weight_cap + 1)
    alpha = {i: CV.gen(xi_name(lab)) for i, lab in enumerate(V.labels)}
    image = phi.push(alpha, CV)
    images = {g.name: CV.gen(g.name) for g in V.A.gens}
    for j, lab in enumerate(W.labels):
        images[xi_name(lab)] = image.get(j, CV.zero())
    pull = AlgebraMap(CW, CV, images)
    bad = None
    for lab in W.labels:
        eta = CW.gen(xi_name(lab))
        diff = pull(CW.d(eta)) - CV.d(pull(eta))
        for w in range(weight_cap + 1):
            part = diff.weight_part(w)
            if not part.is_zero():
                if bad is None or w < bad[0]:
                    bad = (w, lab, str(part))
                break
    rep.add("phi commutes with differentials", bad is None,
            None if bad is None else f"weight {bad[0]} at {xi_name(bad[1])}: {bad[2]}")
    return rep


def reduced_linear_complex(L: CurvedLinf, window: int | None = None):
    """``(A/I (x) V, l_1 mod I)`` as GradedMaps, plus the Q-basis used."""
    base = L.base
    qmons = base.quotient_basis(window)
    basis = [(q, i) for i in range(L.rank) for q in qmons]
    return basis, _reduce_linear(L, basis, lambda x: L.bracket(1, [x]))


def _reduce_linear(L: CurvedLinf, basis, f, target: CurvedLinf | None = None,
                   target_basis=None):
    """Matrix (dict form) of ``f`` mod I from ``basis`` to ``target_basis``."""
    target = target or L
    target_basis = target_basis if target_basis is not None else basis
    pos = {b: r for r, b in enumerate(target_basis)}
    cols = []
    for q, i in basis:
        img = f({i: L.A.monomial(q)})
        col = {}
        for j, c in img.items():
            for m, v in target.base.reduce_mod_ideal(c).items():
                if (m, j) not in pos:
                    raise WindowError("linear part leaves the window")
                col[pos[(m, j)]] = v
        cols.append(col)
    return cols


def _graded_complex(L: CurvedLinf, basis, cols):
    degs = [L.A.mono_degree(q) + L.degrees[i] for q, i in basis]
    return degs


def _cohomology_data(L: CurvedLinf, basis, cols):
    """Per degree: (kernel basis, image rows) in the coordinates of ``basis``."""
    degs = [L.A.mono_degree(q) + L.degrees[i] for q, i in basis]
    out = {}
    for dgr in sorted(set(degs)):
        idx = [r for r, d in enumerate(degs) if d == dgr]
        nxt = [r for r, d in enumerate(degs) if d == dgr + 1]
        prv = [r for r, d in enumerate(degs) if d == dgr - 1]
        rows = [[cols[c].get(r, Fraction(0)) for c in idx] for r in nxt]
        rows = [r for r in rows if any(r)]
        ker = linalg.nullspace(rows, len(idx)) if rows else \
            [[Fraction(int(a == b)) for b in range(len(idx))] for a in range(len(idx))]
        img = [[cols[c].get(r, Fraction(0)) for r in idx] for c in prv]
        img = [v for v in img if any(v)]
        out[dgr] = (idx, ker, img)
    return out


def is_weak_equivalence(phi: LinfMorphism, window: int | None = None) -> bool:
    """Does ``phi_1`` mod I induce an isomorphism on ``H(l_1 mod I)``?"""
    V, W = phi.source, phi.target
    bV, cV = reduced_linear_complex(V, window)
    bW, cW = reduced_linear_complex(W, window)
    hv = _cohomology_data(V, bV, cV)
    hw = _cohomology_data(W, bW, cW)
    cphi = _reduce_linear(V, bV, lambda x: phi.linear(x), W, bW)
    for dgr in sorted(set(hv) | set(hw)):
        idx_v, ker_v, img_v = hv.get(dgr, ([], [], []))
        idx_w, ker_w, img_w = hw.get(dgr, ([], [], []))
        rv = linalg.rank(img_v) if img_v else 0
        rw = linalg.rank(img_w) if img_w else 0
        dim_v = len(ker_v) - rv
        dim_w = len(ker_w) - rw
        if dim_v != dim_w:
            return False
        if dim_v == 0:
            continue
        pos_w = {r: a for a, r in enumerate(idx_w)}
        images = []
        for k in ker_v:
            v = [Fraction(0)] * len(idx_w)
            for a, coef in enumerate(k):
                if coef:
                    for r, val in cphi[idx_v[a]].items():
                        v[pos_w[r]] += coef * val
            images.append(v)
        # phi maps Z(V) into Z(W); it is an isomorphism on H iff the images of
        # Z(V) together with B(W) span a space of dimension dim H + rank B(W)
        # and B(V) maps into B(W) (automatic for a chain map)
        span = list(img_w) + images
        if (linalg.rank(span) if span else 0) != rw + dim_w:
            return False
    return True


# -- constructions -------------------------------------------------------------

def extend_scalars(n: CurvedLinf, target: NilCdga, name: str = "") -> CurvedLinf:
    """Base change along ``A/I -> A``; ``l_1`` picks up ``d_A`` automatically."""
    src = n.A
    T = target.algebra
    missing = [g.name for g in src.gens if g.name not in T.index]
    if missing:
        raise ArgumentError(f"target base lacks generators {missing}")
    for g in T.gens:
        if g.name not in src.index and not target.in_ideal(T.gen(g.name)):
            raise ArgumentError(f"generator {g.name} is not in the ideal of the target base")
    raw = {k: {I: {j: T.embed(c) for j, c in row.items()} for I, row in t.items()}
           for k, t in n.brackets.items()}
    return CurvedLinf(target, n.labels, n.degrees, raw, name or f"{n.name}~")


def from_dgla(base: NilCdga, labels: Sequence[str], degrees: Sequence[int],
              differential: Mapping | None = None, bracket: Mapping | None = None,
              curvature: Mapping | None = None, name: str = "") -> CurvedLinf:
    """Shifted form of classical dg Lie data.

    ``differential[x]`` maps label to ``{label: coeff}``, ``bracket[(x, y)]``
    likewise (antisymmetry is implied), ``curvature`` gives a degree-2 element.
    """
    deg = dict(zip(labels, degrees))
    br: dict = {0: {}, 1: {}, 2: {}}
    if curvature:
        br[0][()] = dict(curvature)
    for x, img in (differential or {}).items():
        br[1][(x,)] = dict(img)
    for (x, y), img in (bracket or {}).items():
        sign = -1 if (deg[x] + 1) % 2 else 1
        br[2][(x, y)] = {z: base.algebra.coerce(c) * sign for z, c in img.items()}
    return CurvedLinf(base, labels, degrees, {k: v for k, v in br.items() if v}, name)


def _dual_pairing(L: CurvedLinf, K: tuple) -> int:
    """``<xi^K, s_K>``: multiplicity factorial times the reversal sign of the xi's."""
    degs = [L.sdeg[i] % 2 for i in K]
    odd = sum(degs[p] * degs[q] for p in range(len(K)) for q in range(p + 1, len(K))) % 2
    return multiplicity_factorial(K) * (-1 if odd else 1)


def check_duality(L: CurvedLinf, weight_cap: int) -> Report:
    """Cochain differential versus the signed transpose of the coderivation.

    With ``<xi^K, s_K> = K! * (reversal sign)`` the identity checked is
    ``(d f)(x) = (-1)**|f| f(d x)`` for all basis ``f`` and ``x`` of weight
    at most ``weight_cap``.  Only defined over the ground field.
    """
    if L.A.n:
        raise ArgumentError("duality check needs the ground field as base")
    rep = Report(f"duality {L.name}")
    co = _cochain_algebra(L, weight_cap)
    chains = CEComplex(L, weight_cap, "chains").chain_basis()
    def to_multi(m):
        return tuple(i for i, e in enumerate(m) for _ in range(e))
    chain_imgs = {J: {K: c.constant() for K, c in chain_monomial_d(L, J).items()}
                  for J in chains}
    for m in co.basis():
        K = to_multi(m)
        sign = -1 if co.mono_degree(m) % 2 else 1
        dco = {to_multi(k): c for k, c in co.d(co.monomial(m)).terms.items()}
        for J in chains:
            lhs = dco.get(J, 0) * _dual_pairing(L, J)
            rhs = chain_imgs[J].get(K, 0) * _dual_pairing(L, K) * sign
            if lhs != rhs:
                rep.add("cochain d = signed transpose of chain d", False,
                        f"{co.mono_str(m)} against {'*'.join(L.labels[i] for i in J) or '1'}")
                return rep
    rep.add("cochain d = signed transpose of chain d", True)
    return rep
