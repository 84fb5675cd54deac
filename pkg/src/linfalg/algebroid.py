"""Lie algebroids over polynomial rings and their Chevalley-Eilenberg algebras.

A frame ``e_1..e_r`` with anchor ``rho(e_i) = sum_v a_i^v d/dx_v`` and
structure functions ``[e_i, e_j] = sum_k c_ij^k e_k``.  The cochain algebra
``C*(L) = R (x) Lambda(e^1..e^r)`` carries the unnormalized differential

    d f = sum_i rho(e_i)(f) e^i,        d e^k = -sum_{i<j} c_ij^k e^i e^j.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import linalg
from .algebra import AlgebraMap, Derivation, Element, Generator, GradedAlgebra
from .errors import ArgumentError, StructureError, WindowError
from .graded import CohomologyGroup, GradedMap, GradedModule, cohomology
from .nilcdga import NilCdga
from .report import Report


def dual_name(label: str) -> str:
    return label + "_dual"


def polynomial_ring(variables: Sequence[str], name: str = "") -> GradedAlgebra:
    return GradedAlgebra([Generator(v, 0) for v in variables], name=name or "R")


class AlgebroidModel:
    def __init__(self, R: GradedAlgebra, frame: Sequence[str], anchor: Mapping | None = None,
                 brackets: Mapping | None = None, name: str = ""):
        if any(g.degree != 0 or g.form != 0 for g in R.gens):
            raise ArgumentError("the base ring must sit in degree 0")
        self.R = R
        self.frame = tuple(frame)
        if len(set(self.frame)) != len(self.frame):
            raise ArgumentError("frame labels must be distinct")
        self.rank = len(self.frame)
        self.name = name
        self.variables = tuple(g.name for g in R.gens)
        self.anchor: dict[int, dict[str, Element]] = {}
        for lab, field in (anchor or {}).items():
            i = self.index(lab)
            row = {}
            for v, c in field.items():
                if v not in R.index:
                    raise ArgumentError(f"anchor uses unknown variable {v}")
                c = R.coerce(c)
                if not c.is_zero():
                    row[v] = c
            self.anchor[i] = row
        # structure functions, stored for every ordered pair given
        self.raw_brackets: dict[tuple[int, int], dict[int, Element]] = {}
        for (a, b), out in (brackets or {}).items():
            i, j = self.index(a), self.index(b)
            row = {}
            for k, c in out.items():
                c = R.coerce(c)
                if not c.is_zero():
                    row[self.index(k)] = c
            self.raw_brackets[(i, j)] = row
        self._partials = {v: Derivation(R, {w: int(w == v) for w in self.variables}, 0)
                          for v in self.variables}
        self._ce = None

    def index(self, label) -> int:
        if isinstance(label, int):
            return label
        try:
            return self.frame.index(label)
        except ValueError:
            raise ArgumentError(f"unknown frame element {label!r}") from None

    def __repr__(self):
        return f"AlgebroidModel({self.name or '?'}, rank {self.rank})"

    def c(self, i: int, j: int) -> dict[int, Element]:
        """``[e_i, e_j]`` (antisymmetry fills in missing orders)."""
        if (i, j) in self.raw_brackets:
            return self.raw_brackets[(i, j)]
        if (j, i) in self.raw_brackets:
            return {k: -v for k, v in self.raw_brackets[(j, i)].items()}
        return {}

    def rho(self, i: int, f) -> Element:
        """``rho(e_i)(f)``."""
        f = self.R.coerce(f)
        out = self.R.zero()
        for v, a in self.anchor.get(i, {}).items():
            out = out + a * self._partials[v](f)
        return out

    def is_point(self) -> bool:
        return not any(self.anchor.values())

    # sections are dicts frame index -> R element
    def section_bracket(self, X: Mapping[int, Element], Y: Mapping[int, Element]) -> dict:
        out: dict[int, Element] = {}

        def acc(k, v):
            if not v.is_zero():
                out[k] = out[k] + v if k in out else v

        for i, f in X.items():
            for j, g in Y.items():
                for k, c in self.c(i, j).items():
                    acc(k, f * g * c)
                acc(j, f * self.rho(i, g))
                acc(i, -(g * self.rho(j, f)))
        return {k: v for k, v in out.items() if not v.is_zero()}

    def anchor_of_section(self, X: Mapping[int, Element], f) -> Element:
        out = self.R.zero()
        for i, g in X.items():
            out = out + g * self.rho(i, f)
        return out

    # -- Chevalley-Eilenberg algebra ------------------------------------------
    def ce_algebra(self) -> GradedAlgebra:
        if self._ce is None:
            gens = list(self.R.gens) + [Generator(dual_name(l), 1) for l in self.frame]

            def images(alg):
                out = {}
                for v in self.variables:
                    img = alg.zero()
                    for i, l in enumerate(self.frame):
                        img = img + alg.embed(self.rho(i, self.R.gen(v))) * alg.gen(dual_name(l))
                    out[v] = img
                for k, l in enumerate(self.frame):
                    img = alg.zero()
                    for i, j in combinations(range(self.rank), 2):
                        c = self.c(i, j).get(k)
                        if c is not None:
                            img = img - alg.embed(c) * alg.gen(dual_name(self.frame[i])) \
                                * alg.gen(dual_name(self.frame[j]))
                    out[dual_name(l)] = img
                return out

            self._ce = GradedAlgebra(gens, self.R.relations and
                                     [r + (0,) * self.rank for r in self.R.relations],
                                     None, images, name=f"C*({self.name})")
        return self._ce

    def dual(self, label) -> Element:
        return self.ce_algebra().gen(dual_name(self.frame[self.index(label)]))


def check_algebroid(M: AlgebroidModel, degree_cap: int = 2, raise_on_failure: bool = False) -> Report:
    rep = Report(f"algebroid {M.name}")
    R = M.R
    r = M.rank
    # antisymmetry
    bad = None
    for (i, j), row in M.raw_brackets.items():
        if i == j and row:
            bad = (M.frame[i], M.frame[j])
        if (j, i) in M.raw_brackets and i < j:
            other = M.raw_brackets[(j, i)]
            keys = set(row) | set(other)
            if any(row.get(k, R.zero()) + other.get(k, R.zero()) != 0 for k in keys):
                bad = (M.frame[i], M.frame[j])
    rep.add("antisymmetry", bad is None, bad)
    # anchor is a Lie algebra map on the frame
    bad = None
    for i, j in combinations(range(r), 2):
        for v in M.variables:
            x = R.gen(v)
            lhs = M.rho(i, M.rho(j, x)) - M.rho(j, M.rho(i, x))
            rhs = R.zero()
            for k, c in M.c(i, j).items():
                rhs = rhs + c * M.rho(k, x)
            if lhs != rhs:
                bad = (M.frame[i], M.frame[j], v)
    rep.add("anchor compatibility", bad is None, bad)
    # Jacobi on frame and on monomial multiples
    mons = [R.monomial(m) for m in R.basis(window=degree_cap)] if R.n else [R.one()]
    bad = None
    triples = list(combinations(range(r), 3)) if r >= 3 else []
    for i, j, k in triples:
        for f in mons:
            X, Y, Z = {i: f}, {j: R.one()}, {k: R.one()}
            tot = {}
            for (a, b, c) in ((X, Y, Z), (Y, Z, X), (Z, X, Y)):
                t = M.section_bracket(M.section_bracket(a, b), c)
                for q, v in t.items():
                    tot[q] = tot[q] + v if q in tot else v
            if any(not v.is_zero() for v in tot.values()):
                bad = (M.frame[i], M.frame[j], M.frame[k], str(f))
                break
        if bad:
            break
    rep.add("Jacobi", bad is None, bad)
    # Leibniz on f e_j
    bad = None
    for i in range(r):
        for j in range(r):
            for f in mons:
                lhs = M.section_bracket({i: R.one()}, {j: f})
                rhs = {k: f * c for k, c in M.c(i, j).items()}
                rhs[j] = rhs.get(j, R.zero()) + M.rho(i, f)
                keys = set(lhs) | set(rhs)
                if any(lhs.get(k, R.zero()) != rhs.get(k, R.zero()) for k in keys):
                    bad = (M.frame[i], M.frame[j], str(f))
    rep.add("Leibniz", bad is None, bad)
    if raise_on_failure:
        rep.raise_if_failed()
    return rep


def d_L(M: AlgebroidModel, alpha) -> Element:
    C = M.ce_algebra()
    return C.d(C.coerce(alpha))


def evaluate_form(M: AlgebroidModel, alpha: Element, args: Sequence[int]) -> Element:
    """``alpha(e_{i_1}, ..., e_{i_m})`` with ``e^I(e_I) = 1`` for increasing I."""
    C = M.ce_algebra()
    R = M.R
    nR = R.n
    m = len(args)
    if len(set(args)) < m:
        return R.zero()
    order = sorted(range(m), key=lambda p: args[p])
    from .graded import permutation_sign
    sign = permutation_sign(order)
    target = [0] * M.rank
    for a in args:
        target[a] = 1
    out = {}
    for mono, c in alpha.terms.items():
        if list(mono[nR:]) == target:
            out[mono[:nR]] = out.get(mono[:nR], 0) + c * sign
    return Element(R, out)


def d_L_formula(M: AlgebroidModel, alpha: Element, m: int) -> Element:
    """Independent route: the evaluation formula for ``d_L`` on an m-form.

    ``(d a)(x_0..x_m) = sum_k (-1)^k rho(x_k) a(..^x_k..)
    + sum_{k<l} (-1)^(k+l) a([x_k, x_l], ..^x_k..^x_l..)``.
    """
    C = M.ce_algebra()
    R = M.R
    out = C.zero()
    for I in combinations(range(M.rank), m + 1):
        val = R.zero()
        for k in range(m + 1):
            rest = I[:k] + I[k + 1:]
            val = val + M.rho(I[k], evaluate_form(M, alpha, rest)) * (-1) ** k
        for k, l in combinations(range(m + 1), 2):
            rest = [I[p] for p in range(m + 1) if p not in (k, l)]
            for q, c in M.c(I[k], I[l]).items():
                val = val + c * evaluate_form(M, alpha, [q] + rest) * (-1) ** (k + l)
        if val.is_zero():
            continue
        mono = C.one()
        for i in I:
            mono = mono * M.dual(i)
        out = out + C.embed(val) * mono
    return out


def form_basis(M: AlgebroidModel, m: int, window: int | None) -> list:
    C = M.ce_algebra()
    if M.R.n and window is None:
        raise WindowError("a polynomial degree window is required")
    return C.basis(window=window if M.R.n else None, degree=m)


def ce_maps(M: AlgebroidModel, window: int | None = None) -> list[GradedMap]:
    """Matrices of ``d_L`` on the window, degree 0 through rank."""
    C = M.ce_algebra()
    bases = [form_basis(M, m, window) for m in range(M.rank + 1)]
    mods = [GradedModule(tuple(C.mono_str(b) for b in B), (m,) * len(B))
            for m, B in enumerate(bases)]
    maps = []
    for m in range(M.rank):
        pos = {b: r for r, b in enumerate(bases[m + 1])}
        mat = linalg.zeros(len(bases[m + 1]), len(bases[m]))
        for c, b in enumerate(bases[m]):
            for k, v in C.d(C.monomial(b)).terms.items():
                if k not in pos:
                    raise WindowError(f"d_L of {C.mono_str(b)} leaves the window {window}")
                mat[pos[k]][c] = v
        maps.append(GradedMap(mods[m], mods[m + 1], 1, mat))
    return maps


def cohomology_L(M: AlgebroidModel, window: int | None = None) -> list[CohomologyGroup]:
    if M.rank == 0:
        return [CohomologyGroup(0, len(form_basis(M, 0, window)), ())]
    return cohomology(ce_maps(M, window))


def de_rham_model(R: GradedAlgebra, name: str = "") -> GradedAlgebra:
    """``R (x) Lambda(dx)`` with ``d x = dx`` (forms in cohomological degree)."""
    gens = list(R.gens) + [Generator("d_" + g.name, 1) for g in R.gens]
    rels = [r + (0,) * R.n for r in R.relations]
    return GradedAlgebra(gens, rels, None, lambda alg: {g.name: alg.gen("d_" + g.name)
                                                         for g in R.gens},
                         name=name or f"Omega({R.name})")


def anchor_pullback_map(M: AlgebroidModel) -> AlgebraMap:
    Om = de_rham_model(M.R)
    C = M.ce_algebra()
    images = {v: C.gen(v) for v in M.variables}
    for v in M.variables:
        images["d_" + v] = C.d(C.gen(v))
    return AlgebraMap(Om, C, images)


def anchor_pullback(M: AlgebroidModel, omega) -> Element:
    phi = anchor_pullback_map(M)
    return phi(phi.source.coerce(omega))


def check_anchor_pullback(M: AlgebroidModel, window: int = 2) -> Report:
    phi = anchor_pullback_map(M)
    Om = phi.source
    C = phi.target
    rep = Report(f"anchor pullback {M.name}")
    bad = None
    for m in Om.basis(window=window):
        x = Om.monomial(m)
        if phi(Om.d(x)) != C.d(phi(x)):
            bad = Om.mono_str(m)
            break
    rep.add("cochain map", bad is None, bad)
    return rep


def to_nilcdga(M: AlgebroidModel, window: int | None = None) -> NilCdga:
    C = M.ce_algebra()
    return NilCdga(C, [M.dual(l) for l in M.frame], M.rank,
                   window=window if M.R.n else None, name=f"C*({M.name})")


# -- standard examples ------------------------------------------------------

def lie_algebra(frame: Sequence[str], brackets: Mapping, name: str = "") -> AlgebroidModel:
    return AlgebroidModel(polynomial_ring([]), frame, {}, brackets, name)


def tangent_algebroid(variables: Sequence[str], name: str = "") -> AlgebroidModel:
    R = polynomial_ring(variables)
    frame = ["D" + v for v in variables]
    anchor = {f: {v: 1} for f, v in zip(frame, variables)}
    return AlgebroidModel(R, frame, anchor, {}, name or f"T{''.join(variables)}")
