"""Maurer-Cartan elements, the filtration tower, twisting and gauge paths.

In the shifted convention a Maurer-Cartan element is a vector ``alpha`` of
total degree 0 (degree 1 before the shift) and the defect is

    D(alpha) = l_0 + d_A alpha + sum_k l_k(alpha, ..., alpha) / k!

The tower works level by level in the filtration by powers of ``I``; it
requires an ideal generated by monomials so that ``I^k / I^(k+1)`` has a
monomial basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Sequence

from . import linalg
from .algebra import AlgebraMap, Element, Generator, GradedAlgebra
from .errors import ArgumentError, PreconditionError, UnsupportedError
from .graded import GradedMap, GradedModule
from .linf import (CurvedLinf, Vec, _cochain_algebra, chain_differential, vec_add,
                   vec_clean, vec_is_zero, xi_name)
from .report import Report


def _coerce_vec(L: CurvedLinf, alpha, alg: GradedAlgebra | None = None) -> Vec:
    alg = alg or L.A
    if isinstance(alpha, MCElement):
        alpha = alpha.alpha
    out = {}
    for i, c in dict(alpha).items():
        c = alg.coerce(c)
        if not c.is_zero():
            out[L._index(i)] = c
    return out


def _require_degree(L: CurvedLinf, alpha: Vec, degree: int = 0, alg=None):
    degs = L.vec_degree(alpha, alg)
    if degs and degs != {degree}:
        raise ArgumentError(f"expected shifted degree {degree}, got {sorted(degs)}")


def mc_defect(L: CurvedLinf, alpha, alg: GradedAlgebra | None = None) -> Vec:
    """``l_0 + d_A alpha + sum_k l_k(alpha^k)/k!`` (shifted degree 1)."""
    alg = alg or L.A
    alpha = _coerce_vec(L, alpha, alg)
    _require_degree(L, alpha, 0, alg)
    return vec_add(L.differential_part(alpha, alg), L.nonlinear_part(alpha, alg))


def is_mc(L: CurvedLinf, alpha) -> bool:
    return vec_is_zero(mc_defect(L, alpha))


def mc_defect_cochain(L: CurvedLinf, alpha) -> Vec:
    """Defect through the cochain algebra: ``d_A(alpha_j) - phi_alpha(d xi^j)``."""
    alpha = _coerce_vec(L, alpha)
    _require_degree(L, alpha, 0)
    C = _cochain_algebra(L, L.kmax)
    images = {g.name: L.A.gen(g.name) for g in L.A.gens}
    for i, lab in enumerate(L.labels):
        images[xi_name(lab)] = alpha.get(i, L.A.zero())
    phi = AlgebraMap(C, L.A, images)
    out = {}
    for j, lab in enumerate(L.labels):
        v = L.A.d(alpha.get(j, L.A.zero())) - phi(C.d(C.gen(xi_name(lab))))
        if not v.is_zero():
            out[j] = v
    return out


def _sym_mul(L: CurvedLinf, x: dict, y: dict) -> dict:
    """Product in ``A (x) Sym(V[1])`` (coefficients on the left)."""
    out: dict = {}
    for I, a in x.items():
        sI = sum(L.sdeg[i] for i in I)
        for J, b in y.items():
            odd = 0
            if sI % 2:
                odd = b.parity() if len(b.terms) else 0
            seq = list(I) + list(J)
            order = sorted(range(len(seq)), key=lambda p: seq[p])
            K = tuple(seq[p] for p in order)
            if any(K[p] == K[p + 1] and L.sdeg[K[p]] % 2 for p in range(len(K) - 1)):
                continue
            from .graded import koszul_sign
            sign = koszul_sign(order, [L.sdeg[q] for q in seq]) * (-1 if odd else 1)
            v = a * b * sign
            if v.terms:
                out[K] = out[K] + v if K in out else v
    return {K: c for K, c in out.items() if not c.is_zero()}


def mc_defect_coderivation(L: CurvedLinf, alpha, max_weight: int | None = None) -> Vec:
    """Weight-one part of ``d(exp alpha)`` on the chain side."""
    alpha = _coerce_vec(L, alpha)
    _require_degree(L, alpha, 0)
    top = (L.kmax if max_weight is None else max_weight) + 1
    single = {(i,): c for i, c in alpha.items()}
    expo = {(): L.A.one()}
    power = {(): L.A.one()}
    for k in range(1, top + 1):
        power = _sym_mul(L, power, single)
        power = {K: c / k for K, c in power.items()}
        for K, c in power.items():
            expo[K] = expo[K] + c if K in expo else c
    d = chain_differential(L, expo)
    return {K[0]: c for K, c in d.items() if len(K) == 1 and not c.is_zero()}


# -- elements and filtration --------------------------------------------------

def _check_monomial_ideal(L: CurvedLinf):
    if any(len(g.terms) != 1 for g in L.base.ideal):
        raise UnsupportedError("the tower needs an ideal generated by monomials")


def _level_of(L: CurvedLinf, m) -> int:
    cache = L.__dict__.setdefault("_level_cache", {})
    if m not in cache:
        cache[m] = L.base.filtration_level(L.A.monomial(m))
    return cache[m]


def filtration_components(L: CurvedLinf, x: Vec) -> dict[int, Vec]:
    """Split a vector by the ``I``-adic level of its monomials."""
    _check_monomial_ideal(L)
    out: dict[int, dict] = {}
    for i, c in x.items():
        for m, v in c.terms.items():
            k = _level_of(L, m)
            row = out.setdefault(k, {})
            row.setdefault(i, {})[m] = v
    return {k: {i: Element(L.A, t) for i, t in row.items()} for k, row in sorted(out.items())}


@dataclass
class MCElement:
    L: CurvedLinf
    alpha: Vec

    def __post_init__(self):
        self.alpha = _coerce_vec(self.L, self.alpha)
        _require_degree(self.L, self.alpha, 0)

    @property
    def components(self) -> dict[int, Vec]:
        return filtration_components(self.L, self.alpha)

    def in_ideal(self) -> bool:
        return all(self.L.base.in_ideal(c) for c in self.alpha.values())

    def defect(self) -> Vec:
        return mc_defect(self.L, self.alpha)

    def is_mc(self) -> bool:
        return vec_is_zero(self.defect())

    def __str__(self):
        return self.L.vec_str(self.alpha)


@dataclass
class ObstructionReport:
    level: int
    cocycle: Vec
    closed: bool
    class_nonzero: bool
    partial: MCElement | None = None
    note: str = ""

    def __str__(self):
        return f"obstruction at level {self.level}"


@dataclass
class TwistData:
    A1: Vec
    operator: GradedMap
    basis: list = field(default_factory=list)


# -- linear algebra on one filtration level --------------------------------

def _level_basis(L: CurvedLinf, k: int, degree: int, window: int | None = None):
    A = L.A
    if not A.is_finite and window is None:
        window = L.base.window if L.base.window is not None else 0
    out = []
    for m in A.basis(window=window):
        if _level_of(L, m) != k:
            continue
        for i in range(L.rank):
            if A.mono_degree(m) + L.sdeg[i] == degree:
                out.append((m, i))
    return out


def _project(L: CurvedLinf, x: Vec, k: int, pos: dict, strict: bool = True):
    vec = [Fraction(0)] * len(pos)
    for i, c in x.items():
        for m, v in c.terms.items():
            lev = _level_of(L, m)
            if lev < k and strict:
                raise PreconditionError(f"term below level {k}: {L.A.mono_str(m)}")
            if lev == k:
                if (m, i) not in pos:
                    raise PreconditionError(f"level-{k} term outside the window: "
                                            f"{L.A.mono_str(m)} {L.labels[i]}")
                vec[pos[(m, i)]] += v
    return vec


def _basis_vec(L: CurvedLinf, b) -> Vec:
    m, i = b
    return {i: L.A.monomial(m)}


def linearization(L: CurvedLinf, alpha: Vec, y: Vec) -> Vec:
    """``D'_alpha(y) = l~_1 y + sum_k l_k(alpha^(k-1), y)/(k-1)!``."""
    out = L.ell1(y)
    for k in range(2, L.kmax + 1):
        args = [alpha] * (k - 1) + [y]
        from math import factorial
        out = vec_add(out, L.bracket(k, args), Fraction(1, factorial(k - 1)))
    return out


def _level_matrix(L: CurvedLinf, alpha: Vec, k: int, src, tgt_pos):
    cols = []
    for b in src:
        img = linearization(L, alpha, _basis_vec(L, b))
        cols.append(_project(L, img, k, tgt_pos, strict=False))
    return [[cols[c][r] for c in range(len(src))] for r in range(len(tgt_pos))]


def _vec_from(L: CurvedLinf, basis, coords) -> Vec:
    out: Vec = {}
    for b, c in zip(basis, coords):
        if c:
            m, i = b
            out = vec_add(out, {i: L.A.monomial(m, c)})
    return out


def solve_tower(L: CurvedLinf, seed=None, window: int | None = None,
                search_bound: int = 1):
    """Lift ``seed`` (MC modulo ``I``) through ``I^k / I^(k+1)``, k = 1..n.

    At each level the particular solution with free variables set to zero
    is taken.  When a level is obstructed, adjustments of the previous level
    by kernel vectors with integer coefficients in ``[-search_bound,
    search_bound]`` are tried before the obstruction is reported.
    """
    _check_monomial_ideal(L)
    alpha = _coerce_vec(L, seed or {})
    _require_degree(L, alpha, 0)
    D = mc_defect(L, alpha)
    for i, c in D.items():
        for m in c.terms:
            if _level_of(L, m) < 1:
                raise PreconditionError("seed does not solve the Maurer-Cartan equation mod I")
    n = L.base.order
    history: list[tuple[Vec, list, list]] = []  # (alpha before level, kernel basis, basis)

    def step(alpha, k):
        src = _level_basis(L, k, 0, window)
        tgt = _level_basis(L, k, 1, window)
        tpos = {b: r for r, b in enumerate(tgt)}
        M = _level_matrix(L, alpha, k, src, tpos)
        delta = _project(L, mc_defect(L, alpha), k, tpos)
        rhs = [-x for x in delta]
        sol = linalg.solve(M, rhs, len(src)) if tgt else [Fraction(0)] * len(src)
        kernel = linalg.nullspace(M, len(src)) if tgt else \
            [[Fraction(int(a == b)) for b in range(len(src))] for a in range(len(src))]
        return src, tgt, tpos, M, delta, sol, kernel

    k = 1
    while k <= n:
        src, tgt, tpos, M, delta, sol, kernel = step(alpha, k)
        if sol is None and history and search_bound > 0:
            prev_alpha, prev_kernel, prev_src, prev_x = history[-1]
            found = None
            if prev_kernel and len(prev_kernel) <= 6:
                for coeffs in iproduct(range(-search_bound, search_bound + 1),
                                       repeat=len(prev_kernel)):
                    if not any(coeffs):
                        continue
                    adj = [x + sum(c * kv[p] for c, kv in zip(coeffs, prev_kernel))
                           for p, x in enumerate(prev_x)]
                    trial = vec_add(prev_alpha, _vec_from(L, prev_src, adj))
                    res = step(trial, k)
                    if res[5] is not None:
                        found = (trial, res)
                        break
            if found is not None:
                alpha, (src, tgt, tpos, M, delta, sol, kernel) = found
        if sol is None:
            closed = _is_closed(L, alpha, k, delta, tgt)
            return ObstructionReport(k, _vec_from(L, tgt, delta), closed, True,
                                     MCElement(L, alpha))
        history.append((alpha, kernel, src, sol))
        alpha = vec_add(alpha, _vec_from(L, src, sol))
        k += 1
    result = MCElement(L, alpha)
    if not result.is_mc():
        raise PreconditionError("tower ended with a nonzero defect; filtration order too small")
    return result


def _is_closed(L: CurvedLinf, alpha: Vec, k: int, delta, tgt) -> bool:
    nxt = _level_basis(L, k, 2)
    npos = {b: r for r, b in enumerate(nxt)}
    y = _vec_from(L, tgt, delta)
    img = linearization(L, alpha, y)
    return not any(_project(L, img, k, npos, strict=False))


def obstruction_at(L: CurvedLinf, alpha, k: int) -> tuple[Vec, bool]:
    """Level-k part of the defect of ``alpha`` and whether it is a coboundary."""
    alpha = _coerce_vec(L, alpha)
    src = _level_basis(L, k, 0)
    tgt = _level_basis(L, k, 1)
    tpos = {b: r for r, b in enumerate(tgt)}
    M = _level_matrix(L, alpha, k, src, tpos)
    delta = _project(L, mc_defect(L, alpha), k, tpos)
    exact = linalg.solve(M, delta, len(src)) is not None if tgt else True
    return _vec_from(L, tgt, delta), exact


def is_boundary_at(L: CurvedLinf, alpha, k: int, y: Vec) -> bool:
    """Is the level-k vector ``y`` (degree 1) in the image of the twisted differential?"""
    alpha = _coerce_vec(L, alpha)
    src = _level_basis(L, k, 0)
    tgt = _level_basis(L, k, 1)
    tpos = {b: r for r, b in enumerate(tgt)}
    M = _level_matrix(L, alpha, k, src, tpos)
    v = _project(L, y, k, tpos, strict=False)
    return linalg.solve(M, v, len(src)) is not None if tgt else not any(v)


# -- twisting ------------------------------------------------------------------

def twist_differential(L: CurvedLinf, A1, window: int | None = None) -> TwistData:
    """``d = l_1 + l_2(A1, -) + ...`` on ``(A/I) (x) V`` as a GradedMap."""
    A1 = _coerce_vec(L, A1)
    _require_degree(L, A1, 0)
    base = L.base
    lead = mc_defect(L, A1)
    if any(base.reduce_mod_ideal(c) for c in lead.values()):
        raise PreconditionError("A1 does not solve the leading Maurer-Cartan equation")
    qmons = base.quotient_basis(window)
    basis = [(q, i) for i in range(L.rank) for q in qmons]
    pos = {b: r for r, b in enumerate(basis)}
    degs = [L.A.mono_degree(q) + L.sdeg[i] for q, i in basis]
    mat = linalg.zeros(len(basis), len(basis))
    for c, (q, i) in enumerate(basis):
        img = linearization(L, A1, {i: L.A.monomial(q)})
        for j, v in img.items():
            for m, x in base.reduce_mod_ideal(v).items():
                if (m, j) not in pos:
                    raise PreconditionError("twisted differential leaves the window")
                mat[pos[(m, j)]][c] = x
    labels = tuple(f"{L.A.mono_str(q)}*{L.labels[i]}" for q, i in basis)
    # the operator raises degree by one, so record it as a degree-1 map
    module = GradedModule(labels, tuple(degs))
    op = GradedMap(module, module, 1, mat)
    sq = linalg.matmul(mat, mat)
    if not linalg.is_zero(sq):
        raise PreconditionError("twisted differential does not square to zero")
    return TwistData(A1, op, basis)


# -- gauge paths ---------------------------------------------------------------

@dataclass
class GaugePath:
    found: bool
    a: Vec | None = None       # t-dependent part, coefficients in A[t, dt]
    b: Vec | None = None       # dt-coefficient (constant in t)
    cap: int = 4
    reason: str = ""
    algebra: GradedAlgebra | None = None


def _interval_algebra(L: CurvedLinf) -> GradedAlgebra:
    taken = set(L.A.index)
    t, dt = "t", "dt"
    while t in taken or dt in taken:
        t, dt = t + "_", dt + "_"
    return L.A.extend([Generator(t, 0), Generator(dt, 1)],
                      differential=lambda alg: {t: alg.gen(dt)}, weight_cap=L.A.weight_cap,
                      name=f"{L.A.name}[t,dt]")


def _flow(L: CurvedLinf, alpha: Vec, b: Vec, T: GradedAlgebra, cap: int):
    """Integrate ``da/dt = D'_a(b)`` from ``a(0) = alpha`` as a polynomial in t.

    Returns the degree-``cap`` truncation and whether it solves the flow
    equation exactly.
    """
    tname = T.gens[-2].name
    t = T.gen(tname)
    current = {i: T.embed(c) for i, c in alpha.items()}
    bT = {i: T.embed(c) for i, c in b.items()}
    for p in range(1, cap + 1):
        rhs = linearization_in(L, current, bT, T)
        for i, c in rhs.items():
            part = _t_coefficient(T, c, p - 1, tname)
            if not part.is_zero():
                term = part * Fraction(1, p) * t ** p
                current[i] = current[i] + term if i in current else term
        current = vec_clean(current)
    rhs = linearization_in(L, current, bT, T)
    deriv = vec_clean({i: _t_derivative(T, c, tname) for i, c in current.items()})
    return current, vec_is_zero(vec_add(deriv, rhs, -1))


def _t_derivative(T: GradedAlgebra, c: Element, tname: str) -> Element:
    ti = T.index[tname]
    out = {}
    for m, v in c.terms.items():
        if m[ti]:
            mm = list(m)
            mm[ti] -= 1
            out[tuple(mm)] = v * m[ti]
    return Element(T, out)


def _t_coefficient(T: GradedAlgebra, c: Element, p: int, tname: str) -> Element:
    ti = T.index[tname]
    out = {}
    for m, v in c.terms.items():
        if m[ti] == p:
            mm = list(m)
            mm[ti] = 0
            out[tuple(mm)] = v
    return Element(T, out)


def linearization_in(L: CurvedLinf, alpha: Vec, y: Vec, alg: GradedAlgebra) -> Vec:
    from math import factorial
    base_d = {i: alg.d(c) for i, c in y.items()}
    # only the A-part of the differential enters D'_a; strip the dt-terms
    dtname = alg.gens[-1].name
    di = alg.index[dtname]
    base_d = vec_clean({i: Element(alg, {m: v for m, v in c.terms.items() if not m[di]})
                        for i, c in base_d.items()})
    out = vec_add(L.bracket(1, [y], alg), base_d)
    for k in range(2, L.kmax + 1):
        out = vec_add(out, L.bracket(k, [alpha] * (k - 1) + [y], alg),
                      Fraction(1, factorial(k - 1)))
    return out


def _evaluate_t(L: CurvedLinf, T: GradedAlgebra, a: Vec, value: int) -> Vec:
    tname, dtname = T.gens[-2].name, T.gens[-1].name
    images = {g.name: L.A.gen(g.name) for g in L.A.gens}
    images[tname] = L.A.scalar(value)
    images[dtname] = L.A.zero()
    ev = AlgebraMap(T, L.A, images)
    return vec_clean({i: ev(c) for i, c in a.items()})


def gauge_path(L: CurvedLinf, alpha, beta, cap: int = 4,
               window: int | None = None) -> GaugePath:
    """Search a path ``a(t) + dt b`` of MC elements over ``A[t, dt]`` from alpha to beta.

    ``b`` is constant in t and found level by level in the I-adic filtration;
    ``a`` is the flow of ``b`` starting at alpha, a polynomial of degree at
    most ``cap``.
    """
    alpha = _coerce_vec(L, alpha)
    beta = _coerce_vec(L, beta)
    for v in (alpha, beta):
        if not vec_is_zero(mc_defect(L, v)):
            raise PreconditionError("endpoints must be Maurer-Cartan elements")
    T = _interval_algebra(L)
    if vec_is_zero(vec_add(alpha, beta, -1)):
        a = {i: T.embed(c) for i, c in alpha.items()}
        return GaugePath(True, a, {}, cap, "constant path", T)
    _check_monomial_ideal(L)
    n = L.base.order
    b: Vec = {}
    for k in range(0, n + 1):
        a, done = _flow(L, alpha, b, T, cap)
        if not done:
            return GaugePath(False, None, None, cap, f"flow exceeds t-degree cap {cap}", T)
        end = _evaluate_t(L, T, a, 1)
        gap = vec_add(beta, end, -1)
        if vec_is_zero(gap):
            return _finish(L, T, a, b, cap)
        comps = filtration_components(L, gap)
        lev = min(comps)
        if lev < k:
            return GaugePath(False, None, None, cap, f"mismatch below level {k}", T)
        if lev > k:
            continue
        src = _level_basis(L, k, -1, window)
        tgt = _level_basis(L, k, 0, window)
        tpos = {bb: r for r, bb in enumerate(tgt)}
        if k == 0:
            M = _level_matrix(L, alpha, 0, src, tpos)
        else:
            M = _level_matrix(L, alpha, k, src, tpos)
        rhs = _project(L, gap, k, tpos, strict=False)
        sol = linalg.solve(M, rhs, len(src)) if tgt else None
        if sol is None:
            return GaugePath(False, None, None, cap,
                             f"endpoints differ by a non-exact term at level {k}", T)
        b = vec_add(b, _vec_from(L, src, sol))
    a, done = _flow(L, alpha, b, T, cap)
    end = _evaluate_t(L, T, a, 1) if done else None
    if done and vec_is_zero(vec_add(beta, end, -1)):
        return _finish(L, T, a, b, cap)
    return GaugePath(False, None, None, cap, "search exhausted", T)


def _finish(L, T, a, b, cap) -> GaugePath:
    dtname = T.gens[-1].name
    dt = T.gen(dtname)
    gamma = dict(a)
    for i, c in b.items():
        term = dt * T.embed(c)
        gamma[i] = gamma[i] + term if i in gamma else term
    gamma = vec_clean(gamma)
    if not vec_is_zero(mc_defect(L, gamma, T)):
        return GaugePath(False, None, None, cap, "path failed the Maurer-Cartan check", T)
    return GaugePath(True, a, {i: T.embed(c) for i, c in b.items()}, cap, "", T)


def path_is_valid(L: CurvedLinf, path: GaugePath, alpha, beta) -> bool:
    """Independent check of a certificate: MC over A[t, dt] and both endpoints."""
    if not path.found:
        return False
    T = path.algebra
    dt = T.gen(T.gens[-1].name)
    gamma = dict(path.a)
    for i, c in (path.b or {}).items():
        gamma[i] = gamma[i] + dt * c if i in gamma else dt * c
    if not vec_is_zero(mc_defect(L, vec_clean(gamma), T)):
        return False
    a0 = _evaluate_t(L, T, path.a, 0)
    a1 = _evaluate_t(L, T, path.a, 1)
    return (vec_is_zero(vec_add(a0, _coerce_vec(L, alpha), -1))
            and vec_is_zero(vec_add(a1, _coerce_vec(L, beta), -1)))
