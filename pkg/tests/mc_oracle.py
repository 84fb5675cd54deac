"""Independent helpers for Maurer-Cartan tests.

``brute_force_mc`` enumerates the affine space of degree-zero vectors in
V (x) I over an order-two base: level-one coordinates range over a grid and
level-two coordinates (which enter linearly) are solved with sympy.

``display_lines`` evaluates the form-degree equations for gl(1|1) over the
de Rham model of the plane with plain sympy arithmetic.
"""

from itertools import product

import sympy as sp

from linfalg.linf import vec_add
from linfalg.mc import mc_defect


def degree_zero_coordinates(L):
    A = L.A
    out = []
    for m in A.basis(window=L.base.window or 0):
        lev = L.base.filtration_level(A.monomial(m))
        if lev < 1:
            continue
        for i in range(L.rank):
            if A.mono_degree(m) + L.sdeg[i] == 0:
                out.append((lev, m, i))
    return out


def _vec(L, coords, values):
    v = {}
    for (lev, m, i), c in zip(coords, values):
        if c:
            v = vec_add(v, {i: L.A.monomial(m, c)})
    return v


def _flatten(L, D):
    return {(i, m): v for i, c in D.items() for m, v in c.terms.items()}


def brute_force_mc(L, grid=(-1, 0, 1)):
    """First MC element found in the grid, or None."""
    coords = degree_zero_coordinates(L)
    if L.base.order > 2:
        raise ValueError("the oracle handles order-two bases only")
    low = [c for c in coords if c[0] == 1]
    high = [c for c in coords if c[0] == 2]
    for values in product(grid, repeat=len(low)):
        a1 = _vec(L, low, values)
        base = _flatten(L, mc_defect(L, a1))
        if not high:
            if not base:
                return a1
            continue
        cols = []
        for c in high:
            img = _flatten(L, mc_defect(L, vec_add(a1, _vec(L, [c], [1]))))
            keys = set(img) | set(base)
            cols.append({k: img.get(k, 0) - base.get(k, 0) for k in keys})
        keys = sorted(set(base).union(*[set(c) for c in cols]), key=str)
        if not keys:
            return a1
        M = sp.Matrix([[sp.Rational(col.get(k, 0)) for col in cols] for k in keys])
        rhs = sp.Matrix([-sp.Rational(base.get(k, 0)) for k in keys])
        syms = sp.symbols(f"c0:{len(high)}")
        sol = sp.linsolve((M, rhs), *syms)
        if sol:
            point = [v.subs({s: 0 for s in syms}) for v in next(iter(sol))]
            from fractions import Fraction
            vals = [Fraction(int(p.p), int(p.q)) for p in point]
            return vec_add(a1, _vec(L, high, vals))
    return None


# -- gl(1|1) over Omega(Q^2) ----------------------------------------------------

x1, x2 = sp.symbols("x1 x2")
X = (x1, x2)
DEG = {"a": 0, "b": 0, "q": 1, "p": -1}
D_INT = {"a": {"q": -1}, "b": {"q": 1}, "p": {"a": 1, "b": 1}, "q": {}}
BR = {("a", "q"): {"q": 1}, ("b", "q"): {"q": -1}, ("a", "p"): {"p": -1},
      ("b", "p"): {"p": 1}, ("q", "p"): {"a": 1, "b": 1}}


def _br_basis(x, y):
    if (x, y) in BR:
        return BR[(x, y)]
    if (y, x) in BR:
        s = -(-1) ** (DEG[x] * DEG[y])
        return {k: s * v for k, v in BR[(y, x)].items()}
    return {}


def _wedge(I, J):
    if set(I) & set(J):
        return 0, None
    seq = list(I) + list(J)
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return (-1) ** inv, tuple(sorted(seq))


def _fmul(w, v):
    out = {}
    for I, f in w.items():
        for J, g in v.items():
            s, K = _wedge(I, J)
            if s:
                out[K] = sp.expand(out.get(K, 0) + s * f * g)
    return out


def _clean(u):
    out = {}
    for lab, w in u.items():
        w = {K: sp.expand(f) for K, f in w.items() if sp.expand(f) != 0}
        if w:
            out[lab] = w
    return out


def add(*us):
    out = {}
    for u in us:
        for lab, w in u.items():
            t = out.setdefault(lab, {})
            for K, f in w.items():
                t[K] = t.get(K, 0) + f
    return _clean(out)


def scale(u, c):
    return _clean({lab: {K: c * f for K, f in w.items()} for lab, w in u.items()})


def d_dR(u):
    out = {}
    for lab, w in u.items():
        t = out.setdefault(lab, {})
        for I, f in w.items():
            for i, xi in enumerate(X):
                s, K = _wedge((i,), I)
                if s:
                    t[K] = t.get(K, 0) + s * sp.diff(f, xi)
    return _clean(out)


def d_int(u):
    # coefficients on the left: d(w x) = (-1)^|w| w dx
    out = {}
    for lab, w in u.items():
        for lab2, c in D_INT[lab].items():
            out = add(out, {lab2: {K: (-1) ** len(K) * c * f for K, f in w.items()}})
    return out


def bracket(u, v):
    # [w x, e y] = (-1)^(|x||e|) w e [x, y]
    out = {}
    for x, w in u.items():
        for y, e in v.items():
            for K, f in e.items():
                s = (-1) ** (DEG[x] * len(K))
                prod = _fmul(w, {K: f})
                for z, c in _br_basis(x, y).items():
                    out = add(out, {z: {k: s * c * g for k, g in prod.items()}})
    return out


def display_lines(A1, A0, Am):
    half = sp.Rational(1, 2)
    return {
        0: add(d_int(A1), scale(bracket(A1, A1), half)),
        1: add(d_dR(A1), d_int(A0), bracket(A1, A0)),
        2: add(d_dR(A0), d_int(Am), bracket(A1, Am), scale(bracket(A0, A0), half)),
    }


def element_to_forms(L, vec):
    """Library vector over Omega(Q^2) as {label: {dx-indices: sympy poly}}."""
    A = L.A
    names = [g.name for g in A.gens]
    out = {}
    for j, c in vec.items():
        t = out.setdefault(L.labels[j], {})
        for m, v in c.terms.items():
            poly = sp.Rational(v.numerator, v.denominator)
            K = []
            for e, nm in zip(m, names):
                if nm in ("x1", "x2"):
                    poly *= X[int(nm[1]) - 1] ** e
                elif e:
                    K.append(int(nm[2]) - 1)
            K = tuple(K)
            t[K] = t.get(K, 0) + poly
    return _clean(out)
