"""Connections on free dg modules, Atiyah classes and Chern characters.

A free module ``M = (+) eps_a B`` (basis in degree 0) over a cdga ``B`` has
differential ``d_M v = d v + Theta v``.  A connection ``nabla = d_dR + omega``
takes values in Kähler forms.  With the Kähler convention that ``d_dR`` and
the internal differential anticommute, the Atiyah class is the graded
commutator

    At = nabla d_M + d nabla = d_dR Theta + d omega + omega Theta + Theta omega,

an R-linear endomorphism valued in one-forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Mapping, Sequence

from . import linalg
from .algebra import AlgebraMap, Element, GradedAlgebra
from .algebroid import AlgebroidModel, dual_name
from .errors import ArgumentError, PreconditionError, StructureError, WindowError
from .jets import TruncatedUL, jet_algebra, word_factorial, words
from .linf import xi_name
from .nilcdga import KahlerModule, NilCdga
from .report import Report

Matrix = list


def mat_zero(alg: GradedAlgebra, m: int) -> Matrix:
    return [[alg.zero() for _ in range(m)] for _ in range(m)]


def mat_identity(alg: GradedAlgebra, m: int) -> Matrix:
    return [[alg.one() if a == b else alg.zero() for b in range(m)] for a in range(m)]


def mat_add(X: Matrix, Y: Matrix, scale=1) -> Matrix:
    return [[x + y * scale for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    n, k, m = len(X), len(Y), len(Y[0]) if Y else 0
    out = []
    for a in range(n):
        row = []
        for b in range(m):
            s = X[a][0] * Y[0][b] if k else None
            for c in range(1, k):
                s = s + X[a][c] * Y[c][b]
            row.append(s)
        out.append(row)
    return out


def mat_map(X: Matrix, f) -> Matrix:
    return [[f(x) for x in row] for row in X]


def mat_scale(X: Matrix, c) -> Matrix:
    return [[x * c for x in row] for row in X]


def mat_is_zero(X: Matrix) -> bool:
    return all(x.is_zero() for row in X for x in row)


def mat_apply(X: Matrix, v: Sequence[Element]) -> list[Element]:
    return [sum((X[a][b] * v[b] for b in range(1, len(v))), X[a][0] * v[0]) for a in range(len(X))]


def trace(X: Matrix) -> Element:
    return sum((X[a][a] for a in range(1, len(X))), X[0][0])


def mat_power(X: Matrix, k: int, alg: GradedAlgebra) -> Matrix:
    out = mat_identity(alg, len(X))
    for _ in range(k):
        out = mat_mul(out, X)
    return out


def mat_str(X: Matrix) -> list[list[str]]:
    return [[str(x) for x in row] for row in X]


def _parity(x: Element) -> int:
    ps = {x.alg.mono_parity(m) for m in x.terms}
    if len(ps) > 1:
        raise ArgumentError(f"inhomogeneous parity in {x}")
    return ps.pop() if ps else 0


def _mat_parity(X: Matrix) -> int:
    ps = {_parity(x) for row in X for x in row if not x.is_zero()}
    if len(ps) > 1:
        raise ArgumentError("matrix entries of mixed parity")
    return ps.pop() if ps else 0


class DgModule:
    """Free module with basis in degree 0 and ``d_M = d + Theta``."""

    def __init__(self, base, theta: Sequence[Sequence] | None = None, rank: int | None = None,
                 name: str = ""):
        self.base = base
        self.B = base.algebra if isinstance(base, NilCdga) else base
        if theta is None:
            theta = mat_zero(self.B, rank or 1)
        self.theta = [[self.B.coerce(x) for x in row] for row in theta]
        self.rank = len(self.theta)
        self.name = name

    def d_M(self, v: Sequence[Element]) -> list[Element]:
        v = [self.B.coerce(x) for x in v]
        return [self.B.d(x) + y for x, y in zip(v, mat_apply(self.theta, v))]

    def check(self) -> Report:
        rep = Report(f"dg module {self.name}")
        B = self.B
        flat = mat_add(mat_map(self.theta, B.d), mat_mul(self.theta, self.theta))
        rep.add("d_M^2 = 0", mat_is_zero(flat), mat_str(flat))
        bad = None
        for g in B.gens:
            r = B.gen(g.name)
            sign = -1 if g.parity else 1
            for a in range(self.rank):
                e = [B.one() if b == a else B.zero() for b in range(self.rank)]
                lhs = self.d_M([r * x for x in e])
                rhs = [B.d(r) * x + r * y * sign for x, y in zip(e, self.d_M(e))]
                if any(p != q for p, q in zip(lhs, rhs)):
                    bad = (g.name, a)
        rep.add("Leibniz", bad is None, bad)
        return rep


class ConnectionData:
    """``nabla = d_dR + omega`` on a :class:`DgModule`, valued in Kähler forms."""

    def __init__(self, module: DgModule, omega: Sequence[Sequence] | None = None,
                 relative_to: Sequence[str] = (), name: str = ""):
        self.module = module
        self.kahler = KahlerModule(module.B, relative_to)
        self.Om = self.kahler.algebra
        m = module.rank
        if omega is None:
            omega = mat_zero(self.Om, m)
        self.omega = [[self.Om.coerce(x) for x in row] for row in omega]
        if any(self.Om.mono_form(t) != 1 for row in self.omega for x in row for t in x.terms):
            raise ArgumentError("connection forms must be one-forms")
        self.theta = mat_map(module.theta, self.Om.embed)
        self.name = name or module.name
        self._flat = None

    @property
    def rank(self) -> int:
        return self.module.rank

    def nabla(self, v: Sequence) -> list[Element]:
        v = [self.Om.embed(self.module.B.coerce(x)) for x in v]
        return [self.kahler.d_dR(x) + y for x, y in zip(v, mat_apply(self.omega, v))]

    def d_total(self, w: Sequence[Element]) -> list[Element]:
        """Differential of ``Omega (x) M``."""
        return [self.kahler.d_int(x) + y for x, y in zip(w, mat_apply(self.theta, w))]

    def curvature(self) -> Matrix:
        return mat_add(mat_map(self.omega, self.kahler.d_dR), mat_mul(self.omega, self.omega))

    @property
    def flat(self) -> bool:
        if self._flat is None:
            self._flat = mat_is_zero(self.curvature())
        return self._flat

    def check_leibniz(self) -> Report:
        rep = Report(f"connection {self.name}")
        B, Om = self.module.B, self.Om
        bad = None
        for g in B.gens:
            r = B.gen(g.name)
            sign = -1 if g.parity else 1
            for a in range(self.rank):
                e = [B.one() if b == a else B.zero() for b in range(self.rank)]
                lhs = self.nabla([r * x for x in e])
                dr = self.kahler.d_dR(Om.embed(r))
                rhs = [dr * Om.embed(x) + Om.embed(r) * y * sign for x, y in zip(e, self.nabla(e))]
                if any(p != q for p, q in zip(lhs, rhs)):
                    bad = (g.name, a)
        rep.add("Leibniz", bad is None, bad)
        return rep


@dataclass
class AtiyahClass:
    matrix: Matrix
    connection: ConnectionData

    def is_zero(self) -> bool:
        return mat_is_zero(self.matrix)

    def to_dict(self) -> dict:
        return {"atiyah": mat_str(self.matrix)}


def atiyah(C: ConnectionData) -> AtiyahClass:
    if not C.check_leibniz().ok:
        raise PreconditionError("connection fails the Leibniz rule")
    Om, dR, d = C.Om, C.kahler.d_dR, C.kahler.d_int
    At = mat_add(mat_add(mat_map(C.theta, dR), mat_map(C.omega, d)),
                 mat_add(mat_mul(C.omega, C.theta), mat_mul(C.theta, C.omega)))
    # R-linearity: the commutator on r.eps_a agrees with the matrix
    B = C.module.B
    gens = [B.one()] + [B.gen(g.name) for g in B.gens]
    for r in gens:
        for a in range(C.rank):
            v = [r if b == a else B.zero() for b in range(C.rank)]
            lhs = [x + y for x, y in zip(C.nabla(C.module.d_M(v)), C.d_total(C.nabla(v)))]
            rhs = mat_apply(At, [Om.embed(x) for x in v])
            if any(p != q for p, q in zip(lhs, rhs)):
                raise StructureError("At is R-linear", (str(r), a))
    return AtiyahClass(At, C)


@dataclass
class UForm:
    """``u^upow * form`` with ``u = (-2 pi i)^(-1)``."""

    form: Element
    upow: int

    def is_zero(self) -> bool:
        return self.form.is_zero()

    def __str__(self):
        if self.form.is_zero():
            return "0"
        return f"u^{self.upow}*({self.form})" if self.upow else str(self.form)

    def to_dict(self) -> dict:
        return {"u_power": self.upow, "form": str(self.form)}


def chern(C: ConnectionData, k: int, At: AtiyahClass | None = None) -> UForm:
    if k < 0:
        raise ArgumentError("k must be non-negative")
    At = At or atiyah(C)
    P = mat_power(At.matrix, k, C.Om)
    return UForm(trace(P) * Fraction(1, factorial(k)), k)


def verify_atiyah_properties(C: ConnectionData, kmax: int = 3) -> Report:
    rep = Report(f"atiyah {C.name}")
    At = atiyah(C).matrix
    d, dR = C.kahler.d_int, C.kahler.d_dR
    p = _mat_parity(At)
    sign = -1 if p else 1
    cocycle = mat_add(mat_add(mat_map(At, d), mat_mul(C.theta, At)), mat_mul(At, C.theta), -sign)
    rep.add("cocycle", mat_is_zero(cocycle), mat_str(cocycle))
    flat = C.flat
    hor = mat_add(mat_add(mat_map(At, dR), mat_mul(C.omega, At)), mat_mul(At, C.omega), -sign)
    rep.add("horizontal", mat_is_zero(hor), mat_str(hor), asserted=flat)
    for k in range(1, kmax + 1):
        ch = chern(C, k, AtiyahClass(At, C)).form
        rep.add(f"ch_{k} d_dR-closed", dR(ch).is_zero(), str(dR(ch)), asserted=flat)
        rep.add(f"ch_{k} d-closed", d(ch).is_zero(), str(d(ch)), asserted=flat)
    return rep


# -- jet-built connections ----------------------------------------------------

class LModule:
    """A free ``R``-module of rank m with a frame action ``e_i . eps = Gamma_i eps``."""

    def __init__(self, M: AlgebroidModel, rank: int, gammas: Mapping | None = None, name: str = ""):
        self.M = M
        self.rank = rank
        self.name = name
        R = M.R
        self.gammas = {}
        for i in range(M.rank):
            G = (gammas or {}).get(M.frame[i])
            if G is None:
                G = [[0] * rank for _ in range(rank)]
            if len(G) != rank or any(len(row) != rank for row in G):
                raise ArgumentError(f"action matrix of {M.frame[i]} is not {rank}x{rank}")
            self.gammas[i] = [[R.coerce(x) for x in row] for row in G]

    def connection_form(self) -> Matrix:
        C = self.M.ce_algebra()
        out = mat_zero(C, self.rank)
        for i, G in self.gammas.items():
            out = mat_add(out, mat_scale(mat_map(G, C.embed), self.M.dual(i)))
        return out

    def curvature(self) -> Matrix:
        C = self.M.ce_algebra()
        w = self.connection_form()
        return mat_add(mat_map(w, C.d), mat_mul(w, w))

    def is_representation(self) -> bool:
        return mat_is_zero(self.curvature())


SPLITTINGS = ("symmetric", "ordered")


def jet_splitting_matrix(E: LModule, N: int, B: GradedAlgebra, kind: str = "symmetric") -> Matrix:
    """``nu = sum_b V(e^b) y^b / b!`` built from ``T_i(V) = rho(e_i) V - V Gamma_i``.

    ``ordered``: ``V(e_{i_1}..e_{i_k}) = T_{i_1}..T_{i_k}(Id)`` on the normal-ordered word.
    ``symmetric``: the same averaged over all orderings of the word.
    """
    if kind not in SPLITTINGS:
        raise ArgumentError(f"unknown splitting {kind!r}")
    M = E.M
    R = M.R
    m = E.rank
    cache = {(): mat_identity(R, m)}

    def V(seq):
        if seq not in cache:
            W = V(seq[1:])
            i = seq[0]
            cache[seq] = mat_add(mat_map(W, lambda f: M.rho(i, f)), mat_mul(W, E.gammas[i]), -1)
        return cache[seq]

    nu = mat_zero(B, m)
    for k in range(N + 1):
        for w in words(M.rank, k):
            if kind == "ordered" or k < 2:
                Vw = V(w)
            else:
                perms = list(permutations(w))
                Vw = mat_zero(R, m)
                for p in perms:
                    Vw = mat_add(Vw, V(p))
                Vw = mat_scale(Vw, Fraction(1, len(perms)))
            y = B.one()
            for i in w:
                y = y * B.gen(xi_name(M.frame[i]))
            y = y * Fraction(1, word_factorial(w))
            nu = mat_add(nu, mat_scale(mat_map(Vw, B.embed), y))
    return nu


def unipotent_inverse(X: Matrix, alg: GradedAlgebra, order: int) -> Matrix:
    Id = mat_identity(alg, len(X))
    n = mat_add(X, Id, -1)
    out, term = Id, Id
    for _ in range(order):
        term = mat_scale(mat_mul(term, n), -1)
        if mat_is_zero(term):
            break
        out = mat_add(out, term)
    return out


class JetConnection(ConnectionData):
    """``1 (x) d_dR`` on ``E (x) dR_L(J_L)`` transported through the splitting."""

    def __init__(self, E: LModule, N: int, splitting: str = "symmetric"):
        self.E = E
        self.splitting = splitting
        self.M = E.M
        self.N = N
        B = jet_algebra(E.M, N)
        nu = jet_splitting_matrix(E, N, B, splitting)
        self.nu = nu
        theta = mat_mul(unipotent_inverse(nu, B, N), mat_map(nu, B.d))
        module = DgModule(B, theta, name=f"dR_L(J({E.name}))")
        rel = [g.name for g in E.M.ce_algebra().gens]
        super().__init__(module, None, rel, name=module.name)

    def projection(self) -> AlgebraMap:
        """``Omega_B -> C*L``: ``y -> 0``, ``d_y_i -> e^i``."""
        C = self.M.ce_algebra()
        images = {g.name: C.gen(g.name) for g in C.gens}
        for i, l in enumerate(self.M.frame):
            images[xi_name(l)] = C.zero()
            images[self.kahler.d_name[xi_name(l)]] = C.gen(dual_name(l))
        return AlgebraMap(self.Om, C, images)


def jet_module_connection(M: AlgebroidModel, E: LModule, N: int,
                          splitting: str = "symmetric") -> JetConnection:
    if N < 1:
        raise WindowError("the jet order must be at least 1")
    if E.M is not M:
        raise ArgumentError("module lives over a different algebroid")
    C = JetConnection(E, N, splitting)
    rep = C.module.check()
    if not rep.ok:
        raise StructureError("d_M^2 = 0", rep.first_failure().witness)
    if not C.flat:
        raise StructureError("flatness", C.name)
    return C


@dataclass
class InducedConnection:
    form: Matrix
    curvature: Matrix
    atiyah_constant: Matrix

    def to_dict(self) -> dict:
        return {"connection": mat_str(self.form), "curvature": mat_str(self.curvature),
                "atiyah_constant_term": mat_str(self.atiyah_constant)}


def induced_L_connection(C: JetConnection, At: AtiyahClass | None = None) -> InducedConnection:
    M = C.M
    Cl = M.ce_algebra()
    pi = C.projection()
    w0 = mat_map(C.theta, pi)
    F = mat_add(mat_map(w0, Cl.d), mat_mul(w0, w0))
    At = At or atiyah(C)
    const = mat_map(At.matrix, pi)
    if not all(x == y for rx, ry in zip(F, const) for x, y in zip(rx, ry)):
        raise StructureError("curvature equals the constant Atiyah term", (mat_str(F), mat_str(const)))
    return InducedConnection(w0, F, const)


@dataclass
class PrimaryClass:
    k: int
    representative: UForm
    closed: bool
    exact: bool
    primitive: Element | None

    def to_dict(self) -> dict:
        out = {"k": self.k, "degree": 2 * self.k, "representative": self.representative.to_dict(),
               "closed": self.closed, "exact": self.exact}
        if self.primitive is not None:
            out["primitive"] = str(self.primitive)
        return out


def solve_exact(M: AlgebroidModel, x: Element, window: int | None = None) -> Element | None:
    """A cochain ``b`` with ``d_L b = x``, or None."""
    C = M.ce_algebra()
    x = C.coerce(x)
    degs = {C.mono_degree(t) for t in x.terms}
    if not degs:
        return C.zero()
    (n,) = degs
    if n == 0:
        return None
    if M.R.n and window is None:
        window = max(C.free_degree(t) for t in x.terms) + 1
    src = C.basis(window=window if M.R.n else None, degree=n - 1)
    cols = [C.d(C.monomial(b)) for b in src]
    keys = sorted({t for c in cols for t in c.terms} | set(x.terms))
    pos = {t: r for r, t in enumerate(keys)}
    mat = linalg.zeros(len(keys), len(src))
    for j, c in enumerate(cols):
        for t, v in c.terms.items():
            mat[pos[t]][j] = v
    rhs = [x.terms.get(t, Fraction(0)) for t in keys]
    sol = linalg.solve(mat, rhs) if src else None
    if sol is None:
        return None
    return sum((C.monomial(b) * s for b, s in zip(src, sol) if s), C.zero())


def primary_class(M: AlgebroidModel, E: LModule, k: int, N: int | None = None,
                  window: int | None = None, splitting: str = "symmetric") -> PrimaryClass:
    """Class of ``ch_k`` of the jet-built connection, pushed to ``C^{2k}(L)``."""
    if k < 0:
        raise ArgumentError("k must be non-negative")
    C_L = M.ce_algebra()
    if k == 0:
        rep = UForm(C_L.scalar(E.rank), 0)
        return PrimaryClass(0, rep, True, E.rank == 0, None)
    N = max(2 * k, 1) if N is None else N
    if N < 2 * k:
        raise WindowError(f"jet order {N} is too small for degree {2 * k}")
    C = jet_module_connection(M, E, N, splitting)
    At = atiyah(C)
    ch = chern(C, k, At)
    rep = C.projection()(ch.form)
    closed = C_L.d(rep).is_zero()
    prim = solve_exact(M, rep, window) if closed else None
    return PrimaryClass(k, UForm(rep, k), closed, prim is not None, prim)


def perturbed_module(E: LModule, delta: Mapping) -> LModule:
    g = {E.M.frame[i]: [[x for x in row] for row in G] for i, G in E.gammas.items()}
    for lab, D in delta.items():
        i = E.M.index(lab)
        g[E.M.frame[i]] = [[x + E.M.R.coerce(y) for x, y in zip(r1, r2)]
                           for r1, r2 in zip(g[E.M.frame[i]], D)]
    return LModule(E.M, E.rank, g, name=f"{E.name}'")
