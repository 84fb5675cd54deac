"""Nilpotent dg ideals in finitely presented cdgas, and Kähler differentials."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from .algebra import Derivation, Element, Generator, GradedAlgebra
from .errors import ArgumentError, StructureError, UnsupportedError
from .linalg import SparseSpan
from .report import Report


class NilCdga:
    """A cdga ``A`` with a dg ideal ``I`` (given by generators) and ``I^(n+1) = 0``.

    ``window`` bounds the polynomial degree in the unbounded generators when
    spans have to be enumerated.
    """

    def __init__(self, algebra: GradedAlgebra, ideal: Iterable = (), order: int = 0,
                 window: int | None = None, name: str = ""):
        self.algebra = algebra
        self.ideal = tuple(algebra.coerce(g) for g in ideal)
        self.ideal = tuple(g for g in self.ideal if not g.is_zero())
        if order < 0:
            raise ArgumentError("nilpotency order must be non-negative")
        self.order = order
        self.window = window
        self.name = name or algebra.name
        self._spans: dict = {}

    @property
    def d(self) -> Derivation:
        return self.algebra.d

    def __repr__(self):
        return f"NilCdga({self.name or self.algebra!r}, n={self.order})"

    def _window_for(self, *elements: Element) -> int | None:
        if self.algebra.is_finite:
            return None
        w = self.window or 0
        for x in elements:
            for m in x.terms:
                w = max(w, self.algebra.free_degree(m))
        return w

    def ideal_span(self, k: int, window: int | None = None) -> SparseSpan:
        """Span of ``I^k`` inside the enumerated window."""
        if window is None:
            window = self._window_for()
        key = (k, window)
        if key in self._spans:
            return self._spans[key]
        alg = self.algebra
        span = SparseSpan()
        mons = alg.basis(window=window)
        if k == 0:
            for m in mons:
                span.add({m: Fraction(1)})
        else:
            for combo in combinations_with_replacement(range(len(self.ideal)), k):
                prod = alg.one()
                for i in combo:
                    prod = prod * self.ideal[i]
                    if prod.is_zero():
                        break
                if prod.is_zero():
                    continue
                for m in mons:
                    v = alg.monomial(m) * prod
                    if v.terms:
                        span.add(v.terms)
        self._spans[key] = span
        return span

    def in_ideal(self, x: Element, k: int = 1) -> bool:
        x = self.algebra.coerce(x)
        if x.is_zero():
            return True
        return self.ideal_span(k, self._window_for(x)).contains(x.terms)

    def filtration_level(self, x: Element, cap: int | None = None) -> int:
        """Largest k with ``x`` in ``I^k`` (``order + 1`` for zero)."""
        x = self.algebra.coerce(x)
        if x.is_zero():
            return self.order + 1
        k = 0
        top = self.order if cap is None else cap
        while k < top and self.in_ideal(x, k + 1):
            k += 1
        return k

    def quotient_basis(self, window: int | None = None) -> list:
        """Monomials spanning a complement of ``I`` (the function ring ``A/I``)."""
        if window is None:
            window = self._window_for()
        span = self.ideal_span(1, window)
        return [m for m in self.algebra.basis(window=window) if m not in span.rows]

    def reduce_mod_ideal(self, x: Element) -> dict:
        """Normal form of ``x`` modulo ``I`` as a dict over quotient monomials."""
        x = self.algebra.coerce(x)
        return self.ideal_span(1, self._window_for(x)).reduce(x.terms)


def ideal_power(A: NilCdga, k: int, window: int | None = None) -> list[Element]:
    """Basis of ``I^k`` (``k = 0`` gives the whole algebra)."""
    if k < 0:
        raise ArgumentError("k must be non-negative")
    span = A.ideal_span(k, window)
    return [Element(A.algebra, v) for v in span.basis()]


def check_nilcdga(A: NilCdga, raise_on_failure: bool = True) -> Report:
    alg = A.algebra
    rep = Report(f"nilcdga {A.name}")
    d = alg.d
    gens = [alg.gen(g.name) for g in alg.gens]
    # degree +1
    bad = None
    for g, x in zip(alg.gens, gens):
        img = d(x)
        if any(alg.mono_degree(m) != g.degree + 1 or alg.mono_form(m) != g.form
               for m in img.terms):
            bad = g.name
            break
    rep.add("d has degree +1", bad is None, bad)
    # d^2 = 0
    bad = next((g.name for g, x in zip(alg.gens, gens) if not d(d(x)).is_zero()), None)
    rep.add("d^2 = 0", bad is None, bad)
    # relations are respected
    bad = None
    for r in alg.relations:
        if not d.on_monomial(r, formal=True).is_zero():
            bad = alg.mono_str(r)
            break
    rep.add("d respects relations", bad is None, bad)
    # Leibniz and graded commutativity on generator pairs
    bad_l = bad_c = None
    for (ga, a) in zip(alg.gens, gens):
        for (gb, b) in zip(alg.gens, gens):
            if bad_l is None:
                lhs = d(a * b)
                rhs = d(a) * b + a * d(b) * (-1 if ga.parity else 1)
                if lhs != rhs:
                    bad_l = (ga.name, gb.name)
            if bad_c is None:
                sign = -1 if ga.parity and gb.parity else 1
                if a * b != b * a * sign:
                    bad_c = (ga.name, gb.name)
    rep.add("Leibniz", bad_l is None, bad_l)
    rep.add("graded commutativity", bad_c is None, bad_c)
    # d(I) in I
    bad = next((str(g) for g in A.ideal if not A.in_ideal(d(g))), None)
    rep.add("d(I) in I", bad is None, bad)
    # I^(n+1) = 0
    bad = None
    for combo in combinations_with_replacement(range(len(A.ideal)), A.order + 1):
        prod = alg.one()
        for i in combo:
            prod = prod * A.ideal[i]
        if not prod.is_zero():
            bad = str(prod)
            break
    rep.add(f"I^{A.order + 1} = 0", bad is None, bad)
    # A/I concentrated in degree 0 with zero differential
    window = A._window_for()
    bad = None
    for m in A.quotient_basis(window):
        if alg.mono_degree(m) != 0 or alg.mono_form(m) != 0:
            bad = alg.mono_str(m)
            break
    rep.add("A/I concentrated in degree 0", bad is None, bad)
    bad = next((g.name for g, x in zip(alg.gens, gens) if not A.in_ideal(d(x))), None)
    rep.add("d(A) in I", bad is None, bad)
    if raise_on_failure:
        rep.raise_if_failed()
    return rep


class KahlerModule:
    """Kähler forms ``Omega^*_R`` of a cdga, as a bigraded algebra.

    Generators ``g`` of ``R`` get partners ``d_g`` (same degree and weight,
    form degree 1).  ``relative_to`` lists generators treated as constants
    for ``d_dR`` (relative differentials).  The internal differential is
    extended by ``d(d_g) = -d_dR(d g)`` so the two differentials anticommute.
    """

    def __init__(self, base: GradedAlgebra, relative_to: Sequence[str] = ()):
        self.base = base
        self.relative_to = tuple(relative_to)
        for nm in self.relative_to:
            if nm not in base.index:
                raise ArgumentError(f"unknown generator {nm}")
        varying = [g for g in base.gens if g.name not in self.relative_to]
        new = [Generator("d_" + g.name, g.degree, g.form + 1, g.weight) for g in varying]
        taken = set(base.index)
        for g in new:
            if g.name in taken:
                raise ArgumentError(f"generator name clash: {g.name}")
        rels = []
        nb = base.n
        pos = {g.name: nb + i for i, g in enumerate(varying)}
        for r in base.relations:
            support = [i for i, e in enumerate(r) if e]
            if len(support) != 1:
                raise UnsupportedError(
                    f"Kähler forms of the non-monomial relation {base.mono_str(r)}")
            i = support[0]
            nm = base.gens[i].name
            if nm in pos:
                rel = [0] * (nb + len(new))
                rel[i] = r[i] - 1
                rel[pos[nm]] = 1
                rels.append(tuple(rel))
        self.d_name = {g.name: "d_" + g.name for g in varying}

        def images(alg):
            out = {}
            dd = Derivation(alg, {g.name: (alg.gen(self.d_name[g.name]) if g.name in self.d_name
                                           else alg.zero()) for g in base.gens}, parity=1)
            for g in base.gens:
                img = alg.embed(base.d_image(g.name))
                out[g.name] = img
                if g.name in self.d_name:
                    out[self.d_name[g.name]] = -dd(img)
            return out

        self.algebra = base.extend(new, differential=images, relations=rels,
                                   name=f"Omega({base.name})")
        A = self.algebra
        self.d_dR = Derivation(A, {**{nm: A.gen(dn) for nm, dn in self.d_name.items()}},
                               parity=1)
        self.d_int = A.d

    def embed(self, x: Element) -> Element:
        return self.algebra.embed(x)

    def form_degree(self, x: Element) -> set[int]:
        return {self.algebra.mono_form(m) for m in x.terms}

    def piece(self, k: int, window: int | None = None) -> list:
        """Monomials spanning ``Omega^k`` inside the window."""
        if k < 0:
            raise ArgumentError("k must be non-negative")
        A = self.algebra
        w = None
        if not A.is_finite:
            w = (window or 0) + k
        out = []
        for m in A.basis(window=w, form=k):
            base_free = sum(e for e, g in zip(m, A.gens) if g.form == 0 and not g.bounded)
            if window is not None and base_free > window:
                continue
            out.append(m)
        return out

    def check(self, kmax: int = 3, window: int | None = None) -> Report:
        rep = Report(f"kahler {self.base.name}")
        A = self.algebra
        for k in range(kmax + 1):
            for m in self.piece(k, window):
                x = A.monomial(m)
                if not self.d_dR(self.d_dR(x)).is_zero():
                    rep.add("d_dR^2 = 0", False, A.mono_str(m))
                    return rep
                if not self.d_int(self.d_int(x)).is_zero():
                    rep.add("d^2 = 0", False, A.mono_str(m))
                    return rep
                if not (self.d_dR(self.d_int(x)) + self.d_int(self.d_dR(x))).is_zero():
                    rep.add("d_dR d + d d_dR = 0", False, A.mono_str(m))
                    return rep
        rep.add("d_dR^2 = 0", True)
        rep.add("d^2 = 0", True)
        rep.add("d_dR d + d d_dR = 0", True)
        return rep


def kahler(R, k: int | None = None, relative_to: Sequence[str] = (),
           window: int | None = None):
    """Kähler forms of ``R``; with ``k`` given, the monomial basis of ``Omega^k``."""
    base = R.algebra if isinstance(R, NilCdga) else R
    km = KahlerModule(base, relative_to)
    if k is None:
        return km
    return km, km.piece(k, window)


def quotient_map_ok(A: NilCdga) -> bool:
    """``q: A -> A/I`` is a dg map: it kills ``I`` and ``d(A)``."""
    return all(A.in_ideal(A.d(A.algebra.gen(g.name))) for g in A.algebra.gens)
