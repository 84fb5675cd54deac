"""Graded-commutative algebras with exact rational coefficients.

An algebra is free graded-commutative on a list of generators, modulo
monomial relations (``x**3 == 0`` style) and an optional cap on the total
``weight``.  Signs follow the Koszul rule for the total parity
``degree + form``, so de Rham style generators (form degree 1) anticommute
with everything odd.  Elements are sparse maps from exponent tuples to
``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Iterable, Mapping

from .errors import ArgumentError, UnsupportedError, WindowError

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    form: int = 0
    weight: int = 0
    nil: int | None = None  # smallest power that vanishes (even generators)

    @property
    def parity(self) -> int:
        return (self.degree + self.form) % 2

    @property
    def bounded(self) -> bool:
        return self.parity == 1 or self.nil is not None


class GradedAlgebra:
    """Graded-commutative algebra; ``differential`` maps generator names to images.

    ``differential`` may be a mapping or a callable receiving the algebra
    (so images can be written with its own generators).  Generators missing
    from the mapping have zero differential.
    """

    def __init__(self, generators: Iterable[Generator], relations: Iterable[Monomial] = (),
                 weight_cap: int | None = None, differential=None, name: str = ""):
        self.gens: tuple[Generator, ...] = tuple(generators)
        names = [g.name for g in self.gens]
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate generator names in {names}")
        self.name = name
        self.index = {g.name: i for i, g in enumerate(self.gens)}
        self.n = len(self.gens)
        self._parity = tuple(g.parity for g in self.gens)
        self._odd = tuple(i for i, p in enumerate(self._parity) if p)
        rels = set()
        for g in self.gens:
            if g.nil is not None:
                if g.parity:
                    raise ArgumentError(f"odd generator {g.name} cannot carry a nil order")
                rels.add(tuple(g.nil if j == self.index[g.name] else 0 for j in range(self.n)))
        for r in relations:
            r = tuple(r)
            if len(r) != self.n:
                raise ArgumentError("relation length does not match generators")
            rels.add(r)
        self.relations: tuple[Monomial, ...] = tuple(sorted(rels))
        self.weight_cap = weight_cap
        self._weights = tuple(g.weight for g in self.gens)
        self._d_images: dict[int, dict] = {}
        self._d = None
        if differential is not None:
            images = differential(self) if callable(differential) else differential
            for nm, img in images.items():
                if nm not in self.index:
                    raise ArgumentError(f"differential given for unknown generator {nm}")
                img = self.coerce(img)
                if img.terms:
                    self._d_images[self.index[nm]] = img.terms

    # -- identity -----------------------------------------------------
    @property
    def key(self):
        return (self.gens, self.relations, self.weight_cap)

    def same_space(self, other: "GradedAlgebra") -> bool:
        return self is other or self.key == other.key

    def __eq__(self, other):
        if not isinstance(other, GradedAlgebra):
            return NotImplemented
        return self.key == other.key and self._d_images == other._d_images

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        gens = ", ".join(f"{g.name}:{g.degree}" + (f"/{g.form}" if g.form else "")
                         for g in self.gens)
        return f"GradedAlgebra({self.name or '?'}; {gens})"

    # -- monomials ----------------------------------------------------
    def unit_monomial(self) -> Monomial:
        return (0,) * self.n

    def gen_monomial(self, i: int, e: int = 1) -> Monomial:
        return tuple(e if j == i else 0 for j in range(self.n))

    def mono_degree(self, m: Monomial) -> int:
        return sum(e * g.degree for e, g in zip(m, self.gens))

    def mono_form(self, m: Monomial) -> int:
        return sum(e * g.form for e, g in zip(m, self.gens))

    def mono_weight(self, m: Monomial) -> int:
        return sum(e * w for e, w in zip(m, self._weights))

    def mono_parity(self, m: Monomial) -> int:
        return sum(m[i] for i in self._odd) % 2

    def mono_vanishes(self, m: Monomial) -> bool:
        for i in self._odd:
            if m[i] > 1:
                return True
        if self.weight_cap is not None and self.mono_weight(m) > self.weight_cap:
            return True
        for r in self.relations:
            if all(a >= b for a, b in zip(m, r)):
                return True
        return False

    def mono_mul(self, a: Monomial, b: Monomial) -> tuple[int, Monomial] | None:
        odd = 0
        for j in self._odd:
            if b[j]:
                if a[j]:
                    return None
                for i in self._odd:
                    if i > j and a[i]:
                        odd ^= 1
        m = tuple(x + y for x, y in zip(a, b))
        if self.mono_vanishes(m):
            return None
        return (-1 if odd else 1), m

    def mono_str(self, m: Monomial) -> str:
        parts = []
        for e, g in zip(m, self.gens):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) if parts else "1"

    # -- elements -----------------------------------------------------
    def element(self, terms: Mapping[Monomial, Fraction] | None = None) -> "Element":
        return Element(self, terms or {})

    def zero(self) -> "Element":
        return Element(self, {})

    def one(self) -> "Element":
        return self.scalar(1)

    def scalar(self, c) -> "Element":
        return Element(self, {self.unit_monomial(): Fraction(c)})

    def gen(self, name: str) -> "Element":
        if name not in self.index:
            raise ArgumentError(f"unknown generator {name}")
        m = self.gen_monomial(self.index[name])
        if self.mono_vanishes(m):
            return self.zero()
        return Element(self, {m: Fraction(1)})

    def monomial(self, m: Monomial, coeff=1) -> "Element":
        if self.mono_vanishes(m):
            return self.zero()
        return Element(self, {tuple(m): Fraction(coeff)})

    def coerce(self, x) -> "Element":
        if isinstance(x, Element):
            if x.alg.same_space(self):
                return x if x.alg is self else Element(self, x.terms)
            return self.embed(x)
        if isinstance(x, (int, Fraction)):
            return self.scalar(x)
        if isinstance(x, str):
            from .expr import parse_element
            return parse_element(self, x)
        raise ArgumentError(f"cannot interpret {x!r} in {self}")

    def embed(self, x: "Element") -> "Element":
        """Reinterpret ``x`` by generator names (its generators must exist here)."""
        src = x.alg
        try:
            pos = [self.index[g.name] for g in src.gens]
        except KeyError as exc:
            raise ArgumentError(f"generator {exc} not present in target algebra") from None
        # the relative order of source generators must be preserved for signs to agree
        out: dict = {}
        order_ok = pos == sorted(pos)
        for m, c in x.terms.items():
            res = self.one()
            if order_ok:
                t = [0] * self.n
                for i, e in enumerate(m):
                    t[pos[i]] += e
                t = tuple(t)
                if not self.mono_vanishes(t):
                    out[t] = out.get(t, 0) + c
                continue
            for i, e in enumerate(m):
                for _ in range(e):
                    res = res * Element(self, {self.gen_monomial(pos[i]): Fraction(1)})
            for k, v in res.terms.items():
                out[k] = out.get(k, 0) + c * v
        return Element(self, out)

    # -- differential -------------------------------------------------
    @property
    def d(self) -> "Derivation":
        if self._d is None:
            self._d = Derivation(self, {i: Element(self, t) for i, t in self._d_images.items()},
                                 parity=1)
        return self._d

    def d_image(self, name: str) -> "Element":
        return Element(self, self._d_images.get(self.index[name], {}))

    def differential_map(self) -> dict[str, "Element"]:
        return {g.name: self.d_image(g.name) for g in self.gens}

    def with_differential(self, images) -> "GradedAlgebra":
        return GradedAlgebra(self.gens, self.relations, self.weight_cap, images, self.name)

    def with_cap(self, cap: int | None) -> "GradedAlgebra":
        imgs = lambda alg: {g.name: Element(alg, self._d_images.get(i, {}))
                            for i, g in enumerate(self.gens)}
        return GradedAlgebra(self.gens, self.relations, cap, imgs, self.name)

    # -- enumeration --------------------------------------------------
    @property
    def is_finite(self) -> bool:
        for g in self.gens:
            if not g.bounded and not (g.weight > 0 and self.weight_cap is not None):
                return False
        return True

    def basis(self, window: int | None = None, degree: int | None = None,
              form: int | None = None, weight: int | None = None) -> list[Monomial]:
        """Nonzero monomials, optionally filtered.

        ``window`` bounds the total exponent of generators that are neither
        nilpotent nor weight-capped (polynomial variables).
        """
        free = [i for i, g in enumerate(self.gens)
                if not g.bounded and not (g.weight > 0 and self.weight_cap is not None)]
        if free and window is None:
            raise WindowError(f"{self} is infinite-dimensional; a window is required")
        ranges = []
        for i, g in enumerate(self.gens):
            if g.parity:
                ranges.append(range(2))
            elif g.nil is not None:
                ranges.append(range(g.nil))
            elif i in free:
                ranges.append(range(window + 1))
            else:
                ranges.append(range(self.weight_cap // g.weight + 1))
        out = []
        for m in iproduct(*ranges):
            if free and sum(m[i] for i in free) > window:
                continue
            if self.mono_vanishes(m):
                continue
            if degree is not None and self.mono_degree(m) != degree:
                continue
            if form is not None and self.mono_form(m) != form:
                continue
            if weight is not None and self.mono_weight(m) != weight:
                continue
            out.append(m)
        out.sort(key=lambda m: (self.mono_weight(m), sum(m), tuple(-e for e in m)))
        return out

    def free_degree(self, m: Monomial) -> int:
        return sum(e for e, g in zip(m, self.gens)
                   if not g.bounded and not (g.weight > 0 and self.weight_cap is not None))

    # -- constructions ------------------------------------------------
    def extend(self, new_gens: Iterable[Generator], differential=None,
               weight_cap: int | None = "same", relations: Iterable[Monomial] = (),
               name: str = "") -> "GradedAlgebra":
        """Add generators after the existing ones; old relations carry over."""
        new_gens = tuple(new_gens)
        k = len(new_gens)
        rels = [r + (0,) * k for r in self.relations] + list(relations)
        cap = self.weight_cap if weight_cap == "same" else weight_cap

        def images(alg):
            out = {}
            for i, g in enumerate(self.gens):
                if i in self._d_images:
                    out[g.name] = alg.embed(Element(self, self._d_images[i]))
            if differential is not None:
                extra = differential(alg) if callable(differential) else differential
                out.update(extra)
            return out

        return GradedAlgebra(self.gens + new_gens, rels, cap, images, name or self.name)


class Element:
    """Immutable sparse element; arithmetic follows the Koszul sign rule."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: GradedAlgebra, terms: Mapping[Monomial, Fraction]):
        self.alg = alg
        self.terms = {m: Fraction(c) for m, c in terms.items() if c != 0}

    # arithmetic
    def _other(self, other) -> "Element":
        if isinstance(other, Element):
            if other.alg is self.alg or other.alg.same_space(self.alg):
                return other
            raise ArgumentError(f"elements live in different algebras: {self.alg} / {other.alg}")
        return self.alg.scalar(other)

    def __add__(self, other):
        other = self._other(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Element(self.alg, t)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, Element):
            c = Fraction(other)
            return Element(self.alg, {m: c * v for m, v in self.terms.items()})
        other = self._other(other)
        alg = self.alg
        out: dict = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                r = alg.mono_mul(a, b)
                if r is None:
                    continue
                s, m = r
                out[m] = out.get(m, 0) + s * ca * cb
        return Element(alg, out)

    def __rmul__(self, other):
        c = Fraction(other)
        return Element(self.alg, {m: c * v for m, v in self.terms.items()})

    def __truediv__(self, other):
        return self * (1 / Fraction(other))

    def __pow__(self, k: int):
        out = self.alg.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Element):
            if not other.alg.same_space(self.alg):
                return False
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == self.alg.scalar(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    # grading
    def degrees(self) -> set[int]:
        return {self.alg.mono_degree(m) for m in self.terms}

    def homogeneous_degree(self) -> int | None:
        ds = self.degrees()
        if len(ds) > 1:
            raise ArgumentError(f"{self} is not homogeneous")
        return ds.pop() if ds else None

    def parity(self) -> int:
        ps = {self.alg.mono_parity(m) for m in self.terms}
        if len(ps) > 1:
            raise ArgumentError(f"{self} has mixed parity")
        return ps.pop() if ps else 0

    def weight_part(self, w: int) -> "Element":
        return Element(self.alg, {m: c for m, c in self.terms.items()
                                  if self.alg.mono_weight(m) == w})

    def truncate(self, max_weight: int) -> "Element":
        return Element(self.alg, {m: c for m, c in self.terms.items()
                                  if self.alg.mono_weight(m) <= max_weight})

    def filter(self, pred: Callable[[Monomial], bool]) -> "Element":
        return Element(self.alg, {m: c for m, c in self.terms.items() if pred(m)})

    def max_weight(self) -> int:
        return max((self.alg.mono_weight(m) for m in self.terms), default=-1)

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(tuple(m), Fraction(0))

    def constant(self) -> Fraction:
        return self.coefficient(self.alg.unit_monomial())

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (sum(m), m), reverse=False):
            c = self.terms[m]
            ms = self.alg.mono_str(m)
            if ms == "1":
                s = str(c)
            elif c == 1:
                s = ms
            elif c == -1:
                s = "-" + ms
            else:
                s = f"{c}*{ms}"
            parts.append(s)
        out = parts[0]
        for p in parts[1:]:
            out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        return out

    __repr__ = __str__


class Derivation:
    """Graded derivation of ``parity`` determined by its generator images."""

    def __init__(self, alg: GradedAlgebra, images: Mapping, parity: int):
        self.alg = alg
        self.parity = parity % 2
        self.images: dict[int, Element] = {}
        for k, v in images.items():
            i = alg.index[k] if isinstance(k, str) else k
            v = alg.coerce(v)
            if v.terms:
                self.images[i] = v
        self._cache: dict[Monomial, Element] = {}

    def on_monomial(self, m: Monomial, formal: bool = False) -> Element:
        if not formal:
            hit = self._cache.get(m)
            if hit is not None:
                return hit
        alg = self.alg
        out = alg.zero()
        for i, e in enumerate(m):
            if e == 0 or i not in self.images:
                continue
            pre = tuple(m[j] if j < i else 0 for j in range(alg.n))
            post = tuple(m[j] if j > i else 0 for j in range(alg.n))
            core = self.images[i] * e
            if e > 1:
                core = Element(alg, {alg.gen_monomial(i, e - 1): Fraction(1)}) * core \
                    if not alg.mono_vanishes(alg.gen_monomial(i, e - 1)) else alg.zero()
            sign = -1 if (self.parity and alg.mono_parity(pre)) else 1
            term = _mono_elem(alg, pre) * core * _mono_elem(alg, post)
            out = out + term * sign
        if not formal:
            self._cache[m] = out
        return out

    def __call__(self, x) -> Element:
        x = self.alg.coerce(x)
        out: dict = {}
        for m, c in x.terms.items():
            for k, v in self.on_monomial(m).terms.items():
                out[k] = out.get(k, 0) + c * v
        return Element(self.alg, out)

    def compose_square(self) -> dict[str, Element]:
        """Images of generators under ``D o D``."""
        return {self.alg.gens[i].name: self(self.images.get(i, self.alg.zero()))
                for i in range(self.alg.n)}


def _mono_elem(alg: GradedAlgebra, m: Monomial) -> Element:
    # prefixes/suffixes of a nonzero monomial never vanish except via the cap
    return Element(alg, {m: Fraction(1)}) if not alg.mono_vanishes(m) else alg.zero()


class AlgebraMap:
    """Unital algebra map given on generators (assumed parity preserving)."""

    def __init__(self, source: GradedAlgebra, target: GradedAlgebra, images: Mapping):
        self.source = source
        self.target = target
        self.images = []
        for g in source.gens:
            img = images.get(g.name, None)
            self.images.append(target.zero() if img is None else target.coerce(img))
        self._cache: dict = {}

    def on_monomial(self, m: Monomial) -> Element:
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        out = self.target.one()
        for i, e in enumerate(m):
            for _ in range(e):
                out = out * self.images[i]
                if not out.terms:
                    break
        self._cache[m] = out
        return out

    def __call__(self, x: Element) -> Element:
        x = self.source.coerce(x)
        out: dict = {}
        for m, c in x.terms.items():
            for k, v in self.on_monomial(m).terms.items():
                out[k] = out.get(k, 0) + c * v
        return Element(self.target, out)


def formal_derivative_of_relation(alg: GradedAlgebra, der: Derivation, r: Monomial) -> Element:
    """Apply ``der`` to a relation monomial without first reducing it to zero."""
    return der.on_monomial(r, formal=True)


def require_monomial_relation_closure(alg: GradedAlgebra, der: Derivation) -> list[Monomial]:
    """Derived relations making ``der`` well defined; raises for non-monomial ones."""
    extra = []
    for r in alg.relations:
        img = der.on_monomial(r, formal=True)
        if len(img.terms) > 1:
            raise UnsupportedError(f"relation {alg.mono_str(r)} differentiates to a non-monomial")
        extra.extend(img.terms)
    return extra
