"""Graded linear algebra: signs, symmetric powers, finite complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

from . import linalg
from .errors import ArgumentError, StructureError


@dataclass(frozen=True)
class Scalar:
    """``value * u**upow`` where ``u`` stands for 1/(-2*pi*i), never evaluated."""

    value: Fraction
    upow: int = 0

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return Scalar(self.value * other.value, self.upow + other.upow)
        return Scalar(self.value * Fraction(other), self.upow)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Scalar):
            other = Scalar(Fraction(other))
        if self.value == 0:
            return other
        if other.value == 0:
            return self
        if other.upow != self.upow:
            raise ArgumentError("cannot add scalars with different powers of u")
        return Scalar(self.value + other.value, self.upow)

    def __neg__(self):
        return Scalar(-self.value, self.upow)

    def __str__(self):
        if self.upow == 0:
            return str(self.value)
        return f"{self.value}*u^{self.upow}"


def koszul_sign(permutation: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of reordering ``x_0..x_{n-1}`` into ``x_{p[0]}, x_{p[1]}, ...``.

    ``degrees[i]`` is the degree of ``x_i``; each pair of elements whose
    relative order flips contributes ``(-1)**(deg*deg)``.
    """
    if len(permutation) != len(degrees):
        raise ArgumentError("permutation and degrees differ in length")
    if sorted(permutation) != list(range(len(permutation))):
        raise ArgumentError(f"not a permutation: {permutation}")
    odd = 0
    n = len(permutation)
    for i in range(n):
        pi = permutation[i]
        if degrees[pi] % 2 == 0:
            continue
        for j in range(i + 1, n):
            pj = permutation[j]
            if pi > pj and degrees[pj] % 2:
                odd ^= 1
    return -1 if odd else 1


def permutation_sign(permutation: Sequence[int]) -> int:
    return koszul_sign(permutation, [1] * len(permutation))


@dataclass(frozen=True)
class GradedModule:
    labels: tuple[str, ...]
    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.labels) != len(self.degrees):
            raise ArgumentError("labels and degrees differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ArgumentError("basis labels must be distinct")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def shift(self, k: int) -> "GradedModule":
        """``V[k]``: degree d becomes d - k."""
        return GradedModule(self.labels, tuple(d - k for d in self.degrees))


def sym_basis(module: GradedModule, weight: int) -> list[tuple[str, ...]]:
    """Ordered monomial basis of ``Sym^weight`` (odd labels square to zero)."""
    if weight < 0:
        raise ArgumentError("weight must be non-negative")
    out = []
    for combo in combinations_with_replacement(range(module.dim), weight):
        if any(combo[i] == combo[i + 1] and module.degrees[combo[i]] % 2
               for i in range(len(combo) - 1)):
            continue
        out.append(tuple(module.labels[i] for i in combo))
    return out


@dataclass(frozen=True)
class GradedMap:
    """Matrix of a homogeneous map; rows index the target, columns the source."""

    source: GradedModule
    target: GradedModule
    shift: int
    matrix: tuple[tuple[Fraction, ...], ...] = field(repr=False)

    def __post_init__(self):
        m = tuple(tuple(Fraction(x) for x in row) for row in self.matrix)
        if len(m) != self.target.dim or any(len(r) != self.source.dim for r in m):
            raise ArgumentError("matrix shape does not match modules")
        for i, row in enumerate(m):
            for j, x in enumerate(row):
                if x != 0 and self.target.degrees[i] != self.source.degrees[j] + self.shift:
                    raise ArgumentError(
                        f"entry ({self.target.labels[i]}, {self.source.labels[j]}) breaks degree")
        object.__setattr__(self, "matrix", m)

    def rows(self) -> linalg.Matrix:
        return [list(r) for r in self.matrix]

    def compose(self, first: "GradedMap") -> "GradedMap":
        """``self o first``."""
        if first.target != self.source:
            raise ArgumentError("maps are not composable")
        m = linalg.matmul(self.rows(), first.rows()) if self.source.dim else \
            linalg.zeros(self.target.dim, first.source.dim)
        return GradedMap(first.source, self.target, self.shift + first.shift, m)


@dataclass(frozen=True)
class CohomologyGroup:
    degree: int
    dimension: int
    representatives: tuple[tuple[Fraction, ...], ...]


def _kernel(rows, ncols):
    if not rows:
        return linalg.nullspace([], ncols)
    return linalg.nullspace(rows, ncols)


def cohomology(maps: Sequence[GradedMap], start_degree: int = 0) -> list[CohomologyGroup]:
    """Cohomology of ``C_0 -> C_1 -> ... -> C_n`` given by ``maps``.

    Raises StructureError at the first basis vector where ``d o d != 0``.
    """
    if not maps:
        return []
    for i in range(len(maps) - 1):
        if maps[i].target != maps[i + 1].source:
            raise ArgumentError(f"maps {i} and {i + 1} do not chain")
        dd = maps[i + 1].compose(maps[i])
        for j in range(dd.source.dim):
            if any(dd.matrix[r][j] != 0 for r in range(dd.target.dim)):
                raise StructureError("d^2 != 0", dd.source.labels[j])
    modules = [m.source for m in maps] + [maps[-1].target]
    groups = []
    for i, mod in enumerate(modules):
        out_rows = maps[i].rows() if i < len(maps) else []
        kernel = _kernel(out_rows, mod.dim) if mod.dim else []
        if i > 0 and maps[i - 1].source.dim:
            image = linalg.transpose(maps[i - 1].rows())
            image = [r for r in image if any(x != 0 for x in r)]
        else:
            image = []
        img_rank = linalg.rank(image) if image else 0
        reps = []
        span = list(image)
        current = img_rank
        for v in kernel:
            trial = span + [v]
            r = linalg.rank(trial)
            if r > current:
                span = trial
                current = r
                reps.append(tuple(linalg.primitive(v)))
        groups.append(CohomologyGroup(start_degree + i, len(kernel) - img_rank, tuple(reps)))
    return groups


def euler_characteristic(dims: Sequence[int], start_degree: int = 0) -> int:
    return sum((-1) ** (start_degree + i) * d for i, d in enumerate(dims))
