"""Catalog of example objects stored as description files under ``data/``."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import FixtureNotFound, UnsupportedError
from .fileformat import Description, parse


@dataclass(frozen=True)
class FixtureInfo:
    name: str
    kind: str
    note: str
    mutation: tuple | None = None  # (k, key, target, delta) expected to break the structure
    tags: tuple = field(default_factory=tuple)


CATALOG = {f.name: f for f in [
    FixtureInfo("zero-linf", "linf", "zero algebra over the de Rham model of the line; C*(0) is the base"),
    FixtureInfo("sl2-lambda", "linf", "sl2 over a two-variable Grassmann base",
                (2, ("h", "e"), "e", 1), ("mc",)),
    FixtureInfo("heisenberg-curved", "linf", "Heisenberg algebra with central curvature t1 t2 z",
                (0, (), "p", "t1*t2"), ("mc", "curved")),
    FixtureInfo("sl2z-obstructed", "linf", "sl2 plus centre, curvature on the centre: obstructed",
                (2, ("h", "e"), "e", 1), ("mc", "curved", "obstructed")),
    FixtureInfo("abelian-gauge", "linf", "abelian complex w -> x over one Grassmann variable",
                (1, ("x",), "y", 1), ("mc", "gauge")),
    FixtureInfo("gl11-inner", "linf", "gl(1|1) with inner differential over a Grassmann base",
                (2, ("a", "q"), "q", 1), ("mc",)),
    FixtureInfo("ntilde-gl11", "linf", "gl(1|1) extended over the de Rham model of the plane",
                (1, ("p",), "a", 1), ("display",)),
    FixtureInfo("sl2-point", "algebroid", "sl2 as an algebroid over a point"),
    FixtureInfo("aff2-point", "algebroid", "two-dimensional nonabelian Lie algebra"),
    FixtureInfo("abelian1-point", "algebroid", "abelian rank one over a point"),
    FixtureInfo("abelian2-point", "algebroid", "abelian rank two over a point"),
    FixtureInfo("tangent-Qx", "algebroid", "tangent algebroid of the line"),
    FixtureInfo("tangent-Qx-N3", "algebroid", "tangent algebroid of the line, jets to order 3"),
    FixtureInfo("rotation-Qxy", "algebroid", "action algebroid of the rotation field"),
    FixtureInfo("aff2-defining", "lmodule", "defining representation of the nonabelian algebra"),
    FixtureInfo("broken-rep", "lmodule", "frame action that is not a representation"),
    FixtureInfo("sl2-standard", "lmodule", "standard representation of sl2"),
    FixtureInfo("sl2-trivial2", "lmodule", "rank two trivial sl2 module"),
    FixtureInfo("rotation-line", "lmodule", "line bundle with frame action x over the rotation algebroid"),
    FixtureInfo("lambda-theta", "connection", "rank one module over a Grassmann algebra, d_M m = th m"),
    FixtureInfo("plane-nonflat", "connection", "non-flat connection over the de Rham model of the plane"),
]}

STUBS = {
    "holomorphic-dolbeault": "Dolbeault models of complex manifolds are infinite dimensional and "
                             "are not represented at finite rank.",
    "holomorphic-formal-neighbourhood": "The Dolbeault algebra of a formal neighbourhood needs "
                                        "smooth functions and is not represented at finite rank.",
}


def fixture_names(kind: str | None = None, tag: str | None = None) -> list[str]:
    return [n for n, f in CATALOG.items()
            if (kind is None or f.kind == kind) and (tag is None or tag in f.tags)]


def fixture_text(name: str) -> str:
    if name in STUBS:
        raise UnsupportedError(STUBS[name])
    if name not in CATALOG:
        raise FixtureNotFound(name)
    return resources.files("linfalg").joinpath("data", name + ".lfa").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_fixture(name: str, verify: bool = True) -> Description:
    return parse(fixture_text(name), verify=verify)
