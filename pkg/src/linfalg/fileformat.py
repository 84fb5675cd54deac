"""Reader and canonical printer for algebra description files.

Grammar (EBNF)::

    file     := { blank | comment | header | entry }
    comment  := '#' { any }
    header   := '[' section ']'
    section  := 'scalars' | 'algebra' | 'ideal' | 'module' | 'brackets'
              | 'algebroid' | 'connection'
    entry    := key '=' value
    key      := NAME
              | 'd' NAME                           (differential, algebra or dgla module)
              | 'l' INT '(' [ NAME { ',' NAME } ] ')'   (bracket, linf convention)
              | 'l0'                               (curvature, linf convention)
              | '[' NAME ',' NAME ']'              (Lie bracket: dgla module or algebroid)
              | 'curvature'                        (dgla convention)
              | 'rho' '(' NAME ',' NAME ')'        (anchor component)
              | 'gamma' '(' NAME ')'               (frame action matrix)
    genlist  := [ NAME ':' INT { ',' NAME ':' INT } ]
    namelist := [ NAME { ',' NAME } ]
    matrix   := row { ';' row }
    row      := expr { ',' expr }

``expr`` is the polynomial grammar of :mod:`linfalg.expr`.  Bracket values
are linear in the module basis, e.g. ``(t1*t2)*z - p``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .algebra import Element, Generator, GradedAlgebra
from .algebroid import AlgebroidModel, check_algebroid, polynomial_ring
from .atiyah import ConnectionData, DgModule, LModule
from .errors import ParseError, StructureError
from .expr import parse_element, parse_rational
from .linf import CurvedLinf, check_structure, from_dgla
from .nilcdga import NilCdga, check_nilcdga

SECTIONS = ("scalars", "algebra", "ideal", "module", "brackets", "algebroid", "connection")
_HEADER = re.compile(r"^\[\s*([A-Za-z]+)\s*\]$")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class Entry:
    key: str
    value: str
    line: int
    col: int  # column of the value


@dataclass
class Description:
    name: str = ""
    scalars: dict[str, Fraction] = field(default_factory=dict)
    algebra: GradedAlgebra | None = None
    window: int | None = None
    base: NilCdga | None = None
    linf: CurvedLinf | None = None
    algebroid: AlgebroidModel | None = None
    jet_order: int | None = None
    lmodule: LModule | None = None
    connection: ConnectionData | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def kinds(self) -> list[str]:
        out = []
        for k in ("base", "linf", "algebroid", "lmodule", "connection"):
            if getattr(self, k) is not None:
                out.append(k)
        return out


def _split_sections(text: str) -> dict[str, list[Entry]]:
    out: dict[str, list[Entry]] = {}
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        stripped = body.strip()
        m = _HEADER.match(stripped)
        if m and "=" not in stripped:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", ln, raw.index("[") + 1)
            if name in out:
                raise ParseError(f"duplicate section [{name}]", ln, raw.index("[") + 1)
            current = name
            out[name] = []
            continue
        if "=" not in body:
            raise ParseError("expected 'key = value'", ln, len(raw) - len(raw.lstrip()) + 1)
        if current is None:
            raise ParseError("entry outside of any section", ln, 1)
        k, v = body.split("=", 1)
        vcol = len(k) + 2 + (len(v) - len(v.lstrip()))
        out[current].append(Entry(" ".join(k.split()), v.strip(), ln, vcol))
    return out


def _names(e: Entry) -> list[str]:
    if not e.value:
        return []
    out = []
    col = e.col
    for part in e.value.split(","):
        nm = part.strip()
        if not _NAME.match(nm):
            raise ParseError(f"expected a name, got {nm!r}", e.line, col)
        out.append(nm)
        col += len(part) + 1
    return out


def _genlist(e: Entry) -> list[tuple[str, int]]:
    out = []
    if not e.value:
        return out
    col = e.col
    for part in e.value.split(","):
        if ":" not in part:
            raise ParseError("expected 'name : degree'", e.line, col)
        nm, deg = part.split(":", 1)
        nm = nm.strip()
        if not _NAME.match(nm):
            raise ParseError(f"bad generator name {nm!r}", e.line, col)
        try:
            out.append((nm, int(deg.strip())))
        except ValueError:
            raise ParseError(f"bad degree {deg.strip()!r}", e.line, col + len(nm) + 1) from None
        col += len(part) + 1
    return out


def _int(e: Entry) -> int:
    try:
        return int(e.value)
    except ValueError:
        raise ParseError(f"expected an integer, got {e.value!r}", e.line, e.col) from None


def _args(key: str, head: str, e: Entry) -> list[str]:
    m = re.match(rf"^{head}\s*\((.*)\)$", key)
    if not m:
        raise ParseError(f"malformed key {key!r}", e.line, 1)
    inner = m.group(1).strip()
    parts = [p.strip() for p in inner.split(",")] if inner else []
    for p in parts:
        if not _NAME.match(p):
            raise ParseError(f"expected a name, got {p!r}", e.line, 1)
    return parts


def _bracket_key(key: str, e: Entry) -> tuple[str, str] | None:
    m = re.match(r"^\[\s*([A-Za-z_]\w*)\s*,\s*([A-Za-z_]\w*)\s*\]$", key)
    return (m.group(1), m.group(2)) if m else None


class _Reader:
    def __init__(self, text: str, verify: bool, weight_cap: int):
        self.sec = _split_sections(text)
        self.verify = verify
        self.weight_cap = weight_cap
        self.desc = Description()

    def consts(self, alg) -> dict:
        return {k: alg.scalar(v) for k, v in self.desc.scalars.items()}

    def element(self, alg, e: Entry, text: str | None = None, col: int | None = None) -> Element:
        return parse_element(alg, e.value if text is None else text, self.consts(alg),
                             e.line, e.col if col is None else col)

    def run(self) -> Description:
        for e in self.sec.get("scalars", []):
            if not _NAME.match(e.key):
                raise ParseError(f"bad scalar name {e.key!r}", e.line, 1)
            self.desc.scalars[e.key] = parse_rational(e.value, e.line, e.col)
        if "algebra" in self.sec:
            self.read_algebra()
        if "ideal" in self.sec:
            self.read_ideal()
        if "module" in self.sec:
            self.read_module()
        elif "brackets" in self.sec:
            e = self.sec["brackets"][0] if self.sec["brackets"] else None
            raise ParseError("[brackets] needs a [module] section", e.line if e else None, 1)
        if "algebroid" in self.sec:
            self.read_algebroid()
        if "connection" in self.sec:
            self.read_connection()
        return self.desc

    # -- [algebra] / [ideal] --------------------------------------------------
    def read_algebra(self):
        gens, rels, diffs, name, window = [], [], [], "", None
        for e in self.sec["algebra"]:
            if e.key == "name":
                name = e.value
            elif e.key == "gens":
                gens = _genlist(e)
            elif e.key == "relations":
                rels.append(e)
            elif e.key == "window":
                window = _int(e)
            elif e.key.startswith("d "):
                diffs.append(e)
            else:
                raise ParseError(f"unknown key {e.key!r} in [algebra]", e.line, 1)
        if len(set(n for n, _ in gens)) != len(gens):
            raise StructureError("distinct generator names", [n for n, _ in gens])
        free = GradedAlgebra([Generator(n, d) for n, d in gens], name=name)
        relations = []
        for e in rels:
            col = e.col
            for part in e.value.split(","):
                x = self.element(free, e, part, col)
                if len(x.terms) != 1 or list(x.terms.values())[0] != 1:
                    raise ParseError("relations must be monomials", e.line, col)
                relations.append(next(iter(x.terms)))
                col += len(part) + 1
        base = GradedAlgebra(free.gens, relations, name=name)
        images = {}
        for e in diffs:
            g = e.key[2:].strip()
            if g not in base.index:
                raise ParseError(f"unknown generator {g!r}", e.line, 3)
            images[g] = e

        def differential(alg):
            return {g: self.element(alg, e) for g, e in images.items()}

        self.desc.algebra = GradedAlgebra(base.gens, relations, None, differential, name)
        self.desc.window = window
        self.desc.name = self.desc.name or name

    def read_ideal(self):
        alg = self.desc.algebra
        if alg is None:
            raise ParseError("[ideal] needs an [algebra] section", self.sec["ideal"][0].line, 1)
        gens, order = [], 0
        for e in self.sec["ideal"]:
            if e.key == "gens":
                col = e.col
                for part in e.value.split(",") if e.value else []:
                    gens.append(self.element(alg, e, part, col))
                    col += len(part) + 1
            elif e.key == "order":
                order = _int(e)
            else:
                raise ParseError(f"unknown key {e.key!r} in [ideal]", e.line, 1)
        A = NilCdga(alg, gens, order, self.desc.window, alg.name)
        if self.verify:
            check_nilcdga(A)
        self.desc.base = A

    def _ensure_base(self) -> NilCdga:
        if self.desc.base is None:
            if self.desc.algebra is None:
                self.desc.algebra = GradedAlgebra([], name="Q")
            self.desc.base = NilCdga(self.desc.algebra, [], 0, self.desc.window,
                                     self.desc.algebra.name)
        return self.desc.base

    # -- [module] / [brackets] ------------------------------------------------
    def vector(self, A: GradedAlgebra, labels: list[str], e: Entry) -> dict[str, Element]:
        clash = [l for l in labels if l in A.index or l in self.desc.scalars]
        if clash:
            raise StructureError("basis labels distinct from generators", clash)
        aux = A.extend([Generator(l, 0, weight=1) for l in labels], weight_cap="same")
        x = self.element(aux, e)
        n = A.n
        out: dict[str, Element] = {}
        for m, c in x.terms.items():
            lab = [i for i, k in enumerate(m[n:]) if k]
            if len(lab) != 1 or m[n + lab[0]] != 1:
                raise ParseError("value must be linear in the module basis", e.line, e.col)
            j = labels[lab[0]]
            term = Element(A, {tuple(m[:n]): c})
            out[j] = out[j] + term if j in out else term
        return {j: v for j, v in out.items() if not v.is_zero()}

    def read_module(self):
        A = self._ensure_base()
        name, basis, conv = "", [], "linf"
        for e in self.sec["module"]:
            if e.key == "name":
                name = e.value
            elif e.key == "basis":
                basis = _genlist(e)
            elif e.key == "convention":
                if e.value not in ("linf", "dgla"):
                    raise ParseError("convention must be linf or dgla", e.line, e.col)
                conv = e.value
            else:
                raise ParseError(f"unknown key {e.key!r} in [module]", e.line, 1)
        labels = [n for n, _ in basis]
        degrees = [d for _, d in basis]
        alg = A.algebra
        entries = self.sec.get("brackets", [])
        if conv == "linf":
            br: dict = {}
            for e in entries:
                if e.key == "l0":
                    args = []
                else:
                    m = re.match(r"^l(\d+)\s*\(", e.key)
                    if not m:
                        raise ParseError(f"expected lk(...), got {e.key!r}", e.line, 1)
                    args = _args(e.key, "l" + m.group(1), e)
                    if len(args) != int(m.group(1)):
                        raise ParseError("arity does not match the bracket", e.line, 1)
                for a in args:
                    if a not in labels:
                        raise ParseError(f"unknown basis element {a!r}", e.line, 1)
                br.setdefault(len(args), {})[tuple(args)] = self.vector(alg, labels, e)
            L = CurvedLinf(A, labels, degrees, br, name)
        else:
            diff, bra, curv = {}, {}, None
            for e in entries:
                pair = _bracket_key(e.key, e)
                if e.key == "curvature":
                    curv = self.vector(alg, labels, e)
                elif e.key.startswith("d "):
                    diff[e.key[2:].strip()] = self.vector(alg, labels, e)
                elif pair:
                    bra[pair] = self.vector(alg, labels, e)
                else:
                    raise ParseError(f"unknown key {e.key!r} in [brackets]", e.line, 1)
            L = from_dgla(A, labels, degrees, diff, bra, curv, name)
        if self.verify:
            check_structure(L, self.weight_cap, chains=False).raise_if_failed()
        self.desc.linf = L
        self.desc.name = name or self.desc.name

    # -- [algebroid] --------------------------------------------------------
    def read_algebroid(self):
        name, variables, frame = "", [], []
        anchors, brackets = [], []
        for e in self.sec["algebroid"]:
            if e.key == "name":
                name = e.value
            elif e.key == "variables":
                variables = _names(e)
            elif e.key == "frame":
                frame = _names(e)
            elif e.key == "jet_order":
                self.desc.jet_order = _int(e)
            elif e.key == "window":
                self.desc.window = _int(e)
            elif e.key.startswith("rho"):
                anchors.append(e)
            elif _bracket_key(e.key, e):
                brackets.append(e)
            else:
                raise ParseError(f"unknown key {e.key!r} in [algebroid]", e.line, 1)
        R = polynomial_ring(variables)
        anchor: dict = {}
        for e in anchors:
            f, v = _args(e.key, "rho", e)
            if f not in frame or v not in variables:
                raise ParseError(f"unknown frame element or variable in {e.key!r}", e.line, 1)
            anchor.setdefault(f, {})[v] = self.element(R, e)
        br: dict = {}
        frame_alg = polynomial_ring(variables)
        for e in brackets:
            a, b = _bracket_key(e.key, e)
            if a not in frame or b not in frame:
                raise ParseError(f"unknown frame element in {e.key!r}", e.line, 1)
            br[(a, b)] = self.vector(frame_alg, frame, e)
        M = AlgebroidModel(R, frame, anchor, br, name)
        if self.verify:
            check_algebroid(M).raise_if_failed()
        self.desc.algebroid = M
        self.desc.name = self.desc.name or name

    # -- [connection] -------------------------------------------------------
    def matrix(self, alg, e: Entry) -> list[list[Element]]:
        rows = []
        col = e.col
        for rtext in e.value.split(";"):
            row = []
            for part in rtext.split(","):
                row.append(self.element(alg, e, part, col))
                col += len(part) + 1
            rows.append(row)
        if any(len(r) != len(rows) for r in rows):
            raise ParseError("matrix must be square", e.line, e.col)
        return rows

    def read_connection(self):
        name, rank, gammas, theta, omega, rel = "", None, {}, None, None, []
        for e in self.sec["connection"]:
            if e.key == "name":
                name = e.value
            elif e.key == "rank":
                rank = _int(e)
            elif e.key.startswith("gamma"):
                (f,) = _args(e.key, "gamma", e)
                gammas[f] = e
            elif e.key == "theta":
                theta = e
            elif e.key == "omega":
                omega = e
            elif e.key == "relative":
                rel = _names(e)
            else:
                raise ParseError(f"unknown key {e.key!r} in [connection]", e.line, 1)
        M = self.desc.algebroid
        if M is not None:
            G = {}
            for f, e in gammas.items():
                if f not in M.frame:
                    raise ParseError(f"unknown frame element {f!r}", e.line, 1)
                G[f] = self.matrix(M.R, e)
                if rank is not None and len(G[f]) != rank:
                    raise ParseError(f"matrix is not {rank}x{rank}", e.line, e.col)
            self.desc.lmodule = LModule(M, rank or 1, G, name)
            return
        A = self._ensure_base()
        B = A.algebra
        th = self.matrix(B, theta) if theta else None
        mod = DgModule(A, th, rank or 1, name)
        if self.verify:
            mod.check().raise_if_failed()
        probe = ConnectionData(mod, None, rel, name)
        om = self.matrix(probe.Om, omega) if omega else None
        C = ConnectionData(mod, om, rel, name)
        if self.verify:
            C.check_leibniz().raise_if_failed()
        self.desc.connection = C


def parse(text: str, verify: bool = True, weight_cap: int = 4) -> Description:
    return _Reader(text, verify, weight_cap).run()


def parse_file(path, verify: bool = True, weight_cap: int = 4) -> Description:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), verify, weight_cap)


# -- canonical printer --------------------------------------------------------

def _vec(labels, row: dict) -> str:
    parts = [f"({row[j]})*{labels[j]}" for j in sorted(row)]
    return " + ".join(parts) if parts else "0"


def _mat(X) -> str:
    return "; ".join(", ".join(str(x) for x in row) for row in X)


def dumps(desc: Description) -> str:
    out: list[str] = []
    if desc.scalars:
        out.append("[scalars]")
        for k in sorted(desc.scalars):
            out.append(f"{k} = {desc.scalars[k]}")
        out.append("")
    alg = desc.base.algebra if desc.base is not None else desc.algebra
    if alg is not None and (alg.n or desc.connection is not None or desc.linf is not None):
        out.append("[algebra]")
        out.append(f"name = {alg.name}")
        out.append("gens = " + ", ".join(f"{g.name} : {g.degree}" for g in alg.gens))
        if alg.relations:
            out.append("relations = " + ", ".join(alg.mono_str(r) for r in alg.relations))
        for g in alg.gens:
            img = alg.d_image(g.name)
            if not img.is_zero():
                out.append(f"d {g.name} = {img}")
        if desc.window is not None and desc.algebroid is None:
            out.append(f"window = {desc.window}")
        out.append("")
    if desc.base is not None and (desc.base.ideal or desc.base.order):
        out.append("[ideal]")
        out.append("gens = " + ", ".join(str(g) for g in desc.base.ideal))
        out.append(f"order = {desc.base.order}")
        out.append("")
    L = desc.linf
    if L is not None:
        out.append("[module]")
        out.append(f"name = {L.name}")
        out.append("basis = " + ", ".join(f"{l} : {d}" for l, d in zip(L.labels, L.degrees)))
        out.append("convention = linf")
        out.append("")
        out.append("[brackets]")
        for k in sorted(L.brackets):
            for I in sorted(L.brackets[k]):
                row = L.brackets[k][I]
                key = "l0" if k == 0 else f"l{k}(" + ", ".join(L.labels[i] for i in I) + ")"
                out.append(f"{key} = {_vec(L.labels, row)}")
        out.append("")
    M = desc.algebroid
    if M is not None:
        out.append("[algebroid]")
        out.append(f"name = {M.name}")
        out.append("variables = " + ", ".join(M.variables))
        out.append("frame = " + ", ".join(M.frame))
        if desc.jet_order is not None:
            out.append(f"jet_order = {desc.jet_order}")
        if desc.window is not None:
            out.append(f"window = {desc.window}")
        for i in sorted(M.anchor):
            for v in sorted(M.anchor[i]):
                out.append(f"rho({M.frame[i]}, {v}) = {M.anchor[i][v]}")
        for i in range(M.rank):
            for j in range(i + 1, M.rank):
                row = M.c(i, j)
                if row:
                    out.append(f"[{M.frame[i]}, {M.frame[j]}] = {_vec(M.frame, row)}")
        out.append("")
    E = desc.lmodule
    if E is not None:
        out.append("[connection]")
        out.append(f"name = {E.name}")
        out.append(f"rank = {E.rank}")
        for i in sorted(E.gammas):
            G = E.gammas[i]
            if any(not x.is_zero() for row in G for x in row):
                out.append(f"gamma({E.M.frame[i]}) = {_mat(G)}")
        out.append("")
    C = desc.connection
    if C is not None:
        out.append("[connection]")
        out.append(f"name = {C.name}")
        out.append(f"rank = {C.rank}")
        if any(not x.is_zero() for row in C.module.theta for x in row):
            out.append(f"theta = {_mat(C.module.theta)}")
        if any(not x.is_zero() for row in C.omega for x in row):
            out.append(f"omega = {_mat(C.omega)}")
        if C.kahler.relative_to:
            out.append("relative = " + ", ".join(C.kahler.relative_to))
        out.append("")
    return "\n".join(out).rstrip() + "\n"
