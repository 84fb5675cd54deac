"""Command-line interface.

Exit codes: 0 success, 1 mathematical failure (structure error, obstruction,
missing gauge path), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algebroid import cohomology_L
from .atiyah import (atiyah, chern, induced_L_connection, jet_module_connection, mat_str,
                     primary_class, verify_atiyah_properties, SPLITTINGS)
from .errors import (ArgumentError, FixtureNotFound, LinfError, ParseError, PreconditionError,
                     StructureError, UnsupportedError, WindowError)
from .fileformat import Description, parse_file
from .fixtures import CATALOG, STUBS, load_fixture
from .jets import (DrLComplex, build_UL, enh_ce, grothendieck_connection, split_and_identify)
from .linf import ce_cochains, check_structure
from .mc import MCElement, gauge_path, path_is_valid, solve_tower

SCHEMA = "linfalg-report/1"
COMMANDS = ("validate", "ce-cohomology", "check-linf", "mc-solve", "gauge", "jets", "enh",
            "atiyah", "chern", "primary-class")


class UsageError(Exception):
    pass


class MathFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__(payload.get("reason", "failure"))
        self.payload = payload


def _clean(x):
    """Exact rational strings for every number; keys sorted on output."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, Fraction)):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return str(x)


def render(report: dict, fmt: str) -> str:
    report = _clean(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines: list[str] = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, list) and v and any(isinstance(i, (dict, list)) for i in v):
            for i, item in enumerate(v):
                walk(f"{prefix}[{i}]", item)
        else:
            lines.append(f"{prefix}: {v}")

    walk("", report)
    return "\n".join(lines) + "\n"


def load(target: str, verify: bool, weight_cap: int) -> Description:
    p = Path(target)
    if p.is_file():
        return parse_file(p, verify=verify, weight_cap=weight_cap)
    if target in STUBS:
        raise UnsupportedError(STUBS[target])
    if target in CATALOG:
        if verify and weight_cap == 4:
            return load_fixture(target)
        from .fileformat import parse
        from .fixtures import fixture_text
        return parse(fixture_text(target), verify=verify, weight_cap=weight_cap)
    raise FixtureNotFound(target)


def _need(desc: Description, kind: str):
    obj = getattr(desc, kind)
    if obj is None:
        raise UsageError(f"input has no {kind} section")
    return obj


def _vec_dict(L, v) -> dict:
    return {L.labels[j]: str(c) for j, c in sorted(v.items())}


def _parse_vec(L, text: str | None) -> dict:
    if not text or text == "zero":
        return {}
    out = {}
    for part in text.split(";"):
        if "=" not in part:
            raise UsageError(f"expected label=expr in {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _report_checks(rep) -> dict:
    return rep.to_dict()


# -- subcommands --------------------------------------------------------------

def cmd_validate(desc, args) -> dict:
    out = {"kinds": desc.kinds}
    if desc.linf is not None and args.verify:
        out["linf"] = check_structure(desc.linf, args.weight_cap).to_dict()
    if desc.algebroid is not None:
        from .algebroid import check_algebroid
        out["algebroid"] = check_algebroid(desc.algebroid).to_dict()
    if desc.lmodule is not None:
        out["representation"] = desc.lmodule.is_representation()
    if desc.connection is not None:
        out["connection"] = desc.connection.check_leibniz().to_dict()
    ok = all(v.get("ok", True) for v in out.values() if isinstance(v, dict))
    if not ok:
        raise MathFailure({"reason": "structure check failed", **out})
    return out


def cmd_ce_cohomology(desc, args) -> dict:
    if desc.algebroid is not None:
        M = desc.algebroid
        window = args.window if args.window is not None else desc.window
        groups = cohomology_L(M, window)
        return {"object": "algebroid", "dimensions": [g.dimension for g in groups],
                "window": {"polynomial_degree": window}}
    L = _need(desc, "linf")
    if L.is_curved():
        raise MathFailure({"reason": "curved: the CE differential does not square to zero on chains"})
    dims = ce_cochains(L, args.weight_cap).cohomology(args.window)
    return {"object": "linf", "dimensions": {str(k): v for k, v in sorted(dims.items())},
            "window": {"weight_cap": args.weight_cap, "polynomial_degree": args.window}}


def cmd_check_linf(desc, args) -> dict:
    L = _need(desc, "linf")
    rep = check_structure(L, args.weight_cap)
    out = {"report": rep.to_dict(), "window": {"weight_cap": args.weight_cap}}
    if not rep.ok:
        raise MathFailure({"reason": "structure check failed", **out})
    return out


def cmd_mc_solve(desc, args) -> dict:
    L = _need(desc, "linf")
    res = solve_tower(L, _parse_vec(L, args.seed), args.window)
    if isinstance(res, MCElement):
        return {"solution": _vec_dict(L, res.alpha), "is_mc": res.is_mc()}
    raise MathFailure({"reason": "obstructed", "level": res.level,
                       "cocycle": _vec_dict(L, res.cocycle), "closed": res.closed,
                       "class_nonzero": res.class_nonzero, "note": res.note})


def cmd_gauge(desc, args) -> dict:
    L = _need(desc, "linf")
    a, b = _parse_vec(L, args.source), _parse_vec(L, args.target)
    g = gauge_path(L, a, b, args.cap, args.window)
    if not g.found:
        raise MathFailure({"reason": g.reason or "no path found", "cap": args.cap})
    return {"a": _vec_dict(L, g.a), "b": _vec_dict(L, g.b), "cap": g.cap,
            "valid": path_is_valid(L, g, a, b)}


def cmd_jets(desc, args) -> dict:
    M = _need(desc, "algebroid")
    N = args.jet_order if args.jet_order is not None else (desc.jet_order or 3)
    window = args.window if args.window is not None else desc.window
    U = build_UL(M, N, verify=args.verify)
    G = grothendieck_connection(M, 1, max(N, 1))
    K = DrLComplex(M, N, 1, window)
    out = {"order": N, "pbw_rank": len(U.basis),
           "level_ranks": [len([w for w in U.basis if len(w) == k]) for k in range(N + 1)],
           "flat": G.check_flat(window or 0).ok,
           "cohomology": K.cohomology(),
           "faithful_weight": K.faithful_weight(),
           "window": {"jet_order": N, "polynomial_degree": window}}
    if K.faithful_weight() >= 0:
        out["faithful_cohomology"] = K.cohomology(K.faithful_weight())
    out["splitting"] = split_and_identify(M, N).check().ok
    return out


def cmd_enh(desc, args) -> dict:
    M = _need(desc, "algebroid")
    N = args.jet_order if args.jet_order is not None else (desc.jet_order or 2)
    window = args.window if args.window is not None else desc.window
    E = enh_ce(M, N, window, verify=args.verify)
    L = E.L
    brackets = {}
    for k in sorted(L.brackets):
        for I in sorted(L.brackets[k]):
            key = f"l{k}(" + ",".join(L.labels[i] for i in I) + ")"
            brackets[key] = _vec_dict(L, L.brackets[k][I])
    return {"brackets": brackets, "report": E.report.to_dict(),
            "window": {"jet_order": N, "polynomial_degree": window}}


def _connection(desc, args):
    if desc.lmodule is not None:
        N = args.jet_order if args.jet_order is not None else (desc.jet_order or 3)
        return jet_module_connection(desc.algebroid, desc.lmodule, N, args.splitting), N
    if desc.connection is not None:
        return desc.connection, None
    raise UsageError("input has no connection section")


def cmd_atiyah(desc, args) -> dict:
    C, N = _connection(desc, args)
    At = atiyah(C)
    out = {"atiyah": mat_str(At.matrix), "flat": C.flat,
           "properties": verify_atiyah_properties(C).to_dict()}
    if N is not None:
        ind = induced_L_connection(C, At)
        out["induced"] = ind.to_dict()
        out["window"] = {"jet_order": N, "splitting": args.splitting}
    if not out["properties"]["ok"]:
        raise MathFailure({"reason": "Atiyah properties fail", **out})
    return out


def cmd_chern(desc, args) -> dict:
    C, N = _connection(desc, args)
    ch = chern(C, args.k)
    out = {"k": args.k, "chern": ch.to_dict()}
    if N is not None:
        pc = primary_class(desc.algebroid, desc.lmodule, args.k, max(N, 2 * args.k),
                           desc.window, args.splitting)
        out["representative"] = pc.representative.to_dict()
        out["closed"] = pc.closed
        out["exact"] = pc.exact
        out["window"] = {"jet_order": max(N, 2 * args.k), "splitting": args.splitting}
    return out


def cmd_primary_class(desc, args) -> dict:
    M = _need(desc, "algebroid")
    E = _need(desc, "lmodule")
    N = args.jet_order if args.jet_order is not None else max(desc.jet_order or 0, 2 * args.k, 1)
    pc = primary_class(M, E, args.k, N, desc.window, args.splitting)
    out = pc.to_dict()
    out["window"] = {"jet_order": N, "splitting": args.splitting}
    return out


HANDLERS = {
    "validate": cmd_validate, "ce-cohomology": cmd_ce_cohomology, "check-linf": cmd_check_linf,
    "mc-solve": cmd_mc_solve, "gauge": cmd_gauge, "jets": cmd_jets, "enh": cmd_enh,
    "atiyah": cmd_atiyah, "chern": cmd_chern, "primary-class": cmd_primary_class,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="linfalg", description="Exact computations with curved L-infinity algebras.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input", help="fixture name or description file")
        s.add_argument("--weight-cap", type=int, default=4)
        s.add_argument("--jet-order", type=int, default=None)
        s.add_argument("--window", type=int, default=None)
        s.add_argument("--no-verify", dest="verify", action="store_false")
        s.add_argument("--format", choices=("json", "text"), default="json")
        if name == "mc-solve":
            s.add_argument("--seed", default="zero", help="'zero' or label=expr;label=expr")
        if name == "gauge":
            s.add_argument("--from", dest="source", default="zero")
            s.add_argument("--to", dest="target", default="zero")
            s.add_argument("--cap", type=int, default=4)
        if name in ("chern", "primary-class"):
            s.add_argument("--k", type=int, default=1)
        if name in ("atiyah", "chern", "primary-class"):
            s.add_argument("--splitting", choices=SPLITTINGS, default="symmetric")
    return p


def run(argv=None) -> tuple[int, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
    except UsageError as exc:
        return 2, f"usage error: {exc}\n"
    base = {"schema": SCHEMA, "command": args.command, "input": args.input}
    try:
        desc = load(args.input, args.verify, args.weight_cap)
        payload = HANDLERS[args.command](desc, args)
        code, report = 0, {**base, "status": "ok", **payload}
    except MathFailure as exc:
        code, report = 1, {**base, "status": "failure", **exc.payload}
    except (StructureError, PreconditionError) as exc:
        code, report = 1, {**base, "status": "failure", "reason": str(exc)}
    except (UsageError, ParseError, FixtureNotFound, WindowError, UnsupportedError,
            ArgumentError) as exc:
        msg = exc.args[0] if exc.args else ""
        return 2, f"error: {type(exc).__name__}: {msg}\n"
    except LinfError as exc:
        code, report = 1, {**base, "status": "failure", "reason": str(exc)}
    text = render(report, args.format)
    outdir = os.environ.get("LINFALG_OUTPUT_DIR")
    if outdir:
        name = Path(args.input).stem
        ext = "json" if args.format == "json" else "txt"
        Path(outdir).mkdir(parents=True, exist_ok=True)
        (Path(outdir) / f"{args.command}-{name}.{ext}").write_text(text, encoding="utf-8")
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    stream = sys.stdout if code != 2 else sys.stderr
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
