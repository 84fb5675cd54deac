"""Recursive-descent parser for polynomial expressions.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ['^' INT]
    atom   := INT | NAME | '(' expr ')'

Division is only allowed by rational constants, so ``3/4*x`` and ``x/2``
parse but ``1/x`` does not.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Mapping

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def tokenize(text: str, line: int = 1, col0: int = 1):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            toks.append(("int", m.group(1), col0 + start))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), col0 + start))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", line, col0 + start)
            toks.append(("op", ch, col0 + start))
        pos = m.end()
    toks.append(("end", "", col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text, lookup, const, line, col0):
        self.toks = tokenize(text, line, col0)
        self.i = 0
        self.lookup = lookup
        self.const = const
        self.line = line

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        v = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return v

    def expr(self):
        sign = 1
        if self.peek() in (("op", "+", self.peek()[2]), ("op", "-", self.peek()[2])):
            sign = -1 if self.take()[1] == "-" else 1
        val = self.term()
        if sign < 0:
            val = -val
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()
            if op[1] == "*":
                val = val * self.factor()
            else:
                tok = self.peek()
                den = self.factor()
                c = _as_constant(den)
                if c is None or c == 0:
                    self.error("division only by nonzero rational constants", tok)
                val = val * (1 / c)
        return val

    def factor(self):
        base = self.atom()
        if self.peek() == ("op", "^", self.peek()[2]):
            self.take()
            tok = self.take()
            if tok[0] != "int":
                self.error("exponent must be a non-negative integer", tok)
            e = int(tok[1])
            out = self.const(1)
            for _ in range(e):
                out = out * base
            return out
        return base

    def atom(self):
        tok = self.take()
        if tok[0] == "int":
            return self.const(int(tok[1]))
        if tok[0] == "name":
            v = self.lookup(tok[1])
            if v is None:
                raise ParseError(f"unknown symbol {tok[1]!r}", self.line, tok[2])
            return v
        if tok == ("op", "(", tok[2]):
            v = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                raise ParseError("expected ')'", self.line, close[2])
            return v
        raise ParseError(f"unexpected {tok[1] or 'end of input'!r}", self.line, tok[2])


def _as_constant(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    terms = getattr(v, "terms", None)
    if terms is None:
        return None
    if not terms:
        return Fraction(0)
    if len(terms) == 1:
        (m, c), = terms.items()
        if not any(m):
            return c
    return None


def parse_expression(text: str, lookup: Callable[[str], object],
                     const: Callable[[int], object], line: int = 1, col0: int = 1):
    """Parse ``text`` with names resolved by ``lookup`` and integers by ``const``."""
    return _Parser(text, lookup, const, line, col0).parse()


def parse_element(alg, text: str, extra: Mapping | None = None, line: int = 1, col0: int = 1):
    """Parse an element of ``alg``; ``extra`` adds names bound to elements."""
    extra = extra or {}

    def lookup(name):
        if name in extra:
            return extra[name]
        if name in alg.index:
            return alg.gen(name)
        return None

    return parse_expression(text, lookup, alg.scalar, line, col0)


def parse_rational(text: str, line: int = 1, col0: int = 1) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational literal {text.strip()!r}", line, col0) from None
