"""Verification reports shared by the structural checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import StructureError


@dataclass
class Check:
    name: str
    passed: bool
    witness: Any = None
    asserted: bool = True  # False when a hypothesis of the identity does not hold

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "asserted": self.asserted}
        if self.witness is not None:
            out["witness"] = str(self.witness)
        return out


@dataclass
class Report:
    subject: str = ""
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, witness=None, asserted: bool = True) -> bool:
        self.checks.append(Check(name, bool(passed), None if passed else witness, asserted))
        return passed

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    def __bool__(self) -> bool:
        return self.ok

    def first_failure(self) -> Check | None:
        for c in self.checks:
            if c.asserted and not c.passed:
                return c
        return None

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def raise_if_failed(self):
        bad = self.first_failure()
        if bad is not None:
            raise StructureError(bad.name, bad.witness)
        return self

    def to_dict(self) -> dict:
        return {"subject": self.subject, "ok": self.ok,
                "checks": [c.to_dict() for c in self.checks]}
