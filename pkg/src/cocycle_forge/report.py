"""Pass/fail records produced by the property checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .exactq import QMatrix, QVector, format_q


def jsonable(value):
    """Convert nested exact values into JSON-ready structures."""
    if isinstance(value, QVector):
        return value.to_json()
    if isinstance(value, QMatrix):
        return value.to_json()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (str, bool)) or value is None:
        return value
    if isinstance(value, int):
        return value
    return format_q(value)


@dataclass
class Report:
    name: str
    passed: bool
    checked: int = 0
    counterexample: Optional[dict] = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexample": jsonable(self.counterexample),
            "details": jsonable(self.details),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        return cls(
            data["name"],
            data["passed"],
            data.get("checked", 0),
            data.get("counterexample"),
            data.get("details", {}),
        )

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} ({self.checked} checked)"
        if self.counterexample:
            text += f" witness={jsonable(self.counterexample)}"
        return text


def merge(name: str, reports) -> Report:
    reports = list(reports)
    failed = next((r for r in reports if not r.passed), None)
    return Report(
        name,
        failed is None,
        sum(r.checked for r in reports),
        None if failed is None else {"check": failed.name, **(failed.counterexample or {})},
        {"parts": [r.to_json() for r in reports]},
    )
