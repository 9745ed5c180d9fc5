# reports.py

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional


def relative_residual(lhs, rhs, *scale_terms) -> float:
    """|lhs - rhs| over the largest magnitude among lhs, rhs and the extra scale terms."""
    scale = max([abs(lhs), abs(rhs)] + [abs(t) for t in scale_terms])
    if scale == 0.0:
        return 0.0
    return float(abs(lhs - rhs) / scale)


@dataclass
class IdentityCheck:
    """
    One verified relation. `relation` is the formula in words; `asserted` is
    False for quantities that are reported but do not gate the pass flag.
    """

    name: str
    relation: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    asserted: bool = True

    @property
    def passed(self) -> Optional[bool]:
        if not self.asserted:
            return None
        return bool(self.residual <= self.tolerance)


@dataclass
class FunctionalReport:
    name: str
    values: Dict[str, float] = field(default_factory=dict)
    checks: List[IdentityCheck] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)
    context: dict = field(default_factory=dict)

    def add(self, name, relation, lhs, rhs, tolerance, *scale_terms, asserted=True, residual=None):
        if residual is None:
            residual = relative_residual(lhs, rhs, *scale_terms)
        check = IdentityCheck(name, relation, float(lhs), float(rhs), float(residual), float(tolerance), asserted)
        self.checks.append(check)
        return check

    def check(self, name) -> IdentityCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    def failures(self) -> List[str]:
        return [c.name for c in self.checks if c.asserted and not c.passed]

    def merge(self, other: "FunctionalReport", prefix="") -> "FunctionalReport":
        for key, value in other.values.items():
            self.values[prefix + key] = value
        for item in other.checks:
            self.checks.append(IdentityCheck(
                prefix + item.name, item.relation, item.lhs, item.rhs, item.residual, item.tolerance, item.asserted,
            ))
        self.rows.extend(other.rows)
        return self
