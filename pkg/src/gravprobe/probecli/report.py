"""Validation report: closed-form vs oracle records with pass flags."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

COLUMNS = ("name", "closed_form", "oracle", "relative_error", "tolerance", "passed")


@dataclass(frozen=True)
class CheckRecord:
    name: str
    closed_form: float
    oracle: float
    tolerance: float

    @property
    def relative_error(self) -> float:
        ref = abs(self.closed_form)
        diff = abs(self.oracle - self.closed_form)
        if ref == 0.0:
            return diff
        return diff / ref

    @property
    def passed(self) -> bool:
        err = self.relative_error
        return not math.isnan(err) and err <= self.tolerance

    def row(self) -> tuple:
        return (self.name, float(self.closed_form), float(self.oracle),
                float(self.relative_error), float(self.tolerance), self.passed)


@dataclass
class ValidationReport:
    records: list = field(default_factory=list)
    tolerance_override: float | None = None

    def add(self, name: str, closed_form: float, oracle: float, tolerance: float) -> CheckRecord:
        tol = self.tolerance_override if self.tolerance_override is not None else tolerance
        rec = CheckRecord(name, float(closed_form), float(oracle), float(tol))
        self.records.append(rec)
        return rec

    def extend(self, other: "ValidationReport") -> None:
        self.records.extend(other.records)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def rows(self) -> list:
        return [r.row() for r in self.records]
