"""Structured, range-qualified verdicts shared by the diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

EXIT_CODES = {HOLDS: 0, "dominated": 0, FAILS: 1, "not_dominated": 1, INCONCLUSIVE: 2}


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray) and x.ndim > 0:
        return [_jsonable(v) for v in x.tolist()]
    if hasattr(x, "item") and callable(x.item):
        return _jsonable(x.item())
    return x


@dataclass(frozen=True)
class Verdict:
    """Outcome of a sampled check.  Never a proof: ``sample_range`` says where it was looked at."""

    status: str
    value: float | None = None
    witness: Any = None
    sample_range: Any = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in (HOLDS, "dominated")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.status, 2)

    def to_dict(self):
        return _jsonable(
            {
                "status": self.status,
                "value": self.value,
                "witness": self.witness,
                "sample_range": self.sample_range,
                "reason": self.reason,
                "details": self.details,
            }
        )


def combine(verdicts):
    """fails if any part fails, else inconclusive if any part is, else holds."""
    statuses = [v.status for v in verdicts]
    if any(s in (FAILS, "not_dominated") for s in statuses):
        return FAILS
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return HOLDS


jsonable = _jsonable
