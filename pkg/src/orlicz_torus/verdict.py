"""Three-valued outcome for inequality and convergence checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check.

    ``margin`` is the slack of a satisfied inequality (or the finite bound of a
    convergent series), ``witness`` carries whatever exhibits a failure, and
    ``lower``/``upper`` bracket the quantity when neither side is certified.
    """

    status: str
    margin: Optional[float] = None
    witness: Any = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"unknown verdict status {self.status!r}")

    @classmethod
    def holds(cls, margin=None, **notes):
        return cls(HOLDS, margin=margin, notes=notes)

    @classmethod
    def fails(cls, witness=None, **notes):
        return cls(FAILS, witness=witness, notes=notes)

    @classmethod
    def inconclusive(cls, lower=None, upper=None, **notes):
        return cls(INCONCLUSIVE, lower=lower, upper=upper, notes=notes)

    @property
    def ok(self) -> bool:
        return self.status == HOLDS

    @property
    def failed(self) -> bool:
        return self.status == FAILS

    def to_dict(self) -> dict:
        out = {"status": self.status}
        for key in ("margin", "witness", "lower", "upper"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.notes:
            out["notes"] = dict(self.notes)
        return out
