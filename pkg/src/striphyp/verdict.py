"""Three-valued verdicts for growth conditions."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    SUPPORTED = "NumericallySupported"


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of a condition check.

    ``Holds`` is only issued from symbolic knowledge, ``Fails`` always carries
    a numeric witness, and ``NumericallySupported`` records how far the grid
    evidence reaches.
    """
    status: Status
    witness: dict[str, Any] = field(default_factory=dict)
    evidence_range: float | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def positive(self) -> bool:
        """True for Holds and NumericallySupported."""
        return self.status is not Status.FAILS

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status.value}
        if self.witness:
            out["witness"] = {k: _plain(v) for k, v in self.witness.items()}
        if self.evidence_range is not None:
            out["evidence_range"] = float(self.evidence_range)
        if self.note:
            out["note"] = self.note
        return out


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if hasattr(v, "item"):
        return v.item()
    return v


def holds(**witness) -> ConditionVerdict:
    return ConditionVerdict(Status.HOLDS, dict(witness))


def fails(evidence_range: float | None = None, note: str = "", **witness) -> ConditionVerdict:
    return ConditionVerdict(Status.FAILS, dict(witness), evidence_range, note)


def supported(evidence_range: float | None = None, note: str = "", **witness) -> ConditionVerdict:
    return ConditionVerdict(Status.SUPPORTED, dict(witness), evidence_range, note)
