"""Risk combination, gap/spike deviation checks, and the flag decision.

All arithmetic is full precision. Reports and the console round online
and offline risks to whole percents before weighting and show the total
to one decimal; that presentation lives only in the assessment's display
triple and never feeds back into a decision.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Optional

Vector3 = tuple[float, float, float]


@dataclass(frozen=True)
class RiskTriple:
    online: float
    offline: float
    overall: float

    def __post_init__(self):
        for value in (self.online, self.offline, self.overall):
            if not 0.0 <= value <= 100.0:
                raise ValueError("risk components must be within [0, 100]")

    def as_tuple(self) -> Vector3:
        return (self.online, self.offline, self.overall)


@dataclass
class RiskAssessment:
    tid: str
    account_id: str
    outcome: str  # "passed_screen" | "scored"
    flagged: bool
    timestamp: str  # ISO-8601, injected by the pipeline clock
    triple: Optional[RiskTriple] = None
    display: Optional[Vector3] = None  # rounded presentation values
    gap: Optional[Vector3] = None
    spike: Optional[Vector3] = None
    reasons: list[dict] = field(default_factory=list)
    failed_standard_rules: frozenset[int] = field(default_factory=frozenset)
    causes_y: tuple[str, ...] = ()
    causes_x: tuple[str, ...] = ()
    persisted: bool = True

    def __post_init__(self):
        if self.outcome not in ("passed_screen", "scored"):
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.flagged and self.outcome != "scored":
            raise ValueError("only scored transactions can be flagged")
        if self.outcome == "passed_screen" and self.triple is not None:
            raise ValueError("screen-passing transactions carry no risk triple")


def combine_risk(r_online: float, r_offline: float, online_weight: float) -> float:
    """Weighted total risk; online_weight 1 reduces to the online risk alone."""
    if not 0.0 <= online_weight <= 1.0:
        raise ValueError("online weight must be within [0, 1]")
    return online_weight * r_online + (1.0 - online_weight) * r_offline


def display_triple(r_online: float, r_offline: float, online_weight: float) -> Vector3:
    """Presentation values: whole-percent inputs, one-decimal total."""
    online = round(r_online)
    offline = round(r_offline)
    total = round(combine_risk(online, offline, online_weight), 1)
    return (float(online), float(offline), float(total))


def compute_gap(current: RiskTriple, medians: Optional[RiskTriple]) -> Optional[Vector3]:
    """Componentwise excess over the category medians; None without history."""
    if medians is None:
        return None
    return (
        current.online - medians.online,
        current.offline - medians.offline,
        current.overall - medians.overall,
    )


def compute_spike(current: RiskTriple, previous: Optional[RiskTriple]) -> Optional[Vector3]:
    """Componentwise change from the account's previous scored transaction."""
    if previous is None:
        return None
    return (
        current.online - previous.online,
        current.offline - previous.offline,
        current.overall - previous.overall,
    )


def signals(vector: Optional[Vector3]) -> bool:
    """A deviation vector signals review when any component is positive."""
    return vector is not None and any(component > 0.0 for component in vector)


def decide(triple: RiskTriple, gap: Optional[Vector3], spike: Optional[Vector3],
           threshold: float) -> tuple[bool, list[dict]]:
    """Flag when the total risk strictly exceeds the threshold, or the
    gap or spike has a positive component. Returns every triggered reason.
    """
    if not 0.0 <= threshold <= 100.0:
        raise ValueError("threshold must be within [0, 100]")
    reasons = []
    if triple.overall > threshold:
        reasons.append({
            "code": "threshold_exceeded",
            "detail": f"overall risk {triple.overall:.3f}% above threshold {threshold:g}%",
        })
    if signals(gap):
        reasons.append({
            "code": "gap_positive",
            "detail": "risk above the category median: "
                      f"({gap[0]:+.3f}, {gap[1]:+.3f}, {gap[2]:+.3f})",
        })
    if signals(spike):
        reasons.append({
            "code": "spike_positive",
            "detail": "risk above the previous transaction: "
                      f"({spike[0]:+.3f}, {spike[1]:+.3f}, {spike[2]:+.3f})",
        })
    return bool(reasons), reasons


def feedback_offline(r_offline: float, r_total: float, alpha: float) -> float:
    """Exponential moving update of the stored offline risk toward r_total."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be within [0, 1]")
    updated = (1.0 - alpha) * r_offline + alpha * r_total
    return min(max(updated, 0.0), 100.0)


# --- serialization (audit log and HTTP payloads) --------------------------

def assessment_to_obj(a: RiskAssessment) -> dict:
    return {
        "tid": a.tid,
        "account_id": a.account_id,
        "outcome": a.outcome,
        "flagged": a.flagged,
        "timestamp": a.timestamp,
        "triple": list(a.triple.as_tuple()) if a.triple else None,
        "display": list(a.display) if a.display else None,
        "gap": list(a.gap) if a.gap else None,
        "spike": list(a.spike) if a.spike else None,
        "reasons": a.reasons,
        "failed_standard_rules": sorted(a.failed_standard_rules),
        "causes_y": list(a.causes_y),
        "causes_x": list(a.causes_x),
        "persisted": a.persisted,
    }


def assessment_from_obj(obj: dict) -> RiskAssessment:
    triple = RiskTriple(*obj["triple"]) if obj.get("triple") else None
    return RiskAssessment(
        tid=obj["tid"],
        account_id=obj["account_id"],
        outcome=obj["outcome"],
        flagged=obj["flagged"],
        timestamp=obj["timestamp"],
        triple=triple,
        display=tuple(obj["display"]) if obj.get("display") else None,
        gap=tuple(obj["gap"]) if obj.get("gap") else None,
        spike=tuple(obj["spike"]) if obj.get("spike") else None,
        reasons=list(obj.get("reasons", [])),
        failed_standard_rules=frozenset(obj.get("failed_standard_rules", [])),
        causes_y=tuple(obj.get("causes_y", ())),
        causes_x=tuple(obj.get("causes_x", ())),
        persisted=obj.get("persisted", True),
    )


def utc_now_iso() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="microseconds")
