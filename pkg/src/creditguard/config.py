"""Declarative rule configuration: one JSON document drives the engine.

The built-in defaults encode the demo rule set: six standard rules, the
airline-purchase relevancy row, and five customer-cause adaptive rules
with their impact coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

STANDARD_RULE_KINDS = (
    "amount_vs_mean_sigma",
    "daily_count_vs_mean_sigma",
    "payment_within_due",
    "minimum_due_paid",
    "paid_covers_due",
    "location_proximity",
)

VALIDITY_PREDICATES = (
    "address_change",
    "air_ticket_purchase",
    "job_switch",
    "out_of_country",
    "foreign_worker",
)


@dataclass(frozen=True)
class StandardRule:
    id: int
    kind: str
    params: dict = field(default_factory=dict)

    def describe(self) -> str:
        return _RULE_DESCRIPTIONS[self.kind]


_RULE_DESCRIPTIONS = {
    "amount_vs_mean_sigma": "transaction amount within mean + stddev of past amounts",
    "daily_count_vs_mean_sigma": "transactions today within mean + stddev of daily counts",
    "payment_within_due": "payment made within due date",
    "minimum_due_paid": "minimum amount due paid",
    "paid_covers_due": "paid amount covers amount due",
    "location_proximity": "transaction near the customer's known location",
}


@dataclass(frozen=True)
class AdaptiveRule:
    id: int
    cause: str
    related_standard_rules: frozenset[int]
    impact: str  # display tier, e.g. "1x"
    impact_coefficient: float  # authoritative weight
    validity_predicate: str


@dataclass(frozen=True)
class RuleConfig:
    standard_rules: tuple[StandardRule, ...]
    relevancy: dict[str, frozenset[int]]
    adaptive_rules: tuple[AdaptiveRule, ...]
    online_weight: float  # weight of online risk in the total ("lambda")
    threshold_pct: float
    feedback_alpha: float
    proximity_km: float
    lookback_days: int
    strict_categories: bool = False

    @property
    def standard_rule_ids(self) -> frozenset[int]:
        return frozenset(r.id for r in self.standard_rules)

    def rule_by_id(self, rule_id: int) -> StandardRule:
        for rule in self.standard_rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)

    def validate(self) -> "RuleConfig":
        ids = [r.id for r in self.standard_rules]
        if len(set(ids)) != len(ids):
            raise ConfigError("standard rule ids must be unique")
        for rule in self.standard_rules:
            if rule.kind not in STANDARD_RULE_KINDS:
                raise ConfigError(f"unknown standard rule kind {rule.kind!r}")
        known = self.standard_rule_ids
        for category, rule_ids in self.relevancy.items():
            missing = rule_ids - known
            if missing:
                raise ConfigError(
                    f"relevancy for {category!r} references unknown rules {sorted(missing)}"
                )
        adaptive_ids = [r.id for r in self.adaptive_rules]
        if len(set(adaptive_ids)) != len(adaptive_ids):
            raise ConfigError("adaptive rule ids must be unique")
        for rule in self.adaptive_rules:
            if rule.impact_coefficient <= 0:
                raise ConfigError(f"adaptive rule {rule.id}: impact coefficient must be > 0")
            if not rule.related_standard_rules:
                raise ConfigError(f"adaptive rule {rule.id}: related standard rules empty")
            if rule.related_standard_rules - known:
                raise ConfigError(f"adaptive rule {rule.id}: references unknown standard rules")
            if rule.validity_predicate not in VALIDITY_PREDICATES:
                raise ConfigError(
                    f"adaptive rule {rule.id}: unknown predicate {rule.validity_predicate!r}"
                )
        if not 0.0 <= self.online_weight <= 1.0:
            raise ConfigError("lambda must be within [0, 1]")
        if not 0.0 <= self.threshold_pct <= 100.0:
            raise ConfigError("threshold_pct must be within [0, 100]")
        if not 0.0 <= self.feedback_alpha <= 1.0:
            raise ConfigError("feedback_alpha must be within [0, 1]")
        if self.proximity_km <= 0:
            raise ConfigError("proximity_km must be > 0")
        if self.lookback_days < 0:
            raise ConfigError("lookback_days must be >= 0")
        return self


def default_config() -> RuleConfig:
    return RuleConfig(
        standard_rules=(
            StandardRule(1, "amount_vs_mean_sigma"),
            StandardRule(2, "daily_count_vs_mean_sigma"),
            StandardRule(3, "payment_within_due"),
            StandardRule(4, "minimum_due_paid"),
            StandardRule(5, "paid_covers_due"),
            StandardRule(6, "location_proximity", {"radius_km": 100.0}),
        ),
        relevancy={"Airlines": frozenset({1, 2, 4, 6})},
        adaptive_rules=(
            AdaptiveRule(1, "Address change", frozenset({6}), "1x", 1.0, "address_change"),
            AdaptiveRule(2, "Air ticket purchase", frozenset({1, 2}), "1x", 1.0,
                         "air_ticket_purchase"),
            AdaptiveRule(3, "Job switch", frozenset({3}), "2x", 2.0, "job_switch"),
            AdaptiveRule(4, "Out of the country", frozenset({3, 4, 1, 6}), "2x", 2.0,
                         "out_of_country"),
            AdaptiveRule(5, "Foreign Worker", frozenset({3}), "2x", 2.0, "foreign_worker"),
        ),
        online_weight=0.7,
        threshold_pct=60.0,
        feedback_alpha=0.2,
        proximity_km=100.0,
        lookback_days=30,
    ).validate()


def config_to_obj(cfg: RuleConfig) -> dict:
    return {
        "standard_rules": [
            {"id": r.id, "kind": r.kind, "params": dict(r.params)} for r in cfg.standard_rules
        ],
        "relevancy": {cat: sorted(ids) for cat, ids in sorted(cfg.relevancy.items())},
        "adaptive_rules": [
            {
                "id": r.id,
                "cause": r.cause,
                "related": sorted(r.related_standard_rules),
                "impact": r.impact,
                "coefficient": r.impact_coefficient,
                "predicate": r.validity_predicate,
            }
            for r in cfg.adaptive_rules
        ],
        "lambda": cfg.online_weight,
        "threshold_pct": cfg.threshold_pct,
        "feedback_alpha": cfg.feedback_alpha,
        "proximity_km": cfg.proximity_km,
        "lookback_days": cfg.lookback_days,
        "strict_categories": cfg.strict_categories,
    }


def config_from_obj(obj: dict) -> RuleConfig:
    base = default_config()
    try:
        standard = tuple(
            StandardRule(int(r["id"]), str(r["kind"]), dict(r.get("params", {})))
            for r in obj.get("standard_rules", config_to_obj(base)["standard_rules"])
        )
        relevancy = {
            str(cat): frozenset(int(i) for i in ids)
            for cat, ids in obj.get(
                "relevancy", {c: sorted(v) for c, v in base.relevancy.items()}
            ).items()
        }
        adaptive = tuple(
            AdaptiveRule(
                int(r["id"]),
                str(r["cause"]),
                frozenset(int(i) for i in r["related"]),
                str(r.get("impact", f"{r['coefficient']}x")),
                float(r["coefficient"]),
                str(r["predicate"]),
            )
            for r in obj.get("adaptive_rules", config_to_obj(base)["adaptive_rules"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed rule config: {exc}") from None
    return RuleConfig(
        standard_rules=standard,
        relevancy=relevancy,
        adaptive_rules=adaptive,
        online_weight=float(obj.get("lambda", base.online_weight)),
        threshold_pct=float(obj.get("threshold_pct", base.threshold_pct)),
        feedback_alpha=float(obj.get("feedback_alpha", base.feedback_alpha)),
        proximity_km=float(obj.get("proximity_km", base.proximity_km)),
        lookback_days=int(obj.get("lookback_days", base.lookback_days)),
        strict_categories=bool(obj.get("strict_categories", base.strict_categories)),
    ).validate()


def load_config(path) -> RuleConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_obj(obj)


def save_config(cfg: RuleConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_obj(cfg), indent=2) + "\n", encoding="utf-8")
