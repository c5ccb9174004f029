"""Standard-rule screening and adaptive cause analysis for one transaction.

The screen checks the rules mapped to the transaction's category; a rule
with too little history to judge counts as satisfied. Failures feed the
cause analysis: Y collects the adaptive rules related to any failed
standard rule, X keeps the causes whose validity predicate holds for
this customer, and the online risk is the uncovered share of Y's impact,
scaled to a percentage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .config import AdaptiveRule, RuleConfig
from .errors import ConfigError
from .ingest import Transaction

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class PaymentState:
    min_due_paid: bool = True
    within_due_date: bool = True
    paid_amount: int = 0  # minor units
    due_amount: int = 0


@dataclass(frozen=True)
class CustomerContext:
    home_country: str = ""
    flags: frozenset[str] = field(default_factory=frozenset)
    last_known_location: Optional[tuple[float, float, str]] = None  # (lat, lon, country)
    payment_state: PaymentState = field(default_factory=PaymentState)


@dataclass(frozen=True)
class StandardOutcome:
    relevant: frozenset[int]
    failed: frozenset[int]

    def __post_init__(self):
        if not self.failed <= self.relevant:
            raise ValueError("failed rules must be a subset of relevant rules")

    @property
    def passed_screen(self) -> bool:
        return not self.failed


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def evaluate_standard(txn: Transaction, stats, ctx: CustomerContext,
                      cfg: RuleConfig) -> StandardOutcome:
    """Screen one transaction against the standard rules for its category.

    `stats` are the account's running statistics including the
    transaction under test (the pipeline updates them first). A category
    without a relevancy entry makes every rule relevant unless strict
    category handling is configured. Amount and daily-count rules need
    at least two prior data points; the proximity rule needs both
    locations; otherwise they count as satisfied.
    """
    if txn.category in cfg.relevancy:
        relevant = cfg.relevancy[txn.category]
    elif cfg.strict_categories:
        raise ConfigError(f"no relevancy mapping for category {txn.category!r}")
    else:
        relevant = cfg.standard_rule_ids
    failed = set()
    for rule_id in relevant:
        rule = cfg.rule_by_id(rule_id)
        if _violates(rule, txn, stats, ctx, cfg):
            failed.add(rule_id)
    return StandardOutcome(relevant=frozenset(relevant), failed=frozenset(failed))


def _violates(rule, txn: Transaction, stats, ctx: CustomerContext, cfg: RuleConfig) -> bool:
    kind = rule.kind
    if kind == "amount_vs_mean_sigma":
        if stats is None or stats.n_transactions - 1 < 2:  # fewer than 2 prior transactions
            return False
        return txn.amount > stats.amount_mean + stats.amount_sigma
    if kind == "daily_count_vs_mean_sigma":
        if stats is None or stats.completed_days < 2:
            return False
        return stats.today_count > stats.daily_count_mean + stats.daily_count_sigma
    if kind == "payment_within_due":
        return not ctx.payment_state.within_due_date
    if kind == "minimum_due_paid":
        return not ctx.payment_state.min_due_paid
    if kind == "paid_covers_due":
        return ctx.payment_state.paid_amount < ctx.payment_state.due_amount
    if kind == "location_proximity":
        if txn.location is None or ctx.last_known_location is None:
            return False
        radius = float(rule.params.get("radius_km", cfg.proximity_km))
        return haversine_km(txn.location[:2], ctx.last_known_location[:2]) > radius
    raise ConfigError(f"unknown standard rule kind {kind!r}")


def adaptive_causes(failed: Iterable[int], rules: Iterable[AdaptiveRule]) -> list[AdaptiveRule]:
    """Y: adaptive rules related to any failed standard rule (by id order)."""
    failed = frozenset(failed)
    return sorted(
        (r for r in rules if r.related_standard_rules & failed), key=lambda r: r.id
    )


def valid_causes(causes_y: Iterable[AdaptiveRule], ctx: CustomerContext,
                 txn: Transaction) -> list[AdaptiveRule]:
    """X: the subset of Y whose validity predicate holds for this customer."""
    return [r for r in causes_y if _predicate_holds(r.validity_predicate, ctx, txn)]


def _predicate_holds(name: str, ctx: CustomerContext, txn: Transaction) -> bool:
    flags = ctx.flags | txn.context_flags
    if name == "air_ticket_purchase":
        return txn.category == "Airlines" or "air_ticket_purchase" in flags
    if name == "out_of_country":
        if "out_of_country" in flags:
            return True
        country = None
        if txn.location is not None:
            country = txn.location[2]
        elif ctx.last_known_location is not None:
            country = ctx.last_known_location[2]
        return country is not None and ctx.home_country != "" and country != ctx.home_country
    if name in ("address_change", "job_switch", "foreign_worker"):
        return name in flags
    raise ConfigError(f"unknown validity predicate {name!r}")


def compute_r_online(causes_x: Iterable[AdaptiveRule], causes_y: Iterable[AdaptiveRule]) -> float:
    """Online risk percent: the impact share of Y not explained by X.

    An empty Y means no customer-specific cause exists at all, which is
    treated as maximal online risk (100).
    """
    x_list = list(causes_x)
    y_list = list(causes_y)
    y_ids = {r.id for r in y_list}
    if not {r.id for r in x_list} <= y_ids:
        raise ValueError("X must be a subset of Y")
    if not y_list:
        return 100.0
    total_y = sum(r.impact_coefficient for r in y_list)
    total_x = sum(r.impact_coefficient for r in x_list)
    return (1.0 - total_x / total_y) * 100.0
