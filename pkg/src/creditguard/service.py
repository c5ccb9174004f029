"""Per-transaction pipeline: screen, analyze causes, combine risks, decide.

A transaction that passes the standard-rule screen is recorded and the
pipeline stops. A failing transaction flows through cause analysis,
risk combination, gap/spike deviation checks, the flag decision, and
the feedback update of the account's stored offline risk.

Scoring is serialized by a store-wide lock: assessments for one account
always land in arrival order (the lock is coarser than the per-account
minimum the contract requires, which only helps consistency).
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Callable, Optional

from .config import RuleConfig
from .errors import UnknownAccountError
from .ingest import Transaction
from .rules import adaptive_causes, compute_r_online, evaluate_standard, valid_causes
from .scoring import (
    RiskAssessment,
    RiskTriple,
    assessment_to_obj,
    combine_risk,
    compute_gap,
    compute_spike,
    decide,
    display_triple,
    feedback_offline,
    utc_now_iso,
)
from .store import RiskStore

import json

Clock = Callable[[Transaction], str]


def _wall_clock(_txn: Transaction) -> str:
    return utc_now_iso()


def replay_clock(txn: Transaction) -> str:
    """Deterministic clock for replays: the transaction's own date."""
    return txn.date.isoformat()


class Pipeline:
    """Scores transactions against one store, config, and clock."""

    def __init__(
        self,
        store: RiskStore,
        config: RuleConfig,
        clock: Clock = _wall_clock,
        audit_path: Optional[Path] = None,
        model=None,
    ):
        self.store = store
        self.config = config.validate()
        self.clock = clock
        self.model = model  # optional classifier for profile-based registration
        self._audit_fh = open(audit_path, "a", encoding="utf-8") if audit_path else None
        self._seen_tids: set[str] = set()
        self._lock = threading.RLock()

    def close(self) -> None:
        if self._audit_fh is not None:
            self._audit_fh.close()
            self._audit_fh = None
        self.store.close()

    # -- account lifecycle --------------------------------------------------

    def register_account(self, account_id: str, r_offline: Optional[float] = None,
                         context=None, history=None, profile=None,
                         source: str = "model") -> None:
        """Register an account with its precomputed offline risk.

        Either pass `r_offline` directly or pass a `profile` (the
        account's summary-attribute row) to have the pipeline's
        classifier produce the baseline.
        """
        with self._lock:
            if r_offline is None:
                if profile is None or self.model is None:
                    raise ValueError(
                        "registration needs an explicit r_offline, or a profile "
                        "plus a pipeline model"
                    )
                r_offline = self.model.predict_proba(profile)["bad"] * 100.0
            self.store.register_account(account_id, r_offline, source=source,
                                        context=context, history=history)

    # -- the pipeline --------------------------------------------------------

    def score_transaction(self, txn: Transaction) -> RiskAssessment:
        """Run one transaction through the full screen-and-score pipeline."""
        with self._lock:
            if not self.store.has_account(txn.account_id):
                raise UnknownAccountError(txn.account_id)
            if txn.tid in self._seen_tids:
                raise ValueError(f"duplicate transaction id {txn.tid!r} in this session")
            self._seen_tids.add(txn.tid)
            state = self.store.get_account(txn.account_id)
            stats = self.store.advance_stats(txn.account_id, txn)
            outcome = evaluate_standard(txn, stats, state.context, self.config)
            timestamp = self.clock(txn)
            if outcome.passed_screen:
                assessment = RiskAssessment(
                    tid=txn.tid,
                    account_id=txn.account_id,
                    outcome="passed_screen",
                    flagged=False,
                    timestamp=timestamp,
                    failed_standard_rules=frozenset(),
                )
                self._persist(assessment, txn, new_r_offline=None)
                return assessment
            causes_y = adaptive_causes(outcome.failed, self.config.adaptive_rules)
            causes_x = valid_causes(causes_y, state.context, txn)
            r_online = compute_r_online(causes_x, causes_y)
            r_offline = state.r_offline
            r_total = combine_risk(r_online, r_offline, self.config.online_weight)
            triple = RiskTriple(online=r_online, offline=r_offline, overall=r_total)
            gap = compute_gap(triple, self.store.medians_for(txn.category))
            spike = compute_spike(triple, state.last_scored_triple)
            flagged, reasons = decide(triple, gap, spike, self.config.threshold_pct)
            new_r_offline = feedback_offline(r_offline, r_total, self.config.feedback_alpha)
            assessment = RiskAssessment(
                tid=txn.tid,
                account_id=txn.account_id,
                outcome="scored",
                flagged=flagged,
                timestamp=timestamp,
                triple=triple,
                display=display_triple(r_online, r_offline, self.config.online_weight),
                gap=gap,
                spike=spike,
                reasons=reasons,
                failed_standard_rules=outcome.failed,
                causes_y=tuple(r.cause for r in causes_y),
                causes_x=tuple(r.cause for r in causes_x),
            )
            self._persist(assessment, txn, new_r_offline=new_r_offline)
            return assessment

    def _persist(self, assessment: RiskAssessment, txn: Transaction,
                 new_r_offline: Optional[float]) -> None:
        try:
            self.store.record_assessment(assessment, txn, new_r_offline)
        except OSError:
            # the caller still gets the scoring result and may retry
            assessment.persisted = False
        if self._audit_fh is not None:
            line = json.dumps(assessment_to_obj(assessment), sort_keys=True,
                              separators=(",", ":"))
            self._audit_fh.write(line + "\n")
            self._audit_fh.flush()

    # -- queries -------------------------------------------------------------

    def get_account(self, account_id: str) -> dict:
        with self._lock:
            state = self.store.get_account(account_id)
            stats = state.stats
            return {
                "account_id": state.account_id,
                "r_offline": state.r_offline,
                "baseline_r_offline": state.baseline_r_offline,
                "source": state.source,
                "status": state.status,
                "updated_at": state.updated_at,
                "stats": {
                    "n_transactions": stats.n_transactions,
                    "amount_mean": stats.amount_mean,
                    "amount_sigma": stats.amount_sigma,
                    "daily_count_mean": stats.daily_count_mean,
                    "daily_count_sigma": stats.daily_count_sigma,
                    "last_txn_date": stats.last_txn_date.isoformat()
                    if stats.last_txn_date else None,
                },
                "last_assessment": assessment_to_obj(state.last_assessment)
                if state.last_assessment else None,
            }

    def list_flags(self, status: Optional[str] = None) -> list[dict]:
        with self._lock:
            return [self.flag_view(item.flag_id) for item in self.store.list_flags(status)]

    def flag_view(self, flag_id: str) -> dict:
        """Everything an analyst needs to judge one flag."""
        item = self.store.get_flag(flag_id)
        assessment = item.assessment
        coefficient = {r.cause: r.impact_coefficient for r in self.config.adaptive_rules}
        failed = [
            {"id": rule_id, "description": self.config.rule_by_id(rule_id).describe()}
            for rule_id in sorted(assessment.failed_standard_rules)
        ]
        txn_summary = json.loads(item.txn_line) if item.txn_line else None
        return {
            "flag_id": item.flag_id,
            "account_id": assessment.account_id,
            "tid": assessment.tid,
            "status": item.status,
            "resolution_note": item.resolution_note,
            "resolved_at": item.resolved_at,
            "timestamp": assessment.timestamp,
            "triple": list(assessment.triple.as_tuple()) if assessment.triple else None,
            "display": list(assessment.display) if assessment.display else None,
            "gap": list(assessment.gap) if assessment.gap else None,
            "spike": list(assessment.spike) if assessment.spike else None,
            "reasons": assessment.reasons,
            "failed_standard_rules": failed,
            "causes_y": [
                {"cause": c, "coefficient": coefficient.get(c)} for c in assessment.causes_y
            ],
            "causes_x": [
                {"cause": c, "coefficient": coefficient.get(c)} for c in assessment.causes_x
            ],
            "transaction": txn_summary,
        }

    def resolve_flag(self, flag_id: str, verdict: str, note: str = "") -> dict:
        with self._lock:
            self.store.resolve_flag(flag_id, verdict, note=note,
                                    resolved_at=utc_now_iso())
            return self.flag_view(flag_id)
