"""Durable per-account risk state: running statistics, category median
windows, offline risk records, the last assessment, and the flag queue.

Persistence is an append-only JSON-lines event log plus an optional
snapshot; reopening a state directory replays the snapshot and the tail
of the log through the same update code the live path uses, so a rebuilt
store matches the pre-crash store field for field.
"""

from __future__ import annotations

import bisect
import datetime as dt
import json
import os
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import FlagStateError, UnknownAccountError
from .ingest import Transaction, parse_transaction_line, transaction_to_line
from .rules import CustomerContext, PaymentState
from .scoring import RiskAssessment, RiskTriple, assessment_from_obj, assessment_to_obj

DEFAULT_MEDIAN_WINDOW = 500


# --------------------------------------------------------------------------
# Running statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AccountStats:
    """Single-pass amount and daily-count statistics (sample stddev).

    Amount statistics include every transaction seen; daily-count
    statistics cover completed calendar days, with the running day held
    in `today_count` until a later date rolls it over.
    """

    account_id: str
    n_transactions: int = 0
    amount_mean: float = 0.0
    amount_m2: float = 0.0
    completed_days: int = 0
    daily_count_mean: float = 0.0
    daily_count_m2: float = 0.0
    today: Optional[dt.date] = None
    today_count: int = 0
    last_txn_date: Optional[dt.date] = None

    @property
    def amount_sigma(self) -> float:
        if self.n_transactions < 2:
            return 0.0
        return (self.amount_m2 / (self.n_transactions - 1)) ** 0.5

    @property
    def daily_count_sigma(self) -> float:
        if self.completed_days < 2:
            return 0.0
        return (self.daily_count_m2 / (self.completed_days - 1)) ** 0.5


def update_account_stats(stats: AccountStats, txn: Transaction) -> AccountStats:
    """Fold one transaction into the running statistics."""
    if txn.account_id != stats.account_id:
        raise ValueError("transaction belongs to a different account")
    n = stats.n_transactions + 1
    delta = txn.amount - stats.amount_mean
    mean = stats.amount_mean + delta / n
    m2 = stats.amount_m2 + delta * (txn.amount - mean)
    today = stats.today
    today_count = stats.today_count
    completed = stats.completed_days
    d_mean = stats.daily_count_mean
    d_m2 = stats.daily_count_m2
    if today is None:
        today, today_count = txn.date, 1
    elif txn.date > today:
        completed += 1
        d_delta = today_count - d_mean
        d_mean += d_delta / completed
        d_m2 += d_delta * (today_count - d_mean)
        today, today_count = txn.date, 1
    else:
        # same day, or late-arriving record: counted into the running day
        today_count += 1
    return replace(
        stats,
        n_transactions=n,
        amount_mean=mean,
        amount_m2=m2,
        completed_days=completed,
        daily_count_mean=d_mean,
        daily_count_m2=d_m2,
        today=today,
        today_count=today_count,
        last_txn_date=txn.date,
    )


# --------------------------------------------------------------------------
# Median windows
# --------------------------------------------------------------------------

class CategoryMedians:
    """Bounded window of risk triples with exact componentwise medians.

    Each component keeps a sorted list maintained by binary insertion;
    the deque preserves arrival order for eviction.
    """

    def __init__(self, category: str, window_size: int = DEFAULT_MEDIAN_WINDOW):
        self.category = category
        self.window_size = window_size
        self.window: deque[tuple[float, float, float]] = deque()
        self._sorted: list[list[float]] = [[], [], []]

    def add(self, triple: RiskTriple) -> None:
        values = triple.as_tuple()
        if len(self.window) >= self.window_size:
            oldest = self.window.popleft()
            for component, sorted_values in zip(oldest, self._sorted):
                del sorted_values[bisect.bisect_left(sorted_values, component)]
        self.window.append(values)
        for component, sorted_values in zip(values, self._sorted):
            bisect.insort(sorted_values, component)

    def medians(self) -> Optional[RiskTriple]:
        n = len(self.window)
        if n == 0:
            return None
        mid = n // 2
        out = []
        for sorted_values in self._sorted:
            if n % 2:
                out.append(sorted_values[mid])
            else:
                out.append((sorted_values[mid - 1] + sorted_values[mid]) / 2.0)
        return RiskTriple(*out)


def update_medians(medians: CategoryMedians, triple: RiskTriple) -> CategoryMedians:
    medians.add(triple)
    return medians


# --------------------------------------------------------------------------
# Flags and account state
# --------------------------------------------------------------------------

@dataclass
class FlagItem:
    flag_id: str
    assessment: RiskAssessment
    txn_line: str = ""  # the transaction that raised the flag, JSON line form
    status: str = "pending"  # pending | confirmed_bad | confirmed_good
    resolution_note: str = ""
    resolved_at: Optional[str] = None


def context_to_obj(ctx: CustomerContext) -> dict:
    return {
        "home_country": ctx.home_country,
        "flags": sorted(ctx.flags),
        "last_known_location": list(ctx.last_known_location)
        if ctx.last_known_location else None,
        "payment_state": {
            "min_due_paid": ctx.payment_state.min_due_paid,
            "within_due_date": ctx.payment_state.within_due_date,
            "paid_amount": ctx.payment_state.paid_amount,
            "due_amount": ctx.payment_state.due_amount,
        },
    }


def context_from_obj(obj: dict) -> CustomerContext:
    payment = obj.get("payment_state", {})
    location = obj.get("last_known_location")
    return CustomerContext(
        home_country=obj.get("home_country", ""),
        flags=frozenset(obj.get("flags", ())),
        last_known_location=(location[0], location[1], location[2]) if location else None,
        payment_state=PaymentState(
            min_due_paid=payment.get("min_due_paid", True),
            within_due_date=payment.get("within_due_date", True),
            paid_amount=payment.get("paid_amount", 0),
            due_amount=payment.get("due_amount", 0),
        ),
    )


@dataclass
class AccountState:
    account_id: str
    r_offline: float
    baseline_r_offline: float  # model prediction, restored on confirmed_good
    source: str = "model"  # model | feedback | manual
    status: str = "active"  # active | suspended
    updated_at: str = ""
    stats: AccountStats = None
    context: CustomerContext = field(default_factory=CustomerContext)
    last_assessment: Optional[RiskAssessment] = None
    last_scored_triple: Optional[RiskTriple] = None

    def __post_init__(self):
        if self.stats is None:
            self.stats = AccountStats(account_id=self.account_id)


# --------------------------------------------------------------------------
# The store
# --------------------------------------------------------------------------

class RiskStore:
    """In-memory state backed by an append-only event log and snapshots.

    `state_dir=None` keeps everything in memory (tests, dry runs).
    `sync=True` fsyncs each appended event before acknowledging it.
    """

    def __init__(self, state_dir=None, sync: bool = False,
                 median_window: int = DEFAULT_MEDIAN_WINDOW):
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.sync = sync
        self.median_window = median_window
        self.seq = 0
        self.accounts: dict[str, AccountState] = {}
        self.medians: dict[str, CategoryMedians] = {}
        self.flags: dict[str, FlagItem] = {}
        self._log_fh = None
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._recover()
            self._log_fh = open(self._log_path(), "a", encoding="utf-8")

    # -- paths ------------------------------------------------------------

    def _log_path(self) -> Path:
        return self.state_dir / "events.log"

    def _manifest_path(self) -> Path:
        return self.state_dir / "manifest.json"

    # -- event plumbing -----------------------------------------------------

    def _append_event(self, event_type: str, payload: dict) -> int:
        self.seq += 1
        if self._log_fh is not None:
            record = {"type": event_type, "seq": self.seq, "payload": payload}
            self._log_fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            self._log_fh.flush()
            if self.sync:
                os.fsync(self._log_fh.fileno())
        return self.seq

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    # -- account registration ----------------------------------------------

    def register_account(self, account_id: str, r_offline: float, source: str = "model",
                         context: Optional[CustomerContext] = None,
                         history: Optional[list[tuple[dt.date, int]]] = None,
                         updated_at: str = "") -> AccountState:
        """Create an account with its precomputed offline risk.

        `history` is an optional list of past (date, amount-in-minor-units)
        pairs from the warehouse; they seed the running statistics without
        being screened or scored.
        """
        payload = {
            "account_id": account_id,
            "r_offline": r_offline,
            "source": source,
            "context": context_to_obj(context or CustomerContext()),
            "history": [[d.isoformat(), amount] for d, amount in history or []],
            "updated_at": updated_at,
        }
        self._append_event("account_registered", payload)
        return self._apply_account_registered(payload)

    def _apply_account_registered(self, payload: dict) -> AccountState:
        state = AccountState(
            account_id=payload["account_id"],
            r_offline=payload["r_offline"],
            baseline_r_offline=payload["r_offline"],
            source=payload.get("source", "model"),
            context=context_from_obj(payload.get("context", {})),
            updated_at=payload.get("updated_at", ""),
        )
        for i, (date_text, amount) in enumerate(payload.get("history", [])):
            seed_txn = Transaction(
                tid=f"{state.account_id}-history-{i}",
                account_id=state.account_id,
                date=dt.date.fromisoformat(date_text),
                description="",
                amount=int(amount),
                category="account_history",
            )
            state.stats = update_account_stats(state.stats, seed_txn)
        self.accounts[state.account_id] = state
        return state

    # -- pipeline reads ------------------------------------------------------

    def get_account(self, account_id: str) -> AccountState:
        try:
            return self.accounts[account_id]
        except KeyError:
            raise UnknownAccountError(account_id) from None

    def has_account(self, account_id: str) -> bool:
        return account_id in self.accounts

    def medians_for(self, category: str) -> Optional[RiskTriple]:
        window = self.medians.get(category)
        return window.medians() if window else None

    # -- assessment persistence ----------------------------------------------

    def record_assessment(self, assessment: RiskAssessment, txn: Transaction,
                          new_r_offline: Optional[float]) -> Optional[str]:
        """Apply and persist one scored or screen-passing transaction.

        Returns the flag id when the assessment was flagged. The account
        statistics were already advanced by the pipeline; this persists
        the event, updates medians/risk/flag state, and makes the
        assessment the account's latest.
        """
        flag_id = f"F{self.seq + 1:08d}" if assessment.flagged else None
        payload = {
            "assessment": assessment_to_obj(assessment),
            "txn": transaction_to_line(txn),
            "new_r_offline": new_r_offline,
            "flag_id": flag_id,
        }
        self._append_event("assessment_recorded", payload)
        self._apply_assessment(payload, advance_stats=False)
        return flag_id

    def _apply_assessment(self, payload: dict, advance_stats: bool) -> None:
        assessment = assessment_from_obj(payload["assessment"])
        txn = parse_transaction_line(payload["txn"])
        state = self.accounts[assessment.account_id]
        if advance_stats:
            state.stats = update_account_stats(state.stats, txn)
        if assessment.outcome == "scored":
            triple = assessment.triple
            if payload.get("new_r_offline") is not None:
                state.r_offline = payload["new_r_offline"]
                state.source = "feedback"
            window = self.medians.get(txn.category)
            if window is None:
                window = self.medians[txn.category] = CategoryMedians(
                    txn.category, self.median_window
                )
            window.add(triple)
            state.last_scored_triple = triple
        state.last_assessment = assessment
        state.updated_at = assessment.timestamp
        if payload.get("flag_id"):
            state.status = "suspended"
            self.flags[payload["flag_id"]] = FlagItem(
                payload["flag_id"], assessment, txn_line=payload["txn"]
            )

    def advance_stats(self, account_id: str, txn: Transaction) -> AccountStats:
        """Fold a transaction into the account's running statistics."""
        state = self.get_account(account_id)
        state.stats = update_account_stats(state.stats, txn)
        return state.stats

    # -- flags -----------------------------------------------------------------

    def list_flags(self, status: Optional[str] = None) -> list[FlagItem]:
        items = list(self.flags.values())
        if status is not None:
            items = [f for f in items if f.status == status]
        return list(reversed(items))  # newest first

    def get_flag(self, flag_id: str) -> FlagItem:
        try:
            return self.flags[flag_id]
        except KeyError:
            raise FlagStateError(f"unknown flag: {flag_id}") from None

    def resolve_flag(self, flag_id: str, verdict: str, note: str = "",
                     resolved_at: str = "") -> FlagItem:
        """Apply an analyst verdict; a flag can be resolved exactly once.

        confirmed_bad suspends the account and raises its offline risk to
        at least 95; confirmed_good reactivates it and restores the
        model-baseline offline risk.
        """
        if verdict not in ("confirmed_bad", "confirmed_good"):
            raise ValueError(f"unknown verdict {verdict!r}")
        flag = self.get_flag(flag_id)
        if flag.status != "pending":
            raise FlagStateError(f"flag {flag_id} already resolved to {flag.status}")
        state = self.accounts[flag.assessment.account_id]
        if verdict == "confirmed_bad":
            new_r_offline = max(state.r_offline, 95.0)
            new_status = "suspended"
            new_source = "manual"
        else:
            new_r_offline = state.baseline_r_offline
            new_status = "active"
            new_source = "manual"
        payload = {
            "flag_id": flag_id,
            "verdict": verdict,
            "note": note,
            "resolved_at": resolved_at,
            "new_r_offline": new_r_offline,
            "new_status": new_status,
            "new_source": new_source,
        }
        self._append_event("flag_resolved", payload)
        self._apply_flag_resolved(payload)
        return self.flags[flag_id]

    def _apply_flag_resolved(self, payload: dict) -> None:
        flag = self.flags[payload["flag_id"]]
        flag.status = payload["verdict"]
        flag.resolution_note = payload["note"]
        flag.resolved_at = payload["resolved_at"]
        state = self.accounts[flag.assessment.account_id]
        state.r_offline = payload["new_r_offline"]
        state.status = payload["new_status"]
        state.source = payload["new_source"]
        state.updated_at = payload["resolved_at"]

    # -- snapshot / recovery ------------------------------------------------

    def _recover(self) -> None:
        covered = 0
        manifest_path = self._manifest_path()
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            snapshot_path = self.state_dir / manifest["snapshot"]
            snapshot = json.loads(snapshot_path.read_text(encoding="utf-8"))
            self._load_state_obj(snapshot["state"])
            covered = int(manifest["covered_seq"])
            self.seq = covered
        log_path = self._log_path()
        if not log_path.exists():
            return
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    break  # torn tail write from a crash; discard the partial record
                if record["seq"] <= covered:
                    continue
                self._apply_event(record)
                self.seq = record["seq"]

    def _apply_event(self, record: dict) -> None:
        event_type, payload = record["type"], record["payload"]
        if event_type == "account_registered":
            self._apply_account_registered(payload)
        elif event_type == "assessment_recorded":
            self._apply_assessment(payload, advance_stats=True)
        elif event_type == "flag_resolved":
            self._apply_flag_resolved(payload)
        else:
            raise ValueError(f"unknown event type {event_type!r}")

    def snapshot(self) -> Path:
        """Write a snapshot covering the current sequence number."""
        if self.state_dir is None:
            raise ValueError("in-memory store cannot snapshot")
        name = f"snapshot-{self.seq:010d}.json"
        path = self.state_dir / name
        tmp = path.with_suffix(".tmp")
        doc = {"covered_seq": self.seq, "state": self.to_state_obj()}
        tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)
        manifest_tmp = self._manifest_path().with_suffix(".tmp")
        manifest_tmp.write_text(
            json.dumps({"snapshot": name, "covered_seq": self.seq}), encoding="utf-8"
        )
        os.replace(manifest_tmp, self._manifest_path())
        return path

    def compact(self) -> None:
        """Snapshot current state and truncate the event log."""
        self.snapshot()
        if self._log_fh is not None:
            self._log_fh.close()
        self._log_fh = open(self._log_path(), "w", encoding="utf-8")

    # -- canonical state (rebuild comparisons) --------------------------------

    def to_state_obj(self) -> dict:
        return {
            "seq": self.seq,
            "accounts": {
                account_id: _account_to_obj(state)
                for account_id, state in sorted(self.accounts.items())
            },
            "medians": {
                category: {
                    "window_size": window.window_size,
                    "window": [list(v) for v in window.window],
                }
                for category, window in sorted(self.medians.items())
            },
            "flags": {
                flag_id: {
                    "assessment": assessment_to_obj(item.assessment),
                    "txn": item.txn_line,
                    "status": item.status,
                    "resolution_note": item.resolution_note,
                    "resolved_at": item.resolved_at,
                }
                for flag_id, item in sorted(self.flags.items())
            },
        }

    def _load_state_obj(self, obj: dict) -> None:
        self.accounts = {
            account_id: _account_from_obj(payload)
            for account_id, payload in obj["accounts"].items()
        }
        self.medians = {}
        for category, payload in obj["medians"].items():
            window = CategoryMedians(category, payload["window_size"])
            for values in payload["window"]:
                window.add(RiskTriple(*values))
            self.medians[category] = window
        self.flags = {
            flag_id: FlagItem(
                flag_id=flag_id,
                assessment=assessment_from_obj(payload["assessment"]),
                txn_line=payload.get("txn", ""),
                status=payload["status"],
                resolution_note=payload["resolution_note"],
                resolved_at=payload["resolved_at"],
            )
            for flag_id, payload in obj["flags"].items()
        }


def _account_to_obj(state: AccountState) -> dict:
    stats = state.stats
    return {
        "account_id": state.account_id,
        "r_offline": state.r_offline,
        "baseline_r_offline": state.baseline_r_offline,
        "source": state.source,
        "status": state.status,
        "updated_at": state.updated_at,
        "context": context_to_obj(state.context),
        "stats": {
            "n_transactions": stats.n_transactions,
            "amount_mean": stats.amount_mean,
            "amount_m2": stats.amount_m2,
            "completed_days": stats.completed_days,
            "daily_count_mean": stats.daily_count_mean,
            "daily_count_m2": stats.daily_count_m2,
            "today": stats.today.isoformat() if stats.today else None,
            "today_count": stats.today_count,
            "last_txn_date": stats.last_txn_date.isoformat() if stats.last_txn_date else None,
        },
        "last_assessment": assessment_to_obj(state.last_assessment)
        if state.last_assessment else None,
        "last_scored_triple": list(state.last_scored_triple.as_tuple())
        if state.last_scored_triple else None,
    }


def _account_from_obj(obj: dict) -> AccountState:
    stats_obj = obj["stats"]
    stats = AccountStats(
        account_id=obj["account_id"],
        n_transactions=stats_obj["n_transactions"],
        amount_mean=stats_obj["amount_mean"],
        amount_m2=stats_obj["amount_m2"],
        completed_days=stats_obj["completed_days"],
        daily_count_mean=stats_obj["daily_count_mean"],
        daily_count_m2=stats_obj["daily_count_m2"],
        today=dt.date.fromisoformat(stats_obj["today"]) if stats_obj["today"] else None,
        today_count=stats_obj["today_count"],
        last_txn_date=dt.date.fromisoformat(stats_obj["last_txn_date"])
        if stats_obj["last_txn_date"] else None,
    )
    return AccountState(
        account_id=obj["account_id"],
        r_offline=obj["r_offline"],
        baseline_r_offline=obj["baseline_r_offline"],
        source=obj["source"],
        status=obj["status"],
        updated_at=obj["updated_at"],
        context=context_from_obj(obj.get("context", {})),
        stats=stats,
        last_assessment=assessment_from_obj(obj["last_assessment"])
        if obj["last_assessment"] else None,
        last_scored_triple=RiskTriple(*obj["last_scored_triple"])
        if obj["last_scored_triple"] else None,
    )
