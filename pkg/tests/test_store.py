import datetime as dt
import json
import shutil

import numpy as np
import pytest

from creditguard.errors import FlagStateError, UnknownAccountError
from creditguard.scoring import RiskAssessment, RiskTriple
from creditguard.store import (
    AccountStats,
    CategoryMedians,
    RiskStore,
    update_account_stats,
    update_medians,
)

from conftest import make_txn


def feed_amounts(amounts, start=dt.date(2020, 1, 1), per_day=1):
    stats = AccountStats(account_id="a")
    for i, amount in enumerate(amounts):
        txn = make_txn(tid=str(i), account="a", amount=amount, category="x",
                       date=(start + dt.timedelta(days=i // per_day)).isoformat())
        stats = update_account_stats(stats, txn)
    return stats


class TestAccountStats:
    def test_textbook_sample_sigma(self):
        stats = feed_amounts([100, 200, 300])
        assert stats.amount_mean == pytest.approx(200.0)
        assert stats.amount_sigma == pytest.approx(100.0)

    def test_single_transaction_sigma_undefined(self):
        stats = feed_amounts([500])
        assert stats.n_transactions == 1
        assert stats.amount_sigma == 0.0

    def test_running_matches_two_pass_oracle(self):
        rng = np.random.default_rng(12)
        amounts = rng.integers(1, 5_000_000, size=10_000).tolist()
        stats = feed_amounts(amounts, per_day=7)
        mean = float(np.mean(amounts))
        sigma = float(np.std(amounts, ddof=1))
        assert abs(stats.amount_mean - mean) / mean <= 1e-9
        assert abs(stats.amount_sigma - sigma) / sigma <= 1e-9

    def test_daily_counts_roll_over(self):
        # 3 per day for 4 days: three completed days when day 4 starts
        stats = feed_amounts([100] * 12, per_day=3)
        assert stats.completed_days == 3
        assert stats.daily_count_mean == pytest.approx(3.0)
        assert stats.daily_count_sigma == pytest.approx(0.0)
        assert stats.today_count == 3

    def test_daily_count_oracle(self):
        rng = np.random.default_rng(5)
        stats = AccountStats(account_id="a")
        day_counts = []
        day = dt.date(2020, 1, 1)
        tid = 0
        for day_offset in range(300):
            count = int(rng.integers(1, 9))
            day_counts.append(count)
            for _ in range(count):
                txn = make_txn(tid=str(tid), account="a", amount=100, category="x",
                               date=(day + dt.timedelta(days=day_offset)).isoformat())
                stats = update_account_stats(stats, txn)
                tid += 1
        completed = day_counts[:-1]  # the last day has not rolled over
        assert stats.completed_days == len(completed)
        assert stats.daily_count_mean == pytest.approx(np.mean(completed), rel=1e-9)
        assert stats.daily_count_sigma == pytest.approx(np.std(completed, ddof=1), rel=1e-9)

    def test_wrong_account_rejected(self):
        stats = AccountStats(account_id="a")
        with pytest.raises(ValueError):
            update_account_stats(stats, make_txn(account="b", category="x"))


def triple(a, b, c):
    return RiskTriple(a, b, c)


class TestCategoryMedians:
    def test_two_element_median(self):
        window = CategoryMedians("x", 500)
        window.add(triple(60, 60, 60))
        update_medians(window, triple(70, 70, 70))
        assert window.medians().online == pytest.approx(65.0)

    def test_single_element(self):
        window = CategoryMedians("x", 500)
        window.add(triple(67, 70, 67.9))
        assert window.medians().as_tuple() == pytest.approx((67.0, 70.0, 67.9))

    def test_empty_window(self):
        assert CategoryMedians("x", 500).medians() is None

    def test_eviction_against_sort_oracle(self):
        rng = np.random.default_rng(9)
        window = CategoryMedians("x", 500)
        seen = []
        for _ in range(1001):
            values = rng.uniform(0, 100, size=3)
            seen.append(tuple(values))
            window.add(triple(*values))
        assert len(window.window) == 500
        tail = seen[-500:]
        expected = [float(np.median([v[i] for v in tail])) for i in range(3)]
        assert window.medians().as_tuple() == pytest.approx(tuple(expected), abs=1e-12)

    def test_10k_operations_match_oracle(self):
        rng = np.random.default_rng(31)
        window = CategoryMedians("x", 50)
        seen = []
        for step in range(10_000):
            values = tuple(rng.uniform(0, 100, size=3))
            seen.append(values)
            window.add(triple(*values))
            if step % 500 == 0:
                tail = seen[-50:]
                expected = tuple(float(np.median([v[i] for v in tail])) for i in range(3))
                assert window.medians().as_tuple() == pytest.approx(expected, abs=1e-12)


def scored_assessment(tid, account, overall=67.9, flagged=False, ts="2017-01-20"):
    return RiskAssessment(
        tid=tid,
        account_id=account,
        outcome="scored",
        flagged=flagged,
        timestamp=ts,
        triple=RiskTriple(67.0, 70.0, overall),
        display=(67.0, 70.0, 67.9),
        reasons=[{"code": "threshold_exceeded", "detail": "t"}] if flagged else [],
        failed_standard_rules=frozenset({1, 4}),
        causes_y=("Air ticket purchase", "Out of the country"),
        causes_x=("Air ticket purchase",),
    )



def record(store, assessment, txn, new_r_offline):
    """Advance stats then persist, the way the pipeline drives the store."""
    store.advance_stats(txn.account_id, txn)
    return store.record_assessment(assessment, txn, new_r_offline)

class TestRiskStore:
    def test_read_your_write(self, tmp_path):
        store = RiskStore(tmp_path / "s")
        store.register_account("1", 70.0)
        a = scored_assessment("t1", "1")
        record(store, a, make_txn(tid="t1", account="1"), new_r_offline=69.5)
        assert store.get_account("1").last_assessment.tid == "t1"
        store.close()

    def test_latest_wins(self, tmp_path):
        store = RiskStore(tmp_path / "s")
        store.register_account("1", 70.0)
        record(store, scored_assessment("t1", "1"),
                                make_txn(tid="t1", account="1"), 69.5)
        record(store, scored_assessment("t2", "1"),
                                make_txn(tid="t2", account="1", date="2017-01-21"), 69.0)
        assert store.get_account("1").last_assessment.tid == "t2"
        assert store.get_account("1").r_offline == 69.0
        store.close()

    def test_unknown_account(self, tmp_path):
        store = RiskStore(tmp_path / "s")
        with pytest.raises(UnknownAccountError):
            store.get_account("ghost")
        store.close()

    def test_rebuild_equals_live_state(self, tmp_path):
        path = tmp_path / "s"
        store = RiskStore(path)
        store.register_account("1", 70.0)
        store.register_account("2", 23.0)
        for i in range(30):
            account = "1" if i % 2 == 0 else "2"
            flagged = i % 5 == 0
            a = scored_assessment(f"t{i}", account, flagged=flagged,
                                  ts=f"2017-01-{(i % 27) + 1:02d}")
            record(store, 
                a, make_txn(tid=f"t{i}", account=account,
                            date=f"2017-01-{(i % 27) + 1:02d}", amount=1000 + i), 69.5 - i * 0.1
            )
        live = store.to_state_obj()
        store.close()
        rebuilt = RiskStore(path)
        assert rebuilt.to_state_obj() == live
        rebuilt.close()

    def test_crash_between_append_and_snapshot(self, tmp_path):
        path = tmp_path / "s"
        store = RiskStore(path)
        store.register_account("1", 70.0)
        for i in range(10):
            record(store, 
                scored_assessment(f"t{i}", "1", flagged=(i == 3)),
                make_txn(tid=f"t{i}", account="1", amount=500 + i), 69.0
            )
        store.snapshot()
        for i in range(10, 20):
            record(store, 
                scored_assessment(f"t{i}", "1"),
                make_txn(tid=f"t{i}", account="1", amount=500 + i), 68.0
            )
        live = store.to_state_obj()
        # simulate a crash: copy the directory without closing the store
        crashed = tmp_path / "crashed"
        shutil.copytree(path, crashed)
        rebuilt = RiskStore(crashed)
        assert rebuilt.to_state_obj() == live
        rebuilt.close()
        store.close()

    def test_torn_tail_line_is_discarded(self, tmp_path):
        path = tmp_path / "s"
        store = RiskStore(path)
        store.register_account("1", 70.0)
        record(store, scored_assessment("t0", "1"),
                                make_txn(tid="t0", account="1"), 69.5)
        state_before_tear = store.to_state_obj()
        record(store, scored_assessment("t1", "1"),
                                make_txn(tid="t1", account="1", date="2017-01-21"), 69.0)
        store.close()
        log = path / "events.log"
        data = log.read_bytes()
        log.write_bytes(data[:-20])  # cut into the final record
        rebuilt = RiskStore(path)
        assert rebuilt.to_state_obj() == state_before_tear
        rebuilt.close()

    def test_compact_truncates_log_and_preserves_state(self, tmp_path):
        path = tmp_path / "s"
        store = RiskStore(path)
        store.register_account("1", 70.0)
        for i in range(5):
            record(store, scored_assessment(f"t{i}", "1", flagged=(i == 0)),
                                    make_txn(tid=f"t{i}", account="1"), 69.5)
        live = store.to_state_obj()
        store.compact()
        store.close()
        assert (path / "events.log").read_text() == ""
        rebuilt = RiskStore(path)
        assert rebuilt.to_state_obj() == live
        rebuilt.close()

    def test_pending_flags_survive_restart(self, tmp_path):
        path = tmp_path / "s"
        store = RiskStore(path)
        store.register_account("1", 70.0)
        record(store, scored_assessment("t0", "1", flagged=True),
                                make_txn(tid="t0", account="1"), 69.5)
        assert len(store.list_flags("pending")) == 1
        store.close()
        rebuilt = RiskStore(path)
        pending = rebuilt.list_flags("pending")
        assert len(pending) == 1
        assert pending[0].assessment.tid == "t0"
        rebuilt.close()


class TestFlagResolution:
    def make_flagged_store(self, tmp_path, r_offline=70.0, baseline=23.0):
        store = RiskStore(tmp_path / "s")
        store.register_account("1", baseline)
        state = store.accounts["1"]
        state.r_offline = r_offline  # simulate feedback drift away from baseline
        record(store, scored_assessment("t0", "1", flagged=True),
                                make_txn(tid="t0", account="1"), None)
        flag_id = store.list_flags("pending")[0].flag_id
        return store, flag_id

    def test_confirmed_good_restores_model_baseline(self, tmp_path):
        store, flag_id = self.make_flagged_store(tmp_path)
        item = store.resolve_flag(flag_id, "confirmed_good", note="verified travel")
        assert item.status == "confirmed_good"
        state = store.get_account("1")
        assert state.r_offline == 23.0
        assert state.status == "active"
        assert state.source == "manual"
        store.close()

    def test_confirmed_bad_raises_to_95_and_suspends(self, tmp_path):
        store, flag_id = self.make_flagged_store(tmp_path)
        store.resolve_flag(flag_id, "confirmed_bad")
        state = store.get_account("1")
        assert state.r_offline == 95.0
        assert state.status == "suspended"
        store.close()

    def test_confirmed_bad_keeps_higher_risk(self, tmp_path):
        store, flag_id = self.make_flagged_store(tmp_path, r_offline=97.5)
        store.resolve_flag(flag_id, "confirmed_bad")
        assert store.get_account("1").r_offline == 97.5
        store.close()

    def test_double_resolution_errors(self, tmp_path):
        store, flag_id = self.make_flagged_store(tmp_path)
        store.resolve_flag(flag_id, "confirmed_good")
        with pytest.raises(FlagStateError, match="already resolved"):
            store.resolve_flag(flag_id, "confirmed_bad")
        store.close()

    def test_unknown_flag_errors(self, tmp_path):
        store = RiskStore(tmp_path / "s")
        with pytest.raises(FlagStateError, match="unknown flag"):
            store.resolve_flag("F999", "confirmed_good")
        store.close()

    def test_resolution_survives_restart(self, tmp_path):
        store, flag_id = self.make_flagged_store(tmp_path)
        store.resolve_flag(flag_id, "confirmed_bad", note="fraud ring")
        live = store.to_state_obj()
        store.close()
        rebuilt = RiskStore(tmp_path / "s")
        assert rebuilt.to_state_obj() == live
        assert rebuilt.get_flag(flag_id).resolution_note == "fraud ring"
        rebuilt.close()


def test_event_log_lines_are_wellformed(tmp_path):
    path = tmp_path / "s"
    store = RiskStore(path)
    store.register_account("1", 70.0)
    record(store, scored_assessment("t0", "1", flagged=True),
                            make_txn(tid="t0", account="1"), 69.5)
    store.close()
    lines = (path / "events.log").read_text().strip().split("\n")
    seqs = []
    for line in lines:
        event = json.loads(line)
        assert set(event) == {"type", "seq", "payload"}
        seqs.append(event["seq"])
    assert seqs == sorted(seqs)
