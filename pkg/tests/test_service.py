import datetime as dt
import json

import pytest
from fastapi.testclient import TestClient

from creditguard.api import create_app
from creditguard.config import default_config
from creditguard.errors import UnknownAccountError
from creditguard.rules import CustomerContext, PaymentState
from creditguard.service import Pipeline, replay_clock
from creditguard.store import RiskStore

from conftest import SEED_HISTORY, airline_account_context, make_txn


class TestGoldenExample:
    def test_airline_purchase_flow(self, golden_pipeline):
        assessment = golden_pipeline.score_transaction(make_txn())
        assert assessment.outcome == "scored"
        assert assessment.failed_standard_rules == {1, 4}
        assert assessment.causes_y == ("Air ticket purchase", "Out of the country")
        assert assessment.causes_x == ("Air ticket purchase",)
        assert assessment.triple.online == pytest.approx(66.6666667, abs=1e-6)
        assert assessment.triple.offline == 70.0
        assert assessment.triple.overall == pytest.approx(67.6666667, abs=1e-6)
        assert assessment.display == (67.0, 70.0, 67.9)
        assert abs(assessment.triple.overall - 67.9) <= 0.31
        assert assessment.flagged
        assert [r["code"] for r in assessment.reasons] == ["threshold_exceeded"]
        # first scored transaction: no history for either deviation check
        assert assessment.gap is None
        assert assessment.spike is None

    def test_feedback_applied_to_stored_risk(self, golden_pipeline):
        golden_pipeline.score_transaction(make_txn())
        state = golden_pipeline.store.get_account("1")
        # EMA with alpha 0.2: 0.8 * 70 + 0.2 * 67.666... = 69.5333...
        assert state.r_offline == pytest.approx(69.5333333, abs=1e-6)
        assert state.source == "feedback"

    def test_account_suspended_pending_review(self, golden_pipeline):
        golden_pipeline.score_transaction(make_txn())
        assert golden_pipeline.store.get_account("1").status == "suspended"
        flags = golden_pipeline.list_flags("pending")
        assert len(flags) == 1
        assert flags[0]["display"][2] == 67.9
        assert flags[0]["causes_y"] == [
            {"cause": "Air ticket purchase", "coefficient": 1.0},
            {"cause": "Out of the country", "coefficient": 2.0},
        ]


def healthy_context():
    return CustomerContext(
        home_country="US",
        payment_state=PaymentState(min_due_paid=True, within_due_date=True,
                                   paid_amount=10000, due_amount=10000),
    )


class TestPipelineBranches:
    def make_pipeline(self):
        pipeline = Pipeline(RiskStore(None), default_config(), clock=replay_clock)
        pipeline.register_account("5", 43.0, context=healthy_context(),
                                  history=SEED_HISTORY)
        return pipeline

    def test_in_budget_transaction_passes_screen(self):
        pipeline = self.make_pipeline()
        txn = make_txn(tid="g1", account="5", amount=2500, category="Supermarkets",
                       description="WM SUPERCENTER #657 COOKEVILLE TN")
        assessment = pipeline.score_transaction(txn)
        assert assessment.outcome == "passed_screen"
        assert not assessment.flagged
        assert assessment.triple is None
        # the pass branch does not touch stored risk or medians
        assert pipeline.store.get_account("5").r_offline == 43.0
        assert pipeline.store.medians_for("Supermarkets") is None
        # but the statistics did advance
        assert pipeline.store.get_account("5").stats.n_transactions == 4

    def test_repeated_unexplained_spending_ratchets_risk_up(self):
        # two-step EMA by hand: no valid causes makes the online risk 100;
        # step 1: total = .7*100 + .3*43    = 82.9  -> offline 0.8*43 + 0.2*82.9 = 50.98
        # step 2: total = .7*100 + .3*50.98 = 85.294 -> offline 0.8*50.98 + 0.2*85.294 = 57.8428
        pipeline = self.make_pipeline()
        before = pipeline.store.get_account("5").r_offline
        first = pipeline.score_transaction(
            make_txn(tid="b1", account="5", amount=90000, category="Merchandise")
        )
        assert first.outcome == "scored"
        assert first.failed_standard_rules == {1}
        assert first.triple.online == 100.0
        assert first.triple.overall == pytest.approx(82.9, abs=1e-9)
        mid = pipeline.store.get_account("5").r_offline
        assert mid == pytest.approx(50.98, abs=1e-9)
        second = pipeline.score_transaction(
            make_txn(tid="b2", account="5", amount=90000, category="Merchandise",
                     date="2017-01-21")
        )
        assert second.triple.overall == pytest.approx(85.294, abs=1e-9)
        after = pipeline.store.get_account("5").r_offline
        assert after == pytest.approx(57.8428, abs=1e-9)
        assert after > mid > before

    def test_second_scored_transaction_carries_gap_and_spike(self):
        pipeline = self.make_pipeline()
        pipeline.score_transaction(
            make_txn(tid="b1", account="5", amount=90000, category="Merchandise")
        )
        second = pipeline.score_transaction(
            make_txn(tid="b2", account="5", amount=90000, category="Merchandise",
                     date="2017-01-21")
        )
        assert second.gap is not None  # the category median window now has one entry
        assert second.spike is not None
        assert second.spike[1] == pytest.approx(50.98 - 43.0, abs=1e-9)

    def test_flagged_account_still_scored(self):
        pipeline = self.make_pipeline()
        pipeline.score_transaction(
            make_txn(tid="b1", account="5", amount=90000, category="Merchandise")
        )
        assert pipeline.store.get_account("5").status == "suspended"
        again = pipeline.score_transaction(
            make_txn(tid="b2", account="5", amount=91000, category="Merchandise",
                     date="2017-01-21")
        )
        assert again.outcome == "scored"

    def test_unknown_account_rejected(self):
        pipeline = self.make_pipeline()
        with pytest.raises(UnknownAccountError):
            pipeline.score_transaction(make_txn(tid="x", account="ghost"))

    def test_profile_based_registration_uses_the_model(self, credit_data):
        from creditguard.mlcore import split_dataset, train_naive_bayes

        train, holdout = split_dataset(credit_data, 0.5, seed=0)
        model = train_naive_bayes(train)
        pipeline = Pipeline(RiskStore(None), default_config(), clock=replay_clock,
                            model=model)
        profile = list(holdout.rows[0])
        pipeline.register_account("42", profile=profile, context=healthy_context())
        expected = model.predict_proba(holdout.rows[0])["bad"] * 100.0
        state = pipeline.store.get_account("42")
        assert state.r_offline == pytest.approx(expected, abs=1e-12)
        assert state.baseline_r_offline == state.r_offline

    def test_registration_without_baseline_or_model_rejected(self):
        pipeline = Pipeline(RiskStore(None), default_config(), clock=replay_clock)
        with pytest.raises(ValueError, match="r_offline"):
            pipeline.register_account("42")

    def test_duplicate_tid_rejected(self):
        pipeline = self.make_pipeline()
        pipeline.score_transaction(make_txn(tid="dup", account="5", amount=100,
                                            category="Supermarkets"))
        with pytest.raises(ValueError, match="duplicate"):
            pipeline.score_transaction(make_txn(tid="dup", account="5", amount=200,
                                                category="Supermarkets"))


class TestAuditLog:
    def test_per_account_arrival_order(self, tmp_path):
        store = RiskStore(tmp_path / "state")
        pipeline = Pipeline(store, default_config(), clock=replay_clock,
                            audit_path=tmp_path / "state" / "audit.jsonl")
        for account in ("1", "2"):
            pipeline.register_account(account, 50.0, context=healthy_context(),
                                      history=SEED_HISTORY)
        order = [("1", "a1"), ("2", "b1"), ("1", "a2"), ("2", "b2"), ("1", "a3")]
        for account, tid in order:
            pipeline.score_transaction(
                make_txn(tid=tid, account=account, amount=90000, category="Merchandise")
            )
        pipeline.close()
        lines = (tmp_path / "state" / "audit.jsonl").read_text().strip().split("\n")
        seen = {"1": [], "2": []}
        for line in lines:
            obj = json.loads(line)
            seen[obj["account_id"]].append(obj["tid"])
        assert seen["1"] == ["a1", "a2", "a3"]
        assert seen["2"] == ["b1", "b2"]


def build_app(tmp_path, token=None):
    store = RiskStore(tmp_path / "state")
    pipeline = Pipeline(store, default_config(),
                        audit_path=tmp_path / "state" / "audit.jsonl")
    pipeline.register_account("1", 70.0, context=airline_account_context(),
                              history=SEED_HISTORY)
    return create_app(pipeline, bearer_token=token), pipeline


TXN_BODY = {
    "tid": "1",
    "account": "1",
    "date": "2017-01-20",
    "description": "SOUTHWES52 68506576536 800-435-9792 TX",
    "amount": "237.90",
    "category": "Airlines",
}


class TestHttpApi:
    def test_health(self, tmp_path):
        app, _ = build_app(tmp_path)
        assert TestClient(app).get("/v1/health").json() == {"status": "ok"}

    def test_config_redacted_view(self, tmp_path):
        app, _ = build_app(tmp_path)
        body = TestClient(app).get("/v1/config").json()
        assert body["lambda"] == 0.7
        assert body["threshold_pct"] == 60.0
        assert len(body["adaptive_rules"]) == 5

    def test_score_and_flag_round_trip(self, tmp_path):
        app, _ = build_app(tmp_path)
        client = TestClient(app)
        response = client.post("/v1/transactions", json=TXN_BODY)
        assert response.status_code == 200
        body = response.json()
        assert body["flagged"] is True
        assert body["display"] == [67.0, 70.0, 67.9]

        account = client.get("/v1/accounts/1").json()
        assert account["status"] == "suspended"
        assert account["r_offline"] == pytest.approx(69.5333333)

        flags = client.get("/v1/flags", params={"status": "pending"}).json()["flags"]
        assert len(flags) == 1
        flag_id = flags[0]["flag_id"]
        assert flags[0]["transaction"]["amount"] == "237.90"

        resolved = client.post(f"/v1/flags/{flag_id}/resolution",
                               json={"verdict": "confirmed_good", "note": "trip confirmed"})
        assert resolved.status_code == 200
        assert resolved.json()["status"] == "confirmed_good"
        account = client.get("/v1/accounts/1").json()
        assert account["status"] == "active"
        assert account["r_offline"] == 70.0  # back to the model baseline

        conflict = client.post(f"/v1/flags/{flag_id}/resolution",
                               json={"verdict": "confirmed_bad"})
        assert conflict.status_code == 409
        assert conflict.json()["code"] == "flag_already_resolved"

    def test_error_documents(self, tmp_path):
        app, _ = build_app(tmp_path)
        client = TestClient(app)
        missing = client.post("/v1/transactions",
                              json={k: v for k, v in TXN_BODY.items() if k != "category"})
        assert missing.status_code == 400
        assert missing.json()["code"] == "malformed_transaction"
        assert "category" in missing.json()["message"]

        unknown = client.post("/v1/transactions", json=dict(TXN_BODY, account="ghost", tid="9"))
        assert unknown.status_code == 404
        assert unknown.json()["code"] == "unknown_account"

        assert client.get("/v1/accounts/ghost").status_code == 404
        assert client.post("/v1/flags/F0/resolution",
                           json={"verdict": "confirmed_bad"}).status_code == 404
        bad_verdict = client.post("/v1/flags/F0/resolution", json={"verdict": "maybe"})
        assert bad_verdict.status_code == 400

    def test_bearer_token(self, tmp_path):
        app, _ = build_app(tmp_path, token="sesame")
        client = TestClient(app)
        assert client.get("/v1/health").status_code == 200  # health stays open
        assert client.get("/v1/flags").status_code == 401
        ok = client.get("/v1/flags", headers={"Authorization": "Bearer sesame"})
        assert ok.status_code == 200


class TestReplayDeterminism:
    def write_stream(self, path, n=60):
        lines = []
        for i in range(n):
            account = str(i % 3 + 1)
            lines.append(json.dumps({
                "tid": f"t{i}",
                "account": account,
                "date": (dt.date(2017, 1, 2) + dt.timedelta(days=i // 6)).isoformat(),
                "description": f"purchase {i}",
                "amount": f"{(i * 37) % 400}.{i % 100:02d}",
                "category": ("Merchandise", "Supermarkets", "Airlines")[i % 3],
            }))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def run_once(self, tmp_path, name, stream):
        from creditguard.cli import run_replay

        state = tmp_path / name
        accounts = tmp_path / f"{name}-accounts.json"
        accounts.write_text(json.dumps([
            {"account": "1", "r_offline": 70.0,
             "history": [{"date": "2017-01-01", "amount": "20.00"}]},
            {"account": "2", "r_offline": 23.0},
            {"account": "3", "r_offline": 82.0},
        ]))
        report = run_replay(stream, state, default_config(), accounts_path=accounts)
        return report, (state / "audit.jsonl").read_bytes()

    def test_identical_audit_logs(self, tmp_path):
        stream = tmp_path / "stream.jsonl"
        self.write_stream(stream)
        report_a, audit_a = self.run_once(tmp_path, "a", stream)
        report_b, audit_b = self.run_once(tmp_path, "b", stream)
        assert audit_a == audit_b
        assert report_a.processed == report_b.processed == 60
        assert report_a.passed_screen == report_b.passed_screen
        assert report_a.scored == report_b.scored
        assert report_a.flagged == report_b.flagged
        assert report_a.reason_counts == report_b.reason_counts
