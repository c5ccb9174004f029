import pytest
from hypothesis import given, strategies as st

from creditguard.config import AdaptiveRule, default_config
from creditguard.errors import ConfigError
from creditguard.rules import (
    CustomerContext,
    PaymentState,
    StandardOutcome,
    adaptive_causes,
    compute_r_online,
    evaluate_standard,
    haversine_km,
    valid_causes,
)
from creditguard.store import AccountStats

from conftest import airline_account_context, make_txn

CFG = default_config()


def stats_with(account="1", n=4, mean=5000.0, sigma=2500.0, completed_days=3,
               daily_mean=1.0, daily_sigma=0.0, today_count=1):
    """Stats as the pipeline hands them over: the current txn included."""
    return AccountStats(
        account_id=account,
        n_transactions=n,
        amount_mean=mean,
        amount_m2=sigma * sigma * (n - 1),
        completed_days=completed_days,
        daily_count_mean=daily_mean,
        daily_count_m2=daily_sigma * daily_sigma * max(completed_days - 1, 0),
        today_count=today_count,
    )


class TestEvaluateStandard:
    def test_worked_example_airline_purchase(self):
        # amount above mean+sigma, minimum due unpaid -> rules 1 and 4 fail
        txn = make_txn(amount=23790)
        outcome = evaluate_standard(txn, stats_with(mean=2500, sigma=500),
                                    airline_account_context(), CFG)
        assert outcome.relevant == {1, 2, 4, 6}
        assert outcome.failed == {1, 4}
        assert not outcome.passed_screen

    def test_all_relevant_rules_hold(self):
        txn = make_txn(amount=1000)
        outcome = evaluate_standard(txn, stats_with(),
                                    airline_account_context(min_due_paid=True), CFG)
        assert outcome.failed == frozenset()
        assert outcome.passed_screen

    def test_amount_rule_boundary(self):
        # mean 5000, sigma 2500 (minor units): 10000 > 7500 fails rule 1
        txn = make_txn(amount=10000)
        outcome = evaluate_standard(txn, stats_with(mean=5000, sigma=2500),
                                    airline_account_context(min_due_paid=True), CFG)
        assert 1 in outcome.failed
        # exactly mean + sigma satisfies (rule demands <=)
        txn = make_txn(amount=7500)
        outcome = evaluate_standard(txn, stats_with(mean=5000, sigma=2500),
                                    airline_account_context(min_due_paid=True), CFG)
        assert 1 not in outcome.failed

    def test_insufficient_history_counts_as_satisfied(self):
        txn = make_txn(amount=10_000_000)
        outcome = evaluate_standard(txn, stats_with(n=2, completed_days=1),
                                    airline_account_context(min_due_paid=True), CFG)
        assert 1 not in outcome.failed
        assert 2 not in outcome.failed

    def test_daily_count_rule(self):
        txn = make_txn(amount=100)
        stats = stats_with(daily_mean=1.0, daily_sigma=0.5, today_count=3)
        outcome = evaluate_standard(txn, stats,
                                    airline_account_context(min_due_paid=True), CFG)
        assert 2 in outcome.failed

    def test_unknown_category_defaults_to_all_rules(self):
        txn = make_txn(category="Groceries", amount=100)
        ctx = CustomerContext(payment_state=PaymentState(paid_amount=0, due_amount=100))
        outcome = evaluate_standard(txn, stats_with(), ctx, CFG)
        assert outcome.relevant == CFG.standard_rule_ids
        assert 5 in outcome.failed  # paid does not cover due

    def test_unknown_category_strict_mode_errors(self):
        import dataclasses

        strict_cfg = dataclasses.replace(CFG, strict_categories=True)
        txn = make_txn(category="Groceries")
        with pytest.raises(ConfigError, match="Groceries"):
            evaluate_standard(txn, stats_with(), CustomerContext(), strict_cfg)

    def test_location_rule(self):
        nashville = (36.16, -86.78, "US")
        paris = (48.85, 2.35, "FR")
        ctx = CustomerContext(
            home_country="US",
            last_known_location=nashville,
            payment_state=PaymentState(),
        )
        near = make_txn(location=(36.17, -86.80, "US"), amount=100)
        assert 6 not in evaluate_standard(near, stats_with(), ctx, CFG).failed
        far = make_txn(location=paris, amount=100)
        assert 6 in evaluate_standard(far, stats_with(), ctx, CFG).failed

    def test_missing_location_counts_as_satisfied(self):
        txn = make_txn(amount=100)
        ctx = CustomerContext(home_country="US", payment_state=PaymentState())
        assert 6 not in evaluate_standard(txn, stats_with(), ctx, CFG).failed

    def test_pure_function(self):
        txn = make_txn(amount=23790)
        args = (txn, stats_with(mean=2500, sigma=500), airline_account_context(), CFG)
        assert evaluate_standard(*args) == evaluate_standard(*args)

    def test_failed_subset_of_relevant_enforced(self):
        with pytest.raises(ValueError):
            StandardOutcome(relevant=frozenset({1}), failed=frozenset({1, 2}))


def by_cause(rules):
    return {r.cause for r in rules}


class TestAdaptiveCauses:
    def test_failed_1_and_4(self):
        y = adaptive_causes({1, 4}, CFG.adaptive_rules)
        assert by_cause(y) == {"Air ticket purchase", "Out of the country"}

    def test_failed_empty(self):
        assert adaptive_causes(set(), CFG.adaptive_rules) == []

    def test_failed_6(self):
        y = adaptive_causes({6}, CFG.adaptive_rules)
        assert by_cause(y) == {"Address change", "Out of the country"}


class TestValidCauses:
    def test_airline_purchase_at_home(self):
        y = adaptive_causes({1, 4}, CFG.adaptive_rules)
        x = valid_causes(y, airline_account_context(), make_txn())
        assert by_cause(x) == {"Air ticket purchase"}

    def test_no_flags_no_travel(self):
        y = adaptive_causes({1, 2, 3, 4, 5, 6}, CFG.adaptive_rules)
        ctx = CustomerContext(home_country="US")
        x = valid_causes(y, ctx, make_txn(category="Merchandise"))
        assert x == []

    def test_all_predicates_true(self):
        y = adaptive_causes({1, 2, 3, 4, 5, 6}, CFG.adaptive_rules)
        ctx = CustomerContext(
            home_country="US",
            flags=frozenset({"address_change", "job_switch", "foreign_worker",
                             "air_ticket_purchase", "out_of_country"}),
        )
        x = valid_causes(y, ctx, make_txn(category="Merchandise"))
        assert by_cause(x) == by_cause(y)

    def test_out_of_country_from_txn_location(self):
        y = adaptive_causes({4}, CFG.adaptive_rules)
        ctx = CustomerContext(home_country="US")
        abroad = make_txn(location=(48.85, 2.35, "FR"), category="Merchandise")
        assert by_cause(valid_causes(y, ctx, abroad)) == {"Out of the country"}
        at_home = make_txn(location=(36.1, -86.7, "US"), category="Merchandise")
        assert valid_causes(y, ctx, at_home) == []


AIR = next(r for r in CFG.adaptive_rules if r.cause == "Air ticket purchase")
OUT = next(r for r in CFG.adaptive_rules if r.cause == "Out of the country")


class TestOnlineRisk:
    def test_worked_example(self):
        r = compute_r_online([AIR], [AIR, OUT])
        assert r == pytest.approx(66.6666667, abs=1e-6)

    def test_fully_explained_is_zero(self):
        assert compute_r_online([AIR, OUT], [AIR, OUT]) == 0.0

    def test_empty_y_is_maximal(self):
        assert compute_r_online([], []) == 100.0

    def test_x_must_be_subset(self):
        with pytest.raises(ValueError):
            compute_r_online([AIR], [OUT])


def cause_set(coefficients):
    return [
        AdaptiveRule(i + 1, f"cause {i}", frozenset({1}), "1x", c, "address_change")
        for i, c in enumerate(coefficients)
    ]


@given(
    st.lists(st.floats(0.01, 100.0), min_size=0, max_size=8),
    st.data(),
)
def test_online_risk_properties(coefficients, data):
    y = cause_set(coefficients)
    x = [r for r in y if data.draw(st.booleans())]
    r = compute_r_online(x, y)
    assert 0.0 <= r <= 100.0
    # validating one more cause never increases the risk
    remaining = [r_ for r_ in y if r_ not in x]
    if remaining:
        extra = data.draw(st.sampled_from(remaining))
        assert compute_r_online(x + [extra], y) <= r + 1e-9
    # uniform coefficient scaling leaves the ratio unchanged
    scale = data.draw(st.floats(0.1, 10.0))
    y2 = cause_set([c * scale for c in coefficients])
    x2 = [y2[y.index(r_)] for r_ in x]
    assert compute_r_online(x2, y2) == pytest.approx(r, abs=1e-6)


def test_haversine_known_distance():
    # 1.28 degrees of longitude at latitude 36.16: 1.28 * 111.32 * cos(36.16 deg) ~ 115 km
    nashville = (36.1627, -86.7816)
    cookeville = (36.1628, -85.5016)
    assert haversine_km(nashville, cookeville) == pytest.approx(115.0, rel=0.01)
    assert haversine_km(nashville, nashville) == 0.0
