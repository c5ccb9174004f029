import datetime as dt

import pytest

from creditguard.config import default_config
from creditguard.datasets import load_german_credit
from creditguard.ingest import Transaction
from creditguard.rules import CustomerContext, PaymentState
from creditguard.service import Pipeline, replay_clock
from creditguard.store import RiskStore


@pytest.fixture(scope="session")
def credit_data():
    """The credit summary dataset (real file when available, else surrogate)."""
    dataset, source = load_german_credit()
    return dataset


def make_txn(tid="1", account="1", date="2017-01-20", amount=23790,
             category="Airlines", description="SOUTHWES52 68506576536 800-435-9792 TX",
             location=None, flags=()):
    return Transaction(
        tid=tid,
        account_id=account,
        date=dt.date.fromisoformat(date),
        description=description,
        amount=amount,
        category=category,
        location=location,
        context_flags=frozenset(flags),
    )


def airline_account_context(min_due_paid=False):
    """Account 1 of the worked example: minimum due unpaid, at home."""
    return CustomerContext(
        home_country="US",
        payment_state=PaymentState(
            min_due_paid=min_due_paid,
            within_due_date=True,
            paid_amount=5000,
            due_amount=5000,
        ),
    )


SEED_HISTORY = [
    (dt.date(2017, 1, 15), 2000),
    (dt.date(2017, 1, 16), 2500),
    (dt.date(2017, 1, 17), 3000),
]


@pytest.fixture
def golden_pipeline():
    """In-memory pipeline seeded with the worked example's account 1."""
    pipeline = Pipeline(RiskStore(None), default_config(), clock=replay_clock)
    pipeline.register_account(
        "1", 70.0, context=airline_account_context(), history=SEED_HISTORY
    )
    yield pipeline
    pipeline.close()
