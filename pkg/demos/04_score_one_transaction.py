"""Walk one out-of-pattern airline purchase through the full pipeline.

Account 1 starts with a 70% offline risk and an unpaid minimum due. A
$237.90 air ticket blows past its historical mean-plus-sigma spend, so
the screen fails rules 1 (amount) and 4 (minimum due). The cause
analysis finds two candidate explanations and validates one (the ticket
purchase itself), leaving an online risk of 66.7%; weighted 70/30 with
the stored offline risk that is a 67.7% total, above the 60% threshold,
so the account is flagged and suspended pending review.
"""

import datetime as dt

from creditguard.config import default_config
from creditguard.ingest import Transaction
from creditguard.rules import CustomerContext, PaymentState
from creditguard.service import Pipeline, replay_clock
from creditguard.store import RiskStore

pipeline = Pipeline(RiskStore(None), default_config(), clock=replay_clock)

context = CustomerContext(
    home_country="US",
    payment_state=PaymentState(min_due_paid=False, within_due_date=True,
                               paid_amount=5000, due_amount=5000),
)
history = [(dt.date(2017, 1, 15), 2000), (dt.date(2017, 1, 16), 2500),
           (dt.date(2017, 1, 17), 3000)]
pipeline.register_account("1", r_offline=70.0, context=context, history=history)

txn = Transaction(
    tid="1", account_id="1", date=dt.date(2017, 1, 20),
    description="SOUTHWES52 68506576536 800-435-9792 TX",
    amount=23790, category="Airlines",
)
a = pipeline.score_transaction(txn)

print(f"failed standard rules: {sorted(a.failed_standard_rules)}")
print(f"candidate causes (Y):  {list(a.causes_y)}")
print(f"validated causes (X):  {list(a.causes_x)}")
print(f"online risk:  {a.triple.online:.3f}%")
print(f"offline risk: {a.triple.offline:.3f}%")
print(f"total risk:   {a.triple.overall:.3f}%  (displayed as {a.display[2]}%)")
print(f"flagged: {a.flagged}  reasons: {[r['code'] for r in a.reasons]}")

state = pipeline.store.get_account("1")
print(f"\naccount after feedback: r_offline={state.r_offline:.3f}% "
      f"status={state.status}")
flag = pipeline.list_flags("pending")[0]
print(f"pending flag {flag['flag_id']} shows display triple {flag['display']}")
