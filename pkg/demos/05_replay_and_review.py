"""Replay a transaction stream against durable state, then work the queue.

The replay writes an append-only event log plus an audit line per
assessment into the state directory; reopening the directory rebuilds
identical state. Analyst verdicts feed back into stored risk: a good
verdict restores the model baseline, a bad one pins the risk at 95+.
"""

import json
import tempfile
from pathlib import Path

from creditguard.cli import run_replay
from creditguard.config import default_config
from creditguard.service import Pipeline, replay_clock
from creditguard.store import RiskStore

workdir = Path(tempfile.mkdtemp(prefix="creditguard-demo-"))

transactions = [
    {"tid": "1", "account": "1", "date": "2017-01-20",
     "description": "SOUTHWES52 68506576536 800-435-9792 TX",
     "amount": "237.90", "category": "Airlines"},
    {"tid": "2", "account": "2", "date": "2017-01-20",
     "description": "INTERNET PAYMENT - THANK YOU",
     "amount": "25.00", "category": "Payments and Credits"},
    {"tid": "3", "account": "3", "date": "2017-01-20",
     "description": "DNH*GODADDY.COM 480-505-8855 AZ",
     "amount": "155.88", "category": "Merchandise"},
    {"tid": "4", "account": "4", "date": "2017-01-20",
     "description": "WM SUPERCENTER #657 COOKEVILLE TN",
     "amount": "102.88", "category": "Supermarkets"},
    {"tid": "5", "account": "5", "date": "2017-01-20",
     "description": "BESTBUYCOM 805201016 1 888-BESTBUY MN",
     "amount": "131.69", "category": "Merchandise"},
]
stream = workdir / "stream.jsonl"
stream.write_text("\n".join(json.dumps(t) for t in transactions) + "\n")

offline_risk = {"1": 70.0, "2": 23.0, "3": 82.0, "4": 79.0, "5": 43.0}
accounts = workdir / "accounts.json"
accounts.write_text(json.dumps([
    {
        "account": account_id,
        "r_offline": risk,
        "context": {"home_country": "US",
                    "payment_state": {"min_due_paid": account_id != "1"}},
        "history": [{"date": "2017-01-15", "amount": "20.00"},
                    {"date": "2017-01-16", "amount": "25.00"},
                    {"date": "2017-01-17", "amount": "30.00"}],
    }
    for account_id, risk in offline_risk.items()
]))

state_dir = workdir / "state"
report = run_replay(stream, state_dir, default_config(), accounts_path=accounts)
print(f"processed={report.processed} passed_screen={report.passed_screen} "
      f"scored={report.scored} flagged={report.flagged}")
print(f"reason counts: {report.reason_counts}\n")

# reopen the durable state and review the queue like an analyst would
store = RiskStore(state_dir)
pipeline = Pipeline(store, default_config(), clock=replay_clock)
for flag in pipeline.list_flags("pending"):
    print(f"flag {flag['flag_id']}: account {flag['account_id']} "
          f"display {flag['display']} reasons {[r['code'] for r in flag['reasons']]}")

first = pipeline.list_flags("pending")[0]
resolved = pipeline.resolve_flag(first["flag_id"], "confirmed_good",
                                 note="travel confirmed with customer")
account = pipeline.get_account(resolved["account_id"])
print(f"\nafter confirmed_good: account {account['account_id']} "
      f"r_offline={account['r_offline']} status={account['status']}")
pipeline.close()
print(f"\nstate directory: {state_dir}")
