"""Precompute each account's offline risk from the trained classifier.

The offline risk of an account is the classifier's bad-class probability
scaled to a percentage. These values seed the per-account risk state the
transaction pipeline starts from, and analyst verdicts later reset or
raise them.
"""

from creditguard.datasets import load_german_credit
from creditguard.mlcore import offline_risk_table, split_dataset, train_random_forest

dataset, source = load_german_credit()
train, holdout = split_dataset(dataset, 0.5, seed=0)
model = train_random_forest(train, n_trees=100, seed=0)

records = offline_risk_table(model, holdout)
print(f"offline risk for the first 10 of {len(records)} held-out accounts:\n")
print("account_id  r_offline  source")
for record in records[:10]:
    print(f"{record.account_id:>10}  {record.r_offline:9.1f}  {record.source}")

high = [r for r in records if r.r_offline > 60.0]
print(f"\n{len(high)} accounts start above a 60% offline risk")
