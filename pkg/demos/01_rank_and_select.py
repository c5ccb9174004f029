"""Rank account attributes by information gain and pick the useful ones.

The ranking measures, in bits, how much knowing one attribute reduces
uncertainty about whether an account is good or bad. Attributes that
score zero carry no signal and are dropped before training.
"""

from creditguard.datasets import load_german_credit
from creditguard.mlcore import info_gain_rank, select_features

dataset, source = load_german_credit()
print(f"loaded {len(dataset)} accounts from the {source} dataset\n")

ranking = info_gain_rank(dataset)
print("information gain ranking (bits):")
for name, gain in ranking:
    marker = "  (no signal)" if gain == 0 else ""
    print(f"  {gain:8.6f}  {name}{marker}")

kept = select_features(ranking, epsilon=0.0)
dropped = [name for name, _ in ranking if name not in kept]
print(f"\nkept {len(kept)} attributes; dropped {dropped}")
