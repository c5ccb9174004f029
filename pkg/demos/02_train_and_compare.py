"""Train the three classifiers on a 50/50 split and compare them.

The forest votes across 100 bagged information-gain trees; its class
probabilities are vote fractions. Naive Bayes uses smoothed frequency
tables and per-class Gaussians. The single tree is grown greedily and
then reduced-error pruned against a held-out quarter of the train split.
"""

from creditguard.datasets import load_german_credit
from creditguard.mlcore import (
    evaluate,
    split_dataset,
    train_naive_bayes,
    train_pruned_tree,
    train_random_forest,
)

dataset, source = load_german_credit()
train, test = split_dataset(dataset, 0.5, seed=0)
print(f"{source} dataset: {len(train)} train / {len(test)} test\n")

models = {
    "random forest": train_random_forest(train, n_trees=100, seed=0),
    "naive bayes": train_naive_bayes(train),
    "pruned tree": train_pruned_tree(train, prune_fraction=0.25, seed=0),
}

print(f"{'classifier':<14} {'CCI %':>7} {'ICI %':>7} {'TP':>6} {'FP':>6} "
      f"{'prec':>6} {'rec':>6} {'train s':>8} {'test s':>7}")
for name, model in models.items():
    m = evaluate(model, test)
    print(f"{name:<14} {m.cci_pct:7.1f} {m.ici_pct:7.1f} {m.avg_tp_rate:6.3f} "
          f"{m.avg_fp_rate:6.3f} {m.precision:6.3f} {m.recall:6.3f} "
          f"{m.train_time:8.2f} {m.test_time:7.2f}")

forest = models["random forest"]
probs = forest.predict_proba(test.rows[0])
print(f"\nfirst test account, forest vote distribution: "
      f"good={probs['good']:.3f} bad={probs['bad']:.3f}")
