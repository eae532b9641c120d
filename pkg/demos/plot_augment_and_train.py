"""
Augmenting a biased dataset
===========================

A synthetic hiring table where a share of qualified women were recorded as
rejected. We train logistic regression with and without mixed samples and
compare the demographic-parity ratio on held-out data.
"""

# %%
from proximix.classifiers import TrainSpec, train
from proximix.data import concat, split
from proximix.metrics import full_report
from proximix.mixing import STRATEGIES, GenerationLog, MixConfig, generate, to_dataset
from proximix.synthetic import make_dataset

data = make_dataset(n=2000, label_bias=0.5, seed=0)
train_ds, test = split(data, test_fraction=0.3, seed=0)
print(len(train_ds), "training rows,", train_ds.n_features, "features")

# %%
# Baseline.
spec = TrainSpec("logreg")
base = full_report(train(train_ds, spec), test)
print(f"baseline  acc {base.acc:.3f}  DP% {base.dp_ratio:.3f}")

# %%
# Generate 10% extra rows from each anchor subgroup and retrain. C2C1p uses
# positive women as anchors, which is the group the label bias hurt.
for name, strategy in STRATEGIES.items():
    glog = GenerationLog()
    cfg = MixConfig(d=0.5, gen_count_M=len(train_ds) // 10, seed=0)
    mixed = generate(train_ds, strategy, cfg, glog)
    rep = full_report(train(concat(train_ds, to_dataset(mixed, train_ds)), spec), test)
    mean_label = sum(s.label for s in mixed) / len(mixed)
    print(f"{name:6s}  acc {rep.acc:.3f}  DP% {rep.dp_ratio:.3f}  "
          f"anchors {glog.anchors_drawn:3d}  mean label {mean_label:.2f}")
