"""
Fairness metrics and recourse cost
==================================

Prediction metrics compare positive rates and error rates across groups.
Recourse cost asks a different question: how far does a person have to move
in feature space before the model changes its mind?
"""

# %%
import numpy as np

from proximix.classifiers import TrainSpec, predict_labels, train
from proximix.data import split
from proximix.metrics import eodds_gap, evaluate_predictions
from proximix.recourse import find_counterfactual, group_recourse_report
from proximix.synthetic import make_dataset

# %%
# Hand-checkable metrics on eight rows, four per group.
y_true = [1, 1, 0, 0, 1, 1, 0, 0]
y_pred = [1, 1, 1, 0, 1, 0, 0, 0]
z = [1, 1, 1, 1, 0, 0, 0, 0]
print(evaluate_predictions(y_true, y_pred, z).to_dict())

# %%
# The equalized-odds gap is signed: a group that is favoured on both rates
# gives a negative difference and a ratio above one.
print(eodds_gap(tpr0=0.6158, tpr1=0.7579, fpr0=0.0521, fpr1=0.1848))
print(eodds_gap(tpr0=0.9, tpr1=0.6, fpr0=0.4, fpr1=0.2))

# %%
# A depth-7 tree on the synthetic data, then the nearest training row with
# the opposite prediction for one rejected applicant.
train_ds, test = split(make_dataset(n=1500, seed=2), seed=2)
tree = train(train_ds, TrainSpec("tree"))
i = int(np.flatnonzero(predict_labels(tree, test.features) == 0)[0])
cf = find_counterfactual(tree, test.features[i], train_ds, source_index=i)
print("cost", round(cf.cost, 4))
for name, before, after in zip(test.feature_names, test.features[i], cf.cf_features):
    if before != after:
        print(f"  {name:14s} {before:.3f} -> {after:.3f}")

# %%
# Group averages of that cost. A gap means one group needs larger changes.
print(group_recourse_report(tree, test, train_ds).to_dict())
