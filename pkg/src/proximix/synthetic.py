"""Synthetic tabular data with controllable label bias against the unprivileged group.

Rows carry a sensitive column ``sex`` (``Male`` privileged), three continuous
features, one categorical feature and a binary ``outcome``. The unbiased
outcome depends only on the non-sensitive features::

    merit = 1.5 * skill + 1.0 * hours + 0.5 * tenure + role_effect + logistic noise
    fair_label = merit > threshold

Label bias is injected afterwards: every positive ``Female`` row is flipped
to negative with probability ``label_bias``. Feature distributions are
identical across groups, so any gap in positive rates comes from the labels.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data import CATEGORICAL, CONTINUOUS, DatasetSchema, RawTable, encode

SYNTHETIC_SCHEMA = DatasetSchema(
    name="synthetic",
    columns=(
        ("skill", CONTINUOUS),
        ("hours", CONTINUOUS),
        ("tenure", CONTINUOUS),
        ("role", CATEGORICAL),
        ("sex", CATEGORICAL),
        ("outcome", CATEGORICAL),
    ),
    label_column="outcome",
    positive_label_value="yes",
    sensitive_column="sex",
    privileged_value="Male",
)

_ROLE_EFFECT = {"clerk": -0.5, "technician": 0.0, "manager": 0.7}


def make_table(n: int = 2000, label_bias: float = 0.5, privileged_share: float = 0.6,
               threshold: float = 0.5, seed: int = 0) -> RawTable:
    rng = np.random.default_rng(seed)
    male = rng.random(n) < privileged_share
    skill = rng.normal(size=n)
    hours = rng.normal(size=n)
    tenure = rng.normal(size=n)
    roles = rng.choice(list(_ROLE_EFFECT), size=n, p=[0.4, 0.35, 0.25])
    effect = np.array([_ROLE_EFFECT[r] for r in roles])
    merit = 1.5 * skill + 1.0 * hours + 0.5 * tenure + effect + rng.logistic(size=n)
    label = merit > threshold
    flip = (~male) & label & (rng.random(n) < label_bias)
    label = label & ~flip
    rows = [
        [round(float(skill[i]), 6), round(float(hours[i]), 6), round(float(tenure[i]), 6), str(roles[i]),
         "Male" if male[i] else "Female", "yes" if label[i] else "no"]
        for i in range(n)
    ]
    return RawTable(header=SYNTHETIC_SCHEMA.names, rows=rows)


def make_dataset(n: int = 2000, label_bias: float = 0.5, seed: int = 0, **kw):
    return encode(make_table(n, label_bias, seed=seed, **kw), SYNTHETIC_SCHEMA)


def write_csv(table: RawTable, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(table.header)
        w.writerows(table.rows)
    return path


def write_dataset(directory, n: int = 2000, label_bias: float = 0.5, seed: int = 0, **kw):
    """Write ``synthetic.csv`` and ``synthetic_schema.json`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(make_table(n, label_bias, seed=seed, **kw), directory / "synthetic.csv")
    schema_path = directory / "synthetic_schema.json"
    SYNTHETIC_SCHEMA.save(schema_path)
    return csv_path, schema_path
