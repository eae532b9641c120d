"""Tabular dataset ingestion, encoding, splitting and subgroup filtering."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"

# Cells treated as missing during cleaning ("?" is the Adult convention).
MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})


class MissingColumn(KeyError):
    """A schema column is absent from the CSV header."""


class EmptyAfterCleaning(ValueError):
    """Every row was dropped during cleaning."""


class EmptySubgroup(ValueError):
    """A subgroup selector matched no rows."""


class SchemaError(ValueError):
    pass


class ConstantContinuousColumn(UserWarning):
    """A continuous column has max == min and was dropped from the encoding."""


@dataclass(frozen=True)
class DatasetSchema:
    """Column layout of a tabular dataset.

    ``columns`` is a tuple of ``(name, kind)`` pairs with kind either
    ``"categorical"`` or ``"continuous"``. The label and sensitive columns
    must be categorical. With ``sensitive_as_feature`` the sensitive column
    is also one-hot encoded into the feature matrix.
    """

    columns: tuple
    label_column: str
    positive_label_value: str
    sensitive_column: str
    privileged_value: str
    sensitive_as_feature: bool = True
    name: str = "dataset"

    def __post_init__(self):
        cols = tuple((str(n), str(k)) for n, k in self.columns)
        object.__setattr__(self, "columns", cols)
        names = [n for n, _ in cols]
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique")
        kinds = dict(cols)
        for k in kinds.values():
            if k not in (CATEGORICAL, CONTINUOUS):
                raise SchemaError(f"unknown column kind {k!r}")
        for role in (self.label_column, self.sensitive_column):
            if role not in kinds:
                raise SchemaError(f"{role!r} is not a schema column")
            if kinds[role] != CATEGORICAL:
                raise SchemaError(f"{role!r} must be categorical")
        if self.label_column == self.sensitive_column:
            raise SchemaError("label and sensitive columns must differ")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.columns]

    def kind(self, name: str) -> str:
        return dict(self.columns)[name]

    @property
    def feature_columns(self) -> list[str]:
        skip = {self.label_column}
        if not self.sensitive_as_feature:
            skip.add(self.sensitive_column)
        return [n for n in self.names if n not in skip]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": [{"name": n, "kind": k} for n, k in self.columns],
            "label_column": self.label_column,
            "positive_label_value": self.positive_label_value,
            "sensitive_column": self.sensitive_column,
            "privileged_value": self.privileged_value,
            "sensitive_as_feature": self.sensitive_as_feature,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        cols = tuple((c["name"], c["kind"]) for c in d["columns"])
        return cls(
            columns=cols,
            label_column=d["label_column"],
            positive_label_value=str(d["positive_label_value"]),
            sensitive_column=d["sensitive_column"],
            privileged_value=str(d["privileged_value"]),
            sensitive_as_feature=bool(d.get("sensitive_as_feature", True)),
            name=d.get("name", "dataset"),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetSchema":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class RawTable:
    header: list
    rows: list

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.header):
                raise ValueError("row length does not match header")

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [r[j] for r in self.rows]


@dataclass(frozen=True)
class SubgroupSelector:
    z: int
    y: Optional[int] = None

    def __post_init__(self):
        if self.z not in (0, 1) or self.y not in (None, 0, 1):
            raise ValueError("subgroup selector fields must be 0 or 1")


@dataclass(frozen=True, eq=False)
class EncodedDataset:
    """Numeric view of a dataset.

    Attributes
    ----------
    features : ndarray of shape (N, D)
    labels : ndarray of shape (N,)
        Binary for loaded data; augmentation may add fractional labels.
    sensitive : ndarray of shape (N,)
        1 for the privileged group, 0 otherwise.
    feature_names : list of str
        One-hot columns are named ``"column=value"``.
    scale_params : dict
        ``{column: (min, max)}`` for every continuous column kept.
    categories : dict
        ``{column: [values...]}`` in indicator order for every categorical feature column.
    """

    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    feature_names: list
    scale_params: dict = field(default_factory=dict)
    categories: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        y = np.array(self.labels, dtype=float).reshape(-1)
        z = np.array(self.sensitive, dtype=int).reshape(-1)
        if not (len(X) == len(y) == len(z)):
            raise ValueError("features, labels and sensitive must have N rows")
        if X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length does not match feature columns")
        for a in (X, y, z):
            a.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "sensitive", z)
        object.__setattr__(self, "feature_names", list(self.feature_names))

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "EncodedDataset":
        idx = np.asarray(idx, dtype=int)
        return replace(
            self,
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive=self.sensitive[idx],
        )

    def one_hot_groups(self) -> dict:
        """``{column: [feature indices]}`` for each categorical feature column."""
        out = {}
        for col, values in self.categories.items():
            out[col] = [self.feature_names.index(f"{col}={v}") for v in values]
        return out

    def decode_continuous(self, name: str) -> np.ndarray:
        lo, hi = self.scale_params[name]
        return self.features[:, self.feature_names.index(name)] * (hi - lo) + lo


def concat(a: EncodedDataset, b: EncodedDataset) -> EncodedDataset:
    if a.feature_names != b.feature_names:
        raise ValueError("datasets have different feature layouts")
    return replace(
        a,
        features=np.vstack([a.features, b.features]),
        labels=np.concatenate([a.labels, b.labels]),
        sensitive=np.concatenate([a.sensitive, b.sensitive]),
    )


def _parse_cell(cell, kind):
    s = str(cell).strip()
    if s.lower() in MISSING_TOKENS:
        return None
    if kind == CONTINUOUS:
        try:
            v = float(s)
        except ValueError:
            return None
        return v if np.isfinite(v) else None
    return s


def load_csv(path, schema: DatasetSchema) -> RawTable:
    """Read a headed CSV file, keep the schema columns and drop incomplete rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyAfterCleaning(f"{path} is empty") from None
        pos = {}
        for name in schema.names:
            if name not in header:
                raise MissingColumn(name)
            pos[name] = header.index(name)
        kinds = [schema.kind(n) for n in schema.names]
        rows = []
        for raw in reader:
            if not raw or len(raw) < len(header):
                continue
            row = [_parse_cell(raw[pos[n]], k) for n, k in zip(schema.names, kinds)]
            if any(v is None for v in row):
                continue
            rows.append(row)
    if not rows:
        raise EmptyAfterCleaning(str(path))
    return RawTable(header=list(schema.names), rows=rows)


def encode(raw: RawTable, schema: DatasetSchema, reference: Optional[EncodedDataset] = None) -> EncodedDataset:
    """One-hot encode categorical columns and min-max scale continuous ones.

    When ``reference`` is given its categories and scale parameters are reused
    (values unseen in the reference encode to an all-zero indicator group and
    continuous values may fall outside [0, 1]).
    """
    for role in (schema.label_column, schema.sensitive_column):
        observed = set(raw.column(role))
        if reference is None and len(observed) != 2:
            raise SchemaError(f"{role!r} must have exactly two observed values, got {sorted(observed)}")
    labels = np.array([v == schema.positive_label_value for v in raw.column(schema.label_column)], dtype=float)
    sensitive = np.array([v == schema.privileged_value for v in raw.column(schema.sensitive_column)], dtype=int)

    blocks, names = [], []
    scale_params, categories = {}, {}
    dropped = []
    for col in schema.feature_columns:
        values = raw.column(col)
        if schema.kind(col) == CONTINUOUS:
            v = np.asarray(values, dtype=float)
            if reference is not None:
                if col not in reference.scale_params:
                    continue
                lo, hi = reference.scale_params[col]
            else:
                lo, hi = float(v.min()), float(v.max())
                if hi == lo:
                    warnings.warn(f"continuous column {col!r} is constant; dropped", ConstantContinuousColumn)
                    dropped.append(col)
                    continue
            scale_params[col] = (lo, hi)
            blocks.append(((v - lo) / (hi - lo))[:, None])
            names.append(col)
        else:
            if reference is not None:
                cats = list(reference.categories[col])
            else:
                cats = sorted(set(values))
            categories[col] = cats
            lookup = {c: i for i, c in enumerate(cats)}
            block = np.zeros((len(values), len(cats)))
            for i, v in enumerate(values):
                j = lookup.get(v)
                if j is not None:
                    block[i, j] = 1.0
            blocks.append(block)
            names.extend(f"{col}={c}" for c in cats)
    X = np.hstack(blocks) if blocks else np.zeros((len(raw), 0))
    meta = {"schema": schema.name, "privileged_value": schema.privileged_value}
    if dropped:
        meta["dropped_columns"] = dropped
    return EncodedDataset(
        features=X,
        labels=labels,
        sensitive=sensitive,
        feature_names=names,
        scale_params=scale_params,
        categories=categories,
        metadata=meta,
    )


def split_indices(n: int, test_fraction: float, seed: int, stratify=None):
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    if stratify is None:
        perm = rng.permutation(n)
        n_test = int(round(n * test_fraction))
        test, train = perm[:n_test], perm[n_test:]
    else:
        strata = np.asarray(stratify)
        train, test = [], []
        for s in np.unique(strata):
            members = rng.permutation(np.flatnonzero(strata == s))
            k = int(round(len(members) * test_fraction))
            test.append(members[:k])
            train.append(members[k:])
        train, test = np.concatenate(train), np.concatenate(test)
    return np.sort(train), np.sort(test)


def split(ds: EncodedDataset, test_fraction: float = 0.3, seed: int = 42, stratify: bool = False):
    """Random train/test partition of the rows, reproducible from ``seed``."""
    strata = ds.labels * 2 + ds.sensitive if stratify else None
    train, test = split_indices(len(ds), test_fraction, seed, strata)
    return ds.take(train), ds.take(test)


def subgroup_mask(ds: EncodedDataset, sel: SubgroupSelector) -> np.ndarray:
    mask = ds.sensitive == sel.z
    if sel.y is not None:
        mask &= ds.labels == sel.y
    return mask


def subgroup(ds: EncodedDataset, sel: SubgroupSelector) -> EncodedDataset:
    idx = np.flatnonzero(subgroup_mask(ds, sel))
    if len(idx) == 0:
        raise EmptySubgroup(f"no rows with z={sel.z}, y={sel.y}")
    return ds.take(idx)


def load_dataset(csv_path, schema) -> EncodedDataset:
    if not isinstance(schema, DatasetSchema):
        schema = DatasetSchema.load(schema)
    return encode(load_csv(csv_path, schema), schema)


# Column layouts of the three benchmark datasets. Column names follow the
# commonly distributed CSV headers; rename to match a local copy if needed.
ADULT_SCHEMA = DatasetSchema(
    name="adult",
    columns=(
        ("age", CONTINUOUS),
        ("workclass", CATEGORICAL),
        ("education", CATEGORICAL),
        ("education-num", CONTINUOUS),
        ("marital-status", CATEGORICAL),
        ("occupation", CATEGORICAL),
        ("relationship", CATEGORICAL),
        ("race", CATEGORICAL),
        ("sex", CATEGORICAL),
        ("capital-gain", CONTINUOUS),
        ("capital-loss", CONTINUOUS),
        ("hours-per-week", CONTINUOUS),
        ("income", CATEGORICAL),
    ),
    label_column="income",
    positive_label_value=">50K",
    sensitive_column="sex",
    privileged_value="Male",
)

LAW_SCHEMA = DatasetSchema(
    name="law",
    columns=(
        ("gender", CATEGORICAL),
        ("race", CATEGORICAL),
        ("decile1", CONTINUOUS),
        ("decile3", CONTINUOUS),
        ("lsat", CONTINUOUS),
        ("ugpa", CONTINUOUS),
        ("zfygpa", CONTINUOUS),
        ("zgpa", CONTINUOUS),
        ("fulltime", CATEGORICAL),
        ("fam_inc", CONTINUOUS),
        ("pass_bar", CATEGORICAL),
    ),
    label_column="pass_bar",
    positive_label_value="1",
    sensitive_column="gender",
    privileged_value="male",
)

CREDIT_SCHEMA = DatasetSchema(
    name="credit",
    columns=(
        ("SEX", CATEGORICAL),
        ("EDUCATION", CATEGORICAL),
        ("AGE", CONTINUOUS),
        ("LIMIT_BAL", CONTINUOUS),
        *((f"PAY_{i}", CONTINUOUS) for i in range(1, 7)),
        *((f"BILL_AMT{i}", CONTINUOUS) for i in range(1, 7)),
        *((f"PAY_AMT{i}", CONTINUOUS) for i in range(1, 7)),
        ("default_payment", CATEGORICAL),
    ),
    label_column="default_payment",
    positive_label_value="1",
    sensitive_column="SEX",
    privileged_value="1",
)
