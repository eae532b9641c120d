import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proximix.data import CATEGORICAL, CONTINUOUS, DatasetSchema, EncodedDataset, RawTable, encode  # noqa: E402

TOY_SCHEMA = DatasetSchema(
    name="toy",
    columns=(
        ("Age", CONTINUOUS),
        ("Occupation", CATEGORICAL),
        ("Gender", CATEGORICAL),
        ("CapitalGain", CONTINUOUS),
        ("CapitalLoss", CONTINUOUS),
        ("Income", CATEGORICAL),
    ),
    label_column="Income",
    positive_label_value=">50K",
    sensitive_column="Gender",
    privileged_value="Male",
)

# Two high-income male officers and one near-identical low-income female officer.
TOY_ROWS = [
    # name, age, occupation, gender, gain, loss, income
    ("M1", 32.0, "Officer", "Male", 2200.0, 0.0, ">50K"),
    ("M2", 31.0, "Officer", "Male", 2100.0, 0.0, ">50K"),
    ("F2", 30.0, "Officer", "Female", 2000.0, 0.0, "<=50K"),
    ("F1", 45.0, "Manager", "Female", 9000.0, 100.0, ">50K"),
]


@pytest.fixture
def toy_raw():
    return RawTable(header=TOY_SCHEMA.names, rows=[list(r[1:]) for r in TOY_ROWS])


@pytest.fixture
def toy(toy_raw):
    """Encoded toy table; row order is M1, M2, F2, F1."""
    return encode(toy_raw, TOY_SCHEMA)


def make_encoded(X, y, z):
    X = np.asarray(X, dtype=float)
    return EncodedDataset(X, y, z, [f"f{i}" for i in range(X.shape[1])])


def random_dataset(rng, n=None, dim=None):
    n = n or int(rng.integers(4, 51))
    dim = dim or int(rng.integers(1, 9))
    X = rng.random((n, dim))
    # a few exact duplicates and one-hot style columns exercise ties
    if n > 6:
        X[1] = X[0]
        X[:, 0] = np.round(X[:, 0])
    y = (rng.random(n) < 0.5).astype(float)
    z = np.zeros(n, dtype=int)
    z[rng.permutation(n)[: max(2, n // 2)]] = 1
    z[0], z[1] = 0, 1
    return make_encoded(X, y, z)


# -- acceptance reporting ------------------------------------------------------
# Tests marked ``acceptance("name")`` get one PASS/FAIL/SKIP line in the summary.

_ACCEPTANCE: list = []


def pytest_runtest_logreport(report):
    name = getattr(report, "acceptance_name", None)
    if name is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(report.user_properties).get("detail", "")
        if report.skipped and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _ACCEPTANCE.append(f"{status}  {name}" + (f"  ({detail})" if detail else ""))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker and marker.args:
        outcome.get_result().acceptance_name = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
