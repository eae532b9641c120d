"""
Proximity labels on a four-person table
=======================================

Two high-income male officers, one nearly identical low-income female
officer and one high-income female manager. Mixing the female officer with
a male officer under plain mixup gives a label that only reflects the pair.
The proximity label also counts how many people in the opposite group sit
at least as close to her as the partner does.
"""

# %%
# Build the table and encode it. Continuous columns are min-max scaled,
# categorical ones become one-hot columns.
from proximix.data import CATEGORICAL, CONTINUOUS, DatasetSchema, RawTable, SubgroupSelector, encode, subgroup
from proximix.mixing import MixConfig, euclidean_distance, proximity_set, proximix_label, sample_at

schema = DatasetSchema(
    name="toy",
    columns=(
        ("Age", CONTINUOUS), ("Occupation", CATEGORICAL), ("Gender", CATEGORICAL),
        ("CapitalGain", CONTINUOUS), ("CapitalLoss", CONTINUOUS), ("Income", CATEGORICAL),
    ),
    label_column="Income", positive_label_value=">50K",
    sensitive_column="Gender", privileged_value="Male",
)
raw = RawTable(schema.names, [
    [32, "Officer", "Male", 2200, 0, ">50K"],      # M1
    [31, "Officer", "Male", 2100, 0, ">50K"],      # M2
    [30, "Officer", "Female", 2000, 0, "<=50K"],   # F2
    [45, "Manager", "Female", 9000, 100, ">50K"],  # F1
])
toy = encode(raw, schema)
print(toy.feature_names)

# %%
# Anchor F2, partner M1. The radius is their distance; the proximity set is
# every man within it.
f2, m1 = sample_at(toy, 2), sample_at(toy, 0)
men = subgroup(toy, SubgroupSelector(z=1))
radius = euclidean_distance(f2.x, m1.x)
print("radius", round(radius, 4), "members", proximity_set(f2, men, radius).tolist())

# %%
# With lambda = 0.8 plain mixup says 0.2. Two of the three people in the
# neighbourhood (F2, M1, M2) are high income, so the proximity label is 2/3.
# d = 0.5 averages the two.
label, y_lam, y_sim, size = proximix_label(f2, m1, men, MixConfig(d=0.5, min_neighbors=0), lam=0.8)
print(f"pairwise {y_lam:.3f}  proximity {y_sim:.3f}  blended {label:.4f}")

# %%
# Sweeping d moves the label from the proximity share to the pairwise one.
for d in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(d, round(proximix_label(f2, m1, men, MixConfig(d=d, min_neighbors=0), 0.8)[0], 4))
