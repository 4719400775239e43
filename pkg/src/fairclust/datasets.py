"""Dataset synthesis, CSV ingestion, preprocessing and graph construction.

All randomness flows through numpy's PCG64 generator seeded explicitly, so a
fixed seed reproduces the same bytes on any platform.  The benchmark profiles
mirror the usual UCI setups (Adult, Bank marketing, US Census 1990) plus two
generated two-group datasets; CSV files are never downloaded here, their
paths are supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.sparse as sp

from .core import AffinityGraph


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus per-point demographic group indices (0-based)."""

    features: np.ndarray
    group_of: np.ndarray
    name: str
    suggested_targets: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        group_of = np.asarray(self.group_of, dtype=np.int64)
        targets = np.asarray(self.suggested_targets, dtype=np.float64)
        if features.ndim != 2:
            raise ValueError("features must be 2-D")
        if group_of.shape != (features.shape[0],):
            raise ValueError("group_of must have one entry per point")
        if not np.isfinite(features).all():
            raise ValueError("features contain non-finite values")
        if group_of.size and (group_of.min() < 0
                              or group_of.max() >= targets.size):
            raise ValueError("group indices must index into suggested_targets")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "suggested_targets", targets)

    @property
    def n_points(self):
        return self.features.shape[0]


# Each demographic group forms one vertical column of points: a stack of
# 25-point Gaussian beads.  The two columns are the dataset's two spatial
# clusters, and the column gap dominates the column height, so
# unconstrained K-means recovers the demographically pure left/right
# split.  The fair top/bottom split only crosses the empty space between
# beads: group counts are bead-quantized, so it hits the target
# proportions exactly, and it leaves the 20-NN graph uncut because every
# bead holds more points than the neighbor count.  The columns carry small
# opposite vertical offsets that break the top/bottom symmetry, which the
# solver dynamics would otherwise preserve.  The absolute scale is
# deliberately small so the benchmark trade-off weights land in the fair
# regime; these profiles are therefore clustered on the raw coordinates.
_COLUMN_X = 0.02           # column half-separation
_COLUMN_HEIGHT = 0.02      # outermost bead center offset
_COLUMN_SHIFT = 0.005      # per-column vertical offset (+ left, - right)
_BEAD_SIZE = 25
_BEAD_SPREAD = 0.1         # bead sigma as a fraction of the bead spacing


def make_synthetic(kind="equal", seed=0):
    """400 2-D points in two columns, one demographic group per column.

    ``kind="equal"`` puts 200 points in each group (targets [0.5, 0.5]);
    ``kind="unequal"`` puts 300 and 100 (targets [0.75, 0.25]).  Each group
    splits evenly between the top and bottom half of its column.
    """
    if kind == "equal":
        sizes, targets = (200, 200), (0.5, 0.5)
    elif kind == "unequal":
        sizes, targets = (300, 100), (0.75, 0.25)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    parts, groups = [], []
    for g, size in enumerate(sizes):
        x = (-_COLUMN_X, _COLUMN_X)[g]
        shift = (_COLUMN_SHIFT, -_COLUMN_SHIFT)[g]
        n_beads = size // _BEAD_SIZE
        centers = np.linspace(_COLUMN_HEIGHT, -_COLUMN_HEIGHT, n_beads) + shift
        sigma = _BEAD_SPREAD * 2 * _COLUMN_HEIGHT / (n_beads - 1)
        for y in centers:
            parts.append(np.array([x, y])
                         + sigma * rng.standard_normal((_BEAD_SIZE, 2)))
            groups.append(np.full(_BEAD_SIZE, g))
    return Dataset(
        features=np.vstack(parts),
        group_of=np.concatenate(groups),
        name=f"synthetic-{kind}" if kind != "equal" else "synthetic",
        suggested_targets=np.array(targets),
    )


def load_csv(path, feature_columns, sensitive_column, drop_rules=None, *,
             delimiter=",", header="infer", names=None, group_order=None,
             targets=None, max_rows=None, name=None):
    """Load a delimited text file into a :class:`Dataset`.

    Parameters
    ----------
    feature_columns : list of str
        Columns kept as numeric features.
    sensitive_column : str
        Column whose values define the demographic groups.
    drop_rules : dict, optional
        ``{column: [values]}``; rows matching any listed value are dropped
        (string comparison after whitespace stripping).
    group_order : list, optional
        Explicit sensitive-attribute value order defining group indices.
        Defaults to the sorted distinct values.
    targets : array-like, optional
        Target proportions; defaults to the empirical group proportions.
    max_rows : int, optional
        Keep only the first ``max_rows`` rows after the drop rules.

    Raises
    ------
    ValueError
        On a missing column, or a non-numeric cell in a feature column (the
        message names the offending row).
    """
    frame = pd.read_csv(path, sep=delimiter, header=header, names=names,
                        skipinitialspace=True)
    missing = [c for c in list(feature_columns) + [sensitive_column]
               if c not in frame.columns]
    if missing:
        raise ValueError(f"missing column(s) {missing} in {path}")

    for column, values in (drop_rules or {}).items():
        if column not in frame.columns:
            raise ValueError(f"missing column(s) [{column!r}] in {path}")
        cells = frame[column].astype(str).str.strip()
        frame = frame[~cells.isin([str(v) for v in values])]
    if max_rows is not None:
        frame = frame.iloc[:max_rows]
    frame = frame.reset_index(drop=True)

    features = np.empty((len(frame), len(feature_columns)), dtype=np.float64)
    for i, column in enumerate(feature_columns):
        numeric = pd.to_numeric(frame[column], errors="coerce")
        if numeric.isna().any():
            row = int(np.argmax(numeric.isna().to_numpy()))
            raise ValueError(
                f"non-numeric value {frame[column].iloc[row]!r} in feature "
                f"column {column!r} at row {row}")
        features[:, i] = numeric.to_numpy()

    raw = frame[sensitive_column].astype(str).str.strip()
    if group_order is None:
        group_order = sorted(raw.unique())
    mapping = {str(v).strip(): g for g, v in enumerate(group_order)}
    unknown = sorted(set(raw.unique()) - set(mapping))
    if unknown:
        raise ValueError(
            f"sensitive column {sensitive_column!r} has values {unknown} "
            f"outside the configured groups {list(group_order)}")
    group_of = raw.map(mapping).to_numpy(dtype=np.int64)

    if targets is None:
        counts = np.bincount(group_of, minlength=len(group_order)).astype(float)
        targets = counts / counts.sum()
    return Dataset(features=features, group_of=group_of,
                   name=name or str(path),
                   suggested_targets=np.asarray(targets, dtype=np.float64))


def preprocess(dataset):
    """Standardize every feature, then scale every row to unit L2 norm.

    Standardization uses the population variance; constant features map to
    all-zeros and all-zero rows are left untouched by the normalization.
    """
    x = dataset.features
    if x.shape[0] < 2:
        raise ValueError("need at least 2 points to standardize")
    std = x.std(axis=0)
    centered = x - x.mean(axis=0)
    scaled = np.divide(centered, std, out=np.zeros_like(centered),
                       where=std > 0)
    norms = np.linalg.norm(scaled, axis=1, keepdims=True)
    normalized = np.divide(scaled, norms, out=np.zeros_like(scaled),
                           where=norms > 0)
    return replace(dataset, features=normalized)


def knn_affinity(dataset, k=20):
    """Binary k-nearest-neighbor affinity graph, OR-symmetrized.

    ``w[p, q] = 1`` when q is among the k nearest neighbors of p (Euclidean,
    self excluded, distance ties broken toward the lower index) or vice
    versa.  Every vertex therefore keeps degree >= k.
    """
    features = dataset.features if isinstance(dataset, Dataset) else np.asarray(dataset)
    n = features.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the number of points {n}")

    rows = np.repeat(np.arange(n), k)
    cols = np.empty(n * k, dtype=np.int64)
    sq_norms = np.einsum("ij,ij->i", features, features)
    block = max(1, min(n, 2**24 // n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        dists = sq_norms[start:stop, None] - 2.0 * (features[start:stop] @ features.T)
        dists += sq_norms[None, :]
        dists[np.arange(stop - start), np.arange(start, stop)] = np.inf
        # stable sort on distance keeps equal-distance ties in index order
        order = np.argsort(dists, axis=1, kind="stable")
        cols[start * k:stop * k] = order[:, :k].ravel()

    half = sp.csr_matrix((np.ones(n * k), (rows, cols)), shape=(n, n))
    sym = half.maximum(half.T)
    sym.setdiag(0.0)
    sym.eliminate_zeros()
    return AffinityGraph(weights=sym)


def kmeanspp_seed(dataset, n_clusters, seed=0):
    """Initial labels from distance-squared sampling of cluster centers.

    The first center is drawn uniformly; each further center is drawn with
    probability proportional to the squared distance to the nearest center
    chosen so far.  Labels assign every point to its nearest sampled center
    (ties toward the lower cluster index).
    """
    features = dataset.features if isinstance(dataset, Dataset) else np.asarray(dataset)
    n = features.shape[0]
    if n_clusters > n:
        raise ValueError("more clusters than points")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = np.empty(n_clusters, dtype=np.int64)
    centers[0] = rng.integers(n)
    closest = np.sum((features - features[centers[0]]) ** 2, axis=1)
    for i in range(1, n_clusters):
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            centers[i] = rng.integers(n)
        else:
            draw = rng.random() * total
            centers[i] = min(np.searchsorted(np.cumsum(closest), draw), n - 1)
        dist = np.sum((features - features[centers[i]]) ** 2, axis=1)
        np.minimum(closest, dist, out=closest)
    center_matrix = features[centers]
    sq = (np.einsum("ij,ij->i", features, features)[:, None]
          - 2.0 * features @ center_matrix.T
          + np.einsum("ij,ij->i", center_matrix, center_matrix)[None, :])
    return np.argmin(sq, axis=1)


def export_csv(dataset, path):
    """Write the (possibly preprocessed) matrix plus group column to CSV."""
    frame = pd.DataFrame(
        dataset.features,
        columns=[f"f{i}" for i in range(dataset.features.shape[1])])
    frame["group"] = dataset.group_of
    frame.to_csv(path, index=False)


@dataclass(frozen=True)
class DatasetProfile:
    """A named benchmark setup: loader arguments plus solver defaults.

    ``solver_overrides`` are keyword overrides for the solver configuration;
    the synthetic profiles raise ``max_inner`` because their deliberately
    small potential scale anneals slowly.
    """

    name: str
    n_clusters: int
    default_trade_offs: tuple
    synthetic_kind: str | None = None
    loader_kwargs: dict | None = None
    targets: tuple | None = None
    solver_overrides: dict | None = None


PROFILES = {
    "synthetic": DatasetProfile(
        name="synthetic", n_clusters=2,
        default_trade_offs=(1.0, 5.0, 10.0, 50.0, 100.0),
        synthetic_kind="equal", targets=(0.5, 0.5),
        solver_overrides=dict(max_inner=8000)),
    "synthetic-unequal": DatasetProfile(
        name="synthetic-unequal", n_clusters=2,
        default_trade_offs=(1.0, 5.0, 10.0, 50.0, 100.0),
        synthetic_kind="unequal", targets=(0.75, 0.25),
        solver_overrides=dict(max_inner=8000)),
    "adult": DatasetProfile(
        name="adult", n_clusters=10,
        default_trade_offs=(3000.0, 6000.0, 9000.0, 20000.0),
        targets=(0.33, 0.67),
        loader_kwargs=dict(
            header=None,
            names=["age", "workclass", "fnlwgt", "education", "education-num",
                   "marital-status", "occupation", "relationship", "race",
                   "sex", "capital-gain", "capital-loss", "hours-per-week",
                   "native-country", "income"],
            feature_columns=["age", "education-num", "capital-gain",
                             "capital-loss", "hours-per-week"],
            sensitive_column="sex",
            group_order=["Female", "Male"],
        )),
    "bank": DatasetProfile(
        name="bank", n_clusters=10,
        default_trade_offs=(3000.0, 6000.0, 9000.0, 20000.0),
        targets=(0.28, 0.61, 0.11),
        loader_kwargs=dict(
            delimiter=";",
            feature_columns=["age", "duration", "euribor3m", "nr.employed",
                             "cons.price.idx", "campaign"],
            sensitive_column="marital",
            group_order=["single", "married", "divorced"],
            drop_rules={"marital": ["unknown"]},
        )),
    "census": DatasetProfile(
        name="census", n_clusters=20,
        default_trade_offs=(100000.0, 500000.0),
        targets=(0.48, 0.52),
        loader_kwargs=dict(
            feature_columns=["dAge", "dAncstry1", "dAncstry2", "iAvail",
                             "iCitizen", "iClass", "dDepart", "iDisabl1",
                             "iDisabl2", "iEnglish", "iFeb55", "iFertil",
                             "dHispanic", "dHour89", "dHours", "iImmigr",
                             "dIncome1", "dIncome2", "dIncome3", "dIncome4",
                             "dIncome5", "dIncome6", "dIncome7", "dIncome8",
                             "dIndustry"],
            sensitive_column="iSex",
            group_order=["1", "0"],
        )),
}


def _profile_from_json(path):
    """Custom benchmark setup from a JSON file.

    Recognized keys: ``name``, ``n_clusters``, ``trade_offs``, ``targets``,
    ``data`` (CSV path, may also come from the command line) and ``loader``
    (keyword arguments of :func:`load_csv`).
    """
    import json

    with open(path) as fh:
        raw = json.load(fh)
    loader = dict(raw.get("loader") or {})
    if "drop_rules" in loader and loader["drop_rules"] is not None:
        loader["drop_rules"] = dict(loader["drop_rules"])
    profile = DatasetProfile(
        name=raw.get("name", Path(path).stem),
        n_clusters=int(raw.get("n_clusters", 2)),
        default_trade_offs=tuple(raw.get("trade_offs", (10.0,))),
        synthetic_kind=raw.get("synthetic_kind"),
        loader_kwargs=loader or None,
        targets=tuple(raw["targets"]) if raw.get("targets") else None,
    )
    return profile, raw.get("data")


def load_profile(profile, data_path=None, seed=0, max_rows=None, targets=None):
    """Materialize a profile into a Dataset.

    ``profile`` is a built-in profile name or a path to a JSON profile
    file.  Synthetic profiles generate their data; the others need
    ``data_path`` (or the JSON file's ``data`` key) pointing at the CSV.
    """
    if profile in PROFILES:
        spec = PROFILES[profile]
    elif str(profile).endswith(".json") and Path(profile).exists():
        spec, json_data = _profile_from_json(profile)
        data_path = data_path or json_data
    else:
        raise ValueError(f"unknown profile {profile!r}; "
                         f"choose from {sorted(PROFILES)} or pass a JSON "
                         "profile path")
    if spec.synthetic_kind is not None:
        dataset = make_synthetic(spec.synthetic_kind, seed=seed)
        if max_rows is not None:
            dataset = replace(dataset,
                              features=dataset.features[:max_rows],
                              group_of=dataset.group_of[:max_rows])
    else:
        if data_path is None:
            raise ValueError(f"profile {profile!r} needs --data pointing at "
                             "its CSV file")
        kwargs = dict(spec.loader_kwargs)
        dataset = load_csv(data_path, max_rows=max_rows, name=spec.name,
                           targets=targets or spec.targets, **kwargs)
    if targets is not None:
        dataset = replace(dataset, suggested_targets=np.asarray(targets))
    return dataset, spec
