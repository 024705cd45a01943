"""CSV ingestion, label mapping, cleaning, scaling, outlier bounding, splitting.

The fitted Scaler and OutlierBounds are immutable and fitted on training
rows only; applying them to held-out rows may legitimately produce values
outside [0, 1] / outside the winsorizing bounds' source range.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyMatrix,
    MalformedRow,
    MissingColumn,
    UnknownLabel,
)

# benign maps to 0; every attack class maps to 1 (binary detection task).
DEFAULT_LABEL_MAP = {
    "benign": 0,
    "phishing": 1,
    "defacement": 1,
    "malware": 1,
}


@dataclass(frozen=True)
class RawRecord:
    url: str
    label_text: str


@dataclass
class Dataset:
    features: np.ndarray  # n x d float64
    labels: np.ndarray  # n ints in {0, 1}
    urls: list[str]

    def __post_init__(self):
        n = self.features.shape[0]
        if len(self.labels) != n or len(self.urls) != n:
            raise ValueError("features, labels and urls must have equal row counts")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class Scaler:
    col_min: np.ndarray
    col_max: np.ndarray


@dataclass(frozen=True)
class OutlierBounds:
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.2
    seed: int = 42
    stratified: bool = True


@dataclass
class CleanReport:
    dropped_empty: int = 0
    dropped_duplicates: int = 0


def load_csv(path: str) -> list[RawRecord]:
    """Read a url/type CSV (RFC-4180 quoting) into RawRecords, in file order.

    Raises FileNotFoundError, MissingColumn, or MalformedRow(line_no) for a
    data row whose field count differs from the header's.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn("url")
        header = [h.strip().lstrip("﻿").lower() for h in header]
        for required in ("url", "type"):
            if required not in header:
                raise MissingColumn(required)
        url_idx = header.index("url")
        type_idx = header.index("type")

        records = []
        for row in reader:
            if not row:  # blank line
                continue
            if len(row) != len(header):
                raise MalformedRow(reader.line_num)
            records.append(RawRecord(url=row[url_idx], label_text=row[type_idx]))
    return records


def clean(records: list[RawRecord]) -> tuple[list[RawRecord], CleanReport]:
    """Drop rows with empty url/label and exact duplicate (url, label) pairs.

    Keeps the first occurrence of a duplicate. Cleaning is total: it never
    raises, and reports how many rows were dropped for each reason.
    """
    report = CleanReport()
    seen: set[tuple[str, str]] = set()
    kept = []
    for rec in records:
        if not rec.url.strip() or not rec.label_text.strip():
            report.dropped_empty += 1
            continue
        key = (rec.url, rec.label_text)
        if key in seen:
            report.dropped_duplicates += 1
            continue
        seen.add(key)
        kept.append(rec)
    return kept, report


def map_labels(
    records: list[RawRecord], mapping: dict[str, int] | None = None
) -> tuple[list[str], np.ndarray]:
    """Map label text to binary {0, 1} labels; lookup is case-insensitive."""
    if mapping is None:
        mapping = DEFAULT_LABEL_MAP
    urls = []
    labels = []
    for rec in records:
        key = rec.label_text.strip().lower()
        if key not in mapping:
            raise UnknownLabel(rec.label_text)
        urls.append(rec.url)
        labels.append(int(mapping[key]))
    return urls, np.asarray(labels, dtype=np.int64)


def fit_scaler(train_features: np.ndarray) -> Scaler:
    if train_features.shape[0] == 0:
        raise EmptyMatrix("cannot fit a scaler on an empty matrix")
    return Scaler(
        col_min=train_features.min(axis=0).astype(np.float64),
        col_max=train_features.max(axis=0).astype(np.float64),
    )


def apply_scaler(scaler: Scaler, features: np.ndarray) -> np.ndarray:
    """Min-max scale each column; constant training columns map to 0.

    Values outside the training range pass through unclamped (may leave
    [0, 1]).
    """
    span = scaler.col_max - scaler.col_min
    out = np.zeros_like(features, dtype=np.float64)
    nonconst = span != 0
    out[:, nonconst] = (features[:, nonconst] - scaler.col_min[nonconst]) / span[nonconst]
    return out


def _nearest_rank(sorted_col: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: value at index ceil(pct/100 * n), 1-based."""
    n = len(sorted_col)
    rank = max(math.ceil(pct / 100.0 * n), 1)
    return float(sorted_col[rank - 1])


def bound_outliers(
    train_features: np.ndarray, low_pct: float = 1.0, high_pct: float = 99.0
) -> tuple[OutlierBounds, np.ndarray]:
    """Winsorize each column to its training percentiles (nearest-rank).

    Returns the per-column bounds and the clipped training matrix. Rows are
    never deleted, so class balance is untouched.
    """
    if train_features.shape[0] == 0:
        raise EmptyMatrix("cannot bound outliers on an empty matrix")
    d = train_features.shape[1]
    lower = np.empty(d, dtype=np.float64)
    upper = np.empty(d, dtype=np.float64)
    for j in range(d):
        col = np.sort(train_features[:, j])
        lower[j] = _nearest_rank(col, low_pct)
        upper[j] = _nearest_rank(col, high_pct)
    bounds = OutlierBounds(lower=lower, upper=upper)
    return bounds, apply_bounds(bounds, train_features)


def apply_bounds(bounds: OutlierBounds, features: np.ndarray) -> np.ndarray:
    return np.clip(features, bounds.lower, bounds.upper)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(ds: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Split into train/test partitions, deterministic in cfg.seed.

    Stratified mode draws round(class_count * test_fraction) test rows per
    class; partitions preserve the original row order.
    """
    n = ds.n_rows
    rng = np.random.default_rng(cfg.seed)
    test_idx: list[int] = []

    if cfg.stratified:
        classes = np.unique(ds.labels)
        if len(classes) < 2:
            raise DegenerateSplit("stratified split requires both classes present")
        for cls in sorted(int(c) for c in classes):
            cls_idx = np.flatnonzero(ds.labels == cls)
            n_test = _round_half_up(len(cls_idx) * cfg.test_fraction)
            perm = rng.permutation(len(cls_idx))
            test_idx.extend(int(i) for i in cls_idx[perm[:n_test]])
    else:
        n_test = _round_half_up(n * cfg.test_fraction)
        perm = rng.permutation(n)
        test_idx.extend(int(i) for i in perm[:n_test])

    test_mask = np.zeros(n, dtype=bool)
    test_mask[test_idx] = True
    if test_mask.all() or not test_mask.any():
        raise DegenerateSplit(
            f"test_fraction {cfg.test_fraction} leaves an empty partition for {n} rows"
        )
    return _take(ds, ~test_mask), _take(ds, test_mask)


def _take(ds: Dataset, mask: np.ndarray) -> Dataset:
    idx = np.flatnonzero(mask)
    return Dataset(
        features=ds.features[idx],
        labels=ds.labels[idx],
        urls=[ds.urls[i] for i in idx],
    )


def stratified_subsample(ds: Dataset, max_rows: int, seed: int) -> Dataset:
    """Cap a dataset at exactly max_rows, preserving class proportions.

    Quotas use the largest-remainder method (never exceeding max_rows in
    total, at least one row per class); row choice is deterministic in seed.
    """
    n = ds.n_rows
    if n <= max_rows:
        return ds
    classes = sorted(int(c) for c in np.unique(ds.labels))
    counts = {c: int((ds.labels == c).sum()) for c in classes}

    quotas = {c: max(counts[c] * max_rows // n, 1) for c in classes}
    remainders = sorted(
        classes, key=lambda c: (counts[c] * max_rows) % n, reverse=True
    )
    deficit = max_rows - sum(quotas.values())
    while deficit > 0:
        grew = False
        for c in remainders:
            if deficit == 0:
                break
            if quotas[c] < counts[c]:
                quotas[c] += 1
                deficit -= 1
                grew = True
        if not grew:
            break
    while deficit < 0:
        c = max(classes, key=lambda c: quotas[c])
        if quotas[c] <= 1:
            break
        quotas[c] -= 1
        deficit += 1

    rng = np.random.default_rng(seed)
    keep_mask = np.zeros(n, dtype=bool)
    for cls in classes:
        cls_idx = np.flatnonzero(ds.labels == cls)
        perm = rng.permutation(len(cls_idx))
        keep_mask[cls_idx[perm[: quotas[cls]]]] = True
    return _take(ds, keep_mask)
