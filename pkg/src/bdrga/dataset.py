"""WDBC ingestion, label encoding, normalization and seeded train/test splits."""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import (EmptyData, MissingFile, ParseError, RatioOutOfRange,
                         SchemaError)

N_FEATURES = 30
N_COLUMNS = N_FEATURES + 2

WDBC_FEATURE_NAMES = tuple(
    f"{stat}_{kind}"
    for kind in ("mean", "se", "worst")
    for stat in ("radius", "texture", "perimeter", "area", "smoothness",
                 "compactness", "concavity", "concave_points", "symmetry",
                 "fractal_dimension")
)

LABEL_CODES = {"M": 1, "B": 0}


class Normalization(str, enum.Enum):
    NONE = "none"
    MINMAX = "minmax"
    ZSCORE = "zscore"
    # Each row divided by its Euclidean norm; needs no fitted statistics.
    L2 = "l2"


@dataclass(frozen=True)
class RawRecord:
    id: str
    diagnosis: str
    features: tuple


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = WDBC_FEATURE_NAMES
    normalization: Normalization = Normalization.NONE

    def __post_init__(self):
        if len(self.labels) != self.features.shape[0]:
            raise SchemaError(
                f"{len(self.labels)} labels for {self.features.shape[0]} rows")
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def select_features(self, columns) -> "Dataset":
        """Return a view restricted to the given feature columns (order kept)."""
        columns = np.asarray(columns, dtype=int)
        return replace(
            self,
            features=self.features[:, columns].copy(),
            labels=self.labels.copy(),
            feature_names=tuple(self.feature_names[c] for c in columns),
        )

    def class_counts(self) -> dict:
        return {"malignant": int(self.labels.sum()),
                "benign": int(len(self.labels) - self.labels.sum())}


@dataclass(frozen=True, eq=False)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    train_ratio: float = field(default=0.2)


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_wdbc_csv(path) -> list[RawRecord]:
    """Read a WDBC-layout CSV: ``id, diagnosis, 30 features`` per row.

    A header row is detected by a non-numeric third field and skipped.
    Row numbers in errors are 1-based physical line numbers.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")

    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != N_COLUMNS:
                raise SchemaError(
                    f"row {lineno}: expected {N_COLUMNS} columns, got {len(row)}")
            if lineno == 1 and not _is_number(row[2]):
                continue
            diagnosis = row[1].strip()
            if diagnosis not in LABEL_CODES:
                raise ParseError(lineno, 2, f"unknown diagnosis {diagnosis!r}")
            values = []
            for col, token in enumerate(row[2:], start=3):
                try:
                    value = float(token)
                except ValueError:
                    raise ParseError(lineno, col, f"non-numeric value {token!r}") from None
                if not math.isfinite(value):
                    raise ParseError(lineno, col, f"non-finite value {token!r}")
                values.append(value)
            records.append(RawRecord(row[0].strip(), diagnosis, tuple(values)))

    if not records:
        raise EmptyData(f"{path} contains no data rows")
    return records


def encode_and_strip(records, feature_names=WDBC_FEATURE_NAMES) -> Dataset:
    """Drop the id column and encode M as 1, B as 0."""
    if not records:
        raise EmptyData("no records to encode")
    features = np.array([r.features for r in records], dtype=float)
    labels = np.array([LABEL_CODES[r.diagnosis] for r in records], dtype=np.int64)
    return Dataset(features, labels, tuple(feature_names), Normalization.NONE)


def load_dataset(path) -> Dataset:
    return encode_and_strip(load_wdbc_csv(path))


def normalize(ds: Dataset, mode, fit_on=None) -> Dataset:
    """Rescale feature columns with statistics fitted on the ``fit_on`` rows.

    ``fit_on=None`` fits on every row. Constant columns map to zero under
    both MinMax and ZScore. The L2 mode scales each row to unit Euclidean
    norm and ignores ``fit_on``.
    """
    mode = Normalization(mode)
    if ds.normalization is not Normalization.NONE:
        raise ValueError(f"dataset already normalized ({ds.normalization.value})")
    if mode is Normalization.NONE:
        return ds

    X = ds.features
    if fit_on is None:
        fit_on = np.arange(ds.n_rows)
    fit_on = np.asarray(fit_on, dtype=int)
    if fit_on.size == 0:
        raise EmptyData("normalization fitted on an empty index set")
    ref = X[fit_on]

    if mode is Normalization.MINMAX:
        lo = ref.min(axis=0)
        span = ref.max(axis=0) - lo
        scale = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (X - lo) / scale, 0.0)
    elif mode is Normalization.ZSCORE:
        mu = ref.mean(axis=0)
        sd = ref.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        out = np.where(sd > 0, (X - mu) / scale, 0.0)
    else:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        out = X / np.where(norms > 0, norms, 1.0)

    return replace(ds, features=out, labels=ds.labels.copy(), normalization=mode)


def split(ds: Dataset, train_ratio: float, seed: int) -> Split:
    """Uniform random permutation, then the first floor(n * ratio) rows train."""
    if not 0.0 < train_ratio < 1.0:
        raise RatioOutOfRange(f"train_ratio must lie in (0, 1), got {train_ratio}")
    n = ds.n_rows
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(n * train_ratio)
    return Split(np.sort(perm[:n_train]), np.sort(perm[n_train:]), seed, train_ratio)


def write_wdbc_csv(path, features, labels, ids=None, header=True):
    """Write rows in WDBC layout; labels use 1 for M and 0 for B."""
    features = np.asarray(features, dtype=float)
    if ids is None:
        ids = [str(100000 + i) for i in range(len(labels))]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["id", "diagnosis", *WDBC_FEATURE_NAMES])
        for rid, label, row in zip(ids, labels, features):
            writer.writerow([rid, "M" if label else "B", *(repr(float(v)) for v in row)])
