"""Immutable sample containers, CSV ingestion, and bootstrap resampling.

Datasets hold read-only numpy arrays and are safe to share across worker
threads; every transformation (resampling, row selection) returns a new
dataset. Labels and actions live strictly in {-1, +1}: 0/1-coded input is
translated once, at the parsing boundary.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .rng import RngSeed, as_generator

__all__ = [
    "ClassSample",
    "ClassDataset",
    "DecisionSample",
    "DecisionDataset",
    "parse_class_dataset",
    "parse_decision_dataset",
    "bootstrap_resample",
    "bootstrap_multiplicities",
]


@dataclass(frozen=True)
class ClassSample:
    """One labeled feature vector; ``x[0]`` is the intercept when present."""

    x: tuple[float, ...]
    y: float


@dataclass(frozen=True)
class DecisionSample:
    """One observed decision triple, with optional known propensity."""

    x0: tuple[float, ...]
    x1: tuple[float, ...]
    a: float
    y: float
    pi: float | None = None


def _frozen_array(values, *, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.flags.writeable = False
    return out


def _check_pm_one(values: np.ndarray, what: str) -> None:
    if not np.isin(values, (-1.0, 1.0)).all():
        bad = values[~np.isin(values, (-1.0, 1.0))][0]
        raise ValidationError(f"{what} must be -1 or +1, found {bad!r}")


class ClassDataset:
    """Labeled classification sample of size ``n`` with ``p`` features."""

    __slots__ = ("_X", "_y")

    def __init__(self, X, y) -> None:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValidationError(f"features must form an (n, p) array, got ndim={X.ndim}")
        n, p = X.shape
        if n < 1:
            raise ValidationError("dataset must contain at least one sample")
        if p < 1:
            raise ValidationError("feature dimension must be at least 1")
        if y.shape != (n,):
            raise ValidationError(f"label vector has length {y.shape[0]}, expected {n}")
        if not np.isfinite(X).all():
            raise ValidationError("features must be finite")
        _check_pm_one(y, "labels")
        self._X = _frozen_array(X)
        self._y = _frozen_array(y)

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def n(self) -> int:
        return self._X.shape[0]

    @property
    def p(self) -> int:
        return self._X.shape[1]

    @property
    def samples(self) -> list[ClassSample]:
        return [
            ClassSample(tuple(map(float, row)), float(lab))
            for row, lab in zip(self._X, self._y)
        ]

    @classmethod
    def from_samples(cls, samples: Sequence[ClassSample]) -> "ClassDataset":
        if not samples:
            raise ValidationError("dataset must contain at least one sample")
        return cls([s.x for s in samples], [s.y for s in samples])

    def take(self, indices) -> "ClassDataset":
        """New dataset from the given row indices (repeats allowed)."""
        idx = np.asarray(indices, dtype=np.intp)
        return ClassDataset(self._X[idx], self._y[idx])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"ClassDataset(n={self.n}, p={self.p})"


class DecisionDataset:
    """Observed decision data (x0, x1, a, y) with optional propensities.

    ``X0`` carries the main-effect features, ``X1`` the features the decision
    rule acts on; both use coordinate 0 for the intercept when present.
    """

    __slots__ = ("_X0", "_X1", "_a", "_y", "_pi")

    def __init__(self, X0, X1, a, y, pi=None) -> None:
        X0 = np.asarray(X0, dtype=float)
        X1 = np.asarray(X1, dtype=float)
        if X0.ndim == 1:
            X0 = X0.reshape(-1, 1)
        if X1.ndim == 1:
            X1 = X1.reshape(-1, 1)
        a = np.asarray(a, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if X0.ndim != 2 or X1.ndim != 2:
            raise ValidationError("feature blocks must form (n, p) arrays")
        n = X0.shape[0]
        if n < 1:
            raise ValidationError("dataset must contain at least one sample")
        if X1.shape[0] != n or a.shape != (n,) or y.shape != (n,):
            raise ValidationError("feature blocks, actions, and outcomes must share length")
        if X0.shape[1] < 1 or X1.shape[1] < 1:
            raise ValidationError("feature dimensions must be at least 1")
        if not (np.isfinite(X0).all() and np.isfinite(X1).all() and np.isfinite(y).all()):
            raise ValidationError("features and outcomes must be finite")
        _check_pm_one(a, "actions")
        if pi is not None:
            pi = np.asarray(pi, dtype=float).ravel()
            if pi.shape != (n,):
                raise ValidationError(f"propensity vector has length {pi.shape[0]}, expected {n}")
            if not np.isfinite(pi).all() or (pi <= 0).any() or (pi >= 1).any():
                raise ValidationError("propensities must lie strictly in (0, 1)")
        self._X0 = _frozen_array(X0)
        self._X1 = _frozen_array(X1)
        self._a = _frozen_array(a)
        self._y = _frozen_array(y)
        self._pi = None if pi is None else _frozen_array(pi)

    @property
    def X0(self) -> np.ndarray:
        return self._X0

    @property
    def X1(self) -> np.ndarray:
        return self._X1

    @property
    def a(self) -> np.ndarray:
        return self._a

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def pi(self) -> np.ndarray | None:
        return self._pi

    @property
    def n(self) -> int:
        return self._X0.shape[0]

    @property
    def p0(self) -> int:
        return self._X0.shape[1]

    @property
    def p1(self) -> int:
        return self._X1.shape[1]

    @property
    def samples(self) -> list[DecisionSample]:
        pis = [None] * self.n if self._pi is None else [float(v) for v in self._pi]
        return [
            DecisionSample(
                tuple(map(float, r0)),
                tuple(map(float, r1)),
                float(act),
                float(out),
                prob,
            )
            for r0, r1, act, out, prob in zip(self._X0, self._X1, self._a, self._y, pis)
        ]

    def take(self, indices) -> "DecisionDataset":
        """New dataset from the given row indices (repeats allowed)."""
        idx = np.asarray(indices, dtype=np.intp)
        pi = None if self._pi is None else self._pi[idx]
        return DecisionDataset(self._X0[idx], self._X1[idx], self._a[idx], self._y[idx], pi)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"DecisionDataset(n={self.n}, p0={self.p0}, p1={self.p1})"


def _read_csv_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such file: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        raw = [row for row in csv.reader(fh)]
    rows = [row for row in raw if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise ValidationError(f"{p}: file contains no header row")
    header = [c.strip() for c in rows[0]]
    if len(rows) == 1:
        raise ValidationError(f"{p}: file contains no data rows")
    return header, [(i, row) for i, row in enumerate(rows[1:], start=1)]


def _cell(row: list[str], col_idx: int, col: str, row_idx: int) -> float:
    if col_idx >= len(row):
        raise ValidationError(f"row {row_idx}: missing value in column '{col}'")
    text = row[col_idx].strip()
    if not text:
        raise ValidationError(f"row {row_idx}: missing value in column '{col}'")
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(
            f"row {row_idx}: could not parse '{text}' in column '{col}' as a number"
        ) from None
    if not np.isfinite(value):
        raise ValidationError(f"row {row_idx}: non-finite value in column '{col}'")
    return value


def _column_indices(header: list[str], columns: Sequence[str]) -> list[int]:
    lookup = {name: i for i, name in enumerate(header)}
    missing = [c for c in columns if c not in lookup]
    if missing:
        raise ValidationError(f"columns not found in header: {missing} (header={header})")
    return [lookup[c] for c in columns]


def _recode_label(value: float, row_idx: int, col: str) -> float:
    if value in (-1.0, 1.0):
        return value
    if value == 0.0:
        return -1.0
    raise ValidationError(
        f"row {row_idx}: label column '{col}' must be -1, 0, or +1, got {value!r}"
    )


def _maybe_add_intercept(X: np.ndarray, add_intercept: bool) -> np.ndarray:
    if not add_intercept:
        return X
    if X.shape[1] >= 1 and np.all(X[:, 0] == 1.0):
        return X
    return np.hstack([np.ones((X.shape[0], 1)), X])


def parse_class_dataset(
    path,
    *,
    label_column: str = "y",
    feature_columns: Sequence[str] | None = None,
    add_intercept: bool = True,
) -> ClassDataset:
    """Read a classification CSV into a :class:`ClassDataset`.

    The file needs a header row; lines starting with ``#`` are skipped.
    Labels may be coded 0/1 (0 becomes -1). With ``add_intercept`` a leading
    constant-1 feature is prepended unless the first feature column already
    is one.
    """
    header, rows = _read_csv_rows(path)
    if label_column not in header:
        raise ValidationError(f"label column '{label_column}' not in header {header}")
    if feature_columns is None:
        feature_columns = [c for c in header if c != label_column]
    if not feature_columns:
        raise ValidationError("no feature columns to read")
    feat_idx = _column_indices(header, feature_columns)
    lab_idx = header.index(label_column)

    X = np.empty((len(rows), len(feat_idx)))
    y = np.empty(len(rows))
    for k, (row_idx, row) in enumerate(rows):
        for j, (ci, cname) in enumerate(zip(feat_idx, feature_columns)):
            X[k, j] = _cell(row, ci, cname, row_idx)
        y[k] = _recode_label(_cell(row, lab_idx, label_column, row_idx), row_idx, label_column)
    return ClassDataset(_maybe_add_intercept(X, add_intercept), y)


def parse_decision_dataset(
    path,
    *,
    action_column: str = "a",
    outcome_column: str = "y",
    propensity_column: str | None = None,
    feature_columns: Sequence[str] | None = None,
    interaction_columns: Sequence[str] | None = None,
    add_intercept: bool = True,
) -> DecisionDataset:
    """Read a decision-data CSV into a :class:`DecisionDataset`.

    ``feature_columns`` feed the main-effect block, ``interaction_columns``
    (default: same as the features) the block the decision rule sees. A
    column named ``pi`` is picked up as known propensities automatically;
    pass ``propensity_column`` to name a different one.
    """
    header, rows = _read_csv_rows(path)
    special = {action_column, outcome_column}
    if propensity_column is None and "pi" in header:
        propensity_column = "pi"
    if propensity_column is not None:
        if propensity_column not in header:
            raise ValidationError(f"propensity column '{propensity_column}' not in header {header}")
        special.add(propensity_column)
    for col in (action_column, outcome_column):
        if col not in header:
            raise ValidationError(f"required column '{col}' not in header {header}")
    if feature_columns is None:
        feature_columns = [c for c in header if c not in special]
    if not feature_columns:
        raise ValidationError("no feature columns to read")
    if interaction_columns is None:
        interaction_columns = list(feature_columns)

    main_idx = _column_indices(header, feature_columns)
    inter_idx = _column_indices(header, interaction_columns)
    a_idx = header.index(action_column)
    y_idx = header.index(outcome_column)
    pi_idx = None if propensity_column is None else header.index(propensity_column)

    m = len(rows)
    X0 = np.empty((m, len(main_idx)))
    X1 = np.empty((m, len(inter_idx)))
    a = np.empty(m)
    y = np.empty(m)
    pi = None if pi_idx is None else np.empty(m)
    for k, (row_idx, row) in enumerate(rows):
        for j, (ci, cname) in enumerate(zip(main_idx, feature_columns)):
            X0[k, j] = _cell(row, ci, cname, row_idx)
        for j, (ci, cname) in enumerate(zip(inter_idx, interaction_columns)):
            X1[k, j] = _cell(row, ci, cname, row_idx)
        a_val = _cell(row, a_idx, action_column, row_idx)
        a[k] = _recode_label(a_val, row_idx, action_column)
        y[k] = _cell(row, y_idx, outcome_column, row_idx)
        if pi is not None:
            pi[k] = _cell(row, pi_idx, propensity_column, row_idx)
    return DecisionDataset(
        _maybe_add_intercept(X0, add_intercept),
        _maybe_add_intercept(X1, add_intercept),
        a,
        y,
        pi,
    )


def bootstrap_resample(data, rng: RngSeed | int | np.random.Generator):
    """One nonparametric bootstrap resample of the same size and type."""
    gen = as_generator(rng)
    idx = gen.integers(0, data.n, size=data.n)
    return data.take(idx)


def bootstrap_multiplicities(
    n: int, n_draws: int, rng: RngSeed | int | np.random.Generator
) -> np.ndarray:
    """Multiplicity matrix of shape (n_draws, n); each row sums to n.

    Row b gives the multinomial resampling weights of draw b, the batched
    equivalent of counting indices from :func:`bootstrap_resample`.
    """
    if n < 1 or n_draws < 1:
        raise ValidationError("n and n_draws must be positive")
    gen = as_generator(rng)
    return gen.multinomial(n, np.full(n, 1.0 / n), size=n_draws)
