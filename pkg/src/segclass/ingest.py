"""Delimited-file ingestion: kind inference, dummy encoding and robust
per-feature normalization.

Each numeric column is divided by a robust scale derived from the absolute
consecutive differences of its values: by default the median of |x_{i+1} -
x_i| (the alternative, the median absolute deviation of those differences,
sits behind ``scale_estimator="abs_diff_mad"``). Columns whose scale is
zero (constants, or near-constants under the MAD variant) pass through
unscaled and are reported. Tree-based detection is invariant to this
normalization; distance-based engines are not.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import InputError, TimeSeriesMatrix

__all__ = ["RawTable", "load_table", "encode_and_normalize", "EncodeResult",
           "normalize_matrix", "SCALE_ESTIMATORS"]

SCALE_ESTIMATORS = ("abs_diff_median", "abs_diff_mad")


@dataclass(frozen=True)
class RawTable:
    """A parsed rectangular table: names, per-column kinds and columns.

    Kinds are "numeric" (float64 array), "categorical" (string array) or
    "label" (string array, at most one, excluded from the feature matrix).
    """

    names: tuple[str, ...]
    kinds: tuple[str, ...]
    columns: tuple

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def labels(self) -> np.ndarray | None:
        for name, kind, col in zip(self.names, self.kinds, self.columns):
            if kind == "label":
                return col
        return None


def _try_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_table(path, *, delimiter: str = ",", label_column: str | None = None,
               kind_overrides: Mapping[str, str] | None = None) -> RawTable:
    """Parse a delimited text file with a header row.

    Column kinds are inferred (all-numeric cells -> numeric, anything else
    -> categorical) unless overridden. Ragged rows and cells that violate a
    numeric override raise errors naming the offending position (1-based
    data rows).
    """
    overrides = dict(kind_overrides or {})
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: file is empty, expected a header row")
            rows = [tuple(r) for r in reader]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    names = tuple(h.strip() for h in header)
    if len(set(names)) != len(names):
        raise InputError(f"{path}: duplicate column names in header")
    for idx, row in enumerate(rows, start=1):
        if len(row) != len(names):
            raise InputError(
                f"{path}: ragged row {idx}: expected {len(names)} cells, "
                f"got {len(row)}")
    if not rows:
        raise InputError(f"{path}: no data rows")
    unknown = set(overrides) - set(names)
    if unknown:
        raise InputError(f"{path}: kind overrides for unknown columns {sorted(unknown)}")
    if label_column is not None and label_column not in names:
        raise InputError(f"{path}: label column {label_column!r} not in header")

    kinds = []
    columns = []
    for j, name in enumerate(names):
        raw = [row[j].strip() for row in rows]
        if name == label_column:
            kinds.append("label")
            columns.append(np.array(raw, dtype=object))
            continue
        wanted = overrides.get(name)
        parsed = [_try_float(c) for c in raw]
        if wanted == "numeric":
            for idx, value in enumerate(parsed, start=1):
                if value is None:
                    raise InputError(
                        f"{path}: row {idx}, column {name!r}: "
                        f"cannot parse {raw[idx - 1]!r} as a finite number")
            kinds.append("numeric")
            columns.append(np.array(parsed, dtype=np.float64))
        elif wanted == "categorical":
            kinds.append("categorical")
            columns.append(np.array(raw, dtype=object))
        elif wanted is None:
            if all(value is not None for value in parsed):
                kinds.append("numeric")
                columns.append(np.array(parsed, dtype=np.float64))
            else:
                kinds.append("categorical")
                columns.append(np.array(raw, dtype=object))
        else:
            raise InputError(
                f"{path}: unknown kind override {wanted!r} for column {name!r}")
    return RawTable(names=names, kinds=tuple(kinds), columns=tuple(columns))


def _column_scale(x: np.ndarray, estimator: str) -> float:
    if len(x) < 2:
        return 0.0
    diffs = np.abs(np.diff(x))
    if estimator == "abs_diff_median":
        return float(np.median(diffs))
    if estimator == "abs_diff_mad":
        return float(np.median(np.abs(diffs - np.median(diffs))))
    raise InputError(f"unknown scale estimator {estimator!r}; "
                     f"choose one of {SCALE_ESTIMATORS}")


def normalize_matrix(X: np.ndarray, estimator: str = "abs_diff_median"
                     ) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Divide each column by its robust scale; zero-scale columns pass
    through unchanged. Returns (scaled matrix, scales, zero-scale columns)."""
    X = np.asarray(X, dtype=np.float64)
    scales = np.array([_column_scale(X[:, j], estimator)
                       for j in range(X.shape[1])])
    zero = tuple(int(j) for j in np.flatnonzero(scales == 0.0))
    divisor = np.where(scales > 0.0, scales, 1.0)
    return X / divisor, scales, zero


@dataclass(frozen=True)
class EncodeResult:
    matrix: TimeSeriesMatrix
    columns: tuple[str, ...]
    scales: np.ndarray
    zero_scale_columns: tuple[str, ...]
    labels: np.ndarray | None


def encode_and_normalize(table: RawTable, *, normalize: bool = True,
                         scale_estimator: str = "abs_diff_median") -> EncodeResult:
    """Dummy-encode categoricals (one indicator column per category) and
    apply the robust per-column normalization."""
    names: list[str] = []
    cols: list[np.ndarray] = []
    for name, kind, col in zip(table.names, table.kinds, table.columns):
        if kind == "label":
            continue
        if kind == "numeric":
            names.append(name)
            cols.append(col.astype(np.float64))
        else:
            for cat in sorted(set(col)):
                names.append(f"{name}={cat}")
                cols.append((col == cat).astype(np.float64))
    if not cols:
        raise InputError("table has no feature columns")
    X = np.column_stack(cols)
    if normalize:
        X, scales, zero_idx = normalize_matrix(X, scale_estimator)
        zero_names = tuple(names[j] for j in zero_idx)
    else:
        scales = np.ones(X.shape[1])
        zero_names = ()
    return EncodeResult(matrix=TimeSeriesMatrix(X), columns=tuple(names),
                        scales=scales, zero_scale_columns=zero_names,
                        labels=table.labels)
