"""Labeled tabular data ingestion and per-column empirical summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateGroupError, ParseError, SingleGroupError

MISSING_TOKENS = frozenset({"", "na", "nan", "null"})


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """An n x d covariate matrix with group labels re-indexed to 1..k.

    ``label_names[g - 1]`` is the original label of internal group ``g``.
    """

    x: np.ndarray
    y: np.ndarray
    label_names: tuple = ()
    column_names: Optional[tuple] = None
    dropped_rows: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ValueError("x must be a 2-d matrix")
        y = np.asarray(self.y)
        if y.shape != (x.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({x.shape[0]},)")
        if not np.all(np.isfinite(x)):
            raise ValueError("x contains missing or non-finite values")
        codes, names = reindex_labels(y)
        if self.label_names:
            names = tuple(self.label_names)
            if len(names) != codes.max():
                raise ValueError("label_names does not match the number of groups")
        check_groups(codes, names)
        if self.column_names is not None and len(self.column_names) != x.shape[1]:
            raise ValueError("column_names length does not match d")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(codes))
        object.__setattr__(self, "label_names", names)
        if self.column_names is not None:
            object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def k(self) -> int:
        return len(self.label_names)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.k + 1)[1:]

    def names(self) -> list:
        if self.column_names is not None:
            return list(self.column_names)
        return [f"x{j + 1}" for j in range(self.d)]


def reindex_labels(labels: Sequence) -> tuple:
    """Map arbitrary labels to 1..k in order of first appearance."""
    mapping = {}
    codes = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        key = lab.item() if isinstance(lab, np.generic) else lab
        if key not in mapping:
            mapping[key] = len(mapping) + 1
        codes[i] = mapping[key]
    return codes, tuple(mapping)


def check_groups(codes: np.ndarray, names: Sequence) -> None:
    k = int(codes.max()) if codes.size else 0
    if k < 2:
        raise SingleGroupError(f"need at least 2 groups, found {k}")
    counts = np.bincount(codes, minlength=k + 1)[1:]
    small = [str(names[g]) for g in range(k) if counts[g] < 2]
    if small:
        raise DegenerateGroupError(
            f"groups with fewer than 2 observations: {', '.join(small)}"
        )


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = 0,
    header: bool = True,
) -> Dataset:
    """Read a comma-delimited file into a :class:`Dataset`.

    ``label_column`` is a header name or a 0-based column index. Rows with a
    missing cell (empty, ``NA``, ``NaN``) are dropped and counted in
    ``Dataset.dropped_rows``; any other non-numeric covariate cell is a
    :class:`ParseError`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: file is empty")

    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_line = 2
    else:
        first_line = 1
    width = len(names) if names is not None else len(rows[0])
    label_idx = _resolve_label(label_column, names, width)

    labels, values, dropped = [], [], 0
    for offset, row in enumerate(rows):
        line = first_line + offset
        if len(row) != width:
            raise ParseError(
                f"{path}: row {line} has {len(row)} cells, expected {width}", row=line
            )
        cells = [c.strip() for c in row]
        if any(c.lower() in MISSING_TOKENS for c in cells):
            dropped += 1
            continue
        parsed = []
        for j, cell in enumerate(cells):
            if j == label_idx:
                continue
            try:
                v = float(cell)
            except ValueError:
                col = names[j] if names else j
                raise ParseError(
                    f"{path}: row {line}, column {col!r}: cannot parse {cell!r} as a number",
                    row=line,
                    column=col,
                ) from None
            if not math.isfinite(v):
                col = names[j] if names else j
                raise ParseError(
                    f"{path}: row {line}, column {col!r}: non-finite value {cell!r}",
                    row=line,
                    column=col,
                )
            parsed.append(v)
        labels.append(cells[label_idx])
        values.append(parsed)

    if not values:
        raise SingleGroupError(f"{path}: no complete rows")
    codes, label_names = reindex_labels(labels)
    column_names = None
    if names is not None:
        column_names = tuple(n for j, n in enumerate(names) if j != label_idx)
    return Dataset(
        x=np.array(values, dtype=float).reshape(len(values), width - 1),
        y=codes,
        label_names=label_names,
        column_names=column_names,
        dropped_rows=dropped,
    )


def _resolve_label(label_column, names, width) -> int:
    if isinstance(label_column, str) and names is not None and label_column in names:
        return names.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise ParseError(f"label column {label_column!r} not found in header") from None
    if not 0 <= idx < width:
        raise ParseError(f"label column index {idx} out of range (0..{width - 1})")
    return idx


@dataclass(frozen=True)
class ColumnSummary:
    """Empirical distribution of one column: distinct values, pmf, mid-cdf."""

    distinct_values: np.ndarray
    pmf: np.ndarray
    mid_cdf: np.ndarray
    tie_factor: float
    n: int
    counts: np.ndarray = field(repr=False, default=None)

    @property
    def n_distinct(self) -> int:
        return len(self.distinct_values)

    def lookup(self, values) -> np.ndarray:
        """Index of each value in ``distinct_values`` (values must be observed)."""
        values = np.asarray(values, dtype=float)
        idx = np.searchsorted(self.distinct_values, values)
        idx = np.clip(idx, 0, self.n_distinct - 1)
        if not np.all(self.distinct_values[idx] == values):
            raise KeyError("value not among the observed distinct values")
        return idx


def summarize_column(values) -> ColumnSummary:
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot summarize an empty column")
    uniq, counts = np.unique(values, return_counts=True)
    n = values.size
    pmf = counts / n
    cdf = np.cumsum(counts) / n
    mid = cdf - 0.5 * pmf
    tie = 1.0 - float(np.sum(pmf**3))
    if uniq.size == 1:
        tie = 0.0
    return ColumnSummary(
        distinct_values=_frozen(uniq),
        pmf=_frozen(pmf),
        mid_cdf=_frozen(mid),
        tie_factor=tie,
        n=n,
        counts=_frozen(counts),
    )
