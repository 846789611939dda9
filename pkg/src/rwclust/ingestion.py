"""CSV panel loading, validation, and level-to-increment conversion.

Input files are UTF-8 CSV with a mandatory header row: first column holds the
time label, every other column one series. Decimal point is '.', no thousands
separators. Panels are immutable once built and safe to share across threads.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import csv
import numpy as np

from .errors import (
    InsufficientDataError,
    PanelFormatError,
    ValidationError,
)

log = logging.getLogger(__name__)

MISSING_POLICIES = ("reject", "drop_series")


@dataclass(frozen=True)
class IngestionOptions:
    """How to read a panel file.

    missing: "reject" fails on any gap, "drop_series" removes gappy series
    (never silently filled: imputation would corrupt the rank statistics).
    already_increments: the file rows are increments, skip differencing.
    date_format: optional strptime format for time labels; default is plain
    lexicographic ordering of the labels.
    """

    missing: str = "reject"
    already_increments: bool = False
    date_format: str | None = None

    def __post_init__(self):
        if self.missing not in MISSING_POLICIES:
            raise ValidationError(
                f"unknown missing-value policy {self.missing!r}; expected one of {MISSING_POLICIES}"
            )


@dataclass(frozen=True)
class SeriesPanel:
    """N named level series on a shared, strictly increasing time index."""

    ids: tuple[str, ...]
    index: tuple[str, ...]
    values: np.ndarray  # N x (M+1)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2:
            raise ValidationError("panel values must be a 2-d array")
        n, m1 = vals.shape
        if len(self.ids) != n:
            raise ValidationError(f"{len(self.ids)} ids for {n} value rows")
        if len(self.index) != m1:
            raise ValidationError(f"{len(self.index)} time labels for {m1} columns")
        if m1 < 3:
            raise ValidationError(f"panel needs at least 3 observations per series, got {m1}")
        _check_ids(self.ids)
        if not np.isfinite(vals).all():
            raise ValidationError("panel contains non-finite values")
        vals.setflags(write=False)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_obs(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class IncrementPanel:
    """N increment series of length M; the object that gets represented and clustered."""

    ids: tuple[str, ...]
    values: np.ndarray  # N x M

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2:
            raise ValidationError("increment values must be a 2-d array")
        if len(self.ids) != vals.shape[0]:
            raise ValidationError(f"{len(self.ids)} ids for {vals.shape[0]} value rows")
        if vals.shape[1] < 2:
            raise ValidationError(f"increment panel needs at least 2 observations, got {vals.shape[1]}")
        _check_ids(self.ids)
        if not np.isfinite(vals).all():
            raise ValidationError("increment panel contains non-finite values")
        vals.setflags(write=False)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_obs(self) -> int:
        return self.values.shape[1]


def _check_ids(ids) -> None:
    if len(ids) == 0:
        raise ValidationError("panel has no series")
    if any(not str(i).strip() for i in ids):
        raise ValidationError("series ids must be nonempty")
    seen: set = set()
    dups: set = set()
    for i in ids:
        (dups if i in seen else seen).add(i)
    if dups:
        raise ValidationError(f"duplicate series ids: {', '.join(sorted(map(str, dups)))}")


def _parse_cell(cell: str, line: int, column: int) -> float | None:
    """Return the cell value, None for a gap, or raise on garbage."""
    s = cell.strip()
    if not s:
        return None
    try:
        v = float(s)
    except ValueError:
        raise PanelFormatError(f"cannot parse {s!r} as a number", line=line, column=column) from None
    # a parseable nan/inf is still a gap, not a value
    return v if np.isfinite(v) else None


def _check_time_order(labels: list[str], lines: list[int], date_format: str | None) -> None:
    if date_format is not None:
        keys = []
        for lab, ln in zip(labels, lines):
            try:
                keys.append(datetime.strptime(lab, date_format))
            except ValueError:
                raise PanelFormatError(
                    f"time label {lab!r} does not match format {date_format!r}", line=ln, column=1
                ) from None
    else:
        keys = list(labels)
    for j in range(1, len(keys)):
        if not keys[j - 1] < keys[j]:
            raise ValidationError(
                f"time labels must be strictly increasing: {labels[j - 1]!r} then {labels[j]!r}"
                f" at line {lines[j]}"
            )


def load_panel(path: str | Path, options: IngestionOptions = IngestionOptions()) -> SeriesPanel:
    """Load and validate a CSV level panel.

    Row order of the returned panel matches the file's column order. Raises
    PanelFormatError for unparseable content (with line/column), ValidationError
    for structural problems (duplicate ids, gaps under policy=reject, unordered
    time labels).
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelFormatError("empty file", line=1) from None
        if len(header) < 2:
            raise PanelFormatError("header must name a time column and at least one series", line=1)
        ids = [c.strip() for c in header[1:]]
        _check_ids(ids)
        n = len(ids)

        labels: list[str] = []
        lines: list[int] = []
        rows: list[list[float | None]] = []
        missing: dict[str, list[int]] = {}
        for row in reader:
            line = reader.line_num
            if not row:
                raise PanelFormatError("blank line inside data", line=line)
            if len(row) > n + 1:
                raise PanelFormatError(
                    f"row has {len(row)} cells, expected {n + 1}", line=line, column=n + 2
                )
            labels.append(row[0].strip())
            lines.append(line)
            vals: list[float | None] = []
            for j in range(n):
                cell = row[j + 1] if j + 1 < len(row) else ""
                v = _parse_cell(cell, line, column=j + 2)
                if v is None:
                    missing.setdefault(ids[j], []).append(line)
                vals.append(v)
            rows.append(vals)

    _check_time_order(labels, lines, options.date_format)

    keep = list(range(n))
    if missing:
        if options.missing == "reject":
            names = ", ".join(sorted(missing))
            raise ValidationError(f"missing values in series: {names}")
        dropped = sorted(missing)
        keep = [j for j in range(n) if ids[j] not in missing]
        if not keep:
            raise ValidationError("all series dropped: every series has missing values")
        log.warning("dropped %d series with missing values: %s", len(dropped), ", ".join(dropped))

    values = np.array(
        [[rows[t][j] for t in range(len(rows))] for j in keep], dtype=float
    )
    return SeriesPanel(
        ids=tuple(ids[j] for j in keep),
        index=tuple(labels),
        values=values,
    )


def to_increments(panel: SeriesPanel) -> IncrementPanel:
    """First-difference each level series: M+1 levels become M increments."""
    if panel.values.shape[1] < 3:
        raise InsufficientDataError(
            f"need at least 3 levels to form 2 increments, got {panel.values.shape[1]}"
        )
    return IncrementPanel(ids=panel.ids, values=np.diff(panel.values, axis=1))


def as_increments(panel: SeriesPanel) -> IncrementPanel:
    """Reinterpret an already-differenced panel's rows as increments, no differencing."""
    return IncrementPanel(ids=panel.ids, values=panel.values)
