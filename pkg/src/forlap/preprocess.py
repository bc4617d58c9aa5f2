"""CSV ingestion, differencing and the signed square-root transform."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError


class IngestError(ConfigurationError):
    """The input file cannot be turned into a single numeric series."""


def _is_number(text: str) -> bool:
    try:
        v = float(text)
    except ValueError:
        return False
    return not math.isnan(v)


def ingest_csv(path, column: str | int | None = None) -> np.ndarray:
    """Read one numeric column from a CSV file.

    A header row is optional.  Non-numeric columns (for instance quarter
    labels such as ``1990 Q1``) are ignored.  When more than one column is
    numeric, ``column`` (a header name or zero-based index) must choose one.

    Raises
    ------
    IngestError
        Missing or empty file, blank or non-numeric cells in the chosen
        column (row numbers are 1-based file lines), or an ambiguous column.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not any(any(c.strip() for c in r) for r in rows):
        raise IngestError(f"input file is empty: {path}")

    header = None
    if rows and rows[0] and not any(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        body_start = 1
    else:
        body_start = 0
    body = rows[body_start:]
    # trailing blank lines are not data
    while body and not any(c.strip() for c in body[-1]):
        body.pop()
    if not body:
        raise IngestError(f"no data rows in {path}")
    width = max(len(r) for r in body)

    if column is not None:
        if isinstance(column, str) and not column.lstrip("-").isdigit():
            if header is None or column not in header:
                raise IngestError(f"column {column!r} not found in header {header}")
            idx = header.index(column)
        else:
            idx = int(column)
            if not 0 <= idx < width:
                raise IngestError(f"column index {idx} outside 0..{width - 1}")
    else:
        numeric = []
        for j in range(width):
            cells = [r[j].strip() for r in body if j < len(r) and r[j].strip()]
            if cells and sum(_is_number(c) for c in cells) >= 0.5 * len(cells):
                numeric.append(j)
        if not numeric:
            raise IngestError(f"no numeric column in {path}")
        if len(numeric) > 1:
            names = [header[j] if header and j < len(header) else str(j) for j in numeric]
            raise IngestError(
                f"{len(numeric)} numeric columns ({', '.join(names)}); "
                "select one with --column"
            )
        idx = numeric[0]

    values, bad = [], []
    for i, r in enumerate(body):
        line = body_start + i + 1
        cell = r[idx].strip() if idx < len(r) else ""
        if not _is_number(cell):
            bad.append(line)
            continue
        values.append(float(cell))
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise IngestError(f"blank or non-numeric values at row(s) {shown}", [f"row {b}" for b in bad])
    return np.array(values)


@dataclass(frozen=True)
class DifferenceMeta:
    """What is needed to undo ``order``-fold differencing.

    ``heads[k]`` is the first value of the k-times differenced series and
    ``tails[k]`` its last value, for k = 0..order-1.
    """

    order: int
    heads: tuple = ()
    tails: tuple = ()

    def to_dict(self) -> dict:
        return {"order": self.order, "heads": list(self.heads), "tails": list(self.tails)}


def difference(series, order: int) -> tuple[np.ndarray, DifferenceMeta]:
    """Apply first differencing ``order`` times (order in 0, 1, 2)."""
    if order not in (0, 1, 2):
        raise ValueError("difference order must be 0, 1 or 2")
    x = np.asarray(series, dtype=float)
    if len(x) <= order:
        raise ValueError(f"series of length {len(x)} too short for order-{order} differencing")
    heads, tails = [], []
    for _ in range(order):
        heads.append(float(x[0]))
        tails.append(float(x[-1]))
        x = np.diff(x)
    return x, DifferenceMeta(order, tuple(heads), tuple(tails))


def undifference(diffed, meta: DifferenceMeta) -> np.ndarray:
    """Invert :func:`difference` from the stored initial values."""
    x = np.asarray(diffed, dtype=float)
    for head in reversed(meta.heads):
        x = np.concatenate([[head], head + np.cumsum(x)])
    return x


def integrate_forecast(points, meta: DifferenceMeta) -> np.ndarray:
    """Turn forecasts of the differenced series into forecasts of the levels.

    The forecasts continue the differenced series, so they are integrated
    starting from the last observed value at each differencing level.
    """
    y = np.asarray(points, dtype=float)
    for tail in reversed(meta.tails):
        y = tail + np.cumsum(y)
    return y


def signed_sqrt(x):
    """sign(x) * sqrt(|x|), elementwise."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.sqrt(np.abs(x))
    return out if out.ndim else float(out)
