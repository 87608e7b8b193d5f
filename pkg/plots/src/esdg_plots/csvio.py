"""Minimal CSV reading with named-column validation."""

import csv
from pathlib import Path

import numpy as np


class PlotDataError(Exception):
    """Input CSV is missing a required column or carries no usable data."""


def read_columns(path):
    """Read a headered CSV into a dict of float arrays (non-numeric -> nan)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise PlotDataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    data = {h: [] for h in header}
    for row in rows[1:]:
        if not row or all(not cell.strip() for cell in row):
            continue
        for h, cell in zip(header, row):
            try:
                data[h].append(float(cell))
            except ValueError:
                data[h].append(float("nan"))
    if not data or not next(iter(data.values())):
        raise PlotDataError(f"{path}: no data rows")
    return {h: np.asarray(v) for h, v in data.items()}


def require(columns, names, path):
    missing = [n for n in names if n not in columns]
    if missing:
        raise PlotDataError(f"{path}: missing column(s) {', '.join(missing)}")
    for n in names:
        series = columns[n]
        if series.size == 0 or not np.any(np.isfinite(series)):
            raise PlotDataError(f"{path}: column {n!r} has no finite values")
