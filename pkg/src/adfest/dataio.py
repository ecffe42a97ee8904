"""Reading paired data files and writing CSV samples."""

import csv
import datetime as dt
from importlib import resources
from pathlib import Path

import numpy as np

from adfest.exceptions import DataError

MISSING = {"", "na", "nan", "null"}
CASE_STUDY_TOKEN = "@case-study"


def case_study_path():
    """Path of the shipped synthetic daily river-flow CSV."""
    return Path(resources.files("adfest") / "data" / "synthetic_river_flows.csv")


def resolve_input(path):
    """Map the ``@case-study`` token to the shipped data file."""
    return case_study_path() if str(path) == CASE_STUDY_TOKEN else Path(path)


def _read_rows(path):
    path = resolve_input(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _parse_numeric(cells, line_numbers, label):
    """Floats from text cells, NaN for missing; non-numeric cells are fatal."""
    out = np.empty(len(cells))
    bad = []
    for i, (cell, line) in enumerate(zip(cells, line_numbers)):
        text = cell.strip()
        if text.lower() in MISSING:
            out[i] = np.nan
            continue
        try:
            out[i] = float(text)
        except ValueError:
            bad.append(line)
            continue
        if not np.isfinite(out[i]):
            bad.append(line)
    if bad:
        shown = ", ".join(map(str, bad[:10])) + (" ..." if len(bad) > 10 else "")
        raise DataError(f"{label}: non-numeric values on rows {shown}")
    return out


def _column(header, rows, name, path):
    if name not in header:
        raise DataError(f"{path}: no column {name!r} (have {', '.join(header)})")
    j = header.index(name)
    lines = list(range(2, len(rows) + 2))
    cells = [r[j] if j < len(r) else "" for r in rows]
    return cells, lines


def _dated_series(path, columns):
    """Dates and value columns from one dated CSV."""
    header, rows = _read_rows(path)
    if not header or header[0].lower() != "date":
        raise DataError(f"{path}: first column must be 'date'")
    rows = [r for r in rows if any(c.strip() for c in r)]
    dates = []
    for line, r in enumerate(rows, start=2):
        try:
            dates.append(dt.date.fromisoformat(r[0].strip()))
        except (ValueError, IndexError):
            raise DataError(f"{path}: invalid ISO-8601 date on row {line}") from None
    if len(set(dates)) != len(dates):
        raise DataError(f"{path}: duplicate dates")
    columns = columns or header[1:]
    values = []
    for name in columns:
        cells, lines = _column(header, rows, name, path)
        values.append(_parse_numeric(cells, lines, f"{path}:{name}"))
    return dates, columns, values


class PairedData:
    """Two aligned series with optional dates.

    Attributes
    ----------
    values : ndarray of shape (n, 2)
    dates : list of datetime.date or None
    names : tuple of str
    margin_tag : {"exponential", "original"}
    """

    def __init__(self, values, dates, names, margin_tag):
        self.values = values
        self.dates = dates
        self.names = tuple(names)
        self.margin_tag = margin_tag

    @property
    def n_years(self):
        """Number of distinct calendar years observed."""
        return None if self.dates is None else len({d.year for d in self.dates})

    def describe(self):
        d = {"n": int(self.values.shape[0]), "columns": list(self.names),
             "margins": self.margin_tag}
        if self.dates is not None:
            d.update(first_date=self.dates[0].isoformat(), last_date=self.dates[-1].isoformat(),
                     n_years=self.n_years)
        return d


def read_paired(paths, columns=None):
    """Read a bivariate sample.

    Accepted layouts:

    * one CSV with header ``x,y``: data already on exponential margins;
    * one CSV with a ``date`` column and value columns; ``columns`` picks two
      of them (default: the first two);
    * two CSVs each with ``date`` and a value column, inner-joined on date.

    Rows where either value is missing are dropped.
    """
    paths = [paths] if isinstance(paths, (str, Path)) else list(paths)
    if len(paths) == 1:
        header, rows = _read_rows(paths[0])
        if header == ["x", "y"]:
            rows = [r for r in rows if any(c.strip() for c in r)]
            lines = list(range(2, len(rows) + 2))
            cols = [_parse_numeric([r[j] if j < len(r) else "" for r in rows], lines,
                                   f"{paths[0]}:{name}") for j, name in enumerate(header)]
            X = np.column_stack(cols)
            X = X[~np.isnan(X).any(axis=1)]
            return PairedData(X, None, ("x", "y"), "exponential")
        if columns is not None and len(columns) != 2:
            raise DataError("exactly two columns must be selected")
        dates, names, values = _dated_series(paths[0], columns)
        if len(names) < 2:
            raise DataError(f"{paths[0]}: need two value columns")
        names, values = names[:2], values[:2]
        X = np.column_stack(values)
    elif len(paths) == 2:
        picked = [None, None] if columns is None else [[c] for c in columns]
        series = [_dated_series(p, c) for p, c in zip(paths, picked)]
        common = sorted(set(series[0][0]) & set(series[1][0]))
        cols = []
        for d, _, vals in series:
            pos = {day: i for i, day in enumerate(d)}
            cols.append(vals[0][[pos[day] for day in common]])
        dates = common
        names = [series[0][1][0], series[1][1][0]]
        X = np.column_stack(cols)
    else:
        raise DataError("give one or two input files")
    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    X = X[order]
    dates = [dates[i] for i in order]
    keep = ~np.isnan(X).any(axis=1)
    dates = [d for d, k in zip(dates, keep) if k]
    X = X[keep]
    if X.shape[0] == 0:
        raise DataError("no rows with both values present")
    return PairedData(X, dates, names, "original")


def write_xy(path, X):
    rows = ["x,y"] + [f"{a!r},{b!r}" for a, b in X.tolist()]
    Path(path).write_text("\n".join(rows) + "\n")
