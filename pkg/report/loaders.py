"""CSV loading for the simulator's documented output schemas.

Values are kept verbatim (as strings) next to their float views so the
markdown tables can echo the source files exactly. Schema problems raise
with the offending column named.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


class Table:
    """One loaded CSV: verbatim cells plus float columns on demand."""

    def __init__(self, path, columns, rows):
        self.path = Path(path)
        self.columns = columns
        self.rows = rows                       # list of row dicts (strings)

    def column(self, name):
        if name not in self.columns:
            raise SchemaError(f"{self.path.name}: missing column {name!r} "
                              f"(has {', '.join(self.columns)})")
        return [r[name] for r in self.rows]

    def floats(self, name) -> np.ndarray:
        vals = self.column(name)
        try:
            return np.array([float(v) if v != "" else np.nan for v in vals])
        except ValueError as e:
            raise SchemaError(f"{self.path.name}: column {name!r} is not numeric: {e}")

    def select(self, **match):
        rows = [r for r in self.rows
                if all(r.get(k) == v for k, v in match.items())]
        return Table(self.path, self.columns, rows)


def load_csv(path, required=()) -> Table:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing input file {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header and header[0].startswith("#"):
            header = next(reader)
        rows = [dict(zip(header, row)) for row in reader if row]
    table = Table(path, header, rows)
    for name in required:
        table.column(name)
    return table


def load_run_dir(in_dir):
    """Load the aggregate and timeseries files of one run directory."""
    in_dir = Path(in_dir)
    agg = load_csv(in_dir / "aggregate.csv",
                   required=("variable", "over_runs", "traj_mean", "traj_std",
                             "final"))
    ts = load_csv(in_dir / "timeseries.csv", required=("t",))
    return agg, ts


def sibling_run_dirs(in_dir):
    """Subdirectories that look like run outputs (for comparison figures)."""
    in_dir = Path(in_dir)
    out = []
    for child in sorted(in_dir.iterdir()):
        if child.is_dir() and (child / "aggregate.csv").exists():
            out.append(child)
    return out
