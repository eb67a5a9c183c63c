"""Markdown table emission mirroring the aggregate CSV layout.

Cells are copied verbatim from the CSV so the rendered tables and the source
files carry the same numbers character for character.
"""

from __future__ import annotations

from pathlib import Path

from loaders import Table

AGG_COLUMNS = ("variable", "over_runs", "traj_mean", "traj_std",
               "traj_max_abs", "final", "final_pct", "distance_m")


def aggregate_markdown(agg: Table, include_title: bool = True) -> str:
    lines = ["# Aggregated navigation-system-error metrics", ""] if include_title else []
    lines.append("| " + " | ".join(AGG_COLUMNS) + " |")
    lines.append("|" + "---|" * len(AGG_COLUMNS))
    for row in agg.rows:
        lines.append("| " + " | ".join(row.get(c, "") for c in AGG_COLUMNS) + " |")
    lines.append("")
    return "\n".join(lines)


def write_tables(agg: Table, out_dir) -> Path:
    out = Path(out_dir) / "tables.md"
    out.write_text(aggregate_markdown(agg))
    return out
