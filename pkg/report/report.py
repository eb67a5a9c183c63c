"""Offline report generator for simulator Monte Carlo outputs.

Consumes the documented CSV files of a run directory and renders the
requested figures plus markdown tables. Performs no statistics of its own:
every number comes from a CSV column.

Usage:
    python report.py --in OUTDIR --figs attitude-nse,vertical-nse --out REPORT
    python report.py --in OUTDIR --figs all --out REPORT --format svg
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from figures import FIGURE_NAMES, render_figure
from loaders import SchemaError, load_run_dir
from tables import write_tables


@dataclass(frozen=True)
class ReportSpec:
    in_dir: str
    out_dir: str
    figures: tuple = FIGURE_NAMES
    fmt: str = "png"
    tables: bool = True

    def __post_init__(self):
        if self.fmt not in ("png", "svg"):
            raise ValueError("format must be png or svg")
        for name in self.figures:
            if name not in FIGURE_NAMES:
                raise ValueError(f"unknown figure {name!r}; available: "
                                 f"{', '.join(FIGURE_NAMES)}")


def render(spec: ReportSpec) -> list:
    """Render everything in the spec; returns the list of written files.

    The input is either one run directory or a sweep parent whose run
    directories are subdirectories; tables cover whichever is present.
    """
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if spec.tables:
        from loaders import load_csv, sibling_run_dirs
        in_dir = Path(spec.in_dir)
        if (in_dir / "aggregate.csv").exists():
            sections = [(in_dir.name, load_csv(in_dir / "aggregate.csv"))]
        else:
            subs = sibling_run_dirs(in_dir)
            if not subs:
                load_run_dir(in_dir)   # raises with the missing-file message
            sections = [(d.name, load_csv(d / "aggregate.csv")) for d in subs]
        from tables import aggregate_markdown
        if len(sections) == 1:
            text = aggregate_markdown(sections[0][1])
        else:
            text = "# Aggregated navigation-system-error metrics\n\n"
            for name, agg in sections:
                text += f"## {name}\n\n"
                text += aggregate_markdown(agg, include_title=False) + "\n"
        path = out_dir / "tables.md"
        path.write_text(text)
        written.append(path)
    for name in spec.figures:
        written.append(render_figure(spec.in_dir, name, out_dir, spec.fmt))
    return written


def build_parser():
    p = argparse.ArgumentParser(prog="report.py",
                                description="render figures/tables from run outputs")
    p.add_argument("--in", dest="in_dir", required=True, help="run output directory")
    p.add_argument("--figs", default="all",
                   help="comma-separated figure list, or 'all', or 'none'")
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--format", dest="fmt", default="png", choices=("png", "svg"))
    p.add_argument("--no-tables", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.figs == "all":
        figs = FIGURE_NAMES
    elif args.figs in ("none", ""):
        figs = ()
    else:
        figs = tuple(args.figs.split(","))
    try:
        spec = ReportSpec(in_dir=args.in_dir, out_dir=args.out_dir,
                          figures=figs, fmt=args.fmt, tables=not args.no_tables)
        written = render(spec)
    except (SchemaError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
