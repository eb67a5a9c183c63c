"""Command-line entry point: Monte Carlo runs, dumps, constants.

Flags override the config file; the effective configuration is echoed to the
output directory. Exit code 0 on a clean batch, 1 when runs destabilized or
aborted (the count goes to stderr).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, dump_config, parse_config
from .harness import (MonteCarloSpec, aggregate, aggregate_final,
                      run_monte_carlo)
from .output import (write_aggregate_csv, write_estimates_csv,
                     write_metrics_csv, write_timeseries_csv, write_truth_csv)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gdnav",
        description="GNSS-denied navigation Monte Carlo simulator")
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--scenario", type=int, choices=(1, 2))
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--jobs", type=int)
    p.add_argument("--hor", choices=("baseline", "double_integration", "wind_integration"))
    p.add_argument("--vert", choices=("baseline", "integration", "airspeed_integration"))
    p.add_argument("--att", choices=("baseline", "zero_fb", "zero_fn"))
    p.add_argument("--gyr", help="gyroscope grade preset")
    p.add_argument("--acc", help="accelerometer grade preset")
    p.add_argument("--mag", help="magnetometer grade preset")
    p.add_argument("--tas", help="airspeed/vane grade preset")
    p.add_argument("--air", help="atmosphere-sensor grade preset")
    p.add_argument("--dump-truth", action="store_true", default=None)
    p.add_argument("--dump-estimates", action="store_true", default=None)
    p.add_argument("--cold-start", action="store_true", default=None)
    p.add_argument("--dump-constants", action="store_true",
                   help="print Earth/atmosphere constants and exit")
    return p


def overrides_from_args(args) -> dict:
    out: dict = {}
    for key in ("scenario", "runs", "seed", "t_end", "out_dir", "jobs"):
        if getattr(args, key) is not None:
            out[key] = getattr(args, key)
    for key in ("dump_truth", "dump_estimates"):
        if getattr(args, key) is not None:
            out[key] = True
    variant = {}
    if args.hor:
        variant["horizontal"] = args.hor
    if args.vert:
        variant["vertical"] = args.vert
    if args.att:
        variant["attitude"] = args.att
    if variant:
        out["variant"] = variant
    sensors = {}
    for key in ("gyr", "acc", "mag", "tas", "air"):
        if getattr(args, key) is not None:
            sensors[key] = getattr(args, key)
    if sensors:
        out["sensors"] = sensors
    if args.cold_start:
        out["tuning"] = {"cold_start": True}
    return out


def print_constants(cfg: RunConfig, stream=None) -> None:
    stream = stream if stream is not None else sys.stdout
    e, a = cfg.earth, cfg.atmo
    print("earth:", file=stream)
    print(f"  omega_e: {e.omega_e!r}   # rad/s", file=stream)
    print(f"  a: {e.a!r}   # m", file=stream)
    print(f"  e2: {e.e2!r}", file=stream)
    print(f"  re_sphere: {e.re_sphere!r}   # m", file=stream)
    print(f"  gamma_equator: {e.gamma_equator!r}   # m/s^2", file=stream)
    print(f"  somigliana_k: {e.somigliana_k!r}", file=stream)
    print(f"  free_air_gradient: {e.free_air_gradient!r}   # 1/s^2", file=stream)
    print("atmo:", file=stream)
    print(f"  t0: {a.t0!r}   # K", file=stream)
    print(f"  p0: {a.p0!r}   # Pa", file=stream)
    print(f"  beta_t: {a.beta_t!r}   # K/m", file=stream)
    print(f"  r_air: {a.r_air!r}   # J/(kg K)", file=stream)
    print(f"  g0: {a.g0!r}   # m/s^2", file=stream)


def main_run(cfg: RunConfig) -> int:
    """Execute the Monte Carlo batch and write all outputs."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective_config.yaml").write_text(dump_config(cfg))

    spec = MonteCarloSpec(
        scenario=cfg.scenario, runs=cfg.runs, seed=cfg.seed,
        t_end=cfg.t_end if cfg.t_end else None, t_gnss=cfg.t_gnss,
        variant=cfg.variant, sensors=cfg.sensors, tuning=cfg.tuning,
        truth_cfg=cfg.truth, ranges=cfg.ranges, field_cfg=cfg.fields)
    keep = cfg.dump_truth or cfg.dump_estimates
    results = run_monte_carlo(spec, jobs=cfg.jobs, keep_series=keep)

    write_metrics_csv(out_dir / "metrics.csv", results)
    write_aggregate_csv(out_dir / "aggregate.csv", aggregate(results),
                        aggregate_final(results))
    write_timeseries_csv(out_dir / "timeseries.csv", results)
    if keep:
        for r in results:
            if cfg.dump_truth:
                write_truth_csv(out_dir / f"truth_{r.index:03d}.csv", r.truth)
            if cfg.dump_estimates:
                write_estimates_csv(out_dir / f"estimates_{r.index:03d}.csv",
                                    r.truth, r.estimate)

    bad = sum(1 for r in results if r.destabilized)
    if bad:
        print(f"{bad} of {len(results)} runs destabilized or were truncated",
              file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = parse_config(args.config, overrides_from_args(args))
    if args.dump_constants:
        print_constants(cfg)
        return 0
    return main_run(cfg)


if __name__ == "__main__":
    sys.exit(main())
