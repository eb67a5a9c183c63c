"""CSV emission for Monte Carlo results.

Schemas are documented in docs/formats.md and versioned through the header
comment row. All writers are deterministic: fixed column order, fixed float
formatting (repr, i.e. shortest round-trip), newline-terminated rows.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .harness import NSE_VARIABLES, AggregatedMetrics, FinalStateMetrics

SCHEMA_VERSION = "1"


def _writer(path: Path):
    fh = path.open("w", newline="")
    return fh, csv.writer(fh)


def write_metrics_csv(path, results: list) -> None:
    """One row per run per variable, plus per-run bookkeeping columns."""
    fh, w = _writer(Path(path))
    with fh:
        w.writerow([f"# gdnav metrics schema {SCHEMA_VERSION}"])
        w.writerow(["run", "variable", "mean", "std", "max_abs", "final",
                    "destabilized", "distance_m", "wind_accum_m"])
        for r in results:
            for var in NSE_VARIABLES:
                m = r.metrics[var]
                w.writerow([r.index, var, repr(m[0]), repr(m[1]), repr(m[2]),
                            repr(r.final[var]), int(r.destabilized),
                            repr(r.distance_m), repr(r.wind_accum_m)])


def write_aggregate_csv(path, agg: AggregatedMetrics,
                        final: FinalStateMetrics) -> None:
    """Two-level statistics in a report-table layout: one row per variable
    and over-runs statistic, columns for each trajectory statistic plus the
    final-state columns (percent columns only for the track errors)."""
    fh, w = _writer(Path(path))
    with fh:
        w.writerow([f"# gdnav aggregate schema {SCHEMA_VERSION}"])
        w.writerow(["variable", "over_runs", "traj_mean", "traj_std",
                    "traj_max_abs", "final", "final_pct", "distance_m"])
        for var in NSE_VARIABLES:
            for i, stat in enumerate(("mean", "std", "max_abs")):
                row = [var, stat,
                       repr(agg.table[var]["mean"][i]),
                       repr(agg.table[var]["std"][i]),
                       repr(agg.table[var]["max_abs"][i]),
                       repr(final.table[var][i])]
                if var in final.pct_table:
                    row.append(repr(final.pct_table[var][i]))
                else:
                    row.append("")
                row.append(repr(final.distances[i]))
                w.writerow(row)


def write_timeseries_csv(path, results: list) -> None:
    """Across-run mean and std of every NSE variable on the 1 Hz grid.

    Truncated (destabilized) runs contribute until their last valid sample.
    """
    n = max(r.t_sub.size for r in results)
    t = max((r.t_sub for r in results), key=len)
    fh, w = _writer(Path(path))
    with fh:
        w.writerow([f"# gdnav timeseries schema {SCHEMA_VERSION}"])
        header = ["t"]
        for var in NSE_VARIABLES:
            header += [f"{var}_mean", f"{var}_std"]
        w.writerow(header)
        stack = {}
        for var in NSE_VARIABLES:
            block = np.full((len(results), n), np.nan)
            for i, r in enumerate(results):
                block[i, :r.t_sub.size] = r.series_sub[var]
            stack[var] = block
        for j in range(n):
            row = [repr(float(t[j]))]
            for var in NSE_VARIABLES:
                col = stack[var][:, j]
                ok = np.isfinite(col)
                if ok.sum() == 0:
                    row += ["nan", "nan"]
                else:
                    mean = float(col[ok].mean())
                    std = float(col[ok].std(ddof=1)) if ok.sum() > 1 else 0.0
                    row += [repr(mean), repr(std)]
            w.writerow(row)


TRUTH_DUMP_COLUMNS = (
    "t,lon_rad,lat_rad,alt_m,yaw_rad,pitch_rad,roll_rad,"
    "vn_mps,ve_mps,vd_mps,v_tas_mps,alpha_rad,beta_rad,"
    "wx_rps,wy_rps,wz_rps,fx_mps2,fy_mps2,fz_mps2,"
    "wind_n_mps,wind_e_mps,wind_d_mps")

ESTIMATE_DUMP_COLUMNS = (
    "t,lon_rad,lat_rad,alt_m,yaw_rad,pitch_rad,roll_rad,"
    "vn_mps,ve_mps,vd_mps,v_tas_mps,alpha_rad,beta_rad,"
    "wx_rps,wy_rps,wz_rps,wind_n_mps,wind_e_mps,wind_d_mps,"
    "att_err_deg,yaw_err_deg,pitch_err_deg,roll_err_deg,"
    "h_err_m,dp_off_pa,dt_off_k")


def write_truth_csv(path, truth) -> None:
    """Per-step truth dump; one row per 100 Hz step, documented column order."""
    from . import geo
    yaw, pitch, roll = geo.quat_to_euler(truth.q)
    data = np.column_stack([
        truth.t, truth.lon, truth.lat, truth.alt, yaw, pitch, roll,
        truth.v_ned, truth.v_tas, truth.alpha, truth.beta,
        truth.w_nbb, truth.f_ibb, truth.wind_ned])
    np.savetxt(path, data, delimiter=",",
               header=TRUTH_DUMP_COLUMNS, comments="")


def write_estimates_csv(path, truth, est) -> None:
    """Per-step estimate dump mirroring the truth columns plus NSE columns."""
    from . import geo
    yaw, pitch, roll = geo.quat_to_euler(est.q)
    yaw_t, pitch_t, roll_t = geo.quat_to_euler(truth.q)
    att = np.degrees(np.linalg.norm(geo.rotation_minus(est.q, truth.q), axis=1))
    data = np.column_stack([
        est.t, est.lon, est.lat, est.alt, yaw, pitch, roll,
        est.v_ned, est.v_tas, est.alpha, est.beta,
        est.omega, est.v_wind,
        att, np.degrees(geo.wrap_angle(yaw - yaw_t)),
        np.degrees(pitch - pitch_t), np.degrees(geo.wrap_angle(roll - roll_t)),
        est.alt - truth.alt, est.dp_off, est.dt_off])
    np.savetxt(path, data, delimiter=",",
               header=ESTIMATE_DUMP_COLUMNS, comments="")
