"""Monte Carlo execution, navigation-system-error metrics, and aggregation.

Metric families follow a two-level scheme: trajectory metrics (mean, std,
max-absolute of the per-step NSE of one run), aggregated metrics (mean, std,
max over the runs' trajectory metrics), and final-state metrics (statistics
of the last-step NSE across runs, with the horizontal error also expressed as
a percentage of the distance flown since the GNSS signals were lost).

Sample (n-1) standard deviations throughout; a single-run aggregate reports
std 0 by convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import geo
from .atmo import ISA, AtmoConstants
from .env import FieldConfig
from .filters import FilterTuning, MeasurementNoise
from .pipeline import EstimateArrays, NavPipeline
from .sensors import SensorConfig, SensorStreams, SensorSuite, corrupt_truth
from .truth import (ScenarioDraw, ScenarioRanges, TruthArrays, TruthConfig,
                    draw_scenario, generate_truth)
from .variants import AlgoVariant

# NSE variables evaluated per run. "att" is the norm of the attitude rotation
# vector; track errors are signed (cross positive to the right of course,
# long positive ahead).
NSE_VARIABLES = ("yaw_deg", "pitch_deg", "roll_deg", "att_deg",
                 "vn_mps", "ve_mps", "vd_mps", "h_m",
                 "hor_m", "cross_m", "long_m", "egyr_dps")

TIMESERIES_STRIDE = 100   # 1 Hz sub-sampling of the 100 Hz series


def measurement_noise_from(cfg: SensorConfig, dt: float) -> MeasurementNoise:
    """Per-sample noise levels the filters assume, from the active presets."""
    gyr, acc, mag, airspeed, airdata = cfg.resolve()
    sq = math.sqrt(dt)
    return MeasurementNoise(
        gyro=gyr.sigma_v / sq, accel=acc.sigma_v / sq, mag=mag.sigma_v / sq,
        tas=airspeed.tas.sigma, aoa=airspeed.aoa.sigma, aos=airspeed.aos.sigma,
        oat=airdata.oat.sigma, osp=airdata.osp.sigma)


@dataclass
class RunResult:
    """Everything the aggregation and reporting stages need from one run."""

    index: int
    metrics: dict            # variable -> (mean, std, max_abs)
    final: dict              # variable -> last-step NSE
    distance_m: float        # flown since the GNSS loss
    wind_accum_m: float
    destabilized: bool
    n_valid: int
    t_sub: np.ndarray        # 1 Hz time grid
    series_sub: dict         # variable -> 1 Hz NSE series
    truth_summary: dict | None = None   # end-state truth scalars
    gnss_era_h_err: float = 0.0         # mean |alt NSE| just before the loss
    truth: TruthArrays | None = None
    estimate: EstimateArrays | None = None
    streams: SensorStreams | None = None


def nse_series(truth: TruthArrays, est: EstimateArrays,
               streams: SensorStreams) -> dict:
    """Per-step navigation system error for every tracked variable."""
    yaw_t, pitch_t, roll_t = geo.quat_to_euler(truth.q)
    yaw_e, pitch_e, roll_e = geo.quat_to_euler(est.q)
    att = np.linalg.norm(geo.rotation_minus(est.q, truth.q), axis=1)

    verr = est.v_ned - truth.v_ned
    herr = est.alt - truth.alt

    rn, rm = _radii_arrays(truth.lat)
    dn = (est.lat - truth.lat) * (rm + truth.alt)
    de = geo.wrap_angle(est.lon - truth.lon) * (rn + truth.alt) * np.cos(truth.lat)
    course = np.arctan2(truth.v_ned[:, 1], truth.v_ned[:, 0])
    cos_c, sin_c = np.cos(course), np.sin(course)
    long_err = dn * cos_c + de * sin_c
    cross_err = -dn * sin_c + de * cos_c

    egyr = np.linalg.norm(est.e_gyr - streams.lumped_gyr, axis=1)

    deg = 180.0 / math.pi
    return {
        "yaw_deg": geo.wrap_angle(yaw_e - yaw_t) * deg,
        "pitch_deg": (pitch_e - pitch_t) * deg,
        "roll_deg": geo.wrap_angle(roll_e - roll_t) * deg,
        "att_deg": att * deg,
        "vn_mps": verr[:, 0], "ve_mps": verr[:, 1], "vd_mps": verr[:, 2],
        "h_m": herr,
        "hor_m": np.hypot(dn, de), "cross_m": cross_err, "long_m": long_err,
        "egyr_dps": egyr * deg,
    }


def _radii_arrays(lat: np.ndarray):
    s2 = np.sin(lat)**2
    d = 1.0 - geo.WGS84.e2 * s2
    return geo.WGS84.a / np.sqrt(d), geo.WGS84.a * (1.0 - geo.WGS84.e2) / d**1.5


def track_decompose(est_pos, true_pos, course: float):
    """Signed cross/long track decomposition of one position error.

    Positions are (lon, lat, alt) triples; course is the true ground-track
    bearing. Cross is positive when the estimate lies to the right of the
    course, long positive when ahead.
    """
    rn, rm = geo.radii(true_pos[1])
    dn = (est_pos[1] - true_pos[1]) * (rm + true_pos[2])
    de = geo.wrap_angle(est_pos[0] - true_pos[0]) * (rn + true_pos[2]) * math.cos(true_pos[1])
    long_err = dn * math.cos(course) + de * math.sin(course)
    cross_err = -dn * math.sin(course) + de * math.cos(course)
    return cross_err, long_err, math.hypot(dn, de)


def distance_flown(truth: TruthArrays, t_gnss: float) -> float:
    """Great-circle ground distance accumulated since the GNSS loss."""
    i0 = int(np.searchsorted(truth.t, t_gnss))
    lat = truth.lat[i0:]
    lon = truth.lon[i0:]
    alt = truth.alt[i0:]
    rn, rm = _radii_arrays(lat[:-1])
    dn = np.diff(lat) * (rm + alt[:-1])
    de = np.diff(lon) * (rn + alt[:-1]) * np.cos(lat[:-1])
    return float(np.hypot(dn, de).sum())


def wind_accumulation_oracle(truth: TruthArrays, t_gnss: float,
                             dt: float) -> float:
    """Norm of the time integral of the wind change since the GNSS loss."""
    i0 = int(np.searchsorted(truth.t, t_gnss))
    if i0 >= truth.t.size - 1:
        return 0.0
    dw = truth.wind_ned[i0:] - truth.wind_ned[i0]
    if dw.shape[0] < 2:
        return 0.0
    integral = np.trapezoid(dw, dx=dt, axis=0)
    return float(np.linalg.norm(integral[:2]))


def trajectory_metrics(series: dict) -> dict:
    """Per-variable (mean, std, max_abs) over the steps of one run."""
    out = {}
    for name, s in series.items():
        out[name] = (float(s.mean()), float(s.std(ddof=1)), float(np.abs(s).max()))
    return out


def run_once(draw: ScenarioDraw, variant: AlgoVariant = AlgoVariant(),
             sensors: SensorConfig = SensorConfig(),
             tuning: FilterTuning = FilterTuning(),
             truth_cfg: TruthConfig = TruthConfig(),
             earth: geo.EarthConstants = geo.WGS84,
             atmo_c: AtmoConstants = ISA,
             field_cfg: FieldConfig = FieldConfig(),
             index: int = 0, keep_series: bool = False) -> RunResult:
    """Simulate one run end to end: truth, sensors, navigation, NSE."""
    dt = truth_cfg.dt
    truth = generate_truth(draw, truth_cfg, earth, atmo_c, field_cfg)
    suite = SensorSuite(sensors, draw.sensor_seed, dt)
    streams = corrupt_truth(suite, truth, draw.t_gnss, dt)

    noise = measurement_noise_from(sensors, dt)
    pipe = NavPipeline(tuning, noise, variant, earth, atmo_c, field_cfg)
    rng = (np.random.default_rng(draw.sensor_seed ^ 0x5EED) if tuning.cold_start
           else None)
    pipe.initialize_from_truth(truth, streams, draw.deviations.b_dev_ned,
                               cal_seed=draw.sensor_seed, rng=rng)
    est = pipe.run(streams, draw.t_gnss, dt)

    destabilized = est.destabilized or truth.destabilized
    n_valid = min(est.n_valid, truth.n)
    series = nse_series(truth, est, streams)
    if destabilized:
        series = {k: v[:n_valid] for k, v in series.items()}

    sub = slice(0, n_valid, TIMESERIES_STRIDE)
    i_gnss = int(np.searchsorted(truth.t, draw.t_gnss))
    pre = slice(max(i_gnss - 1000, 0), max(i_gnss, 1))
    summary = {
        "hp_end": float(truth.hp[-1]),
        "alt_end": float(truth.alt[-1]),
        "dt_off_end": float(truth.dt_off[-1]),
        "dp_off_end": float(truth.dp_off[-1]),
        "dp_off_gnss": float(truth.dp_off[min(i_gnss, truth.n - 1)]),
        "wind_gnss": truth.wind_ned[min(i_gnss, truth.n - 1)].copy(),
        "wind_end": truth.wind_ned[-1].copy(),
    }
    result = RunResult(
        index=index,
        metrics=trajectory_metrics(series),
        final={k: float(v[-1]) for k, v in series.items()},
        distance_m=distance_flown(truth, draw.t_gnss),
        wind_accum_m=wind_accumulation_oracle(truth, draw.t_gnss, dt),
        destabilized=destabilized,
        n_valid=n_valid,
        t_sub=truth.t[sub].copy(),
        series_sub={k: v[sub].copy() for k, v in series.items()},
        truth_summary=summary,
        gnss_era_h_err=float(np.abs(series["h_m"][pre]).mean()),
    )
    if keep_series:
        result.truth = truth
        result.estimate = est
        result.streams = streams
    return result


@dataclass
class AggregatedMetrics:
    """Two-level statistics over the runs.

    ``table[variable][stat]`` holds (over-runs mean, std, max_abs) of the
    per-run trajectory ``stat`` in ("mean", "std", "max_abs").
    """

    table: dict
    n_runs: int

    def value(self, variable: str, run_stat: str, over_stat: str) -> float:
        idx = {"mean": 0, "std": 1, "max_abs": 2}[over_stat]
        return self.table[variable][run_stat][idx]


@dataclass
class FinalStateMetrics:
    """Across-run statistics of the last-step NSE values."""

    table: dict              # variable -> (mean, std, max_abs)
    pct_table: dict          # variable -> (...) as % of distance flown
    distances: tuple         # (mean, std, max) of distance flown
    n_runs: int


def _over_runs(values: np.ndarray):
    """Order-independent (fsum-based) mean/std/max-abs across runs."""
    n = values.size
    mean = math.fsum(values) / n
    if n > 1:
        var = max((math.fsum(v * v for v in values) - n * mean * mean) / (n - 1), 0.0)
        std = math.sqrt(var)
    else:
        std = 0.0
    vmax = float(values[np.argmax(np.abs(values))])
    return mean, std, vmax


def aggregate(results: list) -> AggregatedMetrics:
    """Aggregated (statistics-of-statistics) metrics over the runs."""
    if not results:
        raise ValueError("no runs to aggregate")
    table = {}
    for var in NSE_VARIABLES:
        table[var] = {}
        for j, stat in enumerate(("mean", "std", "max_abs")):
            vals = np.array([r.metrics[var][j] for r in results])
            table[var][stat] = _over_runs(vals)
    return AggregatedMetrics(table=table, n_runs=len(results))


def aggregate_final(results: list) -> FinalStateMetrics:
    if not results:
        raise ValueError("no runs to aggregate")
    table, pct_table = {}, {}
    dists = np.array([r.distance_m for r in results])
    for var in NSE_VARIABLES:
        vals = np.array([r.final[var] for r in results])
        table[var] = _over_runs(vals)
        if var in ("hor_m", "cross_m", "long_m"):
            pct = 100.0 * vals / np.maximum(dists, 1e-9)
            pct_table[var] = _over_runs(pct)
    return FinalStateMetrics(table=table, pct_table=pct_table,
                             distances=(float(dists.mean()),
                                        float(dists.std(ddof=1)) if dists.size > 1 else 0.0,
                                        float(dists.max())),
                             n_runs=len(results))


@dataclass(frozen=True)
class MonteCarloSpec:
    """Everything needed to reproduce a Monte Carlo batch."""

    scenario: int = 2
    runs: int = 10
    seed: int = 0
    t_end: float | None = None
    t_gnss: float = 100.0
    variant: AlgoVariant = AlgoVariant()
    sensors: SensorConfig = SensorConfig()
    tuning: FilterTuning = FilterTuning()
    truth_cfg: TruthConfig = TruthConfig()
    ranges: ScenarioRanges = ScenarioRanges()
    field_cfg: FieldConfig = FieldConfig()


def _run_index(args):
    spec, index, keep = args
    draw = draw_scenario(spec.scenario, (spec.seed, index), ranges=spec.ranges,
                         cfg=spec.truth_cfg, t_end=spec.t_end, t_gnss=spec.t_gnss,
                         field_cfg=spec.field_cfg)
    return run_once(draw, spec.variant, spec.sensors, spec.tuning,
                    spec.truth_cfg, field_cfg=spec.field_cfg, index=index,
                    keep_series=keep)


def run_monte_carlo(spec: MonteCarloSpec, jobs: int = 1,
                    keep_series: bool = False) -> list:
    """Execute the batch; results are ordered by run index regardless of the
    worker scheduling, so downstream outputs are deterministic."""
    tasks = [(spec, i, keep_series) for i in range(spec.runs)]
    if jobs <= 1 or spec.runs == 1:
        results = [_run_index(t) for t in tasks]
    else:
        with get_context("spawn").Pool(min(jobs, spec.runs)) as pool:
            results = pool.map(_run_index, tasks)
    return sorted(results, key=lambda r: r.index)
