"""Per-run navigation pipeline: the three filters in lockstep at 100 Hz.

Execution order each tick: air-data filter, support-vector assembly from the
previous position-filter step, attitude filter, position filter (with the
selected comparison-algorithm overrides in denied mode), then position
integration for the next tick. The mode switch between GNSS-aided and denied
operation is driven purely by the fix schedule.

The whole run executes inside one compiled loop built from the same kernels
the filter classes wrap, so stepping the classes by hand gives bit-identical
results to :meth:`NavPipeline.run`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import geo
from .atmo import ISA, AtmoConstants
from .env import FieldConfig
from .filters import (AirDataFilter, AttitudeFilter, CovarianceFailure,
                      FilterTuning, MeasurementNoise, PositionFilter)
from .sensors import SensorStreams
from .variants import AlgoVariant, HORIZONTAL_CODES, VERTICAL_CODES


@dataclass
class EstimateArrays:
    """Per-tick navigation estimates; rows align with the truth streams.

    When a run destabilizes, ``n_valid`` marks how many leading rows hold
    meaningful estimates; the remaining rows repeat the last valid row.
    """

    t: np.ndarray
    lon: np.ndarray
    lat: np.ndarray
    alt: np.ndarray
    q: np.ndarray
    omega: np.ndarray
    e_gyr: np.ndarray
    e_mag: np.ndarray
    b_dev: np.ndarray
    v_ned: np.ndarray
    v_wind: np.ndarray
    v_tas: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    temp: np.ndarray
    hp: np.ndarray
    dt_off: np.ndarray
    dp_off: np.ndarray
    destabilized: bool
    n_valid: int


def _fix_tick_map(streams: SensorStreams, n: int) -> np.ndarray:
    out = np.full(n, -1, dtype=np.int64)
    out[streams.gnss_index] = np.arange(streams.gnss_index.size)
    return out


class NavPipeline:
    """One navigation system instance; strictly sequential within a run."""

    def __init__(self, tune: FilterTuning, noise: MeasurementNoise,
                 variant: AlgoVariant = AlgoVariant(),
                 earth: geo.EarthConstants = geo.WGS84,
                 atmo_c: AtmoConstants = ISA,
                 field_cfg: FieldConfig = FieldConfig(),
                 divergence_factor: float = 10.0):
        self.variant = variant
        self.tune = tune
        self.air = AirDataFilter(tune, noise, atmo_c)
        self.att = AttitudeFilter(tune, noise, f_obs_mode=variant.attitude)
        self.pos = PositionFilter(tune, noise, field_cfg, earth, atmo_c)
        self.divergence_factor = divergence_factor

    def initialize_from_truth(self, truth, streams: SensorStreams,
                              dev_b_ned, cal_seed=0,
                              rng: np.random.Generator | None = None):
        """Warm (truth-seeded) start; optionally perturbed for cold starts.

        The lumped accelerometer error is seeded with a calibration residual
        drawn from ``cal_seed``: it is unobservable without GNSS, so the best
        the real system ever knows is its GNSS-era estimate.
        """
        self.air.initialize(truth.v_tas[0], truth.alpha[0], truth.beta[0],
                            truth.temp[0], truth.hp[0])
        # the filter's magnetic deviation state is model-minus-real
        self.att.initialize(truth.q[0], truth.w_nbb[0], streams.lumped_gyr[0],
                            streams.lumped_mag[0], -np.asarray(dev_b_ned))
        cal_rng = np.random.default_rng(np.random.SeedSequence((cal_seed, 0xCA1)))
        e_acc0 = (streams.lumped_acc[0]
                  + self.tune.e_acc_cal_sigma * cal_rng.standard_normal(3))
        self.pos.initialize(truth.lon[0], truth.lat[0], truth.alt[0],
                            truth.v_ned[0], truth.wind_ned[0],
                            truth.dp_off[0], truth.f_ibb[0], e_acc0)
        if rng is not None:
            t = self.tune
            self.air.x[:5] += np.asarray(t.p0_air[:5]) * rng.standard_normal(5)
            dq = geo.quat_from_rotvec(t.p0_att * rng.standard_normal(3))
            self.att.q = geo.quat_mul(self.att.q, dq)
            self.att.lin[3:6] += t.p0_egyr * rng.standard_normal(3)
            self.att.lin[6:9] += t.p0_emag * rng.standard_normal(3)

    def run(self, streams: SensorStreams, t_gnss: float, dt: float) -> EstimateArrays:
        n = streams.t.size
        out = np.empty((n, K.NCOLS))
        gnss_tick = _fix_tick_map(streams, n)
        if streams.gnss_index.size:
            fixes = np.column_stack([streams.gnss_lon, streams.gnss_lat,
                                     streams.gnss_alt, streams.gnss_vel])
        else:
            fixes = np.zeros((1, 6))

        status, n_valid, recoveries = K.run_loop(
            out, streams.t, streams.gyro, streams.accel, streams.mag,
            streams.v_tas, streams.alpha, streams.beta, streams.temp,
            streams.pres, gnss_tick, fixes,
            self.air.x, self.air.p, self.att.q, self.att.lin, self.att.p,
            self.pos.x, self.pos.p, self.pos.nav,
            self.air.q_diag, self.air.r_diag, self.att.q_diag, self.att.r_diag,
            self.pos.pars, self.pos._atm, self.pos._earth, self.pos.b_model,
            t_gnss, dt, self.att.mode, HORIZONTAL_CODES[self.variant.horizontal],
            VERTICAL_CODES[self.variant.vertical], self.divergence_factor,
            self.tune.cov_abort_count, self.tune.r_f_maneuver)
        self.att.recovery_count = int(recoveries)
        if status == K.STATUS_COV_FAILURE:
            raise CovarianceFailure(
                "attitude covariance lost positive definiteness "
                f"(recoveries={recoveries}, tick={n_valid - 1})")
        if status == K.STATUS_DESTABILIZED and n_valid < n:
            out[n_valid:] = out[n_valid - 1]

        c = K
        return EstimateArrays(
            t=streams.t, lon=out[:, c.COL_LON], lat=out[:, c.COL_LAT],
            alt=out[:, c.COL_ALT], q=out[:, c.COL_Q:c.COL_Q + 4],
            omega=out[:, c.COL_OMEGA:c.COL_OMEGA + 3],
            e_gyr=out[:, c.COL_EGYR:c.COL_EGYR + 3],
            e_mag=out[:, c.COL_EMAG:c.COL_EMAG + 3],
            b_dev=out[:, c.COL_BDEV:c.COL_BDEV + 3],
            v_ned=out[:, c.COL_VNED:c.COL_VNED + 3],
            v_wind=out[:, c.COL_VWIND:c.COL_VWIND + 3],
            v_tas=out[:, c.COL_VTAS], alpha=out[:, c.COL_ALPHA],
            beta=out[:, c.COL_BETA], temp=out[:, c.COL_TEMP],
            hp=out[:, c.COL_HP], dt_off=out[:, c.COL_DTOFF],
            dp_off=out[:, c.COL_DPOFF],
            destabilized=status == K.STATUS_DESTABILIZED, n_valid=int(n_valid))
