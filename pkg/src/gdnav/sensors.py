"""Sensor error models: IMU triads, magnetometers, air data suite, GNSS.

Triad sensors (gyroscopes, accelerometers, magnetometers) combine a
run-constant bias offset, a banded bias-drift random walk, scale factor and
cross coupling through an error matrix ``C = R_mis (I + S + M)``, and white
system noise. Scalar air sensors carry only a bias offset and white noise.

All run-to-run draws are unit draws scaled by the grade parameters, so two
grades built from the same seed differ only by those scale factors; this
makes error magnitudes monotone in sensor grade for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .env import gauss_markov_series
from .geo import radii

DEG = math.pi / 180.0

# Cross-coupling sign pattern: the six off-diagonals carry the single
# cross-coupling magnitude with these signs, times a per-run orientation flip.
CROSS_PATTERN = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])


@dataclass(frozen=True)
class TriadErrorParams:
    """Triad error budget. Units are SI (rad-based) or nT for magnetometers."""

    sigma_u: float = 0.0   # bias drift density, unit/s^0.5 per sqrt(s) of walk
    sigma_v: float = 0.0   # system noise density, unit*s^0.5
    scale: float = 0.0     # scale factor error bound
    cross: float = 0.0     # cross coupling magnitude
    b0: float = 0.0        # run-constant bias offset bound
    hard_iron: float = 0.0 # nT, magnetometers only
    band_k: float = 100.0  # drift band multiplier


def gyro_params(sigma_u_dps15, sigma_v_dps05, scale, cross, b0_dps, band_k=100.0):
    """Build gyroscope params from data-sheet units (deg/sec based)."""
    return TriadErrorParams(sigma_u=sigma_u_dps15 * DEG, sigma_v=sigma_v_dps05 * DEG,
                            scale=scale, cross=cross, b0=b0_dps * DEG, band_k=band_k)


@dataclass(frozen=True)
class ScalarSensorParams:
    """White noise plus run-constant bias offset, in the channel's own unit."""

    sigma: float = 0.0
    b0: float = 0.0


@dataclass(frozen=True)
class AirspeedSuiteParams:
    tas: ScalarSensorParams = ScalarSensorParams(0.333, 0.333)                  # m/s
    aoa: ScalarSensorParams = ScalarSensorParams(0.333 * DEG, 0.333 * DEG)      # rad
    aos: ScalarSensorParams = ScalarSensorParams(0.333 * DEG, 0.333 * DEG)      # rad


@dataclass(frozen=True)
class AirDataSuiteParams:
    osp: ScalarSensorParams = ScalarSensorParams(100.0, 100.0)   # Pa
    oat: ScalarSensorParams = ScalarSensorParams(0.05, 0.05)     # K


# Shipped grade presets ------------------------------------------------------

GYR_PRESETS = {
    "baseline": gyro_params(1.42e-4, 4.30e-3, 1.50e-5, 4.35e-5, 2.00e-1),
    "better":   gyro_params(1.38e-5, 2.50e-3, 5.00e-6, 1.50e-5, 3.00e-2),
    "worse":    gyro_params(5.00e-4, 8.00e-3, 5.00e-5, 1.50e-4, 7.50e-1),
    "worst":    gyro_params(1.50e-3, 2.50e-2, 1.00e-4, 4.50e-4, 1.50e0),
    "zero":     TriadErrorParams(),
}

ACC_PRESETS = {
    "baseline": TriadErrorParams(6.86e-5, 4.83e-4, 5.00e-5, 3.05e-5, 1.57e-1),
    "better":   TriadErrorParams(4.90e-5, 3.30e-4, 1.50e-5, 1.50e-5, 1.96e-2),
    "worse":    TriadErrorParams(8.50e-5, 5.00e-4, 8.50e-5, 5.00e-5, 4.50e-1),
    "worst":    TriadErrorParams(1.20e-4, 6.50e-4, 1.40e-4, 9.50e-5, 8.50e-1),
    "zero":     TriadErrorParams(),
}

MAG_PRESETS = {
    "baseline": TriadErrorParams(0.0, 5.00e0, 7.50e-4, 9.16e-4, 5.00e2, hard_iron=1.75e2),
    "better":   TriadErrorParams(0.0, 3.00e0, 5.00e-4, 7.00e-4, 3.00e2, hard_iron=1.25e2),
    "worse":    TriadErrorParams(0.0, 1.00e1, 1.25e-3, 1.50e-3, 7.50e2, hard_iron=3.50e2),
    "zero":     TriadErrorParams(),
}

AIRSPEED_PRESETS = {
    "baseline": AirspeedSuiteParams(),
    "better": AirspeedSuiteParams(
        tas=ScalarSensorParams(0.15, 0.15),
        aoa=ScalarSensorParams(0.10 * DEG, 0.10 * DEG),
        aos=ScalarSensorParams(0.10 * DEG, 0.10 * DEG)),
    "worse": AirspeedSuiteParams(
        tas=ScalarSensorParams(0.666, 0.666),
        aoa=ScalarSensorParams(0.666 * DEG, 0.666 * DEG),
        aos=ScalarSensorParams(0.666 * DEG, 0.666 * DEG)),
    "zero": AirspeedSuiteParams(ScalarSensorParams(), ScalarSensorParams(), ScalarSensorParams()),
}

AIRDATA_PRESETS = {
    "baseline": AirDataSuiteParams(),
    "worse": AirDataSuiteParams(osp=ScalarSensorParams(150.0, 150.0),
                                oat=ScalarSensorParams(0.15, 0.15)),
    "worst": AirDataSuiteParams(osp=ScalarSensorParams(300.0, 300.0),
                                oat=ScalarSensorParams(0.50, 0.50)),
    "zero": AirDataSuiteParams(ScalarSensorParams(), ScalarSensorParams()),
}


@dataclass(frozen=True)
class GnssErrorParams:
    """GNSS receiver error model: slow vertical-dominant Gauss-Markov
    (ionospheric-like) position error plus white noise on position and
    velocity. Not tied to any published receiver budget."""

    gm_sigma: tuple = (1.0, 1.0, 3.0)      # m per NED axis
    gm_tau: float = 600.0                  # s
    white_pos: tuple = (0.3, 0.3, 0.5)     # m
    white_vel: tuple = (0.05, 0.05, 0.08)  # m/s


def _reflect_into_band(s: np.ndarray, band: float) -> np.ndarray:
    """Fold a free random walk into [-band, band] with reflecting edges."""
    if band <= 0.0:
        return np.zeros_like(s)
    return np.abs((s - band) % (4.0 * band) - 2.0 * band) - band


@dataclass
class TriadDraws:
    """Run-constant unit draws, scaled by grade parameters at build time."""

    u_b0: np.ndarray
    u_scale: np.ndarray
    u_cross_sign: float
    u_hard_iron: np.ndarray
    u_misalign: np.ndarray


class TriadSensor:
    """One triad's sequential error state plus vectorized stream corruption."""

    def __init__(self, params: TriadErrorParams, rng: np.random.Generator,
                 dt: float, misalign_cap: float = 0.0,
                 draws: TriadDraws | None = None):
        self.params = params
        self.dt = dt
        # separate streams so step-by-step and whole-series generation agree
        rng_draw, self.rng_walk, self.rng_noise = rng.spawn(3)
        if draws is None:
            draws = TriadDraws(
                u_b0=rng_draw.uniform(-1.0, 1.0, 3),
                u_scale=rng_draw.uniform(-1.0, 1.0, 3),
                u_cross_sign=1.0 if rng_draw.uniform() < 0.5 else -1.0,
                u_hard_iron=rng_draw.uniform(-1.0, 1.0, 3),
                u_misalign=rng_draw.uniform(-1.0, 1.0, 3),
            )
        self.draws = draws
        self.b0 = params.b0 * draws.u_b0
        self.hard_iron = params.hard_iron * draws.u_hard_iron
        c = np.eye(3) + np.diag(params.scale * draws.u_scale)
        c = c + draws.u_cross_sign * params.cross * CROSS_PATTERN
        if misalign_cap > 0.0:
            from .geo import quat_from_rotvec, rotate_to_ned
            rv = misalign_cap * draws.u_misalign
            qm = quat_from_rotvec(rv)
            c = np.column_stack([rotate_to_ned(qm, c[:, i]) for i in range(3)])
        self.c_matrix = c
        self.band = params.band_k * params.sigma_u * math.sqrt(dt)
        self.drift = np.zeros(3)
        self._walk = np.zeros(3)

    def step(self, true_vec: np.ndarray) -> np.ndarray:
        """Measure one sample; advances drift and draws fresh noise."""
        p = self.params
        self._walk = self._walk + p.sigma_u * math.sqrt(self.dt) * self.rng_walk.standard_normal(3)
        self.drift = _reflect_into_band(self._walk, self.band)
        noise = (p.sigma_v / math.sqrt(self.dt)) * self.rng_noise.standard_normal(3)
        return self.c_matrix @ true_vec + self.b0 + self.hard_iron + self.drift + noise

    def measure_series(self, truth: np.ndarray):
        """Corrupt a whole (n, 3) stream. Returns (measured, lumped_error).

        The lumped error is everything except system noise:
        ``E = (C - I) y + b0 + hard_iron + drift``.
        """
        p = self.params
        n = truth.shape[0]
        steps = p.sigma_u * math.sqrt(self.dt) * self.rng_walk.standard_normal((n, 3))
        walk = self._walk + np.cumsum(steps, axis=0)
        drift = _reflect_into_band(walk, self.band)
        self._walk = walk[-1].copy()
        self.drift = drift[-1].copy()
        noise = (p.sigma_v / math.sqrt(self.dt)) * self.rng_noise.standard_normal((n, 3))
        lumped = truth @ (self.c_matrix - np.eye(3)).T + self.b0 + self.hard_iron + drift
        return truth + lumped + noise, lumped


class ScalarSensor:
    """Scalar channel with a run-constant bias offset and white noise."""

    def __init__(self, params: ScalarSensorParams, rng: np.random.Generator,
                 u_b0: float | None = None):
        self.params = params
        self.rng = rng
        self.b0 = params.b0 * (rng.uniform(-1.0, 1.0) if u_b0 is None else u_b0)

    def step(self, true_value: float) -> float:
        return true_value + self.b0 + self.params.sigma * self.rng.standard_normal()

    def measure_series(self, truth: np.ndarray) -> np.ndarray:
        return truth + self.b0 + self.params.sigma * self.rng.standard_normal(truth.shape)


class GnssReceiver:
    """1 Hz position/velocity fixes with Gauss-Markov plus white errors."""

    def __init__(self, params: GnssErrorParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng

    def measure_series(self, pos_ned_true: np.ndarray, vel_true: np.ndarray):
        """Corrupt (m, 3) position (NED metres) and velocity fix streams."""
        m = pos_ned_true.shape[0]
        p = self.params
        gm = gauss_markov_series(m, 1.0, np.asarray(p.gm_sigma), p.gm_tau, self.rng)
        pos_noise = np.asarray(p.white_pos) * self.rng.standard_normal((m, 3))
        vel_noise = np.asarray(p.white_vel) * self.rng.standard_normal((m, 3))
        return pos_ned_true + gm + pos_noise, vel_true + vel_noise


@dataclass(frozen=True)
class SensorConfig:
    """Grade preset selection plus the shared mounting/bias-band settings."""

    gyr: str = "baseline"
    acc: str = "baseline"
    mag: str = "baseline"
    tas: str = "baseline"
    air: str = "baseline"
    band_k: float = 100.0
    imu_misalign_cap: float = 5.0e-4   # rad per axis, IMU mounting uncertainty
    mag_misalign_cap: float = 5.0e-4
    gnss: GnssErrorParams = GnssErrorParams()

    def resolve(self):
        try:
            gyr = replace(GYR_PRESETS[self.gyr], band_k=self.band_k)
            acc = replace(ACC_PRESETS[self.acc], band_k=self.band_k)
            mag = MAG_PRESETS[self.mag]
            airspeed = AIRSPEED_PRESETS[self.tas]
            airdata = AIRDATA_PRESETS[self.air]
        except KeyError as e:
            raise KeyError(f"unknown sensor preset {e}") from None
        return gyr, acc, mag, airspeed, airdata


class SensorSuite:
    """All onboard sensors for one run, built from one seed.

    Unit draws are taken from dedicated child generators in a fixed order, so
    the run-constant error realizations for a given seed do not depend on the
    grade preset magnitudes.
    """

    def __init__(self, cfg: SensorConfig, seed, dt: float):
        gyr_p, acc_p, mag_p, asp_p, air_p = cfg.resolve()
        ss = np.random.SeedSequence(seed)
        (s_draw, s_gyr, s_acc, s_mag, s_scal, s_gnss) = ss.spawn(6)
        rng_draw = np.random.default_rng(s_draw)
        # one IMU mount misalignment shared by both inertial triads
        u_mis_imu = rng_draw.uniform(-1.0, 1.0, 3)

        def triad_draws(shared_mis=None):
            return TriadDraws(
                u_b0=rng_draw.uniform(-1.0, 1.0, 3),
                u_scale=rng_draw.uniform(-1.0, 1.0, 3),
                u_cross_sign=1.0 if rng_draw.uniform() < 0.5 else -1.0,
                u_hard_iron=rng_draw.uniform(-1.0, 1.0, 3),
                u_misalign=u_mis_imu if shared_mis else rng_draw.uniform(-1.0, 1.0, 3),
            )

        self.gyro = TriadSensor(gyr_p, np.random.default_rng(s_gyr), dt,
                                cfg.imu_misalign_cap, triad_draws(shared_mis=True))
        self.accel = TriadSensor(acc_p, np.random.default_rng(s_acc), dt,
                                 cfg.imu_misalign_cap, triad_draws(shared_mis=True))
        self.mag = TriadSensor(mag_p, np.random.default_rng(s_mag), dt,
                               cfg.mag_misalign_cap, triad_draws())
        rng_scal = np.random.default_rng(s_scal)
        u5 = rng_draw.uniform(-1.0, 1.0, 5)
        self.tas = ScalarSensor(asp_p.tas, rng_scal, u5[0])
        self.aoa = ScalarSensor(asp_p.aoa, rng_scal, u5[1])
        self.aos = ScalarSensor(asp_p.aos, rng_scal, u5[2])
        self.oat = ScalarSensor(air_p.oat, rng_scal, u5[3])
        self.osp = ScalarSensor(air_p.osp, rng_scal, u5[4])
        self.gnss = GnssReceiver(cfg.gnss, np.random.default_rng(s_gnss))


@dataclass
class SensorStreams:
    """Corrupted measurement streams for one run, plus the ground-truth
    lumped errors kept for evaluation. GNSS fields cover only the 1 Hz fixes
    taken while signals last (t < t_gnss)."""

    t: np.ndarray
    gyro: np.ndarray         # (n, 3) rad/s
    accel: np.ndarray        # (n, 3) m/s^2
    mag: np.ndarray          # (n, 3) nT
    v_tas: np.ndarray        # (n,) m/s
    alpha: np.ndarray        # (n,) rad
    beta: np.ndarray         # (n,) rad
    temp: np.ndarray         # (n,) K
    pres: np.ndarray         # (n,) Pa
    gnss_index: np.ndarray   # (m,) tick indices of the fixes
    gnss_lon: np.ndarray
    gnss_lat: np.ndarray
    gnss_alt: np.ndarray
    gnss_vel: np.ndarray     # (m, 3)
    lumped_gyr: np.ndarray   # (n, 3)
    lumped_acc: np.ndarray
    lumped_mag: np.ndarray


def corrupt_truth(suite: SensorSuite, truth, t_gnss: float, dt: float) -> SensorStreams:
    """Run every sensor model over the truth streams of one trajectory."""
    gyro, lump_g = suite.gyro.measure_series(truth.w_ibb)
    accel, lump_a = suite.accel.measure_series(truth.f_ibb)
    mag, lump_m = suite.mag.measure_series(truth.mag_body)
    v_tas = suite.tas.measure_series(truth.v_tas)
    alpha = suite.aoa.measure_series(truth.alpha)
    beta = suite.aos.measure_series(truth.beta)
    temp = suite.oat.measure_series(truth.temp)
    pres = suite.osp.measure_series(truth.pres)

    per_fix = int(round(1.0 / dt))
    idx = np.arange(0, truth.n, per_fix)
    idx = idx[truth.t[idx] < t_gnss]
    ned_true = np.zeros((idx.size, 3))
    pos_meas, vel_meas = suite.gnss.measure_series(ned_true, truth.v_ned[idx])
    rn_rm = [radii(lat) for lat in truth.lat[idx]]
    rn = np.array([x[0] for x in rn_rm])
    rm = np.array([x[1] for x in rn_rm])
    lat = truth.lat[idx] + pos_meas[:, 0] / (rm + truth.alt[idx])
    lon = truth.lon[idx] + pos_meas[:, 1] / ((rn + truth.alt[idx]) * np.cos(truth.lat[idx]))
    alt = truth.alt[idx] - pos_meas[:, 2]

    return SensorStreams(t=truth.t, gyro=gyro, accel=accel, mag=mag, v_tas=v_tas,
                         alpha=alpha, beta=beta, temp=temp, pres=pres,
                         gnss_index=idx, gnss_lon=lon, gnss_lat=lat, gnss_alt=alt,
                         gnss_vel=vel_meas, lumped_gyr=lump_g, lumped_acc=lump_a,
                         lumped_mag=lump_m)
