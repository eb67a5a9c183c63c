"""The GNSS-denied navigation system: air-data, attitude and position filters.

The navigation problem is split into three cooperating 100 Hz filters:

* the air-data filter smooths the airspeed/vane/atmosphere channels (plus
  kinematic derivative states used by the wind-integration comparison
  algorithm) and derives the temperature offset;
* the attitude filter is a multiplicative error-state EKF over attitude,
  body rate, lumped gyroscope error, lumped magnetometer error, and the
  magnetic model deviation; its specific-force observation discards the
  airspeed/turbulence derivatives seen in the body frame and the wind
  derivative seen in NED, which keeps the observation unbiased during
  maneuvers at the cost of extra measurement noise;
* the position filter tracks the lumped specific force, freezes the wind and
  pressure-offset estimates at their last GNSS-aided values once fixes stop,
  rebuilds ground velocity from airspeed plus frozen wind, derives altitude
  through the pressure-altitude/offset ladder (never by integrating vertical
  speed), and integrates longitude/latitude from the velocity estimate.

The attitude filter consumes a support vector assembled from the previous
position-filter step, so errors in the GNSS-denied position estimates enter
the attitude problem only through that vector.

The classes here are step-by-step wrappers around the compiled kernels in
:mod:`gdnav._kernels`; the batch runner in :mod:`gdnav.pipeline` drives the
same kernels, so both paths produce identical numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import geo
from .atmo import ISA, AtmoConstants, temperature_offset
from .env import FieldConfig

ATT_MODE_CODES = {"baseline": K.ATT_BASELINE, "zero_fb": K.ATT_ZERO_FB,
                  "zero_fn": K.ATT_ZERO_FN}


@dataclass(frozen=True)
class FilterTuning:
    """Process/measurement noise and initialization settings.

    Defaults are tuned on desk-scale Monte Carlo runs of both scenarios with
    the baseline sensor presets; everything is overridable from the config
    file.
    """

    # air-data filter process PSDs (units^2 / s)
    q_vtas: float = 1e-6
    q_alpha: float = 1e-8
    q_beta: float = 1e-8
    q_temp: float = 1e-4
    q_hp: float = 1.0
    q_vtas_dot: float = 1.0
    q_alpha_dot: float = 2e-4
    q_beta_dot: float = 2e-4
    # attitude filter process PSDs
    q_att: float = 1e-8          # rad^2/s
    q_omega: float = 5e-3        # (rad/s)^2/s
    q_egyr: float = 1.5e-10      # (rad/s)^2/s
    q_emag: float = 10.0         # nT^2/s
    q_bdev: float = 1e-6         # nT^2/s, the deviation is run-constant
    # position filter process PSDs
    q_f: float = 25.0            # (m/s^2)^2/s
    q_eacc: float = 5e-9         # (m/s^2)^2/s
    # measurement-noise inflation and floors
    r_f_turb: float = 0.8        # m/s^2 added std on the specific-force obs
    r_f_maneuver: float = 1.0    # extra std per (m/s^2) of rotation coupling
    r_mag_extra: float = 100.0   # nT added std, absorbs the attitude-coupled
                                 # part of the magnetometer error during turns
    r_gyro_floor: float = 1e-5   # rad/s
    r_mag_floor: float = 1.0     # nT
    r_accel_floor: float = 1e-3  # m/s^2
    r_air_floor: float = 1e-4
    # GNSS-aided estimator time constants / gains
    tau_wind: float = 20.0       # s
    tau_dp: float = 25.0         # s
    gnss_pos_gain: float = 0.25  # per 1 Hz fix
    # initial standard deviations (truth-seeded warm start)
    p0_att: float = math.radians(0.2)
    p0_omega: float = 0.01
    p0_egyr: float = 3e-5
    p0_emag: float = 30.0
    p0_bdev: float = 5.0
    p0_air: tuple = (0.5, 5e-3, 5e-3, 0.1, 5.0, 0.1, 1e-3, 1e-3)
    p0_f: float = 0.5
    p0_eacc: float = 0.01
    # residual error of the GNSS-era lumped-accelerometer calibration; the
    # warm start seeds e_acc to truth plus this draw (per axis), since the
    # denied-mode filter cannot observe it at all
    e_acc_cal_sigma: float = 0.005
    cold_start: bool = False
    cov_abort_count: int = 50

    def air_q_diag(self) -> np.ndarray:
        return np.array([self.q_vtas, self.q_alpha, self.q_beta, self.q_temp,
                         self.q_hp, self.q_vtas_dot, self.q_alpha_dot,
                         self.q_beta_dot])

    def att_q_diag(self) -> np.ndarray:
        return np.concatenate([
            np.full(3, self.q_att), np.full(3, self.q_omega),
            np.full(3, self.q_egyr), np.full(3, self.q_emag),
            np.full(3, self.q_bdev)])


@dataclass(frozen=True)
class MeasurementNoise:
    """Per-sample measurement noise the filters assume (from the presets).

    Triad values are already divided by sqrt(dt), i.e. they are the white
    noise standard deviation of one 100 Hz sample.
    """

    gyro: float
    accel: float
    mag: float
    tas: float
    aoa: float
    aos: float
    oat: float
    osp: float

    def air_r_diag(self, floor: float) -> np.ndarray:
        return np.array([max(self.tas, floor)**2, max(self.aoa, floor)**2,
                         max(self.aos, floor)**2, max(self.oat, floor)**2,
                         max(self.osp, 10 * floor)**2])

    def att_r_diag(self, tune: FilterTuning) -> np.ndarray:
        return np.concatenate([
            np.full(3, max(self.gyro, tune.r_gyro_floor)**2),
            np.full(3, max(self.mag, tune.r_mag_floor)**2 + tune.r_mag_extra**2),
            np.full(3, max(self.accel, tune.r_accel_floor)**2 + tune.r_f_turb**2)])


def atmo_params(c: AtmoConstants) -> np.ndarray:
    return np.array([c.t0, c.p0, c.beta_t, c.exponent])


def earth_params(e: geo.EarthConstants) -> np.ndarray:
    return np.array([e.a, e.e2, e.omega_e, e.re_sphere, e.gamma_equator,
                     e.somigliana_k, e.free_air_gradient])


def vtas_body(v_tas: float, alpha: float, beta: float) -> np.ndarray:
    """Airspeed vector in body axes from the wind-axes decomposition."""
    return K.vtas_body_k(v_tas, alpha, beta)


def vtas_body_jacobian(v_tas: float, alpha: float, beta: float) -> np.ndarray:
    """d(vtas_body)/d(v_tas, alpha, beta), 3x3."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    return np.array([
        [ca * cb, -v_tas * sa * cb, -v_tas * ca * sb],
        [sb, 0.0, v_tas * cb],
        [sa * cb, v_tas * ca * cb, -v_tas * sa * sb],
    ])


class AirDataFilter:
    """Zero-dynamics EKF over [v_tas, alpha, beta, T, Hp] plus kinematic
    derivative states for the first three channels.

    Every channel is observed directly except the pressure altitude, which is
    observed through the barometric pressure law. With no cross couplings the
    filter behaves as a low-pass: it removes system noise and passes sensor
    bias offsets straight into the estimates. Non-finite observations are
    rejected (the filter coasts on its prediction).
    """

    def __init__(self, tune: FilterTuning, noise: MeasurementNoise,
                 atmo_c: AtmoConstants = ISA):
        self.tune = tune
        self.atmo = atmo_c
        self._atm = atmo_params(atmo_c)
        self.r_diag = noise.air_r_diag(tune.r_air_floor)
        self.q_diag = tune.air_q_diag()
        self.x = np.zeros(8)
        self.p = np.diag(np.asarray(tune.p0_air)**2)

    def initialize(self, v_tas, alpha, beta, temp, hp):
        self.x = np.array([v_tas, alpha, beta, temp, hp, 0.0, 0.0, 0.0])
        self.p = np.diag(np.asarray(self.tune.p0_air)**2)

    def step(self, dt: float, obs: np.ndarray) -> None:
        K.air_step(self.x, self.p, np.asarray(obs, dtype=float), self.q_diag,
                   self.r_diag, self._atm, dt)

    @property
    def v_tas(self):
        return self.x[0]

    @property
    def alpha(self):
        return self.x[1]

    @property
    def beta(self):
        return self.x[2]

    @property
    def temp(self):
        return self.x[3]

    @property
    def hp(self):
        return self.x[4]

    @property
    def derivatives(self):
        """Smoothed (v_tas_dot, alpha_dot, beta_dot)."""
        return self.x[5:8]

    @property
    def dt_offset(self):
        return float(temperature_offset(self.x[3], self.x[4], self.atmo))


@dataclass
class PVector:
    """Support quantities handed to the attitude filter, all taken from the
    previous position-filter step."""

    g_model: np.ndarray
    b_model: np.ndarray
    v_ned: np.ndarray
    v_wind: np.ndarray
    w_ie: np.ndarray
    w_en: np.ndarray
    a_cor: np.ndarray
    e_acc: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.g_model, self.b_model, self.v_ned,
                               self.v_wind, self.w_ie, self.w_en, self.a_cor,
                               self.e_acc])


class CovarianceFailure(RuntimeError):
    """Raised when the attitude covariance cannot be kept positive
    semidefinite despite repeated recovery attempts."""


class AttitudeFilter:
    """Multiplicative error-state EKF over [attitude, body rate, lumped gyro
    error, lumped magnetometer error, magnetic model deviation].

    The error state is 15-dimensional with a local (body-side) attitude
    error; the quaternion itself stays unit-norm outside the covariance. The
    specific-force observation comes in three flavors:

    * ``baseline``: keeps the body-rate coupling with airspeed-plus-turbulence
      (ground velocity minus wind) and the NED-side transport terms;
    * ``zero_fb``: discards all body-frame velocity derivatives, which couples
      the body rate to the full ground velocity including wind;
    * ``zero_fn``: discards all NED-frame velocity derivatives, dropping the
      body-rate coupling entirely.
    """

    def __init__(self, tune: FilterTuning, noise: MeasurementNoise,
                 f_obs_mode: str = "baseline"):
        if f_obs_mode not in ATT_MODE_CODES:
            raise ValueError(f"unknown specific-force observation mode {f_obs_mode!r}")
        self.tune = tune
        self.mode = ATT_MODE_CODES[f_obs_mode]
        self.q = np.array([1.0, 0.0, 0.0, 0.0])
        self.lin = np.zeros(12)
        t = tune
        self.p = np.diag(np.concatenate([
            np.full(3, t.p0_att**2), np.full(3, t.p0_omega**2),
            np.full(3, t.p0_egyr**2), np.full(3, t.p0_emag**2),
            np.full(3, t.p0_bdev**2)]))
        self.q_diag = tune.att_q_diag()
        self.r_diag = noise.att_r_diag(tune)
        self.recovery_count = 0
        self._w_bar = np.zeros(3)

    def initialize(self, q, omega, e_gyr, e_mag, b_dev):
        self.q = np.asarray(q, dtype=float).copy()
        self.lin = np.concatenate([omega, e_gyr, e_mag, b_dev]).astype(float)

    @property
    def omega(self):
        return self.lin[0:3]

    @property
    def e_gyr(self):
        return self.lin[3:6]

    @property
    def e_mag(self):
        return self.lin[6:9]

    @property
    def b_dev(self):
        return self.lin[9:12]

    def step(self, dt: float, gyro: np.ndarray, mag: np.ndarray,
             accel: np.ndarray, p_n: PVector) -> None:
        self.recovery_count += K.att_step(
            self.q, self.lin, self.p, np.asarray(gyro, dtype=float),
            np.asarray(mag, dtype=float), np.asarray(accel, dtype=float),
            p_n.pack(), self.q_diag, self.r_diag, dt, self.mode,
            self.tune.r_f_maneuver, self._w_bar)
        if self.recovery_count > self.tune.cov_abort_count:
            raise CovarianceFailure("attitude covariance lost positive definiteness")


@dataclass
class GnssFix:
    lon: float
    lat: float
    alt: float
    v_ned: np.ndarray

    def pack(self) -> np.ndarray:
        return np.array([self.lon, self.lat, self.alt,
                         self.v_ned[0], self.v_ned[1], self.v_ned[2]])


class PositionFilter:
    """Lumped specific-force EKF plus the derived navigation estimates.

    The two-block EKF observes the raw accelerometer stream and cannot
    separate the specific force from the lumped accelerometer error; only
    their sum is well determined. The interesting work happens outside the
    EKF: GNSS-aided wind and pressure-offset estimation while fixes last,
    frozen values afterwards, velocity from airspeed plus wind, altitude
    through the atmosphere ladder, and horizontal position by integrating the
    velocity estimate.
    """

    def __init__(self, tune: FilterTuning, noise: MeasurementNoise,
                 field_cfg: FieldConfig, earth: geo.EarthConstants = geo.WGS84,
                 atmo_c: AtmoConstants = ISA):
        self.tune = tune
        self.earth = earth
        self.atmo = atmo_c
        self._atm = atmo_params(atmo_c)
        self._earth = earth_params(earth)
        self.b_model = np.asarray(field_cfg.b_model_ned, dtype=float)
        self.x = np.zeros(6)                       # [f_ibb, e_acc]
        self.p = np.diag([tune.p0_f**2] * 3 + [tune.p0_eacc**2] * 3)
        r_f = max(noise.accel, tune.r_accel_floor)**2
        self.pars = np.array([tune.q_f, tune.q_eacc, r_f,
                              dt_alpha(tune.tau_wind), dt_alpha(tune.tau_dp),
                              tune.gnss_pos_gain])
        # [lon, lat, alt, v_ned(3), v_wind(3), v_tas_ned(3), dp_off]
        self.nav = np.zeros(13)
        self.last_dt_offset = 0.0

    def initialize(self, lon, lat, alt, v_ned, v_wind, dp_off, f_ibb, e_acc):
        self.nav[0:3] = (lon, lat, alt)
        self.nav[3:6] = v_ned
        self.nav[6:9] = v_wind
        self.nav[9:12] = 0.0
        self.nav[12] = dp_off
        self.x[0:3] = f_ibb
        self.x[3:6] = e_acc

    @property
    def lon(self):
        return self.nav[0]

    @property
    def lat(self):
        return self.nav[1]

    @property
    def alt(self):
        return self.nav[2]

    @property
    def v_ned(self):
        return self.nav[3:6]

    @v_ned.setter
    def v_ned(self, value):
        self.nav[3:6] = value

    @property
    def v_wind(self):
        return self.nav[6:9]

    @v_wind.setter
    def v_wind(self, value):
        self.nav[6:9] = value

    @property
    def v_tas_ned(self):
        return self.nav[9:12]

    @property
    def dp_off(self):
        return self.nav[12]

    @property
    def f_est(self):
        return self.x[0:3]

    @property
    def e_acc(self):
        return self.x[3:6]

    def set_alt(self, value: float):
        self.nav[2] = value

    def assemble_support(self) -> PVector:
        """Support vector for the attitude filter from this filter's state."""
        sup = np.empty(24)
        K.fill_support(sup, self.nav, self.x[3:6], self.b_model, self._earth)
        return PVector(g_model=sup[0:3], b_model=sup[3:6], v_ned=sup[6:9],
                       v_wind=sup[9:12], w_ie=sup[12:15], w_en=sup[15:18],
                       a_cor=sup[18:21], e_acc=sup[21:24])

    def update_core(self, dt: float, accel: np.ndarray, air: AirDataFilter,
                    q_nb: np.ndarray, gnss: GnssFix | None) -> None:
        """One tick of everything except the position integration. ``gnss``
        carries a fix only on 1 Hz ticks while signals last; the wind and
        pressure-offset estimators update on fixes and stay frozen otherwise."""
        fix = gnss.pack() if gnss is not None else np.zeros(6)
        self.last_dt_offset = K.pos_core(
            self.nav, self.x, self.p, np.asarray(accel, dtype=float), air.x,
            np.asarray(q_nb, dtype=float), gnss is not None, fix, self._atm,
            self._earth, self.pars, dt)

    def integrate_position(self, dt: float) -> None:
        """Advance longitude/latitude with the current velocity estimate."""
        geo.check_pole(self.nav[1])
        K.integrate_position_k(self.nav, self._earth, dt)


def dt_alpha(tau: float, dt: float = 1.0) -> float:
    """First-order low-pass blend factor for updates arriving every dt."""
    return 1.0 - math.exp(-dt / tau)
