"""Time-varying flight environment: wind, turbulence, offset schedules, fields.

Wind and atmosphere offsets follow piecewise-linear schedules (constant, one
linear transition, constant). Turbulence is a per-axis first-order
Gauss-Markov velocity process in the body frame. Gravity and magnetic field
deviations are run-constant draws added to the onboard models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .atmo import AtmoOffsets
from .geo import GeodeticPosition


def _ramp(t, t_start: float, t_end: float):
    """Interpolation fraction in [0, 1]; a step at t_start when the window is empty."""
    t = np.asarray(t, dtype=float)
    if t_end <= t_start:
        return (t >= t_start).astype(float)
    return np.clip((t - t_start) / (t_end - t_start), 0.0, 1.0)


@dataclass(frozen=True)
class WindSchedule:
    """Horizontal wind: (speed, bearing) pairs with one linear transition."""

    v_ini: float = 0.0       # m/s
    v_end: float = 0.0
    chi_ini: float = 0.0     # rad, bearing the wind blows toward
    chi_end: float = 0.0
    t_start: float = 0.0     # s
    t_end: float = 0.0

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError("wind window must have t_start <= t_end")
        if min(self.v_ini, self.v_end) < 0.0:
            raise ValueError("wind speeds must be >= 0")


def wind_ned(t, sched: WindSchedule) -> np.ndarray:
    """Wind velocity in NED at time(s) t; zero vertical component.

    Speed and bearing are interpolated linearly and independently inside the
    transition window, matching the scheduled endpoints outside it.
    """
    s = _ramp(t, sched.t_start, sched.t_end)
    v = sched.v_ini + s * (sched.v_end - sched.v_ini)
    chi = sched.chi_ini + s * (sched.chi_end - sched.chi_ini)
    return np.stack([v * np.cos(chi), v * np.sin(chi), np.zeros_like(v)], axis=-1)


@dataclass(frozen=True)
class OffsetSchedule:
    """Independent piecewise-linear schedules for the two atmosphere offsets."""

    dt_ini: float = 0.0      # K
    dt_end: float = 0.0
    dt_window: tuple = (0.0, 0.0)
    dp_ini: float = 0.0      # Pa
    dp_end: float = 0.0
    dp_window: tuple = (0.0, 0.0)

    def __post_init__(self):
        for w in (self.dt_window, self.dp_window):
            if w[0] > w[1]:
                raise ValueError("offset window must have t_start <= t_end")


def offsets_at(t: float, sched: OffsetSchedule) -> AtmoOffsets:
    """Atmosphere offsets at time t."""
    st = _ramp(t, *sched.dt_window)
    sp = _ramp(t, *sched.dp_window)
    return AtmoOffsets(
        dt=sched.dt_ini + st * (sched.dt_end - sched.dt_ini),
        dp=sched.dp_ini + sp * (sched.dp_end - sched.dp_ini),
    )


def offsets_series(t: np.ndarray, sched: OffsetSchedule):
    """Vectorized (dt, dp) arrays over a time grid."""
    st = _ramp(t, *sched.dt_window)
    sp = _ramp(t, *sched.dp_window)
    return (sched.dt_ini + st * (sched.dt_end - sched.dt_ini),
            sched.dp_ini + sp * (sched.dp_end - sched.dp_ini))


@dataclass(frozen=True)
class TurbulenceParams:
    """First-order Gauss-Markov turbulence, per body axis."""

    sigma: tuple = (1.5, 1.5, 0.75)   # m/s, stationary std per body axis
    tau: float = 2.0                  # s, correlation time
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0.0 or min(self.sigma) < 0.0:
            raise ValueError("turbulence needs tau > 0 and sigma >= 0")


class TurbulenceGenerator:
    """Sequential Gauss-Markov turbulence state machine (one owner per run).

    Update rule per axis: ``x <- x * exp(-dt/tau) + eta * sigma * sqrt(1 -
    exp(-2 dt/tau))``, started from the stationary distribution, so the
    process has stationary variance sigma^2 and zero mean.
    """

    def __init__(self, params: TurbulenceParams):
        self.params = params
        self.rng = np.random.default_rng(params.seed)
        self.sigma = np.asarray(params.sigma, dtype=float)
        self.state = self.sigma * self.rng.standard_normal(3)

    def step(self, dt: float) -> np.ndarray:
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        a = math.exp(-dt / self.params.tau)
        self.state = a * self.state + self.sigma * math.sqrt(1.0 - a * a) * self.rng.standard_normal(3)
        return self.state.copy()

    def series(self, n: int, dt: float) -> np.ndarray:
        """Generate n consecutive samples, shape (n, 3); equivalent to n step() calls."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        a = math.exp(-dt / self.params.tau)
        w = self.sigma * math.sqrt(1.0 - a * a) * self.rng.standard_normal((n, 3))
        out = lfilter([1.0], [1.0, -a], w, axis=0, zi=(a * self.state)[None, :])[0]
        self.state = out[-1].copy()
        return out


def gauss_markov_series(n: int, dt: float, sigma: np.ndarray, tau: float,
                        rng: np.random.Generator, x0: np.ndarray | None = None) -> np.ndarray:
    """Stationary first-order Gauss-Markov sample paths, shape (n, len(sigma))."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    a = math.exp(-dt / tau)
    if x0 is None:
        x0 = sigma * rng.standard_normal(sigma.shape)
    w = sigma * math.sqrt(1.0 - a * a) * rng.standard_normal((n, sigma.size))
    return lfilter([1.0], [1.0, -a], w, axis=0, zi=(a * np.asarray(x0))[None, :])[0]


@dataclass(frozen=True)
class FieldDeviations:
    """Run-constant differences between the real and onboard model fields."""

    b_dev_ned: tuple = (0.0, 0.0, 0.0)    # nT
    g_dev_ned: tuple = (0.0, 0.0, 0.0)    # m/s^2


@dataclass(frozen=True)
class FieldConfig:
    """Onboard field models and the caps for the run-constant deviations."""

    b_model_ned: tuple = (25000.0, -500.0, 36000.0)   # nT, region constant
    b_dev_cap: float = 200.0                          # nT per axis
    g_dev_cap_horizontal: float = 1.0e-4              # m/s^2 per axis
    g_dev_cap_vertical: float = 1.0e-3                # m/s^2

    def draw_deviations(self, rng: np.random.Generator) -> FieldDeviations:
        b = self.b_dev_cap * rng.uniform(-1.0, 1.0, 3)
        g = np.array([self.g_dev_cap_horizontal, self.g_dev_cap_horizontal,
                      self.g_dev_cap_vertical]) * rng.uniform(-1.0, 1.0, 3)
        return FieldDeviations(b_dev_ned=tuple(b), g_dev_ned=tuple(g))


def magnetic_field_model(pos: GeodeticPosition, cfg: FieldConfig) -> np.ndarray:
    """Onboard magnetic field model: a constant NED vector for the region."""
    return np.asarray(cfg.b_model_ned, dtype=float)


def magnetic_field_real(pos: GeodeticPosition, cfg: FieldConfig,
                        dev: FieldDeviations) -> np.ndarray:
    """Real magnetic field: model plus the run-constant deviation."""
    return magnetic_field_model(pos, cfg) + np.asarray(dev.b_dev_ned, dtype=float)
