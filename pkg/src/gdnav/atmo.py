"""Standard and offset atmosphere: pressure altitude, offsets, altitude ladders.

Single-gradient (tropospheric) model. An "offset" atmosphere shifts the mean
sea level temperature and pressure by ``(dT, dp)`` while keeping the standard
temperature gradient; it collapses to the standard atmosphere at zero offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AtmoConstants:
    """Standard-atmosphere constants (tropospheric gradient layer)."""

    t0: float = 288.15        # K, mean sea level temperature
    p0: float = 101325.0      # Pa, mean sea level pressure
    beta_t: float = -6.5e-3   # K/m, temperature gradient
    r_air: float = 287.05287  # J/(kg K)
    g0: float = 9.80665       # m/s^2

    def __post_init__(self):
        if min(self.t0, self.p0, self.r_air, self.g0) <= 0.0 or self.beta_t >= 0.0:
            raise ValueError("invalid atmosphere constants")

    @property
    def exponent(self) -> float:
        """Pressure-law exponent -g0 / (R * beta_t); positive for beta_t < 0."""
        return -self.g0 / (self.r_air * self.beta_t)


ISA = AtmoConstants()


@dataclass(frozen=True)
class AtmoOffsets:
    """Mean-sea-level temperature and pressure offsets of the actual atmosphere."""

    dt: float = 0.0   # K
    dp: float = 0.0   # Pa

    def __post_init__(self):
        if not (math.isfinite(self.dt) and math.isfinite(self.dp)):
            raise ValueError("offsets must be finite")
        if ISA.t0 + self.dt <= 0.0:
            raise ValueError("temperature offset below absolute zero")


def pressure_from_hp(hp, c: AtmoConstants = ISA):
    """Static pressure (Pa) at pressure altitude hp (m). Strictly decreasing."""
    u = 1.0 + c.beta_t * np.asarray(hp, dtype=float) / c.t0
    if np.any(u <= 0.0):
        raise ValueError("pressure altitude above the gradient-layer ceiling")
    return c.p0 * u**c.exponent


def hp_from_pressure(p, c: AtmoConstants = ISA):
    """Pressure altitude (m) for static pressure p (Pa); inverse of
    :func:`pressure_from_hp`."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("pressure must be positive")
    return (c.t0 / c.beta_t) * ((p / c.p0) ** (1.0 / c.exponent) - 1.0)


def temperature_offset(t, hp, c: AtmoConstants = ISA):
    """Temperature offset dT = T - T0 - beta_t * Hp (K)."""
    return np.asarray(t, dtype=float) - c.t0 - c.beta_t * np.asarray(hp, dtype=float)


def geopotential_from_hp(hp, off: AtmoOffsets, c: AtmoConstants = ISA):
    """Geopotential altitude (m) at which the offset atmosphere matches the
    standard-atmosphere pressure at ``hp``.

    Closed form of the pressure-matching condition
    ``p_offset(H) = pressure_from_hp(hp)`` with the offset column having MSL
    temperature ``t0 + dt``, MSL pressure ``p0 + dp`` and gradient ``beta_t``.
    Identity at zero offsets; strictly increasing in ``hp``.
    """
    p = pressure_from_hp(hp, c)
    ratio = p / (c.p0 + off.dp)
    if np.any(ratio <= 0.0):
        raise ValueError("offset pressure out of range")
    return ((c.t0 + off.dt) / c.beta_t) * (ratio ** (1.0 / c.exponent) - 1.0)


def hp_from_geopotential(h_gp, off: AtmoOffsets, c: AtmoConstants = ISA):
    """Inverse of :func:`geopotential_from_hp` (solve for the pressure altitude)."""
    u = 1.0 + c.beta_t * np.asarray(h_gp, dtype=float) / (c.t0 + off.dt)
    if np.any(u <= 0.0):
        raise ValueError("geopotential altitude above the offset-layer ceiling")
    p = (c.p0 + off.dp) * u**c.exponent
    return hp_from_pressure(p, c)


def dp_from_geopotential(hp, h_gp, dt_off, c: AtmoConstants = ISA):
    """Pressure offset that maps pressure altitude ``hp`` to geopotential
    altitude ``h_gp`` given a temperature offset: the algebraic inverse of
    :func:`geopotential_from_hp` in ``dp``."""
    p = pressure_from_hp(hp, c)
    u = 1.0 + c.beta_t * np.asarray(h_gp, dtype=float) / (c.t0 + dt_off)
    if np.any(u <= 0.0):
        raise ValueError("geopotential altitude out of range")
    return p / u**c.exponent - c.p0


def temperature_at(h_gp, off: AtmoOffsets, c: AtmoConstants = ISA):
    """Air temperature (K) at geopotential altitude in the offset atmosphere."""
    return c.t0 + off.dt + c.beta_t * np.asarray(h_gp, dtype=float)


def pressure_at(h_gp, off: AtmoOffsets, c: AtmoConstants = ISA):
    """Static pressure (Pa) at geopotential altitude in the offset atmosphere."""
    u = 1.0 + c.beta_t * np.asarray(h_gp, dtype=float) / (c.t0 + off.dt)
    if np.any(u <= 0.0):
        raise ValueError("altitude above the offset-layer ceiling")
    return (c.p0 + off.dp) * u**c.exponent


def geometric_from_geopotential(h_gp, re: float):
    """Geometric altitude h = re * H / (re - H) for the spherical Earth model."""
    h_gp = np.asarray(h_gp, dtype=float)
    if np.any(h_gp >= re):
        raise ValueError("geopotential altitude must be below the Earth radius")
    return re * h_gp / (re - h_gp)


def geopotential_from_geometric(h, re: float):
    """Geopotential altitude H = re * h / (re + h); exact algebraic inverse."""
    return re * np.asarray(h, dtype=float) / (re + np.asarray(h, dtype=float))
