"""Quaternion algebra, WGS84 geodesy, Earth rotation, and rigid-body kinematics.

Conventions used throughout the package:

* Quaternions are ``[w, x, y, z]`` ndarrays (Hamilton convention). ``q_nb``
  rotates body-frame vectors into NED: ``v_ned = q ⊗ v_body ⊗ q*``.
* NED is North-East-Down, body is Forward-Right-Down.
* Euler angles are yaw/pitch/roll (ZYX), radians, with pitch in [-pi/2, pi/2].
* All angles are radians, all lengths metres, unless stated otherwise.

Most functions broadcast over leading axes so whole trajectories can be
processed in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Latitudes closer to a pole than this are rejected (tan/cos singularities).
POLE_GUARD_RAD = math.radians(89.9999)


@dataclass(frozen=True)
class EarthConstants:
    """Earth model constants.

    ``re_sphere`` is the spherical radius used in the geopotential to
    geometric altitude conversion; it is a configurable constant distinct
    from the WGS84 semi-major axis.
    """

    omega_e: float = 7.292115e-5      # rad/s, Earth rotation rate
    a: float = 6378137.0              # m, WGS84 semi-major axis
    e2: float = 6.69437999014e-3      # first eccentricity squared
    re_sphere: float = 6356766.0      # m, spherical radius for H <-> h
    gamma_equator: float = 9.7803253359   # m/s^2, normal gravity at equator
    somigliana_k: float = 1.931852652458e-3
    free_air_gradient: float = 3.086e-6   # 1/s^2, linear gravity decay with h

    def __post_init__(self):
        if min(self.omega_e, self.a, self.re_sphere) <= 0.0 or not 0.0 < self.e2 < 1.0:
            raise ValueError("invalid Earth constants")


WGS84 = EarthConstants()


@dataclass(frozen=True)
class GeodeticPosition:
    """Geodetic coordinates: longitude/latitude in rad, geometric altitude in m."""

    lon: float
    lat: float
    alt: float

    def __post_init__(self):
        object.__setattr__(self, "lon", wrap_angle(self.lon))
        if abs(self.lat) > math.pi / 2.0:
            raise ValueError(f"latitude {self.lat} out of range")


def wrap_angle(x):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    w = -((-np.asarray(x) + math.pi) % TWO_PI - math.pi)
    return w if isinstance(w, np.ndarray) and w.ndim else float(w)


def check_pole(lat: float) -> None:
    if abs(lat) > POLE_GUARD_RAD:
        raise ValueError(f"latitude {math.degrees(lat):.5f} deg is inside the pole guard")


# ---------------------------------------------------------------------------
# Quaternion algebra
# ---------------------------------------------------------------------------

def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a ⊗ b, renormalized. Broadcasts over leading axes."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    out = np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )
    return quat_normalize(out)


def quat_conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def quat_canonical(q: np.ndarray) -> np.ndarray:
    """Resolve the double cover: flip sign so w >= 0."""
    q = np.asarray(q, dtype=float)
    return np.where(q[..., :1] < 0.0, -q, q)


def quat_from_rotvec(r: np.ndarray) -> np.ndarray:
    """Exponential map: rotation vector (rad) to unit quaternion."""
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r, axis=-1, keepdims=True)
    half = 0.5 * angle
    small = angle < 1e-12
    # sin(x/2)/x, with series fallback at zero
    k = np.where(small, 0.5 - angle**2 / 48.0, np.sin(half) / np.where(small, 1.0, angle))
    return np.concatenate([np.cos(half), k * r], axis=-1)


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Logarithmic map to a rotation vector with norm in [0, pi]."""
    q = quat_canonical(quat_normalize(q))
    w = q[..., :1]
    v = q[..., 1:]
    vn = np.linalg.norm(v, axis=-1, keepdims=True)
    angle = 2.0 * np.arctan2(vn, w)
    small = vn < 1e-12
    scale = np.where(small, 2.0 / np.clip(w, 1e-12, None), angle / np.where(small, 1.0, vn))
    return scale * v


def rotate_to_ned(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """q ⊗ v ⊗ q*: body vector to NED (for q = q_nb)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u = q[..., 1:]
    w = q[..., :1]
    t = np.cross(u, v) + w * v
    return v + 2.0 * np.cross(u, t)


def rotate_to_body(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """q* ⊗ v ⊗ q: NED vector to body (for q = q_nb)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u = -q[..., 1:]
    w = q[..., :1]
    t = np.cross(u, v) + w * v
    return v + 2.0 * np.cross(u, t)


def dcm_from_quat(q: np.ndarray) -> np.ndarray:
    """Rotation matrix R with v_ned = R @ v_body (for q = q_nb)."""
    w, x, y, z = quat_normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_euler(yaw, pitch, roll) -> np.ndarray:
    """ZYX Euler angles (rad) to q_nb. Broadcasts over arrays."""
    cy, sy = np.cos(0.5 * np.asarray(yaw)), np.sin(0.5 * np.asarray(yaw))
    cp, sp = np.cos(0.5 * np.asarray(pitch)), np.sin(0.5 * np.asarray(pitch))
    cr, sr = np.cos(0.5 * np.asarray(roll)), np.sin(0.5 * np.asarray(roll))
    return np.stack(
        [
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        ],
        axis=-1,
    )


def quat_to_euler(q: np.ndarray):
    """q_nb to (yaw, pitch, roll). Not valid at |pitch| = pi/2."""
    q = quat_normalize(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    yaw = np.arctan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    pitch = np.arcsin(np.clip(2.0 * (w * y - z * x), -1.0, 1.0))
    roll = np.arctan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    return yaw, pitch, roll


def rotation_minus(q_est: np.ndarray, q_true: np.ndarray) -> np.ndarray:
    """Attitude difference as a rotation vector (local error convention).

    Returns the log-map of ``q_true^-1 ⊗ q_est``; its norm is the scalar
    attitude error in radians.
    """
    return quat_to_rotvec(quat_mul(quat_conj(q_true), q_est))


def quat_derivative(q: np.ndarray, w_nbb: np.ndarray) -> np.ndarray:
    """Quaternion rate: 0.5 * q ⊗ (0, w_nbb). Not normalized (it is a rate)."""
    q = np.asarray(q, dtype=float)
    w = np.asarray(w_nbb, dtype=float)
    qw = np.concatenate([np.zeros_like(q[..., :1]), np.broadcast_to(w, q[..., 1:].shape)], axis=-1)
    aw, ax, ay, az = np.moveaxis(q, -1, 0)
    bw, bx, by, bz = np.moveaxis(qw, -1, 0)
    return 0.5 * np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def integrate_quat(q: np.ndarray, w_nbb: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of the quaternion kinematic equation, then renormalize.

    The body rate is held constant over the step, which makes this the
    standard workhorse for 100 Hz attitude propagation.
    """
    k1 = quat_derivative(q, w_nbb)
    k2 = quat_derivative(q + 0.5 * dt * k1, w_nbb)
    k3 = quat_derivative(q + 0.5 * dt * k2, w_nbb)
    k4 = quat_derivative(q + dt * k3, w_nbb)
    return quat_normalize(q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


# ---------------------------------------------------------------------------
# Geodesy and Earth-rotation terms
# ---------------------------------------------------------------------------

def radii(lat: float, earth: EarthConstants = WGS84):
    """Radii of curvature (prime vertical N, meridian M) at a latitude."""
    s2 = math.sin(lat) ** 2
    d = 1.0 - earth.e2 * s2
    n = earth.a / math.sqrt(d)
    m = earth.a * (1.0 - earth.e2) / d**1.5
    return n, m


def earth_rate_ned(lat: float, earth: EarthConstants = WGS84) -> np.ndarray:
    """Earth rotation rate resolved in NED."""
    return np.array([earth.omega_e * math.cos(lat), 0.0, -earth.omega_e * math.sin(lat)])


def transport_rate_ned(lat: float, alt: float, v_ned: np.ndarray,
                       earth: EarthConstants = WGS84) -> np.ndarray:
    """Angular rate of the NED frame due to motion over the curved Earth."""
    check_pole(lat)
    n, m = radii(lat, earth)
    vn, ve = v_ned[0], v_ned[1]
    return np.array([ve / (n + alt), -vn / (m + alt), -ve * math.tan(lat) / (n + alt)])


def coriolis_ned(lat: float, v_ned: np.ndarray, earth: EarthConstants = WGS84) -> np.ndarray:
    """Coriolis acceleration 2 * w_ie x v resolved in NED."""
    sl, cl = math.sin(lat), math.cos(lat)
    we = earth.omega_e
    v1, v2, v3 = v_ned[0], v_ned[1], v_ned[2]
    return np.array([2.0 * we * v2 * sl, 2.0 * we * (-v1 * sl - v3 * cl), 2.0 * we * v2 * cl])


def transport_accel_ned(lat: float, alt: float, earth: EarthConstants = WGS84) -> np.ndarray:
    """Centripetal acceleration of the Earth-fixed position, in NED."""
    n, _ = radii(lat, earth)
    sl, cl = math.sin(lat), math.cos(lat)
    r = (n + alt) * earth.omega_e**2
    return np.array([r * sl * cl, 0.0, r * cl * cl])


def gravity_model_ned(pos: GeodeticPosition, earth: EarthConstants = WGS84) -> np.ndarray:
    """Onboard gravity model, resolved in NED (points along +down).

    Somigliana latitude dependence with a linear free-air altitude decay:
    ``g(lat, h) = g_e * (1 + k sin^2 lat) / sqrt(1 - e^2 sin^2 lat) - c * h``.
    """
    s2 = math.sin(pos.lat) ** 2
    g = earth.gamma_equator * (1.0 + earth.somigliana_k * s2) / math.sqrt(1.0 - earth.e2 * s2)
    return np.array([0.0, 0.0, g - earth.free_air_gradient * pos.alt])


def velocity_derivative_ned(f_ibb: np.ndarray, q_nb: np.ndarray, v_ned: np.ndarray,
                            pos: GeodeticPosition, g_ned: np.ndarray | None = None,
                            earth: EarthConstants = WGS84) -> np.ndarray:
    """Ground-velocity time derivative in NED from body specific force.

    ``v_dot = q f q* - w_en x v + g_c - a_cor``. Pass ``g_ned`` to use a
    specific gravity vector (e.g. the real field); defaults to the model.
    """
    if g_ned is None:
        g_ned = gravity_model_ned(pos, earth)
    w_en = transport_rate_ned(pos.lat, pos.alt, v_ned, earth)
    a_cor = coriolis_ned(pos.lat, v_ned, earth)
    return rotate_to_ned(q_nb, f_ibb) - np.cross(w_en, v_ned) + g_ned - a_cor


def specific_force_from_kinematics(vdot_ned: np.ndarray, v_ned: np.ndarray,
                                   pos: GeodeticPosition, q_nb: np.ndarray,
                                   g_ned: np.ndarray | None = None,
                                   earth: EarthConstants = WGS84) -> np.ndarray:
    """Body specific force from NED kinematics (exact inverse of
    :func:`velocity_derivative_ned`)."""
    if g_ned is None:
        g_ned = gravity_model_ned(pos, earth)
    w_en = transport_rate_ned(pos.lat, pos.alt, v_ned, earth)
    a_cor = coriolis_ned(pos.lat, v_ned, earth)
    f_ned = np.cross(w_en, v_ned) + vdot_ned + a_cor - g_ned
    return rotate_to_body(q_nb, f_ned)


def specific_force_body_path(vdot_body: np.ndarray, v_body: np.ndarray,
                             w_nbb: np.ndarray, q_nb: np.ndarray, v_ned: np.ndarray,
                             pos: GeodeticPosition, g_ned: np.ndarray | None = None,
                             earth: EarthConstants = WGS84) -> np.ndarray:
    """Body specific force evaluated entirely from body-frame kinematics.

    ``f = w_eb x v_b + v_b_dot + q*(a_cor - g_c)q`` with
    ``w_eb = w_nb + q* w_en q``. Algebraically identical to
    :func:`specific_force_from_kinematics` for consistent inputs; kept as an
    independent evaluation path for cross-checking.
    """
    if g_ned is None:
        g_ned = gravity_model_ned(pos, earth)
    w_en = transport_rate_ned(pos.lat, pos.alt, v_ned, earth)
    a_cor = coriolis_ned(pos.lat, v_ned, earth)
    w_eb = np.asarray(w_nbb, dtype=float) + rotate_to_body(q_nb, w_en)
    return np.cross(w_eb, v_body) + vdot_body + rotate_to_body(q_nb, a_cor - g_ned)


def geodetic_rates(v_ned: np.ndarray, pos: GeodeticPosition,
                   earth: EarthConstants = WGS84):
    """Time derivatives (lon_dot, lat_dot, alt_dot) of geodetic coordinates."""
    check_pole(pos.lat)
    n, m = radii(pos.lat, earth)
    lat_dot = v_ned[0] / (m + pos.alt)
    lon_dot = v_ned[1] / ((n + pos.alt) * math.cos(pos.lat))
    return lon_dot, lat_dot, -v_ned[2]
