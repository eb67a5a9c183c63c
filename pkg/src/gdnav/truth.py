"""Kinematic truth-trajectory generator.

Flies scenario missions (straight legs, bank-angle turns, path-angle climbs,
airspeed setpoint changes) through the wind/turbulence/offset environment and
emits self-consistent state streams at the configured rate.

Two invariants hold by construction:

* ground velocity decomposes exactly into airspeed + wind + turbulence:
  ``v_ned = R(q) v_tas_body(v_tas, alpha, beta) + wind_ned + R(q) turb_body``;
* the body specific force is recovered from the NED kinematics with the
  ground-velocity derivative taken by central differences, so integrating
  ideal accelerometer readings reproduces the velocity stream.

The aircraft dynamics/control stack is replaced by command shaping: bank,
path-angle and airspeed commands pass through first-order response filters,
and the altitude loop holds pressure altitude, so atmosphere offset changes
move the geometric altitude the way a real altitude-hold autopilot would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geo
from .atmo import ISA, AtmoConstants
from .env import (FieldConfig, FieldDeviations, OffsetSchedule, TurbulenceGenerator,
                  TurbulenceParams, WindSchedule, offsets_series, wind_ned)

DEG = math.pi / 180.0


@dataclass(frozen=True)
class TruthConfig:
    """Command shaping, trim and turbulence-response constants."""

    dt: float = 0.01
    bank_turn: float = 10.0 * DEG       # rad, turn bank angle
    gamma_climb: float = 2.0 * DEG      # rad, climb/descent path angle
    tau_cmd: float = 1.0                # s, bank/path command smoothing
    tau_tas: float = 5.0                # s, airspeed setpoint tracking
    accel_max: float = 0.6              # m/s^2, airspeed change rate limit
    alt_hold_tc: float = 15.0           # s, pressure-altitude capture constant
    rolloff_time: float = 2.5           # s, bearing band for turn roll-out
    alpha_trim0: float = 0.5 * DEG      # rad, trim AOA intercept
    alpha_trim_v2: float = 2.0 * DEG    # rad, trim AOA at the reference speed
    v_ref: float = 30.0                 # m/s
    turb_response: float = 0.9          # gust fraction seen by the air vanes
    resp_pitch: float = 0.8             # attitude response gains to gusts
    resp_roll: float = 0.8
    resp_yaw: float = 0.1
    tau_resp: float = 0.5               # s, attitude gust-response lag
    pitch_abort: float = 60.0 * DEG     # rad, envelope guard


@dataclass(frozen=True)
class ScenarioRanges:
    """Stochastic draw ranges. Every (lo, hi) pair is inclusive; a degenerate
    (x, x) pair pins the value, which is how tests force deterministic
    scenario ingredients."""

    v_tas_ini: tuple = (24.0, 32.0)        # m/s
    v_tas_delta: tuple = (2.0, 5.0)        # m/s, magnitude (sign drawn)
    hp_ini: tuple = (1200.0, 1800.0)       # m
    hp_delta: tuple = (150.0, 300.0)       # m, magnitude (sign drawn)
    turn_delta_deg: tuple = (40.0, 150.0)  # deg, magnitude (sign drawn)
    turn_delta_deg2: tuple = (30.0, 120.0) # deg, scenario #2 per-turn change
    n_turns2: int = 8
    min_turn_gap2: float = 30.0            # s
    turn_tail_margin2: float = 120.0       # s kept free of new turns at the end
    wind_speed_ini: tuple = (2.0, 9.0)     # m/s
    wind_speed_end: tuple = (2.0, 9.0)
    wind_chi_ini: tuple = (-math.pi, math.pi)
    wind_chi_end: tuple = (-math.pi, math.pi)
    wind_start_frac: tuple = (0.2, 0.45)   # fraction of t_end
    wind_duration_frac: tuple = (0.15, 0.3)
    dt_off_ini: tuple = (-8.0, 8.0)        # K
    dt_off_delta: tuple = (-4.0, 4.0)      # K, signed
    dp_off_ini: tuple = (-800.0, 800.0)    # Pa
    dp_off_delta: tuple = (300.0, 900.0)   # Pa, magnitude
    dp_delta_sign: str = "random"          # "random" | "+" | "-"
    offs_start_frac: tuple = (0.2, 0.5)
    offs_duration_frac: tuple = (0.1, 0.3)
    turb_sigma_h: tuple = (0.8, 1.4)       # m/s
    turb_vertical_ratio: float = 0.5
    turb_tau: float = 2.0                  # s
    lat0_deg: tuple = (39.5, 40.5)
    lon0_deg: tuple = (-4.5, -3.5)

    def __post_init__(self):
        for name in ("v_tas_ini", "v_tas_delta", "hp_ini", "hp_delta",
                     "turn_delta_deg", "turn_delta_deg2", "wind_speed_ini",
                     "wind_speed_end", "wind_chi_ini", "wind_chi_end",
                     "wind_start_frac", "wind_duration_frac", "dt_off_ini",
                     "dt_off_delta", "dp_off_ini", "dp_off_delta",
                     "offs_start_frac", "offs_duration_frac", "turb_sigma_h",
                     "lat0_deg", "lon0_deg"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"scenario range {name} is inverted: {lo} > {hi}")
        if self.dp_delta_sign not in ("random", "+", "-"):
            raise ValueError("dp_delta_sign must be 'random', '+' or '-'")


@dataclass(frozen=True)
class ScenarioDraw:
    """All stochastic ingredients of one simulation run."""

    kind: int
    t_end: float
    t_gnss: float
    lon0: float
    lat0: float
    v_tas_ini: float
    hp_ini: float
    chi_ini: float
    turn_events: tuple      # ((t, chi_target), ...)
    climb_events: tuple     # ((t, hp_target), ...)
    accel_events: tuple     # ((t, v_tas_target), ...)
    wind: WindSchedule
    offsets: OffsetSchedule
    turb: TurbulenceParams
    deviations: FieldDeviations
    sensor_seed: int

    @property
    def final_chi(self) -> float:
        return self.turn_events[-1][1] if self.turn_events else self.chi_ini

    def maneuver_windows(self, cfg: TruthConfig):
        """Predicted (t_start, t_end, kind) for each scenario #1 maneuver."""
        out = []
        chi_prev = self.chi_ini
        for t, chi in self.turn_events:
            out.append((t, t + _turn_duration(chi - chi_prev, self.v_tas_ini, cfg), "turn"))
            chi_prev = chi
        hp_prev = self.hp_ini
        for t, hp in self.climb_events:
            out.append((t, t + _climb_duration(hp - hp_prev, self.v_tas_ini, cfg), "climb"))
            hp_prev = hp
        v_prev = self.v_tas_ini
        for t, v in self.accel_events:
            out.append((t, t + _accel_duration(v - v_prev, cfg), "accel"))
            v_prev = v
        return sorted(out)


def _turn_duration(dchi: float, v: float, cfg: TruthConfig) -> float:
    rate = ISA.g0 * math.tan(cfg.bank_turn) / v
    return abs(geo.wrap_angle(dchi)) / rate + 8.0 * cfg.tau_cmd

def _climb_duration(dhp: float, v: float, cfg: TruthConfig) -> float:
    return abs(dhp) / (v * math.sin(cfg.gamma_climb)) + 6.0 * cfg.alt_hold_tc

def _accel_duration(dv: float, cfg: TruthConfig) -> float:
    return abs(dv) / cfg.accel_max + 8.0 * cfg.tau_tas


def _uniform(rng, lohi):
    lo, hi = lohi
    return lo if lo == hi else rng.uniform(lo, hi)


def draw_scenario(kind: int, seed, ranges: ScenarioRanges = ScenarioRanges(),
                  cfg: TruthConfig = TruthConfig(), t_end: float | None = None,
                  t_gnss: float = 100.0,
                  field_cfg: FieldConfig = FieldConfig()) -> ScenarioDraw:
    """Draw one scenario realization.

    Scenario #1: one turn, one climb and one airspeed change placed in
    disjoint windows, with wind and both atmosphere offsets ramping once.
    Scenario #2: constant airspeed/altitude/weather with eight bearing
    changes in a row.
    """
    if kind not in (1, 2):
        raise ValueError("scenario kind must be 1 or 2")
    if t_end is None:
        t_end = 3800.0 if kind == 1 else 500.0
    ss = np.random.SeedSequence(seed)
    s_mission, s_weather, s_turb, s_sensor, s_fields = ss.spawn(5)
    rng_m = np.random.default_rng(s_mission)
    rng_w = np.random.default_rng(s_weather)

    lat0 = _uniform(rng_m, ranges.lat0_deg) * DEG
    lon0 = _uniform(rng_m, ranges.lon0_deg) * DEG
    v_ini = _uniform(rng_m, ranges.v_tas_ini)
    hp_ini = _uniform(rng_m, ranges.hp_ini)
    chi_ini = rng_m.uniform(-math.pi, math.pi)

    if kind == 1:
        sgn = lambda: 1.0 if rng_m.uniform() < 0.5 else -1.0
        chi_tgt = geo.wrap_angle(chi_ini + sgn() * _uniform(rng_m, ranges.turn_delta_deg) * DEG)
        hp_tgt = hp_ini + sgn() * _uniform(rng_m, ranges.hp_delta)
        v_tgt = max(v_ini + sgn() * _uniform(rng_m, ranges.v_tas_delta), 15.0)
        durations = [_turn_duration(chi_tgt - chi_ini, v_ini, cfg),
                     _climb_duration(hp_tgt - hp_ini, v_ini, cfg),
                     _accel_duration(v_tgt - v_ini, cfg)]
        lo, hi = t_gnss + 50.0, t_end - 60.0
        slack = (hi - lo) - sum(durations)
        if slack < 0.0:
            raise ValueError("scenario #1 maneuvers do not fit inside the run; "
                             "shrink the delta ranges or extend t_end")
        order = rng_m.permutation(3)
        gaps = rng_m.uniform(0.3, 1.0, 4)
        gaps = gaps / gaps.sum() * slack
        t = lo
        events = {}
        for j, idx in enumerate(order):
            t += gaps[j]
            events[int(idx)] = t
            t += durations[int(idx)]
        turn_events = ((events[0], chi_tgt),)
        climb_events = ((events[1], hp_tgt),)
        accel_events = ((events[2], v_tgt),)
    else:
        n = ranges.n_turns2
        lo, hi = t_gnss + 20.0, t_end - ranges.turn_tail_margin2
        gap = ranges.min_turn_gap2
        span = (hi - lo) - n * gap
        if span < 0.0:
            raise ValueError("scenario #2 turns do not fit inside the run")
        u = np.sort(rng_m.uniform(0.0, 1.0, n))
        times = lo + span * u + gap * (1.0 + np.arange(n))
        chis, chi = [], chi_ini
        for _ in range(n):
            chi = geo.wrap_angle(chi + (1.0 if rng_m.uniform() < 0.5 else -1.0)
                                 * _uniform(rng_m, ranges.turn_delta_deg2) * DEG)
            chis.append(chi)
        turn_events = tuple((float(t), c) for t, c in zip(times, chis))
        climb_events = ()
        accel_events = ()

    # weather: scenario #2 keeps the initial values throughout
    w_ini = _uniform(rng_w, ranges.wind_speed_ini)
    w_chi_ini = _uniform(rng_w, ranges.wind_chi_ini)
    dt_ini = _uniform(rng_w, ranges.dt_off_ini)
    dp_ini = _uniform(rng_w, ranges.dp_off_ini)
    if kind == 1:
        w_end = _uniform(rng_w, ranges.wind_speed_end)
        w_chi_end = _uniform(rng_w, ranges.wind_chi_end)
        t0 = _uniform(rng_w, ranges.wind_start_frac) * t_end
        wind = WindSchedule(w_ini, w_end, w_chi_ini, w_chi_end,
                            t0, t0 + _uniform(rng_w, ranges.wind_duration_frac) * t_end)
        dt_end = dt_ini + _uniform(rng_w, ranges.dt_off_delta)
        dp_sgn = {"+": 1.0, "-": -1.0}.get(ranges.dp_delta_sign,
                                           1.0 if rng_w.uniform() < 0.5 else -1.0)
        dp_end = dp_ini + dp_sgn * _uniform(rng_w, ranges.dp_off_delta)
        ta = _uniform(rng_w, ranges.offs_start_frac) * t_end
        tb = _uniform(rng_w, ranges.offs_start_frac) * t_end
        offsets = OffsetSchedule(
            dt_ini, dt_end, (ta, ta + _uniform(rng_w, ranges.offs_duration_frac) * t_end),
            dp_ini, dp_end, (tb, tb + _uniform(rng_w, ranges.offs_duration_frac) * t_end))
    else:
        wind = WindSchedule(w_ini, w_ini, w_chi_ini, w_chi_ini, 0.0, 0.0)
        offsets = OffsetSchedule(dt_ini, dt_ini, (0.0, 0.0), dp_ini, dp_ini, (0.0, 0.0))

    rng_t = np.random.default_rng(s_turb)
    sig_h = _uniform(rng_t, ranges.turb_sigma_h)
    turb = TurbulenceParams(
        sigma=(sig_h, sig_h, sig_h * ranges.turb_vertical_ratio),
        tau=ranges.turb_tau, seed=int(rng_t.integers(2**63)))
    deviations = field_cfg.draw_deviations(np.random.default_rng(s_fields))
    sensor_seed = int(np.random.default_rng(s_sensor).integers(2**63))

    return ScenarioDraw(kind=kind, t_end=t_end, t_gnss=t_gnss, lon0=lon0, lat0=lat0,
                        v_tas_ini=v_ini, hp_ini=hp_ini, chi_ini=chi_ini,
                        turn_events=turn_events, climb_events=climb_events,
                        accel_events=accel_events, wind=wind, offsets=offsets,
                        turb=turb, deviations=deviations, sensor_seed=sensor_seed)


@dataclass
class TruthArrays:
    """Truth streams, one row per step. Angles rad, SI units."""

    t: np.ndarray
    lon: np.ndarray
    lat: np.ndarray
    alt: np.ndarray
    q: np.ndarray           # (n, 4) body->NED attitude
    v_ned: np.ndarray       # (n, 3) ground velocity
    v_tas: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    w_nbb: np.ndarray       # (n, 3) body rate wrt NED
    w_ibb: np.ndarray       # (n, 3) inertial body rate (ideal gyro)
    f_ibb: np.ndarray       # (n, 3) specific force (ideal accelerometer)
    mag_body: np.ndarray    # (n, 3) real field in body (ideal magnetometer)
    wind_ned: np.ndarray
    turb_body: np.ndarray
    hp: np.ndarray
    temp: np.ndarray
    pres: np.ndarray
    dt_off: np.ndarray
    dp_off: np.ndarray
    g_real_ned: np.ndarray  # (n, 3)
    destabilized: bool
    draw: ScenarioDraw

    @property
    def n(self) -> int:
        return self.t.size


def _step_targets(t: np.ndarray, events, initial: float) -> np.ndarray:
    """Piecewise-constant target series from (time, value) events."""
    out = np.full(t.shape, float(initial))
    for te, val in events:
        out[t >= te] = val
    return out


def generate_truth(draw: ScenarioDraw, cfg: TruthConfig = TruthConfig(),
                   earth: geo.EarthConstants = geo.WGS84,
                   atmo_c: AtmoConstants = ISA,
                   field_cfg: FieldConfig = FieldConfig()) -> TruthArrays:
    """Run the command-shaping loop and derive all truth streams."""
    dt = cfg.dt
    n = int(round(draw.t_end / dt)) + 1
    t = np.arange(n) * dt

    wind = wind_ned(t, draw.wind)
    dt_off, dp_off = offsets_series(t, draw.offsets)
    turb = TurbulenceGenerator(draw.turb).series(n, dt)
    chi_tgt = _step_targets(t, draw.turn_events, draw.chi_ini)
    hp_tgt = _step_targets(t, draw.climb_events, draw.hp_ini)
    v_tgt = _step_targets(t, draw.accel_events, draw.v_tas_ini)

    lon_a = np.empty(n); lat_a = np.empty(n); alt_a = np.empty(n)
    q_a = np.empty((n, 4)); v_a = np.empty((n, 3))
    vtas_a = np.empty(n); alpha_a = np.empty(n); beta_a = np.empty(n)
    hp_a = np.empty(n); temp_a = np.empty(n); pres_a = np.empty(n)

    # atmosphere shorthand
    t0k, p0, bt, re = atmo_c.t0, atmo_c.p0, atmo_c.beta_t, earth.re_sphere
    ex = atmo_c.exponent
    inv_ex = 1.0 / ex
    g0 = atmo_c.g0
    a_e, e2 = earth.a, earth.e2

    # initial geometric altitude: the drawn pressure altitude in the offset
    # atmosphere at t = 0
    p_ini = p0 * (1.0 + bt * draw.hp_ini / t0k) ** ex
    h_gp = ((t0k + dt_off[0]) / bt) * ((p_ini / (p0 + dp_off[0])) ** inv_ex - 1.0)
    h = re * h_gp / (re - h_gp)
    lon, lat = draw.lon0, draw.lat0

    psi = draw.chi_ini
    v_s = draw.v_tas_ini
    xi_s = gamma_s = 0.0
    pth = prl = pys = 0.0

    inv_tau_cmd = 1.0 / cfg.tau_cmd
    inv_tau_tas = 1.0 / cfg.tau_tas
    inv_tau_resp = 1.0 / cfg.tau_resp
    k_alt = 1.0 / cfg.alt_hold_tc
    kresp = cfg.turb_response
    a0, a1, vref = cfg.alpha_trim0, cfg.alpha_trim_v2, cfg.v_ref
    tan_bank = math.tan(cfg.bank_turn)
    destabilized = False
    n_used = n
    two_pi = 2.0 * math.pi

    for i in range(n):
        if i:
            # airspeed setpoint tracking with a rate limit
            dv = (v_tgt[i] - v_s) * inv_tau_tas
            if dv > cfg.accel_max:
                dv = cfg.accel_max
            elif dv < -cfg.accel_max:
                dv = -cfg.accel_max
            v_s += dt * dv
            # coordinated turn toward the bearing target
            d = (chi_tgt[i] - psi + math.pi) % two_pi - math.pi
            chi_dot = g0 * tan_bank / v_s
            band = chi_dot * cfg.rolloff_time
            u = d / band
            if u > 1.0:
                u = 1.0
            elif u < -1.0:
                u = -1.0
            xi_s += dt * (cfg.bank_turn * u - xi_s) * inv_tau_cmd
            psi += dt * g0 * math.tan(xi_s) / v_s
            # pressure-altitude hold / capture
            h_gp = re * h / (re + h)
            p = (p0 + dp_off[i]) * (1.0 + bt * h_gp / (t0k + dt_off[i])) ** ex
            hp = (t0k / bt) * ((p / p0) ** inv_ex - 1.0)
            g_cmd = (hp_tgt[i] - hp) / v_s * k_alt
            if g_cmd > cfg.gamma_climb:
                g_cmd = cfg.gamma_climb
            elif g_cmd < -cfg.gamma_climb:
                g_cmd = -cfg.gamma_climb
            gamma_s += dt * (g_cmd - gamma_s) * inv_tau_cmd
        else:
            h_gp = re * h / (re + h)
            p = (p0 + dp_off[0]) * (1.0 + bt * h_gp / (t0k + dt_off[0])) ** ex
            hp = (t0k / bt) * ((p / p0) ** inv_ex - 1.0)

        tx, ty, tz = turb[i]
        # attitude gust response (lagged), vane response (instantaneous)
        pth += dt * (-cfg.resp_pitch * tz / v_s - pth) * inv_tau_resp
        prl += dt * (cfg.resp_roll * ty / v_s - prl) * inv_tau_resp
        pys += dt * (-cfg.resp_yaw * ty / v_s - pys) * inv_tau_resp

        alpha_trim = a0 + a1 * (vref / v_s) ** 2
        alpha = alpha_trim - kresp * tz / v_s
        beta = -kresp * ty / v_s
        vtas = v_s - kresp * tx

        theta = gamma_s + alpha_trim + pth
        xi = xi_s + prl
        psi_t = psi + pys
        if abs(theta) > cfg.pitch_abort:
            destabilized = True
            n_used = i
            break

        cy = math.cos(0.5 * psi_t); sy = math.sin(0.5 * psi_t)
        cp = math.cos(0.5 * theta); sp = math.sin(0.5 * theta)
        cr = math.cos(0.5 * xi);    sr = math.sin(0.5 * xi)
        qw = cy * cp * cr + sy * sp * sr
        qx = cy * cp * sr - sy * sp * cr
        qy = cy * sp * cr + sy * cp * sr
        qz = sy * cp * cr - cy * sp * sr

        ca = math.cos(alpha); sa = math.sin(alpha)
        cb = math.cos(beta); sb = math.sin(beta)
        bx = vtas * ca * cb + tx
        by = vtas * sb + ty
        bz = vtas * sa * cb + tz
        # rotate body -> NED: v + 2 u x (u x v + w v)
        t1x = qy * bz - qz * by + qw * bx
        t1y = qz * bx - qx * bz + qw * by
        t1z = qx * by - qy * bx + qw * bz
        vn = bx + 2.0 * (qy * t1z - qz * t1y) + wind[i, 0]
        ve = by + 2.0 * (qz * t1x - qx * t1z) + wind[i, 1]
        vd = bz + 2.0 * (qx * t1y - qy * t1x) + wind[i, 2]

        lon_a[i] = lon; lat_a[i] = lat; alt_a[i] = h
        q_a[i, 0] = qw; q_a[i, 1] = qx; q_a[i, 2] = qy; q_a[i, 3] = qz
        v_a[i, 0] = vn; v_a[i, 1] = ve; v_a[i, 2] = vd
        vtas_a[i] = vtas; alpha_a[i] = alpha; beta_a[i] = beta
        hp_a[i] = hp
        temp_a[i] = t0k + dt_off[i] + bt * h_gp
        pres_a[i] = p

        # integrate geodetic position
        sl = math.sin(lat)
        den = 1.0 - e2 * sl * sl
        rn = a_e / math.sqrt(den)
        rm = a_e * (1.0 - e2) / (den * math.sqrt(den))
        lat += dt * vn / (rm + h)
        lon += dt * ve / ((rn + h) * math.cos(lat))
        h -= dt * vd

    if destabilized:
        sl_ = slice(0, n_used)
        t, wind, turb = t[sl_], wind[sl_], turb[sl_]
        dt_off, dp_off = dt_off[sl_], dp_off[sl_]
        lon_a, lat_a, alt_a = lon_a[sl_], lat_a[sl_], alt_a[sl_]
        q_a, v_a = q_a[sl_], v_a[sl_]
        vtas_a, alpha_a, beta_a = vtas_a[sl_], alpha_a[sl_], beta_a[sl_]
        hp_a, temp_a, pres_a = hp_a[sl_], temp_a[sl_], pres_a[sl_]
        n = n_used
        if n < 3:
            raise ValueError("trajectory destabilized immediately")

    # --- derived streams (vectorized) -------------------------------------
    w_nbb = np.empty((n, 3))
    dq = geo.quat_mul(geo.quat_conj(q_a[:-2]), q_a[2:])
    w_nbb[1:-1] = geo.quat_to_rotvec(dq) / (2.0 * dt)
    w_nbb[0] = geo.quat_to_rotvec(geo.quat_mul(geo.quat_conj(q_a[0]), q_a[1])) / dt
    w_nbb[-1] = geo.quat_to_rotvec(geo.quat_mul(geo.quat_conj(q_a[-2]), q_a[-1])) / dt

    vdot = np.empty((n, 3))
    vdot[1:-1] = (v_a[2:] - v_a[:-2]) / (2.0 * dt)
    vdot[0] = (v_a[1] - v_a[0]) / dt
    vdot[-1] = (v_a[-1] - v_a[-2]) / dt

    sl = np.sin(lat_a); cl = np.cos(lat_a)
    den = 1.0 - e2 * sl**2
    rn = a_e / np.sqrt(den)
    rm = a_e * (1.0 - e2) / den**1.5
    we = earth.omega_e
    w_ie = np.stack([we * cl, np.zeros(n), -we * sl], axis=-1)
    w_en = np.stack([v_a[:, 1] / (rn + alt_a), -v_a[:, 0] / (rm + alt_a),
                     -v_a[:, 1] * np.tan(lat_a) / (rn + alt_a)], axis=-1)
    a_cor = 2.0 * np.cross(w_ie, v_a)
    g_mag = (earth.gamma_equator * (1.0 + earth.somigliana_k * sl**2)
             / np.sqrt(1.0 - e2 * sl**2) - earth.free_air_gradient * alt_a)
    g_real = np.zeros((n, 3))
    g_real[:, 2] = g_mag
    g_real += np.asarray(draw.deviations.g_dev_ned)

    f_ned = np.cross(w_en, v_a) + vdot + a_cor - g_real
    f_ibb = geo.rotate_to_body(q_a, f_ned)
    w_ibb = w_nbb + geo.rotate_to_body(q_a, w_ie + w_en)

    b_real = (np.asarray(field_cfg.b_model_ned, dtype=float)
              + np.asarray(draw.deviations.b_dev_ned))
    mag_body = geo.rotate_to_body(q_a, np.broadcast_to(b_real, (n, 3)))

    return TruthArrays(t=t, lon=lon_a, lat=lat_a, alt=alt_a, q=q_a, v_ned=v_a,
                       v_tas=vtas_a, alpha=alpha_a, beta=beta_a, w_nbb=w_nbb,
                       w_ibb=w_ibb, f_ibb=f_ibb, mag_body=mag_body,
                       wind_ned=wind, turb_body=turb, hp=hp_a, temp=temp_a,
                       pres=pres_a, dt_off=np.asarray(dt_off), dp_off=np.asarray(dp_off),
                       g_real_ned=g_real, destabilized=destabilized, draw=draw)
