"""Compiled per-tick numerics shared by the filter classes and the fused
whole-run loop.

Everything numerical that executes at 100 Hz lives here as numba kernels, so
the step-by-step Python API and the batch runner produce bit-identical
results. State vectors are plain float64 arrays modified in place.

Packed layouts:

* attitude linear state ``lin``: [omega(3), e_gyr(3), e_mag(3), b_dev(3)]
* position EKF state ``x_pos``: [f_ibb(3), e_acc(3)]
* navigation state ``nav``: [lon, lat, alt, v_ned(3), v_wind(3),
  v_tas_ned(3), dp_off]
* support vector for the attitude filter ``sup``: [g_model(3), b_model(3),
  v_ned(3), v_wind(3), w_ie(3), w_en(3), a_cor(3), e_acc(3)]
* earth parameters ``earth``: [a, e2, omega_e, re_sphere, gamma_e,
  somigliana_k, free_air_gradient]
* atmosphere parameters ``atm``: [t0, p0, beta_t, exponent]
* output row: [lon, lat, alt, q(4), omega(3), e_gyr(3), e_mag(3), b_dev(3),
  v_ned(3), v_wind(3), v_tas, alpha, beta, temp, hp, dt_off, dp_off]
"""

import math

import numpy as np
from numba import njit

# output column indices
COL_LON, COL_LAT, COL_ALT = 0, 1, 2
COL_Q = 3
COL_OMEGA = 7
COL_EGYR = 10
COL_EMAG = 13
COL_BDEV = 16
COL_VNED = 19
COL_VWIND = 22
COL_VTAS, COL_ALPHA, COL_BETA, COL_TEMP, COL_HP, COL_DTOFF, COL_DPOFF = 25, 26, 27, 28, 29, 30, 31
NCOLS = 32

STATUS_OK = 0
STATUS_DESTABILIZED = 1
STATUS_COV_FAILURE = 2

ATT_BASELINE, ATT_ZERO_FB, ATT_ZERO_FN = 0, 1, 2
HOR_BASELINE, HOR_DOUBLE, HOR_WIND = 0, 1, 2
VERT_BASELINE, VERT_INTEGRATION, VERT_AIRSPEED = 0, 1, 2


@njit(cache=True)
def qmul(a, b):
    out = np.empty(4)
    out[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    out[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    out[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    out[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]
    n = math.sqrt(out[0]**2 + out[1]**2 + out[2]**2 + out[3]**2)
    for i in range(4):
        out[i] /= n
    return out


@njit(cache=True)
def qexp(rv):
    out = np.empty(4)
    a = math.sqrt(rv[0]**2 + rv[1]**2 + rv[2]**2)
    half = 0.5 * a
    if a < 1e-12:
        k = 0.5 - a * a / 48.0
    else:
        k = math.sin(half) / a
    out[0] = math.cos(half)
    out[1] = k * rv[0]
    out[2] = k * rv[1]
    out[3] = k * rv[2]
    return out


@njit(cache=True)
def qrot(q, v):
    """body -> NED rotation (q x v x q*)."""
    ux, uy, uz = q[1], q[2], q[3]
    tx = uy * v[2] - uz * v[1] + q[0] * v[0]
    ty = uz * v[0] - ux * v[2] + q[0] * v[1]
    tz = ux * v[1] - uy * v[0] + q[0] * v[2]
    out = np.empty(3)
    out[0] = v[0] + 2.0 * (uy * tz - uz * ty)
    out[1] = v[1] + 2.0 * (uz * tx - ux * tz)
    out[2] = v[2] + 2.0 * (ux * ty - uy * tx)
    return out


@njit(cache=True)
def qrot_inv(q, v):
    """NED -> body rotation (q* x v x q)."""
    ux, uy, uz = -q[1], -q[2], -q[3]
    tx = uy * v[2] - uz * v[1] + q[0] * v[0]
    ty = uz * v[0] - ux * v[2] + q[0] * v[1]
    tz = ux * v[1] - uy * v[0] + q[0] * v[2]
    out = np.empty(3)
    out[0] = v[0] + 2.0 * (uy * tz - uz * ty)
    out[1] = v[1] + 2.0 * (uz * tx - ux * tz)
    out[2] = v[2] + 2.0 * (ux * ty - uy * tx)
    return out


@njit(cache=True)
def cross3(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def dcm_t(q):
    """Transposed rotation matrix (NED -> body) of q."""
    w, x, y, z = q[0], q[1], q[2], q[3]
    out = np.empty((3, 3))
    out[0, 0] = 1 - 2 * (y * y + z * z)
    out[1, 0] = 2 * (x * y - w * z)
    out[2, 0] = 2 * (x * z + w * y)
    out[0, 1] = 2 * (x * y + w * z)
    out[1, 1] = 1 - 2 * (x * x + z * z)
    out[2, 1] = 2 * (y * z - w * x)
    out[0, 2] = 2 * (x * z - w * y)
    out[1, 2] = 2 * (y * z + w * x)
    out[2, 2] = 1 - 2 * (x * x + y * y)
    return out


@njit(cache=True)
def set_skew(m, r0, c0, v, sign):
    m[r0 + 0, c0 + 1] += -sign * v[2]
    m[r0 + 0, c0 + 2] += sign * v[1]
    m[r0 + 1, c0 + 0] += sign * v[2]
    m[r0 + 1, c0 + 2] += -sign * v[0]
    m[r0 + 2, c0 + 0] += -sign * v[1]
    m[r0 + 2, c0 + 1] += sign * v[0]


@njit(cache=True)
def vtas_body_k(v_tas, alpha, beta):
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    out = np.empty(3)
    out[0] = v_tas * ca * cb
    out[1] = v_tas * sb
    out[2] = v_tas * sa * cb
    return out


# ---------------------------------------------------------------------------
# air-data filter
# ---------------------------------------------------------------------------

@njit(cache=True)
def air_step(x, p, obs, q_diag, r_diag, atm, dt):
    """In-place EKF step of the air-data filter (8 states, 5 observations)."""
    for i in range(3):
        x[i] += dt * x[5 + i]
    for j in range(8):
        for i in range(3):
            p[i, j] += dt * p[5 + i, j]
    for i in range(8):
        for j in range(3):
            p[i, j] += dt * p[i, 5 + j]
        p[i, i] += q_diag[i] * dt

    ok = True
    for i in range(5):
        if not math.isfinite(obs[i]):
            ok = False
    if not ok:
        return

    t0, p0, beta_t, ex = atm[0], atm[1], atm[2], atm[3]
    u = 1.0 + beta_t * x[4] / t0
    pres = p0 * u**ex
    dp_dhp = pres * ex * beta_t / (t0 * u)

    innov = np.empty(5)
    innov[0] = obs[0] - x[0]
    innov[1] = obs[1] - x[1]
    innov[2] = obs[2] - x[2]
    innov[3] = obs[3] - x[3]
    innov[4] = obs[4] - pres

    ph = np.empty((8, 5))
    for i in range(8):
        ph[i, 0] = p[i, 0]
        ph[i, 1] = p[i, 1]
        ph[i, 2] = p[i, 2]
        ph[i, 3] = p[i, 3]
        ph[i, 4] = p[i, 4] * dp_dhp
    s = np.empty((5, 5))
    for j in range(5):
        s[0, j] = ph[0, j]
        s[1, j] = ph[1, j]
        s[2, j] = ph[2, j]
        s[3, j] = ph[3, j]
        s[4, j] = ph[4, j] * dp_dhp
    for i in range(5):
        s[i, i] += r_diag[i]
    k = np.linalg.solve(s.T, ph.T).T
    dx = k @ innov
    for i in range(8):
        x[i] += dx[i]
    pnew = p - k @ ph.T
    for i in range(8):
        for j in range(8):
            p[i, j] = 0.5 * (pnew[i, j] + pnew[j, i])


# ---------------------------------------------------------------------------
# attitude filter
# ---------------------------------------------------------------------------

@njit(cache=True)
def predict_f_obs(q, omega, sup, mode):
    """Predicted specific-force observation for the three filter flavors.

    Returns (prediction, v_rel_b, ned_term); the latter two feed the
    linearization. ``sup`` is the packed support vector.
    """
    g_model = sup[0:3]
    v_ned = sup[6:9]
    v_wind = sup[9:12]
    w_en = sup[15:18]
    a_cor = sup[18:21]
    e_acc = sup[21:24]
    ned_term = qrot_inv(q, cross3(w_en, v_ned) + a_cor - g_model)
    if mode == ATT_ZERO_FN:
        v_rel_b = np.zeros(3)
        return ned_term + e_acc, v_rel_b, ned_term
    if mode == ATT_BASELINE:
        v_rel_b = qrot_inv(q, v_ned - v_wind)
    else:
        v_rel_b = qrot_inv(q, v_ned)
    return cross3(omega, v_rel_b) + ned_term + e_acc, v_rel_b, ned_term


MANEUVER_TAU = 2.0   # s, body-rate smoothing for the maneuver R inflation


@njit(cache=True)
def att_step(q, lin, p, gyro, mag, accel, sup, q_diag, r_diag, dt, mode,
             r_f_maneuver, w_bar):
    """In-place error-state EKF step of the attitude filter.

    ``r_f_maneuver`` scales an extra specific-force observation variance with
    the sustained rotation-coupling magnitude |lowpass(omega) x v_rel|: the
    residual of the discarded velocity derivatives is correlated and grows
    with that product during maneuvers, so the filter trusts the observation
    less while turning; the low-pass (state carried in ``w_bar``) keeps
    turbulence jitter from inflating it.

    Returns 1 when the covariance needed a spectral recovery, else 0.
    """
    omega = lin[0:3]
    # propagate the quaternion with the body-rate state (constant over dt)
    dq = qexp(omega * dt)
    qn = qmul(q, dq)
    for i in range(4):
        q[i] = qn[i]

    # covariance propagation: F = I + attitude block and rate coupling
    f_tt = dcm_t(qexp(omega * dt))  # = Exp(-omega dt)
    pn = p.copy()
    for j in range(15):
        a0 = f_tt[0, 0] * p[0, j] + f_tt[0, 1] * p[1, j] + f_tt[0, 2] * p[2, j]
        a1 = f_tt[1, 0] * p[0, j] + f_tt[1, 1] * p[1, j] + f_tt[1, 2] * p[2, j]
        a2 = f_tt[2, 0] * p[0, j] + f_tt[2, 1] * p[1, j] + f_tt[2, 2] * p[2, j]
        pn[0, j] = a0 + dt * p[3, j]
        pn[1, j] = a1 + dt * p[4, j]
        pn[2, j] = a2 + dt * p[5, j]
    for i in range(15):
        a0 = pn[i, 0] * f_tt[0, 0] + pn[i, 1] * f_tt[0, 1] + pn[i, 2] * f_tt[0, 2]
        a1 = pn[i, 0] * f_tt[1, 0] + pn[i, 1] * f_tt[1, 1] + pn[i, 2] * f_tt[1, 2]
        a2 = pn[i, 0] * f_tt[2, 0] + pn[i, 1] * f_tt[2, 1] + pn[i, 2] * f_tt[2, 2]
        pn[i, 0] = a0 + dt * pn[i, 3]
        pn[i, 1] = a1 + dt * pn[i, 4]
        pn[i, 2] = a2 + dt * pn[i, 5]
    for i in range(15):
        pn[i, i] += q_diag[i] * dt

    # stacked observation [gyro, mag, accel]
    b_model = sup[3:6]
    w_ie = sup[12:15]
    w_en = sup[15:18]

    w_ien_b = qrot_inv(q, w_ie + w_en)
    b_field_b = qrot_inv(q, b_model - lin[9:12])

    h = np.zeros((9, 15))
    hx = np.empty(9)
    for i in range(3):
        hx[i] = omega[i] + w_ien_b[i] + lin[3 + i]
        h[i, 3 + i] = 1.0
        h[i, 6 + i] = 1.0
    set_skew(h, 0, 0, w_ien_b, 1.0)
    rt = dcm_t(q)
    for i in range(3):
        hx[3 + i] = b_field_b[i] + lin[6 + i]
        h[3 + i, 9 + i] = 1.0
        for j in range(3):
            h[3 + i, 12 + j] = -rt[i, j]
    set_skew(h, 3, 0, b_field_b, 1.0)

    f_pred, v_rel_b, ned_term = predict_f_obs(q, omega, sup, mode)
    for i in range(3):
        hx[6 + i] = f_pred[i]
    set_skew(h, 6, 0, ned_term, 1.0)
    if mode != ATT_ZERO_FN:
        # d(omega x v_rel_b)/d(theta) = skew(omega) skew(v_rel_b)
        so_sv = np.empty((3, 3))
        for i in range(3):
            ei = np.zeros(3)
            ei[i] = 1.0
            so_sv[:, i] = cross3(omega, cross3(v_rel_b, ei))
        for i in range(3):
            for j in range(3):
                h[6 + i, j] += -so_sv[i, j]
        set_skew(h, 6, 3, v_rel_b, -1.0)

    innov = np.empty(9)
    for i in range(3):
        innov[i] = gyro[i] - hx[i]
        innov[3 + i] = mag[i] - hx[3 + i]
        innov[6 + i] = accel[i] - hx[6 + i]

    a_lp = dt / MANEUVER_TAU
    for i in range(3):
        w_bar[i] += a_lp * (omega[i] - w_bar[i])
    r_eff = r_diag.copy()
    if mode != ATT_ZERO_FN:
        wxv2 = ((w_bar[1] * v_rel_b[2] - w_bar[2] * v_rel_b[1])**2
                + (w_bar[2] * v_rel_b[0] - w_bar[0] * v_rel_b[2])**2
                + (w_bar[0] * v_rel_b[1] - w_bar[1] * v_rel_b[0])**2)
        extra = r_f_maneuver * r_f_maneuver * wxv2
        for i in range(3):
            r_eff[6 + i] += extra

    ph = pn @ h.T
    s = h @ ph
    for i in range(9):
        s[i, i] += r_eff[i]
    k = np.linalg.solve(s.T, ph.T).T
    dx = k @ innov
    ikh = np.eye(15) - k @ h
    pj = ikh @ pn @ ikh.T
    for i in range(15):
        for j in range(9):
            kr = k[i, j] * r_eff[j]
            for l in range(15):
                pj[i, l] += kr * k[l, j]

    recovered = 0
    bad = False
    for i in range(15):
        if not math.isfinite(pj[i, i]) or pj[i, i] <= 0.0:
            bad = True
    if bad:
        for i in range(15):
            for j in range(15):
                if not math.isfinite(pj[i, j]):
                    pj[i, j] = 0.0
        w, v = np.linalg.eigh(0.5 * (pj + pj.T))
        for i in range(15):
            if w[i] < 1e-18:
                w[i] = 1e-18
        pj = (v * w) @ v.T * 1.1
        recovered = 1

    for i in range(15):
        for j in range(15):
            p[i, j] = 0.5 * (pj[i, j] + pj[j, i])

    qn = qmul(q, qexp(dx[0:3]))
    for i in range(4):
        q[i] = qn[i]
    for i in range(12):
        lin[i] += dx[3 + i]
    return recovered


# ---------------------------------------------------------------------------
# position filter
# ---------------------------------------------------------------------------

@njit(cache=True)
def pos_ekf_step(x, p, accel, q_f, q_eacc, r_f, dt):
    """In-place EKF on the lumped specific force ([f, e_acc], obs f + e)."""
    for i in range(3):
        p[i, i] += q_f * dt
        p[3 + i, 3 + i] += q_eacc * dt
    ph = np.empty((6, 3))
    for i in range(6):
        for j in range(3):
            ph[i, j] = p[i, j] + p[i, 3 + j]
    s = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            s[i, j] = ph[i, j] + ph[3 + i, j]
        s[i, i] += r_f
    k = np.linalg.solve(s.T, ph.T).T
    innov = np.empty(3)
    for i in range(3):
        innov[i] = accel[i] - x[i] - x[3 + i]
    dx = k @ innov
    for i in range(6):
        x[i] += dx[i]
    pnew = p - k @ ph.T
    for i in range(6):
        for j in range(6):
            p[i, j] = 0.5 * (pnew[i, j] + pnew[j, i])


@njit(cache=True)
def radii_k(lat, earth):
    s2 = math.sin(lat)**2
    d = 1.0 - earth[1] * s2
    rn = earth[0] / math.sqrt(d)
    rm = earth[0] * (1.0 - earth[1]) / (d * math.sqrt(d))
    return rn, rm


@njit(cache=True)
def gravity_k(lat, alt, earth):
    s2 = math.sin(lat)**2
    g = earth[4] * (1.0 + earth[5] * s2) / math.sqrt(1.0 - earth[1] * s2)
    return g - earth[6] * alt


@njit(cache=True)
def fill_support(sup, nav, e_acc, b_model, earth):
    """Assemble the attitude-filter support vector from the navigation state."""
    lat = nav[1]
    alt = nav[2]
    sup[0] = 0.0
    sup[1] = 0.0
    sup[2] = gravity_k(lat, alt, earth)
    sup[3:6] = b_model
    sup[6:9] = nav[3:6]
    sup[9:12] = nav[6:9]
    we = earth[2]
    sl, cl = math.sin(lat), math.cos(lat)
    sup[12] = we * cl
    sup[13] = 0.0
    sup[14] = -we * sl
    rn, rm = radii_k(lat, earth)
    vn, ve, vd = nav[3], nav[4], nav[5]
    sup[15] = ve / (rn + alt)
    sup[16] = -vn / (rm + alt)
    sup[17] = -ve * sl / cl / (rn + alt)
    sup[18] = 2.0 * we * ve * sl
    sup[19] = 2.0 * we * (-vn * sl - vd * cl)
    sup[20] = 2.0 * we * ve * cl
    sup[21:24] = e_acc


@njit(cache=True)
def pos_core(nav, x_pos, p_pos, accel, x_air, q, has_fix, fix,
             atm, earth, pars, dt):
    """Non-EKF part of the position filter plus its EKF, in place.

    ``pars``: [q_f, q_eacc, r_f, wind_alpha, dp_alpha, gnss_gain].
    ``fix``: [lon, lat, alt, vN, vE, vD] (used when has_fix).
    """
    pos_ekf_step(x_pos, p_pos, accel, pars[0], pars[1], pars[2], dt)
    v_tas_b = vtas_body_k(x_air[0], x_air[1], x_air[2])
    v_tas_n = qrot(q, v_tas_b)
    nav[9:12] = v_tas_n

    t0, p0, beta_t, ex = atm[0], atm[1], atm[2], atm[3]
    dt_off = x_air[3] - t0 - beta_t * x_air[4]
    if has_fix:
        a_w = pars[3]
        for i in range(3):
            nav[6 + i] += a_w * (fix[3 + i] - v_tas_n[i] - nav[6 + i])
        re = earth[3]
        h_gp = re * fix[2] / (re + fix[2])
        u = 1.0 + beta_t * h_gp / (t0 + dt_off)
        if u > 0.0:
            p_hp = p0 * (1.0 + beta_t * x_air[4] / t0)**ex
            dp_raw = p_hp / u**ex - p0
            nav[12] += pars[4] * (dp_raw - nav[12])
        g = pars[5]
        dlon = fix[0] - nav[0]
        if dlon > math.pi:
            dlon -= 2.0 * math.pi
        elif dlon < -math.pi:
            dlon += 2.0 * math.pi
        nav[0] += g * dlon
        nav[1] += g * (fix[1] - nav[1])

    for i in range(3):
        nav[3 + i] = nav[6 + i] + v_tas_n[i]
    # altitude ladder: pressure altitude -> offset atmosphere -> geometric
    p_hp = p0 * (1.0 + beta_t * x_air[4] / t0)**ex
    ratio = p_hp / (p0 + nav[12])
    h_gp = ((t0 + dt_off) / beta_t) * (ratio**(1.0 / ex) - 1.0)
    re = earth[3]
    nav[2] = re * h_gp / (re - h_gp)
    return dt_off


@njit(cache=True)
def integrate_position_k(nav, earth, dt):
    rn, rm = radii_k(nav[1], earth)
    nav[1] += dt * nav[3] / (rm + nav[2])
    nav[0] += dt * nav[4] / ((rn + nav[2]) * math.cos(nav[1]))


@njit(cache=True)
def ground_accel_k(nav, x_pos, q, earth):
    """Specific-force based ground-velocity derivative, previous-step terms."""
    lat, alt = nav[1], nav[2]
    v = nav[3:6]
    rn, rm = radii_k(lat, earth)
    sl, cl = math.sin(lat), math.cos(lat)
    w_en = np.empty(3)
    w_en[0] = v[1] / (rn + alt)
    w_en[1] = -v[0] / (rm + alt)
    w_en[2] = -v[1] * sl / cl / (rn + alt)
    we = earth[2]
    a_cor = np.empty(3)
    a_cor[0] = 2.0 * we * v[1] * sl
    a_cor[1] = 2.0 * we * (-v[0] * sl - v[2] * cl)
    a_cor[2] = 2.0 * we * v[1] * cl
    f_ned = qrot(q, x_pos[0:3])
    out = f_ned - cross3(w_en, v)
    out[2] += gravity_k(lat, alt, earth)
    return out - a_cor


@njit(cache=True)
def variant_horizontal_k(var, mode, nav, x_pos, x_air, q, omega, earth, dt,
                         has_fix, fix_vel, denied):
    """Comparison-algorithm horizontal step (shadow mechanization).

    ``var``: [armed, v(3), v_wind(3)] scratch state. While fixes last, the
    integrator runs in the shadow of the aided solution and resets to every
    velocity fix, exactly like a conventional aided inertial filter; once
    denied it keeps integrating and its ground velocity (and wind, for the
    wind-integration flavor) overrides the navigation state.
    """
    if not denied and has_fix:
        var[0] = 1.0
        var[1:4] = fix_vel
        var[4:7] = nav[6:9]
        return
    if var[0] == 0.0:
        return
    vdot = ground_accel_k(nav, x_pos, q, earth)
    if mode == HOR_DOUBLE:
        for i in range(3):
            var[1 + i] += dt * vdot[i]
    else:
        v_tas_b = vtas_body_k(x_air[0], x_air[1], x_air[2])
        ca, sa = math.cos(x_air[1]), math.sin(x_air[1])
        cb, sb = math.cos(x_air[2]), math.sin(x_air[2])
        jac = np.empty((3, 3))
        jac[0, 0] = ca * cb
        jac[0, 1] = -x_air[0] * sa * cb
        jac[0, 2] = -x_air[0] * ca * sb
        jac[1, 0] = sb
        jac[1, 1] = 0.0
        jac[1, 2] = x_air[0] * cb
        jac[2, 0] = sa * cb
        jac[2, 1] = x_air[0] * ca * cb
        jac[2, 2] = -x_air[0] * sa * sb
        vdot_tas_b = jac @ x_air[5:8]
        vdot_tas_n = qrot(q, vdot_tas_b + cross3(omega, v_tas_b))
        for i in range(3):
            var[4 + i] += dt * (vdot[i] - vdot_tas_n[i])
        v_tas_n = qrot(q, v_tas_b)
        for i in range(3):
            var[1 + i] = var[4 + i] + v_tas_n[i]
    if denied:
        nav[3:6] = var[1:4]
        if mode == HOR_WIND:
            nav[6:9] = var[4:7]


@njit(cache=True)
def variant_vertical_k(var, mode, nav, dt):
    """Comparison-algorithm vertical step; ``var``: [engaged, alt]."""
    if var[0] == 0.0:
        var[0] = 1.0
        var[1] = nav[2]
        return
    if mode == VERT_INTEGRATION:
        var[1] -= dt * nav[5]
    else:
        var[1] -= dt * nav[11]
    nav[2] = var[1]


# ---------------------------------------------------------------------------
# fused whole-run loop
# ---------------------------------------------------------------------------

@njit(cache=True)
def run_loop(out, t, gyro, accel, mag, vtas_m, alpha_m, beta_m, temp_m, pres_m,
             gnss_tick, gnss_fixes,
             x_air, p_air, q, lin, p_att, x_pos, p_pos, nav,
             q_air, r_air, q_att, r_att, pos_pars, atm, earth, b_model,
             t_gnss, dt, att_mode, hor_mode, vert_mode,
             divergence_factor, cov_abort_count, r_f_maneuver):
    """Run the full three-filter pipeline over a measurement stream.

    Returns (status, n_valid, recovery_count). All state arrays are taken at
    their initialized values and left at their final ones.
    """
    n = t.shape[0]
    sup = np.empty(24)
    obs_air = np.empty(5)
    var_h = np.zeros(7)
    var_v = np.zeros(2)
    w_bar = np.zeros(3)
    recovery_count = 0
    status = STATUS_OK
    n_valid = n

    for i in range(n):
        obs_air[0] = vtas_m[i]
        obs_air[1] = alpha_m[i]
        obs_air[2] = beta_m[i]
        obs_air[3] = temp_m[i]
        obs_air[4] = pres_m[i]
        air_step(x_air, p_air, obs_air, q_air, r_air, atm, dt)

        fill_support(sup, nav, x_pos[3:6], b_model, earth)
        recovery_count += att_step(q, lin, p_att, gyro[i], mag[i], accel[i],
                                   sup, q_att, r_att, dt, att_mode,
                                   r_f_maneuver, w_bar)
        if recovery_count > cov_abort_count:
            status = STATUS_COV_FAILURE
            n_valid = i + 1
            break

        j = gnss_tick[i]
        dt_off = pos_core(nav, x_pos, p_pos, accel[i], x_air, q, j >= 0,
                          gnss_fixes[j if j >= 0 else 0], atm, earth,
                          pos_pars, dt)

        denied = t[i] >= t_gnss
        if hor_mode != HOR_BASELINE:
            variant_horizontal_k(var_h, hor_mode, nav, x_pos, x_air, q,
                                 lin[0:3], earth, dt, j >= 0,
                                 gnss_fixes[j if j >= 0 else 0, 3:6], denied)
        if denied and vert_mode != VERT_BASELINE:
            variant_vertical_k(var_v, vert_mode, nav, dt)

        out[i, COL_LON] = nav[0]
        out[i, COL_LAT] = nav[1]
        out[i, COL_ALT] = nav[2]
        for k in range(4):
            out[i, COL_Q + k] = q[k]
        for k in range(3):
            out[i, COL_OMEGA + k] = lin[k]
            out[i, COL_EGYR + k] = lin[3 + k]
            out[i, COL_EMAG + k] = lin[6 + k]
            out[i, COL_BDEV + k] = lin[9 + k]
            out[i, COL_VNED + k] = nav[3 + k]
            out[i, COL_VWIND + k] = nav[6 + k]
        out[i, COL_VTAS] = x_air[0]
        out[i, COL_ALPHA] = x_air[1]
        out[i, COL_BETA] = x_air[2]
        out[i, COL_TEMP] = x_air[3]
        out[i, COL_HP] = x_air[4]
        out[i, COL_DTOFF] = dt_off
        out[i, COL_DPOFF] = nav[12]

        speed = math.sqrt(nav[3]**2 + nav[4]**2 + nav[5]**2)
        guard = divergence_factor * (x_air[0] if x_air[0] > 10.0 else 10.0)
        if not math.isfinite(speed) or speed > guard:
            status = STATUS_DESTABILIZED
            n_valid = i + 1
            break

        integrate_position_k(nav, earth, dt)

    return status, n_valid, recovery_count
