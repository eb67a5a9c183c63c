"""Switchable estimation strategies compared against the baseline filter.

Three independent axes: horizontal position, vertical position, and the
attitude filter's specific-force observation. The all-baseline combination is
exactly the primary navigation system; alternatives engage when GNSS fixes
stop and represent a conventional GNSS-aided inertial filter that suddenly
has to run without its aiding observations.

The step classes wrap the same compiled kernels the batch runner uses; each
engages on its first denied-mode call by capturing the baseline state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .filters import AirDataFilter, PositionFilter

HORIZONTAL_CODES = {"baseline": K.HOR_BASELINE,
                    "double_integration": K.HOR_DOUBLE,
                    "wind_integration": K.HOR_WIND}
VERTICAL_CODES = {"baseline": K.VERT_BASELINE,
                  "integration": K.VERT_INTEGRATION,
                  "airspeed_integration": K.VERT_AIRSPEED}
ATTITUDE_CHOICES = ("baseline", "zero_fb", "zero_fn")


@dataclass(frozen=True)
class AlgoVariant:
    """Algorithm selection along the three independent axes."""

    horizontal: str = "baseline"
    vertical: str = "baseline"
    attitude: str = "baseline"

    def __post_init__(self):
        if self.horizontal not in HORIZONTAL_CODES:
            raise ValueError(f"unknown horizontal variant {self.horizontal!r}")
        if self.vertical not in VERTICAL_CODES:
            raise ValueError(f"unknown vertical variant {self.vertical!r}")
        if self.attitude not in ATTITUDE_CHOICES:
            raise ValueError(f"unknown attitude variant {self.attitude!r}")

    @property
    def is_baseline(self) -> bool:
        return (self.horizontal, self.vertical, self.attitude) == ("baseline",) * 3


class HorizontalVariantStep:
    """Ground-velocity estimation by integration, shadowing the aided filter.

    While GNSS fixes last the integrator resets to every velocity fix (the
    behavior of a conventional aided inertial filter); once denied it runs
    open loop and overrides the navigation velocity. ``double_integration``
    Euler-integrates the ground-velocity derivative rebuilt from the
    estimated specific force (position/velocity dependent terms evaluated at
    the previous step). ``wind_integration`` integrates only the wind
    derivative, the difference between that ground-velocity derivative and
    the airspeed-vector derivative from the air-data filter, then adds back
    the rotated airspeed.
    """

    def __init__(self, name: str):
        self.mode = HORIZONTAL_CODES[name]
        self.state = np.zeros(7)    # [armed, v(3), v_wind(3)]

    @property
    def engaged(self) -> bool:
        return self.state[0] != 0.0

    def step(self, dt: float, pos_f: PositionFilter, air: AirDataFilter,
             q_nb: np.ndarray, omega: np.ndarray,
             fix_vel: np.ndarray | None = None, denied: bool = True) -> None:
        has_fix = fix_vel is not None
        fv = np.asarray(fix_vel, dtype=float) if has_fix else np.zeros(3)
        K.variant_horizontal_k(self.state, self.mode, pos_f.nav, pos_f.x,
                               air.x, np.asarray(q_nb, dtype=float),
                               np.asarray(omega, dtype=float),
                               pos_f._earth, dt, has_fix, fv, denied)


class VerticalVariantStep:
    """Denied-mode altitude override: integrate the vertical ground speed
    (``integration``) or only the vertical airspeed component, imposing zero
    vertical wind (``airspeed_integration``)."""

    def __init__(self, name: str):
        self.mode = VERTICAL_CODES[name]
        self.state = np.zeros(2)    # [engaged, alt]

    @property
    def engaged(self) -> bool:
        return self.state[0] != 0.0

    def step(self, dt: float, pos_f: PositionFilter) -> None:
        K.variant_vertical_k(self.state, self.mode, pos_f.nav, dt)


def make_horizontal(name: str) -> HorizontalVariantStep | None:
    return None if name == "baseline" else HorizontalVariantStep(name)


def make_vertical(name: str) -> VerticalVariantStep | None:
    return None if name == "baseline" else VerticalVariantStep(name)


def predict_specific_force(mode: str, q_nb, omega, support) -> np.ndarray:
    """Predicted accelerometer observation for one attitude-filter flavor.

    ``support`` is a :class:`gdnav.filters.PVector`; this is the exact
    prediction the selected filter flavor would use, so differences between
    flavors expose the observation bias each one incurs.
    """
    code = {"baseline": K.ATT_BASELINE, "zero_fb": K.ATT_ZERO_FB,
            "zero_fn": K.ATT_ZERO_FN}[mode]
    pred, _, _ = K.predict_f_obs(np.asarray(q_nb, dtype=float),
                                 np.asarray(omega, dtype=float),
                                 support.pack(), code)
    return pred
