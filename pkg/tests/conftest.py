"""Shared fixtures: quiet scenario configurations and cached short runs."""

import numpy as np
import pytest

from gdnav.harness import run_once
from gdnav.sensors import SensorConfig
from gdnav.truth import ScenarioRanges, draw_scenario

# everything pinned: no turbulence, no wind, no maneuvers, no offset changes
DEAD_CALM = dict(turb_sigma_h=(0.0, 0.0), wind_speed_ini=(0.0, 0.0),
                 wind_speed_end=(0.0, 0.0), turn_delta_deg=(0.0, 0.0),
                 hp_delta=(0.0, 0.0), v_tas_delta=(0.0, 0.0),
                 dt_off_delta=(0.0, 0.0), dp_off_delta=(0.0, 0.0))

ZERO_SENSORS = SensorConfig(gyr="zero", acc="zero", mag="zero", tas="zero",
                            air="zero", imu_misalign_cap=0.0, mag_misalign_cap=0.0)


def calm_ranges(**updates) -> ScenarioRanges:
    kw = dict(DEAD_CALM)
    kw.update(updates)
    return ScenarioRanges(**kw)


@pytest.fixture(scope="session")
def perfect_run():
    """Scenario #1 leg with zero noise and a dead-calm environment."""
    from gdnav.sensors import GnssErrorParams
    sensors = SensorConfig(gyr="zero", acc="zero", mag="zero", tas="zero",
                           air="zero", imu_misalign_cap=0.0, mag_misalign_cap=0.0,
                           gnss=GnssErrorParams(gm_sigma=(0, 0, 0),
                                                white_pos=(0, 0, 0),
                                                white_vel=(0, 0, 0)))
    from gdnav.env import FieldConfig
    fields = FieldConfig(b_dev_cap=0.0, g_dev_cap_horizontal=0.0,
                         g_dev_cap_vertical=0.0)
    draw = draw_scenario(1, 11, ranges=calm_ranges(), t_end=400.0,
                         field_cfg=fields)
    return run_once(draw, sensors=sensors, field_cfg=fields, keep_series=True)
