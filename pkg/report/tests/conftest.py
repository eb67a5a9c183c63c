"""Fixtures: a real desk-scale output directory (made through the simulator
CLI) and a synthetic constant-series directory."""

import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

VARIABLES = ("yaw_deg", "pitch_deg", "roll_deg", "att_deg", "vn_mps", "ve_mps",
             "vd_mps", "h_m", "hor_m", "cross_m", "long_m", "egyr_dps")


@pytest.fixture(scope="session")
def desk_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("desk") / "mc"
    subprocess.run(
        [sys.executable, "-m", "gdnav.cli", "--scenario", "2", "--runs", "2",
         "--seed", "7", "--out", str(out)],
        check=True, capture_output=True)
    return out


@pytest.fixture()
def synthetic_dir(tmp_path):
    """Constant series: every variable flat at a known value with zero std."""
    agg_rows = []
    for var in VARIABLES:
        for stat in ("mean", "std", "max_abs"):
            pct = "0.25" if var in ("hor_m", "cross_m", "long_m") else ""
            agg_rows.append(f"{var},{stat},1.5,0.0,2.0,0.75,{pct},1000.0")
    (tmp_path / "aggregate.csv").write_text(
        "# gdnav aggregate schema 1\n"
        "variable,over_runs,traj_mean,traj_std,traj_max_abs,final,final_pct,distance_m\n"
        + "\n".join(agg_rows) + "\n")
    header = ["t"]
    for var in VARIABLES:
        header += [f"{var}_mean", f"{var}_std"]
    lines = [",".join(header)]
    for k in range(50):
        lines.append(",".join([str(float(k))] + ["3.25", "0.5"] * len(VARIABLES)))
    (tmp_path / "timeseries.csv").write_text(
        "# gdnav timeseries schema 1\n" + "\n".join(lines) + "\n")
    return tmp_path
