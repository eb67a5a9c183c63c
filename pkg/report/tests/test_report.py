import csv
import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figures import FIGURE_NAMES, render_compare, render_timeseries
from loaders import SchemaError, load_csv, load_run_dir
from report import ReportSpec, main, render
from tables import aggregate_markdown


class TestLoaders:
    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError, match="missing input"):
            load_run_dir(tmp_path)

    def test_missing_column_named(self, tmp_path):
        (tmp_path / "aggregate.csv").write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError, match="variable"):
            load_csv(tmp_path / "aggregate.csv", required=("variable",))

    def test_non_numeric_named(self, synthetic_dir):
        agg, _ = load_run_dir(synthetic_dir)
        with pytest.raises(SchemaError, match="variable"):
            agg.floats("variable")


class TestRender:
    def test_all_six_figures_on_desk_output(self, desk_dir, tmp_path):
        # acceptance criterion: every figure type renders from a real
        # desk-scale output directory
        spec = ReportSpec(in_dir=str(desk_dir), out_dir=str(tmp_path))
        written = render(spec)
        names = {p.name for p in written}
        for fig in FIGURE_NAMES:
            assert f"{fig}.png" in names
        assert "tables.md" in names
        for p in written:
            assert p.stat().st_size > 0

    def test_markdown_reproduces_aggregate_verbatim(self, desk_dir, tmp_path):
        spec = ReportSpec(in_dir=str(desk_dir), out_dir=str(tmp_path),
                          figures=())
        render(spec)
        md = (tmp_path / "tables.md").read_text().splitlines()
        cells = set()
        for line in md:
            if line.startswith("|"):
                cells.update(c.strip() for c in line.strip("|").split("|"))
        with (desk_dir / "aggregate.csv").open() as fh:
            reader = csv.reader(fh)
            next(reader)  # schema comment
            next(reader)  # header
            for row in reader:
                for value in row:
                    assert value in cells, f"CSV value {value!r} missing from tables.md"

    def test_constant_series_flat_band(self, synthetic_dir, tmp_path):
        mean, std = render_timeseries(synthetic_dir, "attitude-nse",
                                      tmp_path / "a.png")
        assert np.all(mean == 3.25)
        assert np.all(std == 0.5)
        assert (tmp_path / "a.png").exists()

    def test_compare_uses_subdirectories(self, synthetic_dir, tmp_path):
        # two variant subdirectories -> two bars with the aggregate values
        parent = tmp_path / "sweep"
        for name, val in (("baseline", "1.0"), ("zero_fn", "4.0")):
            sub = parent / name
            sub.mkdir(parents=True)
            for f in ("aggregate.csv", "timeseries.csv"):
                text = (synthetic_dir / f).read_text()
                sub.joinpath(f).write_text(text.replace("1.5", val))
        labels, values = render_compare(parent, "variant-compare",
                                        tmp_path / "v.png")
        assert labels == ["baseline", "zero_fn"]
        assert values == [1.0, 4.0]

    def test_pixel_stable(self, synthetic_dir, tmp_path):
        hashes = []
        for k in range(2):
            out = tmp_path / f"r{k}.png"
            render_timeseries(synthetic_dir, "vertical-nse", out)
            hashes.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert hashes[0] == hashes[1]


class TestCli:
    def test_empty_figure_list_no_files_exit_zero(self, synthetic_dir, tmp_path):
        out = tmp_path / "rep"
        rc = main(["--in", str(synthetic_dir), "--figs", "none",
                   "--out", str(out), "--no-tables"])
        assert rc == 0
        assert not list(out.iterdir())

    def test_schema_mismatch_diagnostic(self, tmp_path, capsys):
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "aggregate.csv").write_text("wrong,cols\n1,2\n")
        (bad / "timeseries.csv").write_text("t\n0\n")
        rc = main(["--in", str(bad), "--figs", "attitude-nse",
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "variable" in capsys.readouterr().err

    def test_unknown_figure_rejected(self, synthetic_dir, tmp_path, capsys):
        rc = main(["--in", str(synthetic_dir), "--figs", "pie-chart",
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "pie-chart" in capsys.readouterr().err

    def test_cli_end_to_end(self, synthetic_dir, tmp_path):
        out = tmp_path / "rep"
        rc = main(["--in", str(synthetic_dir), "--figs",
                   "attitude-nse,variant-compare", "--out", str(out),
                   "--format", "svg"])
        assert rc == 0
        assert (out / "attitude-nse.svg").exists()
        assert (out / "variant-compare.svg").exists()
        assert (out / "tables.md").exists()
