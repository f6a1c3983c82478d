import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcloc import cli, experiments as ex, refdist
from lcloc.errors import ArgumentError
from lcloc.report import emit_csv, emit_svg, format_cell

DATA = Path(__file__).parent / "data"

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def small_cfg(**kw):
    base = dict(densities=("normal",), sizes=(30, 100), reps=10,
                estimators=("mean", "os_pmle_mean_t"), seed=99)
    base.update(kw)
    return ex.ExperimentConfig(**base)


class TestConfig:
    def test_defaults(self):
        cfg = ex.ExperimentConfig()
        assert cfg.sizes == (30, 100, 200, 500)
        assert cfg.eta == 0.002 and cfg.reps == 300

    @pytest.mark.parametrize("kw", [dict(reps=1), dict(sizes=(4,)), dict(eta=0.5),
                                    dict(densities=("cauchy",)), dict(estimators=("os_kde_mean_t",)),
                                    dict(seed=-1), dict(sizes=())])
    def test_invalid(self, kw):
        with pytest.raises(ArgumentError):
            ex.ExperimentConfig(**kw)

    def test_updated_ignores_none(self):
        cfg = ex.ExperimentConfig().updated(reps=None, eta=0.01)
        assert cfg.reps == 300 and cfg.eta == 0.01


class TestEstimators:
    def test_every_label_parses(self):
        labs = ex.estimator_labels()
        assert len(labs) == 5 + 4 * 4 * 2
        for lab in labs:
            assert ex.parse_estimator(lab).label == lab

    @pytest.mark.parametrize("lab", ["os_pmle_mean", "os_pmle_mean_x", "foo", "os_x_mean_t"])
    def test_unknown(self, lab):
        with pytest.raises(ArgumentError):
            ex.parse_estimator(lab)

    def test_baselines_on_symmetric_sample(self):
        x = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        for lab in ("mean", "median", "trimmed", "logistic"):
            assert ex.parse_estimator(lab).run(x, None) == pytest.approx(0.0, abs=1e-10)


class TestEfficiency:
    def test_table_shape(self):
        t = ex.run_efficiency(small_cfg())
        assert t.header == ex.EFFICIENCY_HEADER
        assert len(t) == 4
        for r in t.rows:
            assert r[3] == 10 and r[4] == 0
            assert r[6] == pytest.approx(1.0 / (r[2] * 1.0) / r[5])

    def test_deterministic_bytes(self, tmp_path):
        a = emit_csv(ex.run_efficiency(small_cfg()), tmp_path / "a.csv")
        b = emit_csv(ex.run_efficiency(small_cfg()), tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_golden(self, tmp_path):
        out = emit_csv(ex.run_efficiency(small_cfg()), tmp_path / "g.csv")
        assert out.read_text() == (DATA / "golden_efficiency.csv").read_text()

    def test_reordering_densities(self):
        kw = dict(sizes=(30,), reps=5, estimators=("mean", "median"))
        a = ex.run_efficiency(small_cfg(densities=("normal", "laplace"), **kw))
        b = ex.run_efficiency(small_cfg(densities=("laplace", "normal"), **kw))
        assert sorted(a.rows) == sorted(b.rows)

    def test_estimator_subset_does_not_shift_samples(self):
        a = ex.run_efficiency(small_cfg(sizes=(30,), estimators=("mean", "median")))
        b = ex.run_efficiency(small_cfg(sizes=(30,), estimators=("median",)))
        assert a.lookup(estimator="median") == b.lookup(estimator="median")

    def test_infinite_information_blank(self):
        t = ex.run_efficiency(small_cfg(densities=("symbeta2",), sizes=(30,), reps=3,
                                        estimators=("mean",)))
        assert t.rows[0][6] == ""

    def test_failures_counted(self, monkeypatch):
        from lcloc.errors import DegenerateInformationError

        def boom(x, fhat):
            raise DegenerateInformationError("flat")

        real = ex.parse_estimator
        monkeypatch.setattr(ex, "parse_estimator",
                            lambda lab, eta=0.002: ex.Estimator("bad", False, boom)
                            if lab == "bad" else real(lab, eta))
        t = ex.run_efficiency(small_cfg(sizes=(30,), reps=4, estimators=("mean", "bad")))
        bad = t.lookup(estimator="bad")
        assert bad[4] == 4 and math.isnan(bad[5])
        assert t.lookup(estimator="mean")[4] == 0


class TestInfoCurves:
    def test_rows_and_ratios(self):
        t = ex.run_info_curves(["normal", "symbeta2.1", "symbeta2"], [0.01, 0.4])
        assert t.header == ex.INFO_HEADER and len(t) == 6
        assert t.lookup(density="symbeta2.1", eta=0.01)[3] == pytest.approx(0.05, abs=0.005)
        for d in ("normal", "symbeta2.1"):
            assert t.lookup(density=d, eta=0.4)[3] < t.lookup(density=d, eta=0.01)[3]
        assert t.lookup(density="symbeta2", eta=0.01)[3] == 0.0

    @pytest.mark.parametrize("etas", [[], [0.0], [0.5], [0.1, 0.7]])
    def test_bad_grid(self, etas):
        with pytest.raises(ArgumentError):
            ex.run_info_curves(["normal"], etas)


class TestDiagnostics:
    def test_normal_golden(self):
        run = ex.run_diagnostics(ex.sample_for("normal", 50, 20240101))
        assert run.report.passed
        assert run.min_h >= -1e-7
        assert run.table.header == ("t", "h") and len(run.table) == 1000
        assert run.summary_lines()[-1] == "overall PASS"

    def test_symmetric_three_points(self):
        run = ex.run_diagnostics([-1.0, 0.0, 1.0])
        assert run.result.theta_hat == pytest.approx(0.0, abs=1e-7)


class TestReport:
    def test_empty_table(self, tmp_path):
        with pytest.raises(ArgumentError):
            emit_csv(ex.Table(ex.EFFICIENCY_HEADER), tmp_path / "e.csv")
        with pytest.raises(ArgumentError):
            emit_svg(ex.Table(ex.INFO_HEADER), tmp_path / "e.svg")

    def test_svg_well_formed(self, tmp_path):
        t = ex.run_efficiency(small_cfg(densities=("normal", "laplace"), reps=4))
        p = emit_svg(t, tmp_path / "e.svg")
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")
        assert len(root.findall("{http://www.w3.org/2000/svg}g")) == 2
        q = emit_svg(ex.run_info_curves(["normal"], [0.01, 0.1]), tmp_path / "i.svg")
        ET.parse(q)
        assert emit_svg(t, tmp_path / "e2.svg").read_bytes() == p.read_bytes()

    def test_unknown_header(self, tmp_path):
        with pytest.raises(ArgumentError):
            emit_svg(ex.Table(("a", "b"), [(1, 2)]), tmp_path / "x.svg")

    @given(st.floats(allow_nan=True, allow_infinity=False))
    def test_format_roundtrip(self, v):
        s = format_cell(v)
        if math.isnan(v):
            assert s == ""
        else:
            assert float(s) == pytest.approx(v, rel=1e-11, abs=0)


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


class TestCli:
    def test_config_precedence(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("# comment\nreps = 7\neta = 0.01  # inline\nsizes = 30, 40\n")
        args = cli.make_parser().parse_args(["efficiency", "--config", str(conf), "--reps", "9"])
        cfg = cli.build_config(args)
        assert cfg.reps == 9 and cfg.eta == 0.01 and cfg.sizes == (30, 40)
        args = cli.make_parser().parse_args(["efficiency", "--config", str(conf)])
        assert cli.build_config(args).reps == 7
        args = cli.make_parser().parse_args(["efficiency"])
        assert cli.build_config(args).reps == 300

    def test_full_flag(self):
        args = cli.make_parser().parse_args(["efficiency", "--full"])
        assert cli.build_config(args).reps == cli.FULL_REPS
        args = cli.make_parser().parse_args(["efficiency", "--full", "--reps", "5"])
        assert cli.build_config(args).reps == 5

    def test_unknown_config_key(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("replications = 7\n")
        assert run_cli("efficiency", "--config", conf, "--out", tmp_path) == cli.EXIT_CONFIG

    @pytest.mark.parametrize("argv", [["efficiency", "--reps", "1"], ["efficiency", "--sizes", "x"],
                                      ["nonsense"], ["info-curves", "--etas", "0.7"],
                                      ["estimate", "--estimators", "zzz", "DATA"],
                                      ["efficiency", "--densities", "cauchy"]])
    def test_config_errors(self, tmp_path, argv):
        f = tmp_path / "d.txt"
        f.write_text("1\n2\n3\n")
        argv = [str(f) if a == "DATA" else a for a in argv]
        assert run_cli(*argv, "--out", tmp_path) == cli.EXIT_CONFIG

    def test_efficiency_writes(self, tmp_path, capsys):
        rc = run_cli("efficiency", "--densities", "normal", "--sizes", "30,100", "--reps", 10,
                     "--estimators", "mean,os_pmle_mean_t", "--seed", 99, "--out", tmp_path)
        assert rc == cli.EXIT_OK
        assert (tmp_path / "efficiency.csv").read_text() == \
            (DATA / "golden_efficiency.csv").read_text()
        ET.parse(tmp_path / "efficiency.svg")

    def test_info_curves(self, tmp_path):
        rc = run_cli("info-curves", "--densities", "normal,laplace", "--etas", "0.001,0.1",
                     "--out", tmp_path)
        assert rc == cli.EXIT_OK
        lines = (tmp_path / "info_curves.csv").read_text().splitlines()
        assert lines[0] == "density,eta,info_eta,ratio" and len(lines) == 5

    def test_estimate(self, tmp_path, capsys):
        f = tmp_path / "d.txt"
        f.write_text("# three points\n-1\n\n0\n1\n")
        assert run_cli("estimate", f, "--estimators", "mean,median,mle") == cli.EXIT_OK
        out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
        assert all(abs(float(v)) < 1e-7 for v in out.values())

    @pytest.mark.parametrize("body", ["5\n5\n5\n", "1\nabc\n", "1\n", "1\ninf\n"])
    def test_bad_data(self, tmp_path, body):
        f = tmp_path / "d.txt"
        f.write_text(body)
        assert run_cli("diagnose", "--data", f, "--out", tmp_path) == cli.EXIT_DATA
        assert run_cli("estimate", f) == cli.EXIT_DATA

    def test_missing_data_file(self, tmp_path):
        assert run_cli("estimate", tmp_path / "nope.txt") == cli.EXIT_DATA

    def test_diagnose(self, tmp_path, capsys):
        assert run_cli("diagnose", "--n", 50, "--densities", "normal", "--out", tmp_path) == 0
        assert (tmp_path / "diagnostics.csv").read_text().startswith("t,h\n")
        assert "overall PASS" in (tmp_path / "diagnostics_summary.txt").read_text()

    def test_unwritable_out(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        rc = run_cli("info-curves", "--densities", "normal", "--etas", "0.1",
                     "--out", blocker / "sub")
        assert rc == cli.EXIT_INTERNAL


def test_sample_for_is_seeded():
    a = ex.sample_for("laplace", 20, 3)
    assert np.array_equal(a, ex.sample_for("laplace", 20, 3))
    assert not np.array_equal(a, ex.sample_for("laplace", 20, 4))
    assert refdist.from_tag("laplace").tag == "laplace"
