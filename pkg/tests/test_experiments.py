import csv
import math
import os

import numpy as np
import pytest

from rdpml import cli
from rdpml.experiments import (EXPERIMENTS, ConfigError, ErrorSeries, ExperimentResult, dalembert, default_config,
                               emit_config, fmt, gaussian_1d, parse_config, reentry_time_2d, run, zero_crossings)


def test_parse_config_with_comments_and_powers():
    cfg = parse_config("""
        # coarse check
        experiment = reflect1d
        orders = 1, 3      # odd orders only
        h = 2^-5
        sigma = 2/h
        t_final = 4
    """)
    assert cfg.experiment == "reflect1d" and cfg.orders == (1, 3)
    assert cfg.h == 2.0 ** -5 and cfg.sigma == "2/h" and cfg.t_final == 4.0
    assert cfg.pml_length == default_config("reflect1d").pml_length


def test_overrides_win_over_file():
    cfg = parse_config("experiment = convergence1d\nt_final = 4", {"t-final": "2", "hs": "2**-3, 2**-4"})
    assert cfg.t_final == 2.0 and cfg.hs == (0.125, 0.0625)


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_emit_parse_roundtrip(name):
    cfg = default_config(name)
    assert parse_config(emit_config(cfg)) == cfg


@pytest.mark.parametrize("text,match", [
    ("orders = 1", "experiment"),
    ("experiment = nope", "nope"),
    ("experiment = reflect1d\nbogus = 1", "bogus"),
    ("experiment = reflect1d\nh 0.1", "line 2"),
    ("experiment = reflect1d\nh = abc", "h"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_fmt_round_trips_doubles():
    for x in (math.pi, 1e-300, -2.0 ** -52, 0.1):
        assert float(fmt(x)) == x


def test_error_series_validation():
    s = ErrorSeries([0.0, 1.0, 2.0], [1e-3, 5e-4, 2e-3])
    assert s.max == 2e-3
    assert s.window(0.5, 1.5).values.tolist() == [5e-4]
    assert s.envelope().tolist() == [1e-3, 1e-3, 2e-3]
    with pytest.raises(ValueError):
        ErrorSeries([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        ErrorSeries([0.0], [-1.0])
    with pytest.raises(ValueError):
        ErrorSeries([0.0, 1.0], [1.0])


def test_result_checks():
    r = ExperimentResult("x")
    r.check("a", 1.0, 2.0)
    r.check("b", 3.0, 2.0, ">=")
    assert r.passed
    r.check("c", 2.0, 2.0, "<")
    assert not r.passed


def test_zero_crossings_of_sine():
    x = np.linspace(0.1, 10, 2000)
    xc = zero_crossings(x, np.sin(x))
    assert np.allclose(xc, np.pi * np.arange(1, 4), atol=1e-5)


def test_dalembert_solves_wave_equation():
    x = np.linspace(-6, 6, 601)
    assert np.array_equal(dalembert(x, 0.0), gaussian_1d(x))
    # two half pulses at +-t
    u = dalembert(x, 2.0)
    assert u[np.argmin(np.abs(x + 1))] == pytest.approx(0.5)
    assert u[np.argmin(np.abs(x + 5))] == pytest.approx(0.5)


def test_reentry_time_definition():
    cfg = default_config("reflect2d")
    # bump at -2 with radius 1/2 inside [-4, 4], layer of width 0.2 wrapping on the torus
    assert reentry_time_2d(cfg, 2.0 ** -5) == pytest.approx(1.72, abs=0.02)


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_convergence_run_writes_outputs(tmp_path):
    cfg = default_config("convergence1d", orders=(2,), hs=(2.0 ** -3, 2.0 ** -4), outdir=str(tmp_path))
    res = run(cfg)
    assert [c.name for c in res.checks] == ["p=2 slope-2p"] and res.passed
    files = sorted(os.listdir(tmp_path))
    assert "summary.csv" in files
    assert any(f.startswith("convergence1d_") for f in files)
    summary = _rows(tmp_path / "summary.csv")
    assert summary[0] == ["experiment", "p", "h", "metric", "value", "threshold", "passed"]
    assert summary[-1][-1] == "1"
    series = [f for f in files if f.startswith("convergence1d_2_")]
    data = _rows(tmp_path / series[0])
    assert data[0] == ["t", "error"] and len(data) > 10


def test_reflect1d_small_run(tmp_path):
    res = run(default_config("reflect1d", orders=(2,), h=2.0 ** -4, outdir=str(tmp_path)))
    assert res.passed
    assert res.checks[0].value < 1e-10


def test_helmholtz_compare_small_run(tmp_path):
    res = run(default_config("helmholtz-compare", orders=(1,), omegas=(3.0,), outdir=str(tmp_path)))
    assert res.passed and len(res.checks) == 7


def test_run_without_writing(tmp_path):
    cfg = default_config("helmholtz-compare", orders=(1,), omegas=(5.0,), outdir=str(tmp_path / "none"))
    run(cfg, write=False)
    assert not os.path.exists(tmp_path / "none")


def test_cli_dry_run(capsys):
    assert cli.main(["reflect2d", "--dry-run", "--h", "2^-4", "--orders", "1,2"]) == 0
    cfg = parse_config(capsys.readouterr().out)
    assert cfg.h == 0.0625 and cfg.orders == (1, 2)


def test_cli_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("experiment = helmholtz-compare\norders = 1\nomegas = 3\noutdir = %s\n" % tmp_path)
    assert cli.main(["helmholtz-compare", "--config", str(path)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_failing_threshold_exits_one(tmp_path):
    assert cli.main(["helmholtz-compare", "--orders", "1", "--omegas", "3", "--threshold", "1e-30",
                     "--outdir", str(tmp_path)]) == 1


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["reflect1d", "--bogus", "1"]) == 2
    path = tmp_path / "other.cfg"
    path.write_text("experiment = waveguide\n")
    assert cli.main(["reflect1d", "--config", str(path)]) == 2
    assert cli.main([]) == 0


def test_cli_tools(capsys, tmp_path):
    assert cli.main(["stencil", "--p", "2"]) == 0
    assert "-5/2" in capsys.readouterr().out
    assert cli.main(["dispersion", "roots", "--p", "2", "--h", "0.1", "--omega", "5"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "r,z_re,z_im,xi_re,xi_im" and len(lines) == 3
    assert cli.main(["dispersion", "rho", "--sigma", "0", "--xi", "1", "--omega", "5", "--h", "0.1"]) == 0
    assert "|rho| = 1.0000000000000000e+00" in capsys.readouterr().out
    out = tmp_path / "map.csv"
    assert cli.main(["dispersion", "map", "--p", "1", "--h", "0.1", "--omega", "5", "--resolution", "5",
                     "--out", str(out)]) == 0
    assert len(_rows(out)) == 26
    assert cli.main(["helmholtz", "pattern", "--p", "2", "--n", "32"]) == 0
    assert "phi1,phi1" in capsys.readouterr().out
    assert cli.main(["helmholtz", "solve", "--n", "32", "--bc", "dirichlet", "--system", "reduced"]) == 0
    assert len(capsys.readouterr().out.strip().split("\n")) == 33
