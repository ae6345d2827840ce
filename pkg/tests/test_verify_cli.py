"""Check battery plumbing and the command-line front end."""

import math
import os

import numpy as np
import pytest

from muskatsim import (CliInvocation, ConfigError, InvalidInputError,
                       Profile, TOLERANCES, dispatch, make_grid, make_initial,
                       parse_config, report_lines, report_to_csv,
                       rough_profile, run_identity_checks)


# ----------------------------------------------------------------------
# identity battery


def test_identity_checks_pass_and_match_tolerances():
    results = run_identity_checks(make_grid(256, 2.0 * math.pi))
    assert results, "battery produced no results"
    for r in results:
        assert r.name in TOLERANCES, f"unlisted check {r.name}"
        assert r.tolerance == TOLERANCES[r.name]
        assert r.passed, f"{r.name}: {r.measured} vs {r.tolerance}"
    names = [r.name for r in results]
    assert names == sorted(names)


def test_identity_checks_degrade_without_crashing():
    """A deliberately coarse grid may fail quadrature-floor checks but
    the battery still completes and reports every check."""
    fine = {r.name for r in run_identity_checks(make_grid(256, 2.0 * math.pi))}
    coarse = run_identity_checks(make_grid(64, 2.0 * math.pi))
    assert {r.name for r in coarse} == fine
    for r in coarse:
        assert isinstance(r.passed, bool)
        assert math.isfinite(r.measured)


def test_report_lines_and_csv(tmp_path):
    results = run_identity_checks(make_grid(64, 2.0 * math.pi))
    lines = report_lines(results)
    assert len(lines) == len(results)
    assert all(("PASS" in ln) or ("FAIL" in ln) for ln in lines)

    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    report_to_csv(results, a)
    report_to_csv(run_identity_checks(make_grid(64, 2.0 * math.pi)), b)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text(encoding="ascii").splitlines()[0]
    assert header == "name,measured,tolerance,passed"


# ----------------------------------------------------------------------
# config parsing


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_parse_minimal_config(tmp_path):
    path = _write(tmp_path, """
# minimal run
sigma = 0
delta_rho = 1
L = 6.2832
N = 512
t_end = 1
""")
    cfg = parse_config(path)
    assert cfg.params.regime == "no_tension"
    assert cfg.params.delta_rho == 1.0
    assert cfg.grid.N == 512
    assert cfg.grid.L == pytest.approx(6.2832)
    assert cfg.t_end == 1.0
    # documented defaults
    assert cfg.dt_init == 1e-3
    assert cfg.dt_min == 1e-7
    assert cfg.dt_max == 5e-2
    assert cfg.tol_step == 1e-5
    assert cfg.s_monitor == 1.75
    assert cfg.blowup_threshold == 1e3
    assert cfg.snapshot_every == pytest.approx(0.1)
    assert cfg.seed == 0


def test_parse_config_overrides_win(tmp_path):
    path = _write(tmp_path, "sigma = 0\ndelta_rho = 1\nN = 64\n")
    cfg = parse_config(path, overrides=("N = 128", "t_end = 0.5"))
    assert cfg.grid.N == 128
    assert cfg.t_end == 0.5


def test_parse_config_error_cites_line(tmp_path):
    path = _write(tmp_path, "sigma = 0\nwibble = 3\n")
    with pytest.raises(ConfigError, match=r"run\.cfg:2.*wibble"):
        parse_config(path)


def test_parse_config_error_cites_override(tmp_path):
    path = _write(tmp_path, "sigma = 0\n")
    with pytest.raises(ConfigError, match=r"--set #1.*wibble"):
        parse_config(path, overrides=("wibble = 3",))


def test_parse_config_bad_types(tmp_path):
    with pytest.raises(ConfigError, match="expects an integer"):
        parse_config(_write(tmp_path, "N = many\n"))
    with pytest.raises(ConfigError, match="expects a number"):
        parse_config(_write(tmp_path, "t_end = soon\n"))
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config(_write(tmp_path, "just some words\n"))


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        parse_config(str(tmp_path / "nope.cfg"))


def test_parse_config_regime_errors_become_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "sigma = 0\ntheta = 2\n"))
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "sigma = 0\ndelta_rho = -1\n"))
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "N = 7\n"))


def test_parse_config_tension_defaults(tmp_path):
    cfg = parse_config(_write(tmp_path, "sigma = 1\ntheta = 2\n"))
    assert cfg.params.regime == "tension"
    assert cfg.s_monitor == 2.5


# ----------------------------------------------------------------------
# initial data


def test_make_initial_single_mode(tmp_path):
    cfg = parse_config(None, overrides=(
        "N = 64", "initial.kind = single_mode", "initial.mode = 3",
        "initial.amplitude = 0.2"))
    f = make_initial(cfg)
    want = 0.2 * np.cos(3.0 * math.pi * cfg.grid.x / cfg.grid.L)
    np.testing.assert_allclose(f.values, want, rtol=0, atol=1e-15)


def test_make_initial_single_mode_validation():
    for bad in ("initial.mode = 0", "initial.mode = 32"):
        cfg = parse_config(None, overrides=("N = 64", bad))
        with pytest.raises(InvalidInputError):
            make_initial(cfg)
    cfg = parse_config(None, overrides=("N = 64", "initial.amplitude = -1"))
    with pytest.raises(InvalidInputError):
        make_initial(cfg)


def test_make_initial_gaussian_bump():
    cfg = parse_config(None, overrides=(
        "N = 256", "initial.kind = gaussian_bump", "initial.amplitude = 0.3"))
    f = make_initial(cfg)
    grid = cfg.grid
    w = grid.L / 20.0
    raw = 0.3 * np.exp(-grid.x ** 2 / (2.0 * w * w))
    # the raw bump is periodization-clean: boundary tail below 1e-12
    assert raw[0] < 1e-12
    np.testing.assert_array_equal(f.values, raw - float(np.mean(raw)))
    assert abs(float(np.mean(f.values))) <= 1e-16


def test_make_initial_rough(tmp_path):
    cfg = parse_config(None, overrides=(
        "N = 128", "seed = 11", "initial.kind = rough_hs",
        "initial.amplitude = 0.05", "initial.s_rough = 1.8"))
    f = make_initial(cfg)
    want = rough_profile(cfg.grid, 1.8, 0.05, 11)
    np.testing.assert_array_equal(f.values, want.values)


def test_make_initial_rejects_steep_and_unknown():
    cfg = parse_config(None, overrides=(
        "N = 256", "L = 3.141592653589793", "initial.mode = 20",
        "initial.amplitude = 2.0"))
    with pytest.raises(InvalidInputError, match="too steep"):
        make_initial(cfg)
    cfg = parse_config(None, overrides=("initial.kind = wavelet",))
    with pytest.raises(InvalidInputError, match="unknown initial.kind"):
        make_initial(cfg)


# ----------------------------------------------------------------------
# dispatch


QUICK_CFG = """
sigma = 0
delta_rho = 1
N = 64
L = 6.283185307179586
t_end = 0.02
dt_init = 0.001
dt_min = 1e-7
dt_max = 0.01
tol_step = 1e-4
snapshot_every = 0.01
initial.kind = single_mode
initial.mode = 2
initial.amplitude = 0.05
"""


def _only_run_dir(base, sub):
    entries = [e for e in os.listdir(base) if e.startswith(sub + "-")]
    assert len(entries) == 1, entries
    return os.path.join(base, entries[0])


def test_invocation_rejects_unknown_subcommand():
    with pytest.raises(ConfigError):
        CliInvocation("frobnicate")


def test_dispatch_make_initial(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    out = tmp_path / "runs"
    rc = dispatch(CliInvocation("make-initial", config_path=cfg_path,
                                output_dir=str(out)))
    assert rc == 0
    run_dir = _only_run_dir(out, "make-initial")
    for name in ("initial_profile.csv", "initial_spectrum.csv",
                 "fig_initial.png"):
        assert os.path.exists(os.path.join(run_dir, name)), name


def test_dispatch_config_error_is_exit_2(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    rc = dispatch(CliInvocation("make-initial", config_path=cfg_path,
                                output_dir=str(tmp_path / "r"),
                                overrides=("wibble = 1",)))
    assert rc == 2


def test_dispatch_simulate(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    out = tmp_path / "runs"
    rc = dispatch(CliInvocation("simulate", config_path=cfg_path,
                                output_dir=str(out)))
    assert rc == 0
    run_dir = _only_run_dir(out, "simulate")
    files = set(os.listdir(run_dir))
    assert "diagnostics.csv" in files
    assert "fig_profile.png" in files
    assert "fig_diagnostics.png" in files
    assert any(f.startswith("snap_") for f in files)


def test_dispatch_reconstruct_fields(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    out = tmp_path / "runs"
    assert dispatch(CliInvocation("simulate", config_path=cfg_path,
                                  output_dir=str(out))) == 0
    run_dir = _only_run_dir(out, "simulate")
    snaps = sorted(f for f in os.listdir(run_dir) if f.startswith("snap_"))

    # without a snapshot the subcommand is a usage error
    rc = dispatch(CliInvocation("reconstruct-fields", config_path=cfg_path,
                                output_dir=str(out)))
    assert rc == 2

    rc = dispatch(CliInvocation("reconstruct-fields", config_path=cfg_path,
                                output_dir=str(out),
                                resume_path=os.path.join(run_dir, snaps[-1])))
    assert rc == 0
    fdir = _only_run_dir(out, "reconstruct-fields")
    for name in ("fields.csv", "traces.csv", "fig_fields.png"):
        assert os.path.exists(os.path.join(fdir, name)), name
    with open(os.path.join(fdir, "traces.csv"), encoding="ascii") as fh:
        assert fh.readline().strip() == ("x,f,omega,vx_plus,vy_plus,"
                                         "vx_minus,vy_minus")


def test_dispatch_linear_analysis(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    out = tmp_path / "runs"
    rc = dispatch(CliInvocation("linear-analysis", config_path=cfg_path,
                                output_dir=str(out)))
    assert rc == 0
    run_dir = _only_run_dir(out, "linear-analysis")
    for name in ("resolvent_report.csv", "linear_summary.txt",
                 "fig_resolvent.png"):
        assert os.path.exists(os.path.join(run_dir, name)), name
    summary = open(os.path.join(run_dir, "linear_summary.txt"),
                   encoding="ascii").read()
    assert "kappa0" in summary


def test_dispatch_simulate_resume(tmp_path):
    cfg_path = _write(tmp_path, QUICK_CFG)
    out = tmp_path / "runs"
    assert dispatch(CliInvocation("simulate", config_path=cfg_path,
                                  output_dir=str(out))) == 0
    run_dir = _only_run_dir(out, "simulate")
    snaps = sorted(f for f in os.listdir(run_dir) if f.startswith("snap_"))
    first_steps = int(snaps[-1].split("_")[1].split(".")[0])

    rc = dispatch(CliInvocation(
        "simulate", config_path=cfg_path, output_dir=str(out),
        resume_path=os.path.join(run_dir, snaps[-1]),
        overrides=("t_end = 0.03",)))
    assert rc == 0
    # resume continues inside the snapshot's own directory
    assert len([e for e in os.listdir(out) if e.startswith("simulate-")]) == 1
    later = sorted(f for f in os.listdir(run_dir) if f.startswith("snap_"))
    last_steps = int(later[-1].split("_")[1].split(".")[0])
    assert last_steps > first_steps
