"""Acceptance battery: eleven end-to-end criteria, one test (and one
pass/fail line under ``pytest -v``) each.

Every numeric threshold lives in ``muskatsim.verify.TOLERANCES``; the
tests here drive the corresponding check functions at the stated
configurations, assert the outcome, and guard the stated runtimes."""

import math
import os
import time

import numpy as np
import pytest

from muskatsim import (CliInvocation, canonical_config, dispatch, make_grid)
from muskatsim.verify import (check_a_tau, check_bulk_fields,
                              check_global_existence, check_kinematics,
                              check_linear_rates, check_operator_identities,
                              check_phi_symbols, check_pv_log,
                              check_resolvent, check_smoothing,
                              check_stepper_order)

GRID512 = make_grid(512, 2.0 * math.pi)


def _require(results, *names):
    """Assert the named checks passed; print one summary line."""
    found = {r.name: r for r in results}
    msgs, ok = [], True
    for n in names:
        assert n in found, f"battery did not report {n}"
        r = found[n]
        msgs.append(f"{n}: measured={r.measured:.6g} tol={r.tolerance:g} "
                    f"{'PASS' if r.passed else 'FAIL'}")
        ok = ok and r.passed
    line = "; ".join(msgs)
    print(line)
    assert ok, line


def test_criterion_01_operator_identities():
    """Flat-state kernels collapse to Hilbert multiples at 1e-6 (rel L2,
    20 seeded smooth probes, N = 512)."""
    t0 = time.perf_counter()
    results = check_operator_identities(GRID512, seed=0)
    elapsed = time.perf_counter() - t0
    _require(results, "a_family_zero", "b_family_zero")
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s exceeds 5s"


def test_criterion_02_flat_symbols():
    """Linearized multipliers at the flat state: -pi|xi| for the graph
    evolution, -pi|xi|^3 for the third-order tension part, at 1e-5."""
    t0 = time.perf_counter()
    results = check_phi_symbols(GRID512)
    elapsed = time.perf_counter() - t0
    _require(results, "phi_symbol_no_tension", "phi_symbol_tension_p1")
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s exceeds 5s"


def test_criterion_03_log_kernel_identity():
    """PV log-kernel identity residual <= 1e-6 at N = 512 and >= 3x
    contraction under quadrature refinement."""
    results = check_pv_log(GRID512)
    _require(results, "pv_log_residual", "pv_log_contraction")


def test_criterion_04_resolvent_inequality():
    """Sampled resolvent factor never exceeds the closed-form ceiling
    (margin <= 1e-9) over beta in {pi, pi/2, pi/10}, |alpha| <= 5;
    order-3 constant finite."""
    t0 = time.perf_counter()
    results = check_resolvent(GRID512)
    elapsed = time.perf_counter() - t0
    _require(results, "resolvent_factor_margin", "resolvent_order3_kappa")
    kappa = next(r for r in results if r.name == "resolvent_order3_kappa")
    assert math.isfinite(kappa.measured)
    assert elapsed < 10.0, f"runtime {elapsed:.2f}s exceeds 10s"


def test_criterion_05_damping_coefficient_bound():
    """|a_tau| obeys the slope/seminorm ceiling on 10 seeded profiles
    and vanishes identically at tau = 0."""
    results = check_a_tau(GRID512, seed=0)
    _require(results, "a_tau_ceiling_margin", "a_tau_vanishes_at_zero")
    zero = next(r for r in results if r.name == "a_tau_vanishes_at_zero")
    assert zero.measured == 0.0


def test_criterion_06_linear_rates():
    """Mode-one amplitude rates match the flat-interface symbols within
    2% over one e-folding, both regimes, including an unstable
    tension mode."""
    results = check_linear_rates()
    _require(results, "linear_rate_no_tension",
             "linear_rate_tension_growth", "linear_rate_tension_decay")


def test_criterion_07_global_existence_run():
    """Small-Wiener datum (0.10) runs to t_end = 10 at N = 512 with
    status Finished, bounded Sobolev norm, and Wiener norm never above
    1.05x its initial value."""
    t0 = time.perf_counter()
    results = check_global_existence(canonical_config())
    elapsed = time.perf_counter() - t0
    _require(results, "global_run_finished", "global_run_hs_growth",
             "global_run_wiener_growth")
    assert elapsed < 300.0, f"runtime {elapsed:.2f}s exceeds 5 min"


def test_criterion_08_smoothing_signature():
    """Rough datum develops exponential spectral decay: grid-unit slope
    <= -1 by t = 0.1, magnitude nondecreasing through t = 0.4."""
    results = check_smoothing(canonical_config())
    _require(results, "smoothing_slope_grid", "smoothing_monotone")


def test_criterion_09_kinematic_and_bulk_consistency():
    """Trace normal velocity reproduces the interface evolution
    (<= 1e-4, two-sided <= 1e-8) and the reconstructed bulk fields obey
    incompressibility and the momentum law."""
    results = check_kinematics(GRID512) + check_bulk_fields(GRID512)
    _require(results, "kinematic_residual", "kinematic_two_sided",
             "divergence_free", "darcy_residual")


def test_criterion_10_stepper_order():
    """Observed fixed-dt convergence order 1.0 +/- 0.2 against a dt/16
    reference, both regimes."""
    results = check_stepper_order()
    _require(results, "stepper_order_no_tension", "stepper_order_tension")


def test_criterion_11_determinism(tmp_path):
    """Repeated verify and simulate invocations with a fixed seed
    produce byte-identical CSV outputs."""
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(
        "sigma = 0\ndelta_rho = 1\nN = 64\nL = 6.283185307179586\n"
        "t_end = 0.02\ndt_init = 0.001\ndt_max = 0.01\ntol_step = 1e-4\n"
        "snapshot_every = 0.01\nseed = 3\ninitial.kind = rough_hs\n"
        "initial.amplitude = 0.05\n", encoding="utf-8")

    def _csv_bytes(base):
        out = {}
        for root, _, files in os.walk(base):
            for name in sorted(files):
                if name.endswith(".csv"):
                    rel = os.path.join(os.path.relpath(root, base), name)
                    with open(os.path.join(root, name), "rb") as fh:
                        out[rel] = fh.read()
        return out

    sim_rcs, sim_out = [], []
    for tag in ("a", "b"):
        base = tmp_path / f"sim_{tag}"
        sim_rcs.append(dispatch(CliInvocation(
            "simulate", config_path=str(cfg_path), output_dir=str(base))))
        sim_out.append(_csv_bytes(base))
    assert sim_rcs == [0, 0]
    keys_a = {os.path.basename(k) for k in sim_out[0]}
    keys_b = {os.path.basename(k) for k in sim_out[1]}
    assert keys_a == keys_b and keys_a
    by_name = [{os.path.basename(k): v for k, v in out.items()}
               for out in sim_out]
    for name in keys_a:
        assert by_name[0][name] == by_name[1][name], f"simulate CSV {name} differs"

    ver_rcs, ver_out = [], []
    for tag in ("a", "b"):
        base = tmp_path / f"ver_{tag}"
        ver_rcs.append(dispatch(CliInvocation(
            "verify", output_dir=str(base))))
        ver_out.append(_csv_bytes(base))
    assert ver_rcs == [0, 0]
    names = [{os.path.basename(k): v for k, v in out.items()}
             for out in ver_out]
    assert set(names[0]) == set(names[1]) and names[0]
    for name in names[0]:
        assert names[0][name] == names[1][name], f"verify CSV {name} differs"
    print(f"simulate CSVs identical ({len(keys_a)} files); "
          f"verify CSVs identical ({len(names[0])} files)")
