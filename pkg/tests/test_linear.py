"""Frozen-coefficient multipliers: construction, application, exact
resolvent solves, and the sampled resolvent-inequality constant."""

import math

import numpy as np
import pytest

from muskatsim import (FrozenSymbol, InvalidInputError, Profile,
                       QuadratureRule, Spectrum, apply_frozen, freeze_symbol,
                       make_grid, resolvent_report_to_csv, solve_resolvent,
                       synthesize_profile, to_spectrum,
                       verify_resolvent_inequality)

from conftest import smooth_profile


# ----------------------------------------------------------------------
# symbol construction


def test_freeze_flat_state_is_pure_decay(grid256, rule256):
    zero = Profile(grid256, np.zeros(grid256.N))
    s1 = freeze_symbol(zero, 1.0, 0, 1, rule256)
    assert s1.order == 1
    assert s1.alpha == pytest.approx(0.0, abs=1e-12)
    assert s1.beta == pytest.approx(math.pi, abs=1e-12)

    s3 = freeze_symbol(zero, 1.0, 0, 3, rule256)
    assert s3.alpha == 0.0
    assert s3.beta == pytest.approx(math.pi, abs=1e-12)

    # tau = 0 kills the slope correction for any profile
    f = smooth_profile(grid256, seed=21, amplitude=0.5)
    s0 = freeze_symbol(f, 0.0, 5, 3, rule256)
    assert s0.beta == pytest.approx(math.pi, abs=1e-12)


def test_freeze_unit_slope_order3(grid256, rule256):
    """f'(x0) = 1 at tau = 1 gives beta = pi / 2^(3/2) exactly."""
    L = grid256.L
    f = Profile(grid256, (L / math.pi) * np.sin(math.pi * grid256.x / L))
    i0 = grid256.N // 2  # x = 0, where f' = 1
    s = freeze_symbol(f, 1.0, i0, 3, rule256)
    assert abs(s.beta - math.pi / 2.0 ** 1.5) <= 1e-13


def test_symbol_validation():
    with pytest.raises(InvalidInputError):
        FrozenSymbol(order=2, alpha=0.0, beta=1.0)
    with pytest.raises(InvalidInputError):
        FrozenSymbol(order=1, alpha=0.0, beta=0.0)
    with pytest.raises(InvalidInputError):
        FrozenSymbol(order=1, alpha=0.0, beta=3.2)  # beyond pi
    with pytest.raises(InvalidInputError):
        FrozenSymbol(order=3, alpha=1.0, beta=1.0)  # order 3 has no drift
    with pytest.raises(InvalidInputError):
        FrozenSymbol(order=1, alpha=math.nan, beta=1.0)


def test_freeze_validation(grid256, rule256):
    zero = Profile(grid256, np.zeros(grid256.N))
    with pytest.raises(InvalidInputError):
        freeze_symbol(zero, -0.1, 0, 1, rule256)
    with pytest.raises(InvalidInputError):
        freeze_symbol(zero, 1.5, 0, 1, rule256)
    with pytest.raises(InvalidInputError):
        freeze_symbol(zero, 1.0, grid256.N, 1, rule256)
    with pytest.raises(InvalidInputError):
        freeze_symbol(zero, 1.0, 0, 2, rule256)


# ----------------------------------------------------------------------
# applying the multiplier


def test_apply_frozen_single_modes_order1(grid256):
    """m(xi) h for h = cos(k pi x / L): -beta xi cos - alpha xi sin."""
    sym = FrozenSymbol(order=1, alpha=0.7, beta=2.0)
    L = grid256.L
    for k in (1, 5, 20):
        xi = k * math.pi / L
        arg = k * math.pi * grid256.x / L
        out = apply_frozen(sym, Profile(grid256, np.cos(arg)))
        want = -sym.beta * xi * np.cos(arg) - sym.alpha * xi * np.sin(arg)
        scale = max(1.0, float(np.max(np.abs(want))))
        assert float(np.max(np.abs(out.values - want))) / scale <= 1e-12


def test_apply_frozen_single_modes_order3(grid256):
    sym = FrozenSymbol(order=3, alpha=0.0, beta=1.5)
    L = grid256.L
    for k in (1, 5, 20):
        xi = k * math.pi / L
        arg = k * math.pi * grid256.x / L
        out = apply_frozen(sym, Profile(grid256, np.sin(arg)))
        want = -sym.beta * xi ** 3 * np.sin(arg)
        scale = max(1.0, float(np.max(np.abs(want))))
        assert float(np.max(np.abs(out.values - want))) / scale <= 1e-8


def test_apply_frozen_spectrum_matches_profile(grid256):
    sym = FrozenSymbol(order=1, alpha=-1.2, beta=3.0)
    h = smooth_profile(grid256, seed=22)
    via_profile = apply_frozen(sym, h)
    via_spec = apply_frozen(sym, to_spectrum(h))
    assert isinstance(via_spec, Spectrum)
    back = synthesize_profile(grid256, via_spec.coeffs)
    np.testing.assert_allclose(back.values, via_profile.values,
                               rtol=0, atol=1e-13)


# ----------------------------------------------------------------------
# resolvent identity: (lambda - m) u = rhs reproduced after the solve


def _spectrum_identity_error(sym, lam, rhs_spec):
    u = solve_resolvent(sym, lam, rhs_spec)
    back = lam * u.coeffs - apply_frozen(sym, u).coeffs
    scale = max(1.0, float(np.max(np.abs(rhs_spec.coeffs))))
    return float(np.max(np.abs(back - rhs_spec.coeffs))) / scale


def test_resolvent_identity_spectrum_path(grid256):
    """50 random right-hand sides, both orders, real and complex lambda."""
    rng = np.random.default_rng(0)
    syms = [FrozenSymbol(order=1, alpha=1.3, beta=2.0),
            FrozenSymbol(order=3, alpha=0.0, beta=math.pi)]
    lams = [2.5, 1.0 + 3.0j, 17.0 - 4.0j]
    worst = 0.0
    for trial in range(50):
        coeffs = (rng.standard_normal(grid256.N)
                  + 1j * rng.standard_normal(grid256.N))
        rhs = Spectrum(grid256, coeffs)
        sym = syms[trial % 2]
        lam = lams[trial % 3]
        worst = max(worst, _spectrum_identity_error(sym, lam, rhs))
    assert worst <= 1e-12


def test_resolvent_identity_profile_order1(grid256):
    sym = FrozenSymbol(order=1, alpha=0.8, beta=math.pi)
    worst = 0.0
    for seed in range(8):
        rhs = smooth_profile(grid256, seed=seed)
        u = solve_resolvent(sym, 2.5, rhs)
        back = 2.5 * u.values - apply_frozen(sym, u).values
        worst = max(worst, float(np.max(np.abs(back - rhs.values))))
    assert worst <= 1e-12


def test_resolvent_identity_profile_order3_regression(grid256):
    """Profile-path detour for the cubic symbol.

    The round trip solve -> apply passes through two FFT pairs whose
    roundoff is amplified by max |m| = beta * xi_max^3 (~5e6 here), so the
    identity floor is ~1e-10 rather than machine epsilon.  The operator
    identity itself is exact in the diagonal realization (see the
    spectrum-path test); this guards the profile path at its honest floor.
    """
    sym = FrozenSymbol(order=3, alpha=0.0, beta=math.pi)
    worst = 0.0
    for seed in range(8):
        rhs = smooth_profile(grid256, seed=seed)
        u = solve_resolvent(sym, 2.5, rhs)
        back = 2.5 * u.values - apply_frozen(sym, u).values
        worst = max(worst, float(np.max(np.abs(back - rhs.values))))
    assert worst <= 1e-9


def test_resolvent_solve_validation(grid256):
    sym = FrozenSymbol(order=1, alpha=0.0, beta=math.pi)
    rhs = smooth_profile(grid256, seed=23)
    with pytest.raises(InvalidInputError):
        solve_resolvent(sym, 0.0, rhs)
    with pytest.raises(InvalidInputError):
        solve_resolvent(sym, -2.0, rhs)
    with pytest.raises(InvalidInputError):
        solve_resolvent(sym, 1.0 + 2.0j, rhs)  # complex lambda needs Spectrum
    # complex lambda on a Spectrum is fine
    solve_resolvent(sym, 1.0 + 2.0j, to_spectrum(rhs))


# ----------------------------------------------------------------------
# sampled inequality constant


def test_resolvent_constant_flat_symbol(grid256):
    """Pure decay beta = pi: the worst sample is the trivial xi = 0,
    |lambda| = 1 corner where the ratio is exactly 2."""
    for order in (1, 3):
        sym = FrozenSymbol(order=order, alpha=0.0, beta=math.pi)
        rep = verify_resolvent_inequality(sym, grid256, n_lambda=40)
        assert rep.kappa0_measured == pytest.approx(2.0, abs=1e-12)
        if order == 1:
            assert rep.proof_bound == pytest.approx(math.sqrt(3.0) + 1.0)
            assert rep.kappa0_measured <= rep.proof_bound
        else:
            assert rep.proof_bound is None


def test_resolvent_constant_small_beta(grid256):
    """Weak decay inflates the constant but stays under the ceiling."""
    sym = FrozenSymbol(order=1, alpha=0.0, beta=0.01)
    rep = verify_resolvent_inequality(sym, grid256, n_lambda=40)
    assert rep.proof_bound == pytest.approx(math.sqrt(3.0) + 100.0)
    assert rep.kappa0_measured <= rep.proof_bound
    assert rep.kappa0_measured == pytest.approx(39.63891, rel=1e-5)


def test_resolvent_constant_sample_stability(grid256):
    sym = FrozenSymbol(order=1, alpha=2.5, beta=math.pi)
    k40 = verify_resolvent_inequality(sym, grid256, n_lambda=40)
    k80 = verify_resolvent_inequality(sym, grid256, n_lambda=80)
    assert k40.kappa0_measured <= k40.proof_bound
    # denser sampling does not move the measured constant materially
    assert abs(k80.kappa0_measured - k40.kappa0_measured) <= 0.05 * k40.kappa0_measured


def test_resolvent_inequality_needs_enough_samples(grid256):
    sym = FrozenSymbol(order=1, alpha=0.0, beta=math.pi)
    with pytest.raises(InvalidInputError):
        verify_resolvent_inequality(sym, grid256, n_lambda=19)


def test_resolvent_report_csv(tmp_path):
    grid = make_grid(64, math.pi)
    sym = FrozenSymbol(order=1, alpha=1.0, beta=2.0)
    rep = verify_resolvent_inequality(sym, grid, n_lambda=20)
    path = tmp_path / "resolvent.csv"
    resolvent_report_to_csv(rep, path)
    lines = path.read_text(encoding="ascii").splitlines()
    assert lines[0] == "lambda_re,lambda_im,xi,ratio"
    assert len(lines) == 1 + rep.lambda_samples.size * rep.xi_samples.size
    first = lines[1].split(",")
    assert len(first) == 4
    assert float(first[0]) == pytest.approx(rep.lambda_samples[0].real)
