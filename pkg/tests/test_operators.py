"""Parameter validation, curvature operators, evolution right-hand sides,
their linearization at the flat state, and the log-kernel identity."""

import math

import numpy as np
import pytest

from muskatsim import (NormSpec, PhysParams, Profile, RegimeError,
                       curvature, curvature_prime, gateaux_phi, norm,
                       phi_rhs, phi_sigma_rhs, pv_log_identity_residual,
                       spectral_derivative, synthesize_profile, to_spectrum)

from conftest import smooth_profile


# ----------------------------------------------------------------------
# physical parameters


def test_params_no_tension_defaults():
    p = PhysParams(sigma=0.0, delta_rho=1.0)
    assert p.regime == "no_tension"
    assert p.theta is None
    assert p.scale_factor() == pytest.approx(1.0 / (2.0 * math.pi))


def test_params_tension_theta_derivation():
    p = PhysParams(sigma=2.0, delta_rho=1.0)
    assert p.regime == "tension"
    assert p.theta == pytest.approx(0.5)
    # scale factor uses sigma in the tension regime
    assert p.scale_factor() == pytest.approx(2.0 / (2.0 * math.pi))

    q = PhysParams(sigma=2.0, theta=-3.0)
    assert q.delta_rho == pytest.approx(-6.0)


def test_params_density_pair():
    p = PhysParams(sigma=0.0, rho_minus=1.5, rho_plus=0.5, g=2.0)
    assert p.delta_rho == pytest.approx(2.0)
    # consistent explicit delta_rho is accepted
    PhysParams(sigma=0.0, delta_rho=2.0, rho_minus=1.5, rho_plus=0.5, g=2.0)


@pytest.mark.parametrize("kwargs", [
    dict(sigma=-1.0, delta_rho=1.0),
    dict(sigma=0.0, delta_rho=0.0),
    dict(sigma=0.0, delta_rho=-1.0),
    dict(sigma=0.0),                                     # missing delta_rho
    dict(sigma=0.0, delta_rho=1.0, theta=2.0),           # theta needs sigma>0
    dict(sigma=1.0),                                     # needs theta or delta_rho
    dict(sigma=1.0, delta_rho=1.0, theta=2.0),           # inconsistent pair
    dict(sigma=0.0, delta_rho=1.0, rho_minus=1.0),       # half a density pair
    dict(sigma=0.0, delta_rho=5.0, rho_minus=1.5, rho_plus=0.5, g=1.0),
    dict(sigma=0.0, delta_rho=1.0, k_perm=0.0),
    dict(sigma=0.0, delta_rho=1.0, mu=-1.0),
    dict(sigma=0.0, delta_rho=1.0, g=-9.8),
])
def test_params_rejections(kwargs):
    with pytest.raises(RegimeError):
        PhysParams(**kwargs)


# ----------------------------------------------------------------------
# curvature


def test_curvature_small_amplitude(grid256):
    """For tiny slopes the curvature approaches f''."""
    eps = 1e-6
    f = Profile(grid256, eps * np.cos(2.0 * math.pi * grid256.x / grid256.L))
    kap = curvature(f)
    fpp = spectral_derivative(f, 2)
    err = float(np.max(np.abs(kap.values - fpp.values)))
    assert err <= 1e-12 * max(1.0, float(np.max(np.abs(fpp.values)))) + 1e-16


def test_curvature_prime_is_derivative_of_curvature(grid512, rule512):
    f = smooth_profile(grid512, seed=11, amplitude=0.4)
    kp = curvature_prime(f)
    dk = spectral_derivative(curvature(f), 1)
    err = float(np.max(np.abs(kp.values - dk.values)))
    assert err <= 1e-10


# ----------------------------------------------------------------------
# right-hand sides: flat-state symbols


def _mode_profile(grid, k, amp=1.0):
    return Profile(grid, amp * np.cos(k * math.pi * grid.x / grid.L))


def test_phi_rhs_symbol_at_flat(grid256, rule256):
    """At f=0 the graph evolution linearizes to the multiplier -pi |xi|."""
    zero = Profile(grid256, np.zeros(grid256.N))
    for k in (1, 4, 9):
        h = _mode_profile(grid256, k, amp=1.0)
        out = phi_rhs(zero, h, rule256)
        xi = k * math.pi / grid256.L
        want = -math.pi * xi * h.values
        err = float(np.max(np.abs(out.value.values - want)))
        assert err <= 1e-5 * max(1.0, abs(xi) * math.pi)


def test_phi_sigma_rhs_symbol_at_flat(grid256, rule256):
    """At f=0 the tension evolution linearizes to -pi(|xi|^3 + theta |xi|)."""
    params = PhysParams(sigma=1.0, theta=2.0)
    zero = Profile(grid256, np.zeros(grid256.N))
    for k in (1, 3):
        h = _mode_profile(grid256, k, amp=1.0)
        out = phi_sigma_rhs(zero, h, params, rule256)
        xi = k * math.pi / grid256.L
        want = -math.pi * (xi ** 3 + params.theta * xi) * h.values
        scale = max(1.0, math.pi * (xi ** 3 + abs(params.theta) * xi))
        err = float(np.max(np.abs(out.value.values - want)))
        assert err / scale <= 1e-5


def test_phi_sigma_split_parts_sum(grid256, rule256):
    params = PhysParams(sigma=1.0, theta=2.0)
    f = smooth_profile(grid256, seed=12, amplitude=0.2)
    h = smooth_profile(grid256, seed=13, amplitude=0.2)
    out = phi_sigma_rhs(f, h, params, rule256)
    assert out.split_parts is not None and len(out.split_parts) == 2
    s = out.split_parts[0].values + out.split_parts[1].values
    np.testing.assert_allclose(s, out.value.values, rtol=0, atol=1e-10)


def test_phi_sigma_rejects_zero_tension(grid256, rule256):
    params = PhysParams(sigma=0.0, delta_rho=1.0)
    f = Profile(grid256, np.zeros(grid256.N))
    with pytest.raises(RegimeError):
        phi_sigma_rhs(f, f, params, rule256)


def test_quadrature_error_reporting(grid256, rule256):
    f = smooth_profile(grid256, seed=14, amplitude=0.3)
    h = smooth_profile(grid256, seed=15, amplitude=0.3)
    with_err = phi_rhs(f, h, rule256, est_error=True)
    without = phi_rhs(f, h, rule256, est_error=False)
    assert with_err.quadrature_error > 0.0
    assert without.quadrature_error == 0.0
    np.testing.assert_allclose(without.value.values, with_err.value.values,
                               rtol=0, atol=0)


# ----------------------------------------------------------------------
# Gateaux derivative of the graph right-hand side


def test_gateaux_at_flat_state(grid256, rule256):
    """At f0=0 the derivative in direction f1 reduces to the flat symbol."""
    zero = Profile(grid256, np.zeros(grid256.N))
    f1 = smooth_profile(grid256, seed=16)
    h = smooth_profile(grid256, seed=17)
    gat = gateaux_phi(zero, f1, h, rule256)

    # independent value: D phi(0)[f1] applied to h must match the
    # difference quotient of the full nonlinear map to first order
    eps = 1e-6
    plus = phi_rhs(Profile(grid256, eps * f1.values), h, rule256,
                   est_error=False)
    minus = phi_rhs(Profile(grid256, -eps * f1.values), h, rule256,
                    est_error=False)
    fd = (plus.value.values - minus.value.values) / (2.0 * eps)
    scale = max(1.0, float(np.max(np.abs(fd))))
    assert float(np.max(np.abs(gat.values - fd))) / scale <= 1e-4


def test_gateaux_finite_difference_general(grid256, rule256):
    f0 = smooth_profile(grid256, seed=18, amplitude=0.3)
    f1 = smooth_profile(grid256, seed=19)
    h = smooth_profile(grid256, seed=20, amplitude=0.5)
    gat = gateaux_phi(f0, f1, h, rule256)
    eps = 1e-4
    plus = phi_rhs(Profile(grid256, f0.values + eps * f1.values), h, rule256,
                   est_error=False)
    minus = phi_rhs(Profile(grid256, f0.values - eps * f1.values), h, rule256,
                    est_error=False)
    fd = (plus.value.values - minus.value.values) / (2.0 * eps)
    scale = max(1.0, float(np.max(np.abs(fd))))
    assert float(np.max(np.abs(gat.values - fd))) / scale <= 1e-4


# ----------------------------------------------------------------------
# log-kernel identity


def test_pv_log_identity_residual(grid256, rule256):
    f = Profile(grid256, 0.3 * np.sin(math.pi * grid256.x / grid256.L))
    res = pv_log_identity_residual(f, rule256)
    assert res <= 1e-6

    fine = pv_log_identity_residual(f, rule256.refined(2))
    # refinement contracts the residual markedly
    assert res / max(fine, 1e-300) >= 3.0
