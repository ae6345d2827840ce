"""Bulk-flow reconstruction from the interface profile.

The chain is: vorticity density on the curve -> Biot-Savart velocity in
the bulk -> one-sided interface traces -> pressure by path integration.
The Biot-Savart kernel is periodized in closed form (the same lattice
sums the singular quadrature uses), so the bulk velocity carries no
image-truncation error; its only error source is the trapezoid rule in
the curve parameter.  On-curve limits are NOT obtained from the bulk
formula: they come from the one-sided trace decomposition (principal
value plus half-jump), and ``biot_savart`` refuses targets closer to
the curve than two grid spacings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError, NearInterfaceError, NumericsError
from .grid import Profile, spectral_derivative
from .kernels import BKernelSpec, QuadratureRule, _pk_sin, _pk_sinh, apply_B
from .operators import PhysParams, curvature, phi_rhs, phi_sigma_rhs

__all__ = [
    "VorticityDensity",
    "VelocityField2D",
    "InterfaceTraces",
    "vorticity_density",
    "biot_savart",
    "make_velocity_field",
    "interface_traces",
    "kinematic_consistency_report",
    "kinematic_consistency_residual",
    "pressure_field",
    "fields_to_csv",
]


@dataclass(frozen=True)
class VorticityDensity:
    """Tangential vorticity density samples; scale keeps the mobility
    factor k_perm/mu that is already folded into the profile."""

    profile: Profile
    scale: float

    def __post_init__(self):
        m = abs(float(np.mean(self.profile.values)))
        if m > 1e-10 * max(1.0, float(np.max(np.abs(self.profile.values)))):
            raise NumericsError(
                f"vorticity density must have zero mean, got {m:.3e}")


@dataclass(frozen=True)
class VelocityField2D:
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    mask: np.ndarray      # +1 above the interface, -1 below, 0 in the band

    def __post_init__(self):
        shape = (self.y_nodes.size, self.x_nodes.size)
        for name in ("vx", "vy", "mask"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise InvalidInputError(
                    f"{name} has shape {arr.shape}, expected {shape}")
        off = self.mask != 0
        if not (np.all(np.isfinite(self.vx[off]))
                and np.all(np.isfinite(self.vy[off]))):
            raise NumericsError("velocity not finite away from the band")


@dataclass(frozen=True)
class InterfaceTraces:
    """One-sided velocity limits on the curve, component-wise."""

    v_plus: Tuple[Profile, Profile]
    v_minus: Tuple[Profile, Profile]
    principal_part: Tuple[Profile, Profile]


def vorticity_density(f: Profile, params: PhysParams) -> VorticityDensity:
    """(k/mu) * d/dx [sigma*curvature(f) - delta_rho*f]."""
    scale = params.k_perm / params.mu
    drho = params.delta_rho if params.delta_rho is not None else 0.0
    integrand = Profile(f.grid, -drho * f.values)
    if params.sigma > 0.0:
        integrand = Profile(
            f.grid, params.sigma * curvature(f).values + integrand.values)
    omega = spectral_derivative(integrand, 1)
    return VorticityDensity(Profile(f.grid, scale * omega.values), scale)


def _eval_velocity(f: Profile, omega: VorticityDensity,
                   X: np.ndarray, Y: np.ndarray,
                   chunk: int = 4096) -> Tuple[np.ndarray, np.ndarray]:
    """Periodized Biot-Savart sum at arbitrary points, unguarded."""
    g = f.grid
    s = g.x
    fv = f.values
    w = omega.profile.values * g.dx / (2.0 * math.pi)
    vx = np.empty(X.size)
    vy = np.empty(X.size)
    Xf = X.ravel()
    Yf = Y.ravel()
    for lo in range(0, Xf.size, chunk):
        hi = min(lo + chunk, Xf.size)
        u = Xf[lo:hi, None] - s[None, :]
        d = Yf[lo:hi, None] - fv[None, :]
        vx[lo:hi] = -(_pk_sinh(u, d, g.L) * w[None, :]).sum(axis=1)
        vy[lo:hi] = (_pk_sin(u, d, g.L) * w[None, :]).sum(axis=1)
    return vx.reshape(X.shape), vy.reshape(X.shape)


def _curve_distance(f: Profile, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    g = f.grid
    u = X.ravel()[:, None] - g.x[None, :]
    u = np.mod(u + g.L, 2.0 * g.L) - g.L
    d2 = u ** 2 + (Y.ravel()[:, None] - f.values[None, :]) ** 2
    return np.sqrt(d2.min(axis=1)).reshape(X.shape)


def biot_savart(f: Profile, omega: VorticityDensity,
                targets: Sequence[Tuple[float, float]],
                rule: QuadratureRule) -> List[Tuple[float, float]]:
    """Bulk velocity at off-curve points.

    Trapezoid rule in the curve parameter on the profile's own grid
    (``rule`` fixes nothing here beyond sharing the caller's interface;
    the kernel's periodic images are summed exactly).  Targets within
    2*dx of the curve are refused; on-curve values belong to
    ``interface_traces``.
    """
    pts = np.asarray(targets, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError("targets must be (x, y) pairs")
    X, Y = pts[:, 0], pts[:, 1]
    dist = _curve_distance(f, X, Y)
    floor = 2.0 * f.grid.dx
    if np.any(dist < floor):
        bad = int(np.argmin(dist))
        raise NearInterfaceError(
            f"target ({X[bad]:.4g}, {Y[bad]:.4g}) is {dist[bad]:.3g} from "
            f"the curve (need >= {floor:.3g}); use interface_traces for "
            "on-curve values")
    vx, vy = _eval_velocity(f, omega, X, Y)
    return [(float(a), float(b)) for a, b in zip(vx, vy)]


def make_velocity_field(f: Profile, omega: VorticityDensity,
                        d: Optional[float] = None,
                        n_y: int = 161) -> VelocityField2D:
    """Sample the bulk velocity on a mesh suited to pressure paths.

    y runs over [-2d, 2d] with n_y = 4m+1 nodes so that -d, 0, +d are
    mesh rows; x runs over the profile's grid.  Points with vertical
    distance below 2*dx from the curve form the excluded band (NaN)."""
    if n_y < 9 or (n_y - 1) % 4 != 0:
        raise InvalidInputError("n_y must be 4m+1 and at least 9")
    sup = float(np.max(np.abs(f.values)))
    if d is None:
        d = 2.0 * sup if sup > 0.0 else 1.0
    if d <= sup:
        raise InvalidInputError(
            f"mesh half-height d={d:.4g} must exceed max|f|={sup:.4g}")
    g = f.grid
    y_nodes = np.linspace(-2.0 * d, 2.0 * d, n_y)
    X, Y = np.meshgrid(g.x, y_nodes)
    band = np.abs(Y - f.values[None, :]) < 2.0 * g.dx
    mask = np.where(band, 0, np.where(Y > f.values[None, :], 1, -1))
    vx = np.full(X.shape, np.nan)
    vy = np.full(X.shape, np.nan)
    ok = ~band
    vx[ok], vy[ok] = _eval_velocity(f, omega, X[ok], Y[ok])
    return VelocityField2D(x_nodes=g.x, y_nodes=y_nodes, vx=vx, vy=vy,
                           mask=mask.astype(np.int8))


def interface_traces(f: Profile, omega: VorticityDensity,
                     rule: QuadratureRule) -> InterfaceTraces:
    """One-sided limits: shared principal value, then the half-jump.

    The jump is purely tangential, (1, f') * omega/(1+f'^2), so both
    sides share the normal velocity by construction."""
    g = f.grid
    w = omega.profile
    fp = spectral_derivative(f, 1)
    pp1 = apply_B(BKernelSpec(numer_list=[f], denom_list=[f]), w, rule)
    pp1 = Profile(g, -pp1.values / (2.0 * math.pi))
    pp2 = apply_B(BKernelSpec(numer_list=[], denom_list=[f]), w, rule)
    pp2 = Profile(g, pp2.values / (2.0 * math.pi))
    half = 0.5 * w.values / (1.0 + fp.values ** 2)
    vp = (Profile(g, pp1.values - half),
          Profile(g, pp2.values - fp.values * half))
    vm = (Profile(g, pp1.values + half),
          Profile(g, pp2.values + fp.values * half))
    return InterfaceTraces(v_plus=vp, v_minus=vm,
                           principal_part=(pp1, pp2))


def kinematic_consistency_report(f: Profile, params: PhysParams,
                                 rule: QuadratureRule) -> dict:
    """Compare the interface evolution against the trace normal velocity.

    Both sides are expressed in physical time: the multiplier form of
    the evolution times its scale factor, against <v_pm, (-f', 1)> from
    the traces.  Keys: residual_plus, residual_minus, two_sided,
    residual (their max, the headline number)."""
    g = f.grid
    omega = vorticity_density(f, params)
    tr = interface_traces(f, omega, rule)
    fp = spectral_derivative(f, 1).values
    kin_p = -fp * tr.v_plus[0].values + tr.v_plus[1].values
    kin_m = -fp * tr.v_minus[0].values + tr.v_minus[1].values
    if params.regime == "no_tension":
        ev = phi_rhs(f, f, rule, est_error=False)
    else:
        ev = phi_sigma_rhs(f, f, params, rule, est_error=False)
    rhs = params.scale_factor() * ev.value.values
    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        scale = 1.0
    rp = float(np.max(np.abs(kin_p - rhs))) / scale
    rm = float(np.max(np.abs(kin_m - rhs))) / scale
    ts = float(np.max(np.abs(kin_p - kin_m))) / scale
    return {"residual_plus": rp, "residual_minus": rm, "two_sided": ts,
            "residual": max(rp, rm, ts)}


def kinematic_consistency_residual(f: Profile, params: PhysParams,
                                   rule: QuadratureRule) -> float:
    return kinematic_consistency_report(f, params, rule)["residual"]


def _column_pressure(vy_col: np.ndarray, y: np.ndarray, j_ref: int,
                     rows: np.ndarray) -> np.ndarray:
    """Antiderivative of vy along one mesh column, zero at y[j_ref].

    rows is the contiguous index slice of the column's side."""
    ys = y[rows]
    spline = CubicSpline(ys, vy_col[rows])
    anti = spline.antiderivative()
    return anti(ys) - anti(y[j_ref])


def pressure_field(f: Profile, velocity: VelocityField2D,
                   params: PhysParams, d: float) -> np.ndarray:
    """Pressure on the velocity mesh by path integration.

    Each side integrates -(mu/k) vx along its horizontal reference row
    y = +/-d from x = 0, then -(mu/k) vy vertically, plus the
    hydrostatic -rho*g*y term (densities default to 0 when not given).
    The additive gauge puts c_minus = 0; c_plus then enforces the
    normal-stress jump sigma*curvature at x = 0, with both one-sided
    boundary values found by quadratic extrapolation in y.  Band points
    stay NaN."""
    g = f.grid
    sup = float(np.max(np.abs(f.values)))
    if not d > sup:
        raise InvalidInputError(
            f"reference height d={d:.4g} must exceed max|f|={sup:.4g}")
    y = velocity.y_nodes
    x = velocity.x_nodes
    j_p = int(np.argmin(np.abs(y - d)))
    j_m = int(np.argmin(np.abs(y + d)))
    if abs(y[j_p] - d) > 1e-9 or abs(y[j_m] + d) > 1e-9:
        raise InvalidInputError(
            "mesh rows must contain y = +d and y = -d exactly")
    i0 = int(np.argmin(np.abs(x)))
    if abs(x[i0]) > 1e-12:
        raise InvalidInputError("mesh columns must contain x = 0")
    if np.any(velocity.mask[j_p, :] != 1) or np.any(velocity.mask[j_m, :] != -1):
        raise InvalidInputError(
            "reference rows y = +/-d intersect the interface band")
    mob = params.mu / params.k_perm
    rho_p = params.rho_plus if params.rho_plus is not None else 0.0
    rho_m = params.rho_minus if params.rho_minus is not None else 0.0
    grav = params.g

    p = np.full(velocity.vx.shape, np.nan)
    horiz = {}
    for side, j_ref in ((1, j_p), (-1, j_m)):
        row = velocity.vx[j_ref, :]
        spline = CubicSpline(x, row)
        anti = spline.antiderivative()
        horiz[side] = anti(x) - anti(x[i0])
    for i in range(x.size):
        col_mask = velocity.mask[:, i]
        for side, j_ref, rho in ((1, j_p, rho_p), (-1, j_m, rho_m)):
            rows = np.nonzero(col_mask == side)[0]
            vert = _column_pressure(velocity.vy[:, i], y, j_ref, rows)
            p[rows, i] = (-mob * horiz[side][i] - mob * vert
                          - rho * grav * y[rows])
    # pin the constants: quadratic extrapolation of each side's pressure
    # to the curve at x = 0, then c_plus - c_minus = sigma*curvature(0).
    kap = params.sigma * curvature(f).values[i0] if params.sigma > 0 else 0.0
    col = p[:, i0]
    f0 = f.values[i0]
    rows_p = np.nonzero(velocity.mask[:, i0] == 1)[0][:3]
    rows_m = np.nonzero(velocity.mask[:, i0] == -1)[0][-3:]
    if rows_p.size < 3 or rows_m.size < 3:
        raise InvalidInputError("mesh too coarse to extrapolate the jump")
    pb_p = np.polyval(np.polyfit(y[rows_p], col[rows_p], 2), f0)
    pb_m = np.polyval(np.polyfit(y[rows_m], col[rows_m], 2), f0)
    c_plus = kap - pb_p + pb_m
    p[velocity.mask == 1] += c_plus
    return p


def fields_to_csv(velocity: VelocityField2D, p: np.ndarray, path) -> None:
    """Rows x,y,vx,vy,p,side over the whole mesh (side -1/0/+1)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,vx,vy,p,side\n")
        for j in range(velocity.y_nodes.size):
            for i in range(velocity.x_nodes.size):
                fh.write("%.17g,%.17g,%.17g,%.17g,%.17g,%d\n"
                         % (velocity.x_nodes[i], velocity.y_nodes[j],
                            velocity.vx[j, i], velocity.vy[j, i],
                            p[j, i], velocity.mask[j, i]))
