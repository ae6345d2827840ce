"""Frozen-coefficient Fourier multipliers and resolvent verification.

Freezing the interface slope at one collocation point turns the linearized
evolution into a scalar multiplier in Fourier space.  Two symbols appear:

* order 1:  m(xi) = -beta*|xi| + i*alpha*xi   (smoothing plus drift), with
  beta = pi/(1 + (tau*f'(x0))^2) and alpha the drift coefficient read off
  the same profile,
* order 3:  m(xi) = -beta*|xi|^3, beta = pi/(1 + tau^2 f'(x0)^2)^(3/2).

Both have beta in (0, pi].  The resolvent (lambda - m)^-1 is diagonal, and
``verify_resolvent_inequality`` measures the constant in the weighted bound

    kappa0 * |lambda - m(xi)| * w_lo(xi)  >=  |lambda| * w_lo(xi) + w_hi(xi)

over a deterministic sample of (lambda, xi) pairs, comparing the order-1
result against the closed-form ceiling sqrt(3*(1+(alpha/beta)^2)) +
1/min(1, beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import InvalidInputError, NearSingularError, NumericsError
from .grid import (GridSpec, Profile, Spectrum, spectral_derivative,
                   synthesize_profile, to_spectrum)
from .kernels import QuadratureRule, a_tau_coefficient

__all__ = [
    "FrozenSymbol",
    "ResolventReport",
    "freeze_symbol",
    "apply_frozen",
    "solve_resolvent",
    "verify_resolvent_inequality",
    "resolvent_report_to_csv",
]

_BETA_CEIL = math.pi * (1.0 + 1e-12)


@dataclass(frozen=True)
class FrozenSymbol:
    """Scalar multiplier m(xi) with frozen coefficients.

    order 1 carries a drift term i*alpha*xi; order 3 is drift-free and
    ``alpha`` must be 0.
    """

    order: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.order not in (1, 3):
            raise InvalidInputError(f"order must be 1 or 3, got {self.order}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidInputError("symbol coefficients must be finite")
        if not 0.0 < self.beta <= _BETA_CEIL:
            raise InvalidInputError(
                f"beta must lie in (0, pi], got {self.beta!r}")
        if self.order == 3 and self.alpha != 0.0:
            raise InvalidInputError("order-3 symbol has no drift term")

    def symbol(self, xi: np.ndarray) -> np.ndarray:
        """m evaluated at arbitrary frequencies (complex array)."""
        xi = np.asarray(xi, dtype=float)
        if self.order == 1:
            return -self.beta * np.abs(xi) + 1j * self.alpha * xi
        return (-self.beta * np.abs(xi) ** 3).astype(complex)

    def multiplier(self, grid: GridSpec) -> np.ndarray:
        """m over ``grid.frequencies`` with the drift dropped at Nyquist.

        The Nyquist mode has no conjugate partner, so the odd i*alpha*xi
        part is removed there; the even decay part stays.  This mirrors
        the convention of odd-order spectral derivatives.
        """
        mult = self.symbol(grid.frequencies)
        mult[0] = -self.beta * abs(grid.frequencies[0]) ** self.order
        return mult


@dataclass(frozen=True)
class ResolventReport:
    """Outcome of the sampled resolvent-inequality check.

    ``ratios[i, j]`` is the tested ratio at (lambda_samples[i],
    xi_samples[j]); ``proof_bound`` is the closed-form ceiling available
    for order-1 symbols (None for order 3).
    """

    kappa0_measured: float
    lambda_samples: np.ndarray
    xi_samples: np.ndarray
    worst_pair: Tuple[complex, float]
    proof_bound: Optional[float] = None
    ratios: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.kappa0_measured):
            raise NumericsError("non-finite resolvent ratio")
        if self.kappa0_measured < 1.0:
            raise NumericsError(
                f"resolvent ratio below 1 ({self.kappa0_measured!r}); "
                "the xi = 0 column alone forces >= 1")


def freeze_symbol(f: Profile, tau: float, x0_index: int, order: int,
                  rule: QuadratureRule) -> FrozenSymbol:
    """Freeze the linearized symbol at collocation point x0_index."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidInputError(f"tau must lie in [0, 1], got {tau}")
    if not 0 <= x0_index < f.grid.N:
        raise InvalidInputError(
            f"x0_index {x0_index} outside grid of {f.grid.N} points")
    if order not in (1, 3):
        raise InvalidInputError(f"order must be 1 or 3, got {order}")
    slope = tau * spectral_derivative(f, 1).values[x0_index]
    if order == 1:
        alpha = float(a_tau_coefficient(f, tau, rule).values[x0_index])
        return FrozenSymbol(order=1, alpha=alpha,
                            beta=math.pi / (1.0 + slope ** 2))
    return FrozenSymbol(order=3, alpha=0.0,
                        beta=math.pi / (1.0 + slope ** 2) ** 1.5)


def apply_frozen(sym: FrozenSymbol,
                 h: Union[Profile, Spectrum]) -> Union[Profile, Spectrum]:
    """Multiply each Fourier coefficient of h by m(xi_k)."""
    if isinstance(h, Spectrum):
        return Spectrum(h.grid, sym.multiplier(h.grid) * h.coeffs)
    c = to_spectrum(h)
    return synthesize_profile(h.grid, sym.multiplier(h.grid) * c.coeffs)


def solve_resolvent(sym: FrozenSymbol, lam: complex,
                    rhs: Union[Profile, Spectrum]) -> Union[Profile, Spectrum]:
    """Exact Fourier-diagonal solve of (lambda - m) u = rhs.

    Profile input demands real lambda (a complex resolvent of real data
    is complex; pass a Spectrum to get the complex solution).
    """
    lam = complex(lam)
    if lam.real < 1e-12:
        raise InvalidInputError(
            f"resolvent parameter needs positive real part, got {lam}")
    grid = rhs.grid
    den = lam - sym.multiplier(grid)
    amin = np.min(np.abs(den))
    if amin < 1e-14:
        raise NearSingularError(
            f"lambda within {amin:.2e} of the symbol range")
    if isinstance(rhs, Spectrum):
        return Spectrum(grid, rhs.coeffs / den)
    if lam.imag != 0.0:
        raise InvalidInputError(
            "complex lambda with Profile input; pass a Spectrum instead")
    c = to_spectrum(rhs)
    return synthesize_profile(grid, c.coeffs / den)


def _lambda_samples(sym: FrozenSymbol, xi: np.ndarray,
                    n_lambda: int) -> np.ndarray:
    """Deterministic sample of {Re lambda >= 1}.

    Log-spaced moduli in [1, 1e4] crossed with an argument fan, filtered
    to the closed half-plane, plus (order 1) the ray Im(lambda) =
    alpha*xi where the drift cancellation makes the ratio largest.
    """
    moduli = np.logspace(0.0, 4.0, n_lambda)
    args = np.linspace(-1.45, 1.45, 11)
    lam = (moduli[:, None] * np.exp(1j * args[None, :])).ravel()
    lam = lam[lam.real >= 1.0]
    if sym.order == 1 and sym.alpha != 0.0:
        ray = 1.0 + 1j * sym.alpha * xi[:: max(1, xi.size // 64)]
        lam = np.concatenate([lam, ray])
    return lam


def verify_resolvent_inequality(sym: FrozenSymbol, grid: GridSpec,
                                n_lambda: int = 40) -> ResolventReport:
    """Measure the resolvent-inequality constant over sampled (lambda, xi).

    Weights: order 1 uses w_lo = (1+xi^2)^(1/2), w_hi = 1+xi^2; order 3
    uses w_lo = 1, w_hi = (1+xi^2)^(3/2).  For order 1 the measured
    constant is checked against the closed-form ceiling; violation is a
    genuine numerical inconsistency and raises.
    """
    if n_lambda < 20:
        raise InvalidInputError(f"n_lambda must be >= 20, got {n_lambda}")
    xi = grid.frequencies.copy()
    lam = _lambda_samples(sym, xi, n_lambda)
    m = sym.symbol(xi)
    if sym.order == 1:
        w_lo = np.sqrt(1.0 + xi ** 2)
        w_hi = 1.0 + xi ** 2
    else:
        w_lo = np.ones_like(xi)
        w_hi = (1.0 + xi ** 2) ** 1.5
    den = np.abs(lam[:, None] - m[None, :]) * w_lo[None, :]
    num = np.abs(lam)[:, None] * w_lo[None, :] + w_hi[None, :]
    ratios = num / den
    if not np.all(np.isfinite(ratios)):
        raise NumericsError("resolvent ratio overflowed at a sample point")
    flat = int(np.argmax(ratios))
    i, j = np.unravel_index(flat, ratios.shape)
    kappa0 = float(ratios[i, j])
    bound = None
    if sym.order == 1:
        # |lambda|/|lambda-m| <= sqrt(3(1+(alpha/beta)^2)) on Re >= 1,
        # and (1+xi^2)^(1/2)/|lambda-m| <= 1/min(1,beta) since
        # |lambda-m| >= 1+beta|xi| >= min(1,beta)(1+xi^2)^(1/2).
        bound = (math.sqrt(3.0 * (1.0 + (sym.alpha / sym.beta) ** 2))
                 + 1.0 / min(1.0, sym.beta))
        if kappa0 > bound:
            raise NumericsError(
                f"measured constant {kappa0:.6g} exceeds the proved "
                f"ceiling {bound:.6g}")
    return ResolventReport(kappa0_measured=kappa0, lambda_samples=lam,
                           xi_samples=xi,
                           worst_pair=(complex(lam[i]), float(xi[j])),
                           proof_bound=bound, ratios=ratios)


def resolvent_report_to_csv(report: ResolventReport, path) -> None:
    """Write the sampled ratios as rows lambda_re,lambda_im,xi,ratio."""
    if report.ratios is None:
        raise InvalidInputError("report carries no ratio matrix")
    lam = report.lambda_samples
    xi = report.xi_samples
    with open(path, "w", encoding="ascii") as fh:
        fh.write("lambda_re,lambda_im,xi,ratio\n")
        for i in range(lam.size):
            for j in range(xi.size):
                fh.write("%.17g,%.17g,%.17g,%.17g\n"
                         % (lam[i].real, lam[i].imag, xi[j],
                            report.ratios[i, j]))
