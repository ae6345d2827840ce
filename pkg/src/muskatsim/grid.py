"""Periodic discretization substrate.

Everything downstream works on 2L-periodic samples of a real interface
profile.  The domain is [-L, L) sampled at x_i = -L + i*dx, dx = 2L/N, and
spectra are stored with monotone integer wavenumbers k = -N/2 .. N/2-1 so
that the physical frequency of slot k is xi_k = pi*k/L and

    f(x_i) = sum_k coeffs[k] * exp(1j * xi_k * x_i).

With that synthesis convention the DFT bookkeeping picks up a (-1)^k twist
relative to numpy's fft (the grid starts at -L, not 0); both transforms
below carry it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, InvalidInputError, SymmetryError

__all__ = [
    "GridSpec",
    "Profile",
    "Spectrum",
    "NormSpec",
    "make_grid",
    "make_profile",
    "to_spectrum",
    "to_profile",
    "synthesize_profile",
    "spectral_derivative",
    "shift_profile",
    "delta_kernel",
    "dealiased_product",
    "dealiased_apply",
    "norm",
    "wiener_sobolev_constant",
    "profile_to_csv",
    "profile_from_csv",
    "spectrum_to_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L)."""

    L: float
    N: int

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 16 and self.N % 2 == 0):
            raise GridError(f"N must be an even integer >= 16, got {self.N!r}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise GridError(f"L must be positive and finite, got {self.L!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def wavenumbers(self) -> np.ndarray:
        # integer k in monotone order -N/2 .. N/2-1
        return np.arange(-self.N // 2, self.N // 2)

    @property
    def frequencies(self) -> np.ndarray:
        # xi_k = pi k / L
        return math.pi * self.wavenumbers / self.L

    def compatible(self, other: "GridSpec", tol: float = 1e-12) -> bool:
        return self.N == other.N and abs(self.L - other.L) <= tol * max(1.0, abs(self.L))


@dataclass
class Profile:
    """Real samples of a 2L-periodic function on a GridSpec."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.N,):
            raise InvalidInputError(
                f"profile has {self.values.shape} values, grid wants ({self.grid.N},)")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("profile contains non-finite values")


@dataclass
class Spectrum:
    """Fourier coefficients in monotone-k storage (k = -N/2 .. N/2-1)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.grid.N,):
            raise InvalidInputError(
                f"spectrum has {self.coeffs.shape} coeffs, grid wants ({self.grid.N},)")
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidInputError("spectrum contains non-finite coefficients")


@dataclass(frozen=True)
class NormSpec:
    """Selector for the norms used by the analysis checks.

    kind:  L2 | Linf | SobolevHs | Wiener | HolderSemi
    s:     Sobolev index (SobolevHs only), s >= -1
    theta: Hoelder exponent (HolderSemi only), 0 < theta < 1
    """

    kind: str
    s: float = 0.0
    theta: float = 0.5

    _KINDS = ("L2", "Linf", "SobolevHs", "Wiener", "HolderSemi")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidInputError(f"unknown norm kind {self.kind!r}")
        if self.kind == "SobolevHs" and not self.s >= -1:
            raise InvalidInputError(f"SobolevHs needs s >= -1, got {self.s}")
        if self.kind == "HolderSemi" and not (0.0 < self.theta < 1.0):
            raise InvalidInputError(f"HolderSemi needs theta in (0,1), got {self.theta}")


def make_grid(N: int, L: float) -> GridSpec:
    return GridSpec(L=float(L), N=int(N))


def make_profile(grid: GridSpec, values) -> Profile:
    return Profile(grid=grid, values=np.asarray(values, dtype=float))


def _sign_twist(grid: GridSpec) -> np.ndarray:
    # (-1)^k for k = -N/2 .. N/2-1
    k = grid.wavenumbers
    out = np.ones(grid.N)
    out[k % 2 != 0] = -1.0
    return out


def to_spectrum(f: Profile) -> Spectrum:
    """Forward transform; coeffs satisfy f(x_i) = sum_k c_k exp(i xi_k x_i)."""
    raw = np.fft.fftshift(np.fft.fft(f.values)) / f.grid.N
    return Spectrum(grid=f.grid, coeffs=_sign_twist(f.grid) * raw)


def _symmetry_violation(s: Spectrum) -> float:
    c = s.coeffs
    N = s.grid.N
    half = N // 2
    # pair k with -k for k = 1..N/2-1; slot of k is half+k
    kk = np.arange(1, half)
    v = np.abs(c[half + kk] - np.conj(c[half - kk]))
    worst = float(v.max()) if kk.size else 0.0
    worst = max(worst, abs(c[half].imag), abs(c[0].imag))  # mean and Nyquist rows real
    return worst


def to_profile(s: Spectrum) -> Profile:
    """Inverse transform; rejects spectra that are not conjugate-symmetric."""
    scale = float(np.max(np.abs(s.coeffs))) if s.coeffs.size else 0.0
    if scale > 0 and _symmetry_violation(s) > 1e-10 * max(scale, 1e-30):
        raise SymmetryError("spectrum is not conjugate-symmetric; cannot form a real profile")
    raw = np.fft.ifft(np.fft.ifftshift(s.coeffs * _sign_twist(s.grid))) * s.grid.N
    return Profile(grid=s.grid, values=raw.real)


def _symmetrized(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    """Project onto the conjugate-symmetric subspace (kills fft roundoff noise
    that symmetric multipliers would otherwise amplify)."""
    half = grid.N // 2
    out = coeffs.copy()
    kk = np.arange(1, half)
    avg = 0.5 * (coeffs[half + kk] + np.conj(coeffs[half - kk]))
    out[half + kk] = avg
    out[half - kk] = np.conj(avg)
    out[half] = coeffs[half].real
    out[0] = coeffs[0].real
    return out


def synthesize_profile(grid: GridSpec, coeffs: np.ndarray) -> Profile:
    """to_profile for internally built multiplier outputs: symmetrizes first
    instead of validating, since the construction is symmetric by design and
    only carries roundoff asymmetry."""
    spec = Spectrum(grid=grid, coeffs=_symmetrized(grid, np.asarray(coeffs, complex)))
    raw = np.fft.ifft(np.fft.ifftshift(spec.coeffs * _sign_twist(grid))) * grid.N
    return Profile(grid=grid, values=raw.real)


def _as_spectrum(f) -> Spectrum:
    return f if isinstance(f, Spectrum) else to_spectrum(f)


def spectral_derivative(f: Profile, order: int) -> Profile:
    """d^order/dx^order via the (i xi_k)^order multiplier.

    Odd orders zero the Nyquist slot k = -N/2: its (i xi)^odd image is pure
    imaginary and would break realness of the output.
    """
    if not (isinstance(order, (int, np.integer)) and 0 <= order <= 4):
        raise InvalidInputError(f"derivative order must be an integer in [0,4], got {order!r}")
    if order == 0:
        return Profile(grid=f.grid, values=f.values.copy())
    s = to_spectrum(f)
    xi = f.grid.frequencies
    mult = (1j * xi) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[0] = 0.0
    return synthesize_profile(f.grid, s.coeffs * mult)


def shift_profile(f: Profile, s: float) -> Profile:
    """Samples of x -> f(x - s) via the exp(-i xi s) multiplier.

    The Nyquist row uses cos(xi_N s) (the real symmetric interpolant), which
    agrees with delta_kernel's pointwise interpolation on grid nodes.
    """
    spec = to_spectrum(f)
    xi = f.grid.frequencies
    mult = np.exp(-1j * xi * s)
    mult[0] = math.cos(xi[0] * s)
    return synthesize_profile(f.grid, spec.coeffs * mult)


def delta_kernel(f: Profile, x_index: int, y: float) -> float:
    """The difference f(x_i) - f(x_i - y), off-grid values by trigonometric
    interpolation; exact periodic indexing when y is a multiple of dx."""
    N = f.grid.N
    i = int(x_index) % N
    dx = f.grid.dx
    m = y / dx
    m_round = round(m)
    if abs(m - m_round) <= 1e-9:
        return float(f.values[i] - f.values[(i - int(m_round)) % N])
    c = to_spectrum(f).coeffs
    xi = f.grid.frequencies
    xv = f.grid.x[i] - y
    val = np.real(np.sum(c * np.exp(1j * xi * xv)))
    return float(f.values[i] - val)


def _pad_values(f: Profile, M: int) -> np.ndarray:
    """Resample f on an M-point grid over the same period by zero-padding."""
    N = f.grid.N
    if M == N:
        return f.values.copy()
    c = to_spectrum(f).coeffs  # k = -N/2..N/2-1
    cp = np.zeros(M, dtype=complex)
    half = N // 2
    Mhalf = M // 2
    cp[Mhalf - half:Mhalf + half] = c
    # split the Nyquist energy symmetrically so the padded spectrum stays symmetric
    cp[Mhalf + half] = 0.5 * c[0]
    cp[Mhalf - half] = 0.5 * c[0]
    kk = np.arange(-Mhalf, Mhalf)
    tw = np.ones(M)
    tw[kk % 2 != 0] = -1.0
    vals = np.fft.ifft(np.fft.ifftshift(cp * tw)) * M
    return vals.real


def _project_values(values: np.ndarray, grid: GridSpec) -> Profile:
    """Truncate an M-point sample set back to grid.N modes."""
    M = values.size
    N = grid.N
    if M == N:
        return Profile(grid=grid, values=np.asarray(values, float))
    kk = np.arange(-M // 2, M // 2)
    tw = np.ones(M)
    tw[kk % 2 != 0] = -1.0
    cfull = tw * np.fft.fftshift(np.fft.fft(values)) / M
    half = N // 2
    Mhalf = M // 2
    c = cfull[Mhalf - half:Mhalf + half].copy()
    c[0] = c[0].real + cfull[Mhalf + half].real  # fold the split Nyquist back
    return synthesize_profile(grid, c)


def dealiased_apply(fn, *profiles: Profile, pad: int = 2) -> Profile:
    """Evaluate fn pointwise on zero-padded resamples of the profiles, then
    project back to the original band.  Used for the nonlinear curvature-type
    terms; pad=2 removes aliasing of quadratic products entirely and keeps
    the cubic ones far below quadrature tolerance."""
    if not profiles:
        raise InvalidInputError("need at least one profile")
    g = profiles[0].grid
    for p in profiles[1:]:
        if not g.compatible(p.grid):
            raise GridError("dealiased_apply needs a shared grid")
    M = pad * g.N
    up = [_pad_values(p, M) for p in profiles]
    vals = fn(*up)
    return _project_values(np.asarray(vals, float), g)


def dealiased_product(*profiles: Profile, pad: int = 2) -> Profile:
    return dealiased_apply(lambda *vs: np.prod(np.vstack(vs), axis=0), *profiles, pad=pad)


def norm(f: Profile, spec: NormSpec) -> float:
    """Grid norms.  L2 is dx-weighted; SobolevHs uses the 2L-weighted
    coefficient sum so SobolevHs(0) == L2 (Parseval); Wiener is
    sum_k |xi_k| |c_k| with no 2L factor; HolderSemi maxes difference
    quotients over grid pairs with periodic separation <= L/2."""
    v = f.values
    g = f.grid
    if spec.kind == "Linf":
        return float(np.max(np.abs(v))) if v.size else 0.0
    if spec.kind == "L2":
        return float(math.sqrt(g.dx * np.sum(v * v)))
    if spec.kind == "SobolevHs":
        c = to_spectrum(f).coeffs
        xi = g.frequencies
        w = (1.0 + xi * xi) ** spec.s
        return float(math.sqrt(2.0 * g.L * np.sum(w * np.abs(c) ** 2)))
    if spec.kind == "Wiener":
        c = to_spectrum(f).coeffs
        xi = g.frequencies
        return float(np.sum(np.abs(xi) * np.abs(c)))
    # HolderSemi
    best = 0.0
    for lag in range(1, g.N // 4 + 1):
        sep = lag * g.dx
        if sep > g.L / 2 + 1e-15:
            break
        diff = np.max(np.abs(np.roll(v, -lag) - v))
        best = max(best, diff / sep ** spec.theta)
    return float(best)


def wiener_sobolev_constant(grid: GridSpec, s: float) -> float:
    """Cauchy-Schwarz constant C(L,N) with Wiener(f) <= C * SobolevHs(s)(f)."""
    xi = grid.frequencies
    q = xi * xi * (1.0 + xi * xi) ** (-s)
    return float(math.sqrt(np.sum(q) / (2.0 * grid.L)))


def profile_to_csv(f: Profile, path) -> None:
    x = f.grid.x
    with open(path, "w", newline="") as fh:
        fh.write("x,f\n")
        for xi, vi in zip(x, f.values):
            fh.write(f"{xi:.17g},{vi:.17g}\n")


def profile_from_csv(path) -> Profile:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 16:
        raise InvalidInputError(f"{path}: not a profile CSV")
    x, v = data[:, 0], data[:, 1]
    N = x.size
    dx = x[1] - x[0]
    L = N * dx / 2.0
    if abs(x[0] + L) > 1e-9 * max(1.0, L):
        raise GridError(f"{path}: x column is not a [-L, L) grid")
    return Profile(grid=make_grid(N, L), values=v)


def spectrum_to_csv(s: Spectrum, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,re,im\n")
        for k, c in zip(s.grid.wavenumbers, s.coeffs):
            fh.write(f"{k},{c.real:.17g},{c.imag:.17g}\n")
