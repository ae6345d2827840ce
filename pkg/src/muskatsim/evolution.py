"""Adaptive IMEX time integration of the interface evolution.

One step solves (I - dt*L) f_{n+1} = f_n + dt*(rhs(f_n) - L f_n) in
Fourier space, where L is a global frozen multiplier chosen from the
worst-case slope of the current profile: -beta*|xi| with beta =
pi/(1 + max f'^2) when surface tension is off, -beta*|xi|^3 with beta =
pi/(1 + max f'^2)^(3/2) when it is on.  The multiplier is diagonal, so
the implicit solve is a pointwise division; everything the multiplier
does not capture stays explicit and is controlled by step-doubling.

The controller accepts a step when the max-norm gap between one full-dt
step and two half-dt steps is at most tol_step, halves dt on rejection
(stagnating below dt_min raises) and doubles it after comfortable
accepts, capped by dt_max.  Each accepted step appends one diagnostics
row (t, Hs, Linf, wiener, tail_slope, quad_err, dt).

Fixed-step operation needs no extra switch: set dt_init = dt_min =
dt_max and a large tol_step.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import (ConfigError, GridError, InsufficientDataError,
                     InvalidInputError, NumericsError, StagnationError)
from .grid import (GridSpec, NormSpec, Profile, norm, synthesize_profile,
                   to_spectrum)
from .kernels import QuadratureRule
from .linear import FrozenSymbol
from .operators import PhysParams, phi_rhs, phi_sigma_rhs

__all__ = [
    "DIAG_FIELDS",
    "SimConfig",
    "SimState",
    "StepOutcome",
    "global_frozen_symbol",
    "step_imex",
    "run",
    "run_from_state",
    "smoothing_diagnostic",
    "rough_profile",
    "write_snapshot",
    "write_diagnostics",
    "resume",
]

DIAG_FIELDS = ("t", "Hs", "Linf", "wiener", "tail_slope", "quad_err", "dt")

_SNAP_MAGIC = "MUSKAT-SNAP v1"


@dataclass(frozen=True)
class SimConfig:
    params: PhysParams
    grid: GridSpec
    t_end: float
    dt_init: float
    dt_min: float
    dt_max: float
    tol_step: float
    s_monitor: float
    blowup_threshold: float
    snapshot_every: float
    seed: int
    initial: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ConfigError(
                "need 0 < dt_min <= dt_init <= dt_max, got "
                f"{self.dt_min}, {self.dt_init}, {self.dt_max}")
        if not self.tol_step > 0.0:
            raise ConfigError(f"tol_step must be positive, got {self.tol_step}")
        if not self.blowup_threshold > 0.0:
            raise ConfigError("blowup_threshold must be positive")
        if not self.snapshot_every > 0.0:
            raise ConfigError("snapshot_every must be positive")
        if self.params.regime == "no_tension":
            if not 1.5 < self.s_monitor < 2.0:
                raise ConfigError(
                    "without surface tension s_monitor must lie in (3/2, 2), "
                    f"got {self.s_monitor}")
        else:
            if not 2.0 < self.s_monitor < 3.0:
                raise ConfigError(
                    "with surface tension s_monitor must lie in (2, 3), "
                    f"got {self.s_monitor}")


@dataclass
class SimState:
    t: float
    f: Profile
    dt: float
    step_count: int
    diagnostics: List[Tuple[float, ...]]
    status: str = "Running"


@dataclass(frozen=True)
class StepOutcome:
    status: str                    # Accepted | Rejected | Finished
    new_state: SimState
    local_error_est: float


def global_frozen_symbol(f: Profile, params: PhysParams) -> FrozenSymbol:
    """Worst-case diagonal multiplier for the implicit part."""
    from .grid import spectral_derivative
    sq = float(np.max(spectral_derivative(f, 1).values ** 2))
    if params.regime == "no_tension":
        return FrozenSymbol(order=1, alpha=0.0, beta=math.pi / (1.0 + sq))
    return FrozenSymbol(order=3, alpha=0.0,
                        beta=math.pi / (1.0 + sq) ** 1.5)


def _rhs(f: Profile, params: PhysParams, rule: QuadratureRule,
         est_error: bool):
    if params.regime == "no_tension":
        return phi_rhs(f, f, rule, est_error=est_error)
    return phi_sigma_rhs(f, f, params, rule, est_error=est_error)


def _imex_update(coeffs: np.ndarray, rhs_coeffs: np.ndarray,
                 mult: np.ndarray, dt: float) -> np.ndarray:
    return (coeffs + dt * (rhs_coeffs - mult * coeffs)) / (1.0 - dt * mult)


def step_imex(state: SimState, cfg: SimConfig,
              rule: Optional[QuadratureRule] = None) -> StepOutcome:
    """One controller attempt from state.t with the current state.dt.

    Accepted outcomes carry the two-half-step solution (the better of
    the pair used for the error estimate); rejected ones keep t and f
    and halve dt.  Attempts are clamped so the trajectory lands exactly
    on t_end.
    """
    if rule is None:
        rule = QuadratureRule.midpoint(cfg.grid)
    grid = state.f.grid
    dt = min(state.dt, cfg.t_end - state.t)
    if dt <= 0.0:
        raise InvalidInputError("step requested at or beyond t_end")
    landing = (cfg.t_end - state.t - dt) < 1e-12 * dt

    sym = global_frozen_symbol(state.f, cfg.params)
    mult = sym.multiplier(grid)
    ev = _rhs(state.f, cfg.params, rule, est_error=True)
    c0 = to_spectrum(state.f).coeffs
    r0 = to_spectrum(ev.value).coeffs

    c_full = _imex_update(c0, r0, mult, dt)
    c_half = _imex_update(c0, r0, mult, 0.5 * dt)
    f_half = synthesize_profile(grid, c_half)
    r_half = to_spectrum(_rhs(f_half, cfg.params, rule,
                              est_error=False).value).coeffs
    c_two = _imex_update(c_half, r_half, mult, 0.5 * dt)

    f_full = synthesize_profile(grid, c_full)
    f_two = synthesize_profile(grid, c_two)
    if not (np.all(np.isfinite(f_full.values))
            and np.all(np.isfinite(f_two.values))):
        raise NumericsError(f"step at t={state.t:.6g} produced non-finite "
                            "values")
    err = float(np.max(np.abs(f_full.values - f_two.values)))

    if err > cfg.tol_step:
        new_dt = 0.5 * dt
        if new_dt < cfg.dt_min:
            raise StagnationError(
                f"dt fell below dt_min={cfg.dt_min:.3g} at t={state.t:.6g} "
                f"(local error {err:.3g} > tol {cfg.tol_step:.3g})")
        rejected = SimState(t=state.t, f=state.f, dt=new_dt,
                            step_count=state.step_count,
                            diagnostics=state.diagnostics,
                            status=state.status)
        return StepOutcome(status="Rejected", new_state=rejected,
                           local_error_est=err)

    next_dt = state.dt
    if err < 0.25 * cfg.tol_step:
        next_dt = min(2.0 * state.dt, cfg.dt_max)
    new = SimState(t=state.t + dt, f=f_two, dt=next_dt,
                   step_count=state.step_count + 1,
                   diagnostics=state.diagnostics, status=state.status)
    _append_diagnostics(new, cfg, ev.quadrature_error, dt)
    return StepOutcome(status="Finished" if landing else "Accepted",
                       new_state=new, local_error_est=err)


def _append_diagnostics(state: SimState, cfg: SimConfig,
                        quad_err: float, dt_used: float) -> None:
    f = state.f
    hs = norm(f, NormSpec("SobolevHs", s=cfg.s_monitor))
    li = norm(f, NormSpec("Linf"))
    wi = norm(f, NormSpec("Wiener"))
    try:
        slope = smoothing_diagnostic(state)
    except (InsufficientDataError, InvalidInputError):
        slope = float("nan")
    state.diagnostics.append(
        (state.t, hs, li, wi, slope, quad_err, dt_used))


def run(cfg: SimConfig, f0: Profile,
        output_dir: Optional[str] = None) -> SimState:
    """Advance from t = 0 to t_end, or stop with status BlowupSuspected.

    With output_dir set, snapshots land there every snapshot_every time
    units (plus the initial and final states) and the diagnostics table
    is written as diagnostics.csv.
    """
    if not f0.grid.compatible(cfg.grid):
        raise GridError("initial profile grid does not match the config grid")
    state = SimState(t=0.0, f=f0, dt=cfg.dt_init, step_count=0,
                     diagnostics=[], status="Running")
    return run_from_state(cfg, state, output_dir)


def run_from_state(cfg: SimConfig, state: SimState,
                   output_dir: Optional[str] = None) -> SimState:
    """Drive the controller loop from an existing state (fresh or resumed)."""
    rule = QuadratureRule.midpoint(cfg.grid)

    def snapshot(st: SimState) -> None:
        if output_dir is not None:
            write_snapshot(st, cfg,
                           os.path.join(output_dir,
                                        f"snap_{st.step_count:06d}.csv"))

    last_k = math.floor(state.t / cfg.snapshot_every + 1e-9)
    if state.step_count == 0 and not state.diagnostics:
        ev = _rhs(state.f, cfg.params, rule, est_error=True)
        _append_diagnostics(state, cfg, ev.quadrature_error, state.dt)
        snapshot(state)
    hs_spec = NormSpec("SobolevHs", s=cfg.s_monitor)
    while state.status == "Running":
        if state.t >= cfg.t_end * (1.0 - 1e-15):
            state.status = "Finished"
            break
        try:
            outcome = step_imex(state, cfg, rule)
        except StagnationError:
            state.status = "BlowupSuspected"
            break
        state = outcome.new_state
        if outcome.status == "Rejected":
            continue
        if norm(state.f, hs_spec) > cfg.blowup_threshold:
            state.status = "BlowupSuspected"
        elif outcome.status == "Finished":
            state.status = "Finished"
        k = math.floor(state.t / cfg.snapshot_every + 1e-9)
        if k > last_k or state.status != "Running":
            snapshot(state)
            last_k = k
    if output_dir is not None:
        write_diagnostics(state, os.path.join(output_dir, "diagnostics.csv"))
    return state


# ----------------------------------------------------------------------
# diagnostics and data generation

def smoothing_diagnostic(state: SimState) -> float:
    """Least-squares slope of log|coeff| against frequency.

    Positive-frequency modes above the 1e-13 floor count as active; the
    fit runs over the upper half of them.  An exponentially decaying
    spectrum gives a slope near -a where |coeff_k| ~ exp(-a*xi_k); a
    merely algebraic tail gives a slope near zero.
    """
    if state.t <= 0.0:
        raise InvalidInputError("smoothing diagnostic needs t > 0")
    grid = state.f.grid
    c = to_spectrum(state.f).coeffs
    xi = grid.frequencies
    pos = xi > 0.0
    amp = np.abs(c[pos])
    fr = xi[pos]
    active = amp > 1e-13
    n_active = int(np.count_nonzero(active))
    if n_active < 8:
        raise InsufficientDataError(
            f"only {n_active} active modes, need at least 8")
    fr = fr[active]
    amp = amp[active]
    order = np.argsort(fr)
    fr = fr[order]
    amp = amp[order]
    half = fr.size // 2
    coef = np.polyfit(fr[half:], np.log(amp[half:]), 1)
    return float(coef[0])


def rough_profile(grid: GridSpec, s: float, amplitude: float,
                  seed: int) -> Profile:
    """Synthetic datum with an algebraic spectrum: lies in the discrete
    Sobolev class of index s but in no materially stronger one.

    |coeff_k| = (1+|xi_k|)^-(s+0.51) with uniform random phases, mean
    zero, then rescaled to the requested sup-norm amplitude."""
    if amplitude <= 0.0:
        raise InvalidInputError("amplitude must be positive")
    rng = np.random.RandomState(seed)
    xi = grid.frequencies
    mag = (1.0 + np.abs(xi)) ** (-(s + 0.51))
    phase = rng.uniform(0.0, 2.0 * math.pi, size=grid.N)
    c = mag * np.exp(1j * phase)
    half = grid.N // 2
    c[half] = 0.0                       # mean
    c[0] = 0.0                          # unpaired mode
    c[1:half] = np.conj(c[half + 1:][::-1])
    f = synthesize_profile(grid, c)
    peak = float(np.max(np.abs(f.values)))
    return Profile(grid, f.values * (amplitude / peak))


# ----------------------------------------------------------------------
# persistence

def write_snapshot(state: SimState, cfg: SimConfig, path) -> None:
    """Atomically write header + x,f body at 17 significant digits."""
    p = cfg.params
    theta = "none" if p.theta is None else "%.17g" % p.theta
    head = (f"{_SNAP_MAGIC}, N=%d, L=%.17g, t=%.17g, dt=%.17g, "
            "step_count=%d, sigma=%.17g, delta_rho=%.17g, theta=%s"
            % (cfg.grid.N, cfg.grid.L, state.t, state.dt,
               state.step_count, p.sigma, p.delta_rho, theta))
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write(head + "\n")
        fh.write("x,f\n")
        for x, v in zip(state.f.grid.x, state.f.values):
            fh.write("%.17g,%.17g\n" % (x, v))
    os.replace(tmp, path)


def write_diagnostics(state: SimState, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(DIAG_FIELDS) + "\n")
        for row in state.diagnostics:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _parse_snapshot_header(line: str, path) -> dict:
    if not line.startswith(_SNAP_MAGIC):
        raise ConfigError(f"{path}: not a snapshot file (bad magic)")
    out = {}
    for part in line[len(_SNAP_MAGIC):].split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"{path}: malformed header field {part!r}")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    for want in ("N", "L", "t", "dt", "step_count", "sigma",
                 "delta_rho", "theta"):
        if want not in out:
            raise ConfigError(f"{path}: header missing {want}")
    return out


def resume(snapshot_path, cfg: SimConfig) -> SimState:
    """Rebuild a SimState from a snapshot, checked against cfg."""
    try:
        with open(snapshot_path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read snapshot: {exc}") from exc
    if len(lines) < 3:
        raise ConfigError(f"{snapshot_path}: truncated snapshot")
    head = _parse_snapshot_header(lines[0], snapshot_path)
    N = int(head["N"])
    L = float(head["L"])
    if N != cfg.grid.N or abs(L - cfg.grid.L) > 1e-12 * cfg.grid.L:
        raise GridError(
            f"snapshot grid N={N}, L={L:.6g} does not match config "
            f"N={cfg.grid.N}, L={cfg.grid.L:.6g}")
    p = cfg.params
    theta = None if head["theta"] == "none" else float(head["theta"])
    for name, snap_val, cfg_val in (
            ("sigma", float(head["sigma"]), p.sigma),
            ("delta_rho", float(head["delta_rho"]), p.delta_rho)):
        if abs(snap_val - cfg_val) > 1e-12 * max(1.0, abs(cfg_val)):
            raise ConfigError(
                f"snapshot {name}={snap_val!r} conflicts with config "
                f"{name}={cfg_val!r}")
    if (theta is None) != (p.theta is None):
        raise ConfigError("snapshot and config disagree on theta presence")
    if theta is not None and abs(theta - p.theta) > 1e-12 * max(1.0, abs(p.theta)):
        raise ConfigError(
            f"snapshot theta={theta!r} conflicts with config {p.theta!r}")
    if lines[1].strip() != "x,f":
        raise ConfigError(f"{snapshot_path}: missing x,f column header")
    body = np.array([[float(tok) for tok in ln.split(",")]
                     for ln in lines[2:] if ln.strip()])
    if body.shape != (N, 2):
        raise ConfigError(
            f"{snapshot_path}: expected {N} rows, found {body.shape[0]}")
    f = Profile(cfg.grid, body[:, 1])
    return SimState(t=float(head["t"]), f=f, dt=float(head["dt"]),
                    step_count=int(head["step_count"]),
                    diagnostics=[], status="Running")
