"""Command-line front end.

Subcommands
-----------
simulate            advance an interface from a config (or resume a
                    snapshot) and write diagnostics, snapshots, figures
verify              run the full check battery, write the report
linear-analysis     freeze the linearized symbol at the steepest point
                    of the configured datum and sample its resolvent
reconstruct-fields  rebuild bulk velocity/pressure from a snapshot
make-initial        render just the configured initial datum

Configs are ``key = value`` lines with ``#`` comments; ``--set
key=value`` (repeatable) overrides file entries.  Every invocation
writes into a fresh timestamped directory under --output-dir, except
``simulate --resume`` which continues inside the snapshot's directory.
Exit codes: 0 success / all checks passed, 1 failed checks or runtime
numerics trouble, 2 usage or config errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (ConfigError, GridError, InvalidInputError,
                     MuskatsimError, RegimeError)
from .evolution import (SimConfig, resume, rough_profile, run,
                        run_from_state)
from .fields import (fields_to_csv, interface_traces, make_velocity_field,
                     pressure_field, vorticity_density)
from .grid import (Profile, make_grid, profile_to_csv, spectral_derivative,
                   spectrum_to_csv, to_spectrum)
from .kernels import QuadratureRule
from .linear import (ResolventReport, freeze_symbol,
                     resolvent_report_to_csv, verify_resolvent_inequality)
from .operators import PhysParams
from .reporting import (render_diagnostics_figure, render_fields_figure,
                        render_profile_figure, render_resolvent_figure,
                        render_verify_figure)
from .verify import (report_lines, report_to_csv, run_identity_checks,
                     run_physics_checks)

__all__ = ["CliInvocation", "parse_config", "make_initial", "dispatch",
           "main"]

SUBCOMMANDS = ("simulate", "verify", "linear-analysis",
               "reconstruct-fields", "make-initial")

_INT_KEYS = {"N", "seed", "initial.mode"}
_STR_KEYS = {"initial.kind"}
_FLOAT_KEYS = {
    "sigma", "delta_rho", "theta", "k_perm", "mu", "g",
    "rho_minus", "rho_plus", "L", "t_end", "dt_init", "dt_min", "dt_max",
    "tol_step", "s_monitor", "blowup_threshold", "snapshot_every",
    "initial.amplitude", "initial.s_rough", "initial.width",
}
_KNOWN_KEYS = _INT_KEYS | _STR_KEYS | _FLOAT_KEYS
_PARAM_KEYS = ("sigma", "delta_rho", "theta", "k_perm", "mu", "g",
               "rho_minus", "rho_plus")


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    config_path: Optional[str] = None
    output_dir: str = "runs"
    resume_path: Optional[str] = None
    overrides: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")


def _cast(key: str, raw: str, where: str) -> Union[int, float, str]:
    if key in _STR_KEYS:
        return raw
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"{where}: key '{key}' expects an integer, got '{raw}'")
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{where}: key '{key}' expects a number, got '{raw}'")


def _parse_assignment(text: str, where: str) -> Tuple[str, Union[int, float, str]]:
    if "=" not in text:
        raise ConfigError(f"{where}: expected 'key = value', got '{text}'")
    key, raw = (s.strip() for s in text.split("=", 1))
    if key not in _KNOWN_KEYS:
        raise ConfigError(f"{where}: unknown key '{key}'")
    return key, _cast(key, raw, where)


def parse_config(path: Optional[str],
                 overrides: Sequence[str] = ()) -> SimConfig:
    """Read ``key = value`` lines into a validated SimConfig.

    Overrides are applied after the file, in order.  Every error names
    the offending key and its file line (or the --set entry)."""
    raw: Dict[str, Union[int, float, str]] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            key, val = _parse_assignment(body, f"{path}:{lineno}")
            raw[key] = val
    for idx, text in enumerate(overrides, 1):
        key, val = _parse_assignment(text, f"--set #{idx} ('{text}')")
        raw[key] = val

    try:
        pkw = {k: raw[k] for k in _PARAM_KEYS if k in raw}
        pkw.setdefault("sigma", 0.0)
        if pkw["sigma"] == 0.0 and "delta_rho" not in pkw and "theta" not in pkw:
            pkw["delta_rho"] = 1.0
        params = PhysParams(**pkw)
        grid = make_grid(int(raw.get("N", 512)),
                         float(raw.get("L", 2.0 * math.pi)))
    except (RegimeError, GridError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc

    t_end = float(raw.get("t_end", 1.0))
    s_default = 1.75 if params.regime == "no_tension" else 2.5
    initial = {k.split(".", 1)[1]: v for k, v in raw.items()
               if k.startswith("initial.")}
    return SimConfig(
        params=params, grid=grid, t_end=t_end,
        dt_init=float(raw.get("dt_init", 1e-3)),
        dt_min=float(raw.get("dt_min", 1e-7)),
        dt_max=float(raw.get("dt_max", 5e-2)),
        tol_step=float(raw.get("tol_step", 1e-5)),
        s_monitor=float(raw.get("s_monitor", s_default)),
        blowup_threshold=float(raw.get("blowup_threshold", 1e3)),
        snapshot_every=float(raw.get("snapshot_every", t_end / 10.0)),
        seed=int(raw.get("seed", 0)),
        initial=initial)


def make_initial(cfg: SimConfig) -> Profile:
    """Build the configured initial datum; steep data (max |f'| > 10)
    are rejected before they can poison the quadrature."""
    grid = cfg.grid
    kind = str(cfg.initial.get("kind", "single_mode"))
    amp = float(cfg.initial.get("amplitude", 0.1))
    if not amp > 0.0:
        raise InvalidInputError(f"initial.amplitude must be positive, got {amp}")
    if kind == "single_mode":
        mode = int(cfg.initial.get("mode", 1))
        if not 1 <= mode < grid.N // 2:
            raise InvalidInputError(
                f"initial.mode must lie in [1, N/2), got {mode}")
        f = Profile(grid, amp * np.cos(mode * math.pi * grid.x / grid.L))
    elif kind == "gaussian_bump":
        w = float(cfg.initial.get("width", grid.L / 20.0))
        if not w > 0.0:
            raise InvalidInputError(f"initial.width must be positive, got {w}")
        v = amp * np.exp(-grid.x ** 2 / (2.0 * w * w))
        f = Profile(grid, v - float(np.mean(v)))
    elif kind == "rough_hs":
        s_rough = float(cfg.initial.get("s_rough", 1.75))
        f = rough_profile(grid, s_rough, amp, cfg.seed)
    else:
        raise InvalidInputError(
            f"unknown initial.kind '{kind}' (single_mode, gaussian_bump, "
            "rough_hs)")
    steep = float(np.max(np.abs(spectral_derivative(f, 1).values)))
    if steep > 10.0:
        raise InvalidInputError(
            f"initial datum too steep: max |f'| = {steep:.3g} > 10")
    return f


def _fresh_run_dir(base: str, sub: str) -> str:
    now = datetime.now()
    stamp = now.strftime("%Y%m%d-%H%M%S") + f"-{now.microsecond:06d}"
    path = os.path.join(base, f"{sub}-{stamp}")
    os.makedirs(path)
    return path


def _cmd_simulate(inv: CliInvocation) -> int:
    cfg = parse_config(inv.config_path, inv.overrides)
    if inv.resume_path is not None:
        state = resume(inv.resume_path, cfg)
        out = os.path.dirname(os.path.abspath(inv.resume_path))
        start = Profile(cfg.grid, state.f.values.copy())
        start_label = f"resumed (t = {state.t:.4g})"
    else:
        state = None
        start = make_initial(cfg)
        start_label = "initial"
        out = _fresh_run_dir(inv.output_dir, "simulate")

    print(f"run directory: {out}")
    try:
        if state is None:
            final = run(cfg, start, output_dir=out)
        else:
            final = run_from_state(cfg, state, output_dir=out)
    except MuskatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    render_profile_figure(
        [start, final.f], [start_label, f"final (t = {final.t:.4g})"],
        os.path.join(out, "fig_profile.png"))
    render_diagnostics_figure(final, os.path.join(out, "fig_diagnostics.png"))
    print(f"status: {final.status} after {final.step_count} steps "
          f"(t = {final.t:.6g})")
    print("wrote diagnostics.csv, snapshots, fig_profile.png, "
          "fig_diagnostics.png")
    return 0 if final.status == "Finished" else 1


def _cmd_verify(inv: CliInvocation) -> int:
    cfg = (parse_config(inv.config_path, inv.overrides)
           if inv.config_path is not None or inv.overrides else None)
    out = _fresh_run_dir(inv.output_dir, "verify")
    print(f"run directory: {out}")
    grid = cfg.grid if cfg is not None else None
    seed = cfg.seed if cfg is not None else 0
    results = run_identity_checks(grid, seed) + run_physics_checks(cfg)
    lines = report_lines(results)
    for line in lines:
        print(line)
    report_to_csv(results, os.path.join(out, "verify_report.csv"))
    with open(os.path.join(out, "verify_report.txt"), "w",
              encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    render_verify_figure(results, os.path.join(out, "fig_verify.png"))
    n_fail = sum(1 for r in results if not r.passed)
    if n_fail:
        print(f"{n_fail} of {len(results)} checks FAILED")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def _cmd_linear_analysis(inv: CliInvocation) -> int:
    cfg = parse_config(inv.config_path, inv.overrides)
    f0 = make_initial(cfg)
    out = _fresh_run_dir(inv.output_dir, "linear-analysis")
    print(f"run directory: {out}")
    rule = QuadratureRule.midpoint(cfg.grid)
    order = 1 if cfg.params.regime == "no_tension" else 3
    fp = spectral_derivative(f0, 1)
    x0 = int(np.argmax(np.abs(fp.values)))
    sym = freeze_symbol(f0, 1.0, x0, order, rule)
    try:
        rep = verify_resolvent_inequality(sym, cfg.grid, n_lambda=40)
    except MuskatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sub = ResolventReport(
        kappa0_measured=rep.kappa0_measured, lambda_samples=rep.lambda_samples,
        xi_samples=rep.xi_samples[::4], worst_pair=rep.worst_pair,
        proof_bound=rep.proof_bound,
        ratios=None if rep.ratios is None else rep.ratios[:, ::4])
    resolvent_report_to_csv(sub, os.path.join(out, "resolvent_report.csv"))
    render_resolvent_figure(rep, os.path.join(out, "fig_resolvent.png"),
                            title=f"order-{order} symbol at x0 index {x0}")
    with open(os.path.join(out, "linear_summary.txt"), "w",
              encoding="ascii") as fh:
        fh.write(f"order = {order}\n"
                 f"x0_index = {x0}\n"
                 f"alpha = %.17g\nbeta = %.17g\n"
                 f"kappa0_measured = %.17g\n"
                 % (sym.alpha, sym.beta, rep.kappa0_measured))
        if rep.proof_bound is not None:
            fh.write("proof_bound = %.17g\n" % rep.proof_bound)
        fh.write(f"worst_lambda = {rep.worst_pair[0]!r}\n"
                 f"worst_xi = %.17g\n" % rep.worst_pair[1])
    print(f"kappa0 = {rep.kappa0_measured:.6g}"
          + ("" if rep.proof_bound is None
             else f" (closed-form ceiling {rep.proof_bound:.6g})"))
    print("wrote resolvent_report.csv, linear_summary.txt, "
          "fig_resolvent.png")
    return 0


def _cmd_reconstruct_fields(inv: CliInvocation) -> int:
    cfg = parse_config(inv.config_path, inv.overrides)
    if inv.resume_path is None:
        raise ConfigError("reconstruct-fields needs --snapshot PATH")
    state = resume(inv.resume_path, cfg)
    out = _fresh_run_dir(inv.output_dir, "reconstruct-fields")
    print(f"run directory: {out}")
    f = state.f
    try:
        rule = QuadratureRule.midpoint(cfg.grid)
        omega = vorticity_density(f, cfg.params)
        traces = interface_traces(f, omega, rule)
        sup = float(np.max(np.abs(f.values)))
        d = max(2.0 * sup, 0.5)
        vel = make_velocity_field(f, omega, d=d)
        p = pressure_field(f, vel, cfg.params, d=d)
    except MuskatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fields_to_csv(vel, p, os.path.join(out, "fields.csv"))
    with open(os.path.join(out, "traces.csv"), "w", encoding="ascii") as fh:
        fh.write("x,f,omega,vx_plus,vy_plus,vx_minus,vy_minus\n")
        for i in range(cfg.grid.N):
            fh.write(",".join("%.17g" % v for v in (
                cfg.grid.x[i], f.values[i], omega.profile.values[i],
                traces.v_plus[0].values[i], traces.v_plus[1].values[i],
                traces.v_minus[0].values[i], traces.v_minus[1].values[i]))
                + "\n")
    render_fields_figure(f, vel, p, os.path.join(out, "fig_fields.png"))
    print(f"mesh {vel.x_nodes.size} x {vel.y_nodes.size}, reference "
          f"height d = {d:.4g} (snapshot t = {state.t:.6g})")
    print("wrote fields.csv, traces.csv, fig_fields.png")
    return 0


def _cmd_make_initial(inv: CliInvocation) -> int:
    cfg = parse_config(inv.config_path, inv.overrides)
    f0 = make_initial(cfg)
    out = _fresh_run_dir(inv.output_dir, "make-initial")
    print(f"run directory: {out}")
    profile_to_csv(f0, os.path.join(out, "initial_profile.csv"))
    spectrum_to_csv(to_spectrum(f0), os.path.join(out, "initial_spectrum.csv"))
    render_profile_figure([f0], ["initial datum"],
                          os.path.join(out, "fig_initial.png"))
    kind = cfg.initial.get("kind", "single_mode")
    print(f"kind = {kind}, N = {cfg.grid.N}, L = {cfg.grid.L:.6g}, "
          f"max|f| = {float(np.max(np.abs(f0.values))):.6g}")
    print("wrote initial_profile.csv, initial_spectrum.csv, fig_initial.png")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "linear-analysis": _cmd_linear_analysis,
    "reconstruct-fields": _cmd_reconstruct_fields,
    "make-initial": _cmd_make_initial,
}


def dispatch(inv: CliInvocation) -> int:
    """Run one invocation; returns the process exit code."""
    try:
        return _COMMANDS[inv.subcommand](inv)
    except (ConfigError, InvalidInputError, RegimeError, GridError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MuskatsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muskatsim",
        description="Spectral interface-evolution simulator with a "
                    "verification battery.")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    specs = {
        "simulate": "advance an interface and write diagnostics/snapshots",
        "verify": "run every numerical check and write the report",
        "linear-analysis": "freeze the linearized symbol and sample "
                           "its resolvent",
        "reconstruct-fields": "rebuild bulk velocity and pressure from "
                              "a snapshot",
        "make-initial": "render the configured initial datum",
    }
    for name, help_text in specs.items():
        sp = subs.add_parser(name, help=help_text)
        sp.add_argument("--config", dest="config_path",
                        required=(name != "verify"),
                        help="path to a key = value config file")
        sp.add_argument("--output-dir", dest="output_dir", default="runs",
                        help="parent directory for run directories "
                             "(default: runs)")
        sp.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override a config entry (repeatable)")
        if name == "simulate":
            sp.add_argument("--resume", dest="resume_path",
                            help="snapshot to continue from (writes into "
                                 "the snapshot's directory)")
        if name == "reconstruct-fields":
            sp.add_argument("--snapshot", "--resume", dest="resume_path",
                            help="snapshot to rebuild fields from")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> None:
    args = _build_parser().parse_args(argv)
    inv = CliInvocation(
        subcommand=args.subcommand,
        config_path=args.config_path,
        output_dir=args.output_dir,
        resume_path=getattr(args, "resume_path", None),
        overrides=tuple(args.overrides))
    raise SystemExit(dispatch(inv))


if __name__ == "__main__":
    main()
