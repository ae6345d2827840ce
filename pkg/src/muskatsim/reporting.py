"""Figure rendering for the CLI report paths.

Every subcommand that writes delimited output also renders a PNG next
to it through one of these helpers.  All functions take explicit data
and a target path, create the figure with the non-interactive backend,
and close it before returning, so they are safe in headless batch runs.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .evolution import DIAG_FIELDS, SimState  # noqa: E402
from .grid import Profile, to_spectrum  # noqa: E402
from .linear import ResolventReport  # noqa: E402
from .fields import VelocityField2D  # noqa: E402

__all__ = [
    "render_profile_figure",
    "render_diagnostics_figure",
    "render_verify_figure",
    "render_resolvent_figure",
    "render_fields_figure",
]

_DPI = 130


def render_profile_figure(profiles: Sequence[Profile],
                          labels: Sequence[str], path,
                          title: str = "interface profiles") -> None:
    """Overlay interface profiles plus the log-magnitude spectrum of the
    last one."""
    if len(profiles) == 0 or len(profiles) != len(labels):
        raise ValueError("need equally many profiles and labels")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.0))
    for p, lab in zip(profiles, labels):
        ax1.plot(p.grid.x, p.values, lw=1.2, label=lab)
    ax1.set_xlabel("x")
    ax1.set_ylabel("f(x)")
    ax1.set_title(title)
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)

    s = to_spectrum(profiles[-1])
    xi = profiles[-1].grid.frequencies
    mag = np.abs(s.coeffs)
    pos = xi > 0
    ax2.semilogy(xi[pos], np.maximum(mag[pos], 1e-18), ".", ms=3)
    ax2.set_xlabel("frequency xi")
    ax2.set_ylabel("|coefficient|")
    ax2.set_title(f"spectrum of {labels[-1]}")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_diagnostics_figure(state: SimState, path) -> None:
    """Norm histories, adaptive step size, and quadrature error vs time."""
    rows = np.array(state.diagnostics, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValueError("state carries no diagnostics rows")
    t = rows[:, 0]
    fig, axes = plt.subplots(2, 2, figsize=(10.5, 7.0))
    ax = axes[0, 0]
    for j, lab in ((1, DIAG_FIELDS[1]), (2, DIAG_FIELDS[2]),
                   (3, DIAG_FIELDS[3])):
        ax.plot(t, rows[:, j], lw=1.2, label=lab)
    ax.set_xlabel("t")
    ax.set_title("norm histories")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)

    ax = axes[0, 1]
    ax.semilogy(t, np.maximum(rows[:, 6], 1e-18), lw=1.2)
    ax.set_xlabel("t")
    ax.set_title("accepted step size dt")
    ax.grid(alpha=0.3)

    ax = axes[1, 0]
    ax.plot(t, rows[:, 4], lw=1.2)
    ax.set_xlabel("t")
    ax.set_title("spectral tail slope")
    ax.grid(alpha=0.3)

    ax = axes[1, 1]
    ax.semilogy(t, np.maximum(rows[:, 5], 1e-18), lw=1.2)
    ax.set_xlabel("t")
    ax.set_title("quadrature error estimate")
    ax.grid(alpha=0.3)

    fig.suptitle(f"run diagnostics (status {state.status}, "
                 f"{state.step_count} steps)")
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_verify_figure(results, path) -> None:
    """Horizontal margin bars: log10(tolerance) - log10(measured) for
    upper-bound checks; lower-bound checks are shown as measured over
    threshold.  Failing checks plot in red on the left."""
    names = [r.name for r in results]
    margins = []
    for r in results:
        lo = "measured >= tolerance" in r.detail
        a, b = (r.measured, r.tolerance) if lo else (r.tolerance, r.measured)
        b = max(abs(b), 1e-18)
        a = a if a > 0 else 1e-18
        margins.append(math.log10(a / b) if r.passed else
                       -max(0.25, abs(math.log10(max(a, 1e-18) / b))))
    colors = ["#2a7e43" if r.passed else "#b03030" for r in results]
    fig, ax = plt.subplots(figsize=(9.0, 0.3 * len(names) + 1.6))
    ypos = np.arange(len(names))[::-1]
    ax.barh(ypos, margins, color=colors, height=0.62)
    ax.set_yticks(ypos)
    ax.set_yticklabels(names, fontsize=7)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("log10 margin (positive = passing headroom)")
    ax.set_title("verification margins")
    ax.grid(alpha=0.3, axis="x")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_resolvent_figure(report: ResolventReport, path,
                            title: str = "resolvent ratio") -> None:
    """Sampled lambda plane colored by the per-lambda worst ratio, and
    the ratio profile in xi at the worst lambda."""
    lam = report.lambda_samples
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    if report.ratios is not None:
        per_lam = report.ratios.max(axis=1)
        sc = ax1.scatter(lam.real, lam.imag, c=per_lam, s=14, cmap="viridis")
        fig.colorbar(sc, ax=ax1, label="max ratio over xi")
        i = int(np.argmax(per_lam))
        ax2.plot(report.xi_samples, report.ratios[i], lw=1.0)
        ax2.set_xlabel("xi")
        ax2.set_ylabel("ratio")
        ax2.set_title(f"worst lambda = {lam[i]:.3g}")
        ax2.grid(alpha=0.3)
    else:
        ax1.scatter(lam.real, lam.imag, s=14)
    ax1.set_xscale("symlog")
    ax1.set_yscale("symlog")
    ax1.set_xlabel("Re lambda")
    ax1.set_ylabel("Im lambda")
    ax1.set_title(f"{title}: kappa0 = {report.kappa0_measured:.4g}"
                  + ("" if report.proof_bound is None
                     else f" (ceiling {report.proof_bound:.4g})"))
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_fields_figure(f: Profile, velocity: VelocityField2D,
                         p: Optional[np.ndarray], path) -> None:
    """Speed heat map with velocity arrows, interface curve, and (when
    given) pressure contours."""
    X, Y = np.meshgrid(velocity.x_nodes, velocity.y_nodes)
    speed = np.hypot(velocity.vx, velocity.vy)
    ncol = 2 if p is not None else 1
    fig, axes = plt.subplots(1, ncol, figsize=(5.6 * ncol, 4.4),
                             squeeze=False)
    ax = axes[0, 0]
    pc = ax.pcolormesh(X, Y, np.where(velocity.mask == 0, np.nan, speed),
                       shading="auto", cmap="magma")
    fig.colorbar(pc, ax=ax, label="|v|")
    step = max(1, velocity.x_nodes.size // 24)
    ystep = max(1, velocity.y_nodes.size // 16)
    ax.quiver(X[::ystep, ::step], Y[::ystep, ::step],
              velocity.vx[::ystep, ::step], velocity.vy[::ystep, ::step],
              color="w", width=2.2e-3, scale_units="xy")
    ax.plot(f.grid.x, f.values, "c-", lw=1.4)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("velocity")
    if p is not None:
        ax = axes[0, 1]
        pm = ax.pcolormesh(X, Y, p, shading="auto", cmap="coolwarm")
        fig.colorbar(pm, ax=ax, label="p")
        ok = np.isfinite(p)
        levels = np.linspace(np.nanmin(p[ok]), np.nanmax(p[ok]), 13)
        ax.contour(X, Y, p, levels=levels, colors="k", linewidths=0.4)
        ax.plot(f.grid.x, f.values, "k-", lw=1.4)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title("pressure")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
