"""Delimited exports, mesh files, verification reports and figures.

All text outputs use shortest round-trip decimal formatting so repeated runs
of the same configuration are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np


def _fmt(x) -> str:
    return repr(float(x))


def write_solution_csv(sol, path):
    lines = ["s,f,fprime,Q"]
    for k in range(len(sol.s)):
        lines.append(",".join(_fmt(v) for v in
                              (sol.s[k], sol.f[k], sol.fprime[k], sol.q[k])))
    Path(path).write_text("\n".join(lines) + "\n")


def write_profile_csv(curve, path):
    lines = ["s,x,y,z,T1,T2,T3,kappa,tau"]
    for k in range(len(curve.s)):
        row = (curve.s[k], *curve.position[k], *curve.T[k],
               curve.kappa[k], curve.tau[k])
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_surface_csv(path, s_vals, t_vals, verts4):
    """4D vertex sidecar: one row per (s, t) grid point."""
    lines = ["s,t,x1,x2,x3,x4"]
    for i, s in enumerate(s_vals):
        for j, t in enumerate(t_vals):
            row = (s, t, *verts4[i, j])
            lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_obj(path, verts, wrap_t: bool = True):
    """Quad mesh over an (n_s, n_t, 3) vertex grid, optionally closed in t."""
    n_s, n_t, _ = verts.shape
    lines = []
    for i in range(n_s):
        for j in range(n_t):
            lines.append("v " + " ".join(_fmt(c) for c in verts[i, j]))

    def vid(i, j):
        return i * n_t + j + 1

    t_limit = n_t if wrap_t else n_t - 1
    for i in range(n_s - 1):
        for j in range(t_limit):
            jn = (j + 1) % n_t
            lines.append(f"f {vid(i, j)} {vid(i + 1, j)} "
                         f"{vid(i + 1, jn)} {vid(i, jn)}")
    Path(path).write_text("\n".join(lines) + "\n")


# -- verification report ---------------------------------------------------

@dataclass
class CheckResult:
    check: str
    max_residual: float
    tolerance: float
    passed: bool
    evaluated: int
    skipped: int = 0
    skip_reasons: list = field(default_factory=list)


@dataclass
class VerificationReport:
    checks: list
    version: str
    config_hash: str

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, path):
        # The on-disk schema is a plain array of check records.
        rows = [
            {
                "check": c.check,
                "max_residual": c.max_residual,
                "tolerance": c.tolerance,
                "pass": c.passed,
                "evaluated": c.evaluated,
                "skipped": c.skipped,
            }
            for c in self.checks
        ]
        Path(path).write_text(json.dumps(rows, indent=2) + "\n")

    def table(self) -> str:
        w = max(len(c.check) for c in self.checks) + 2
        lines = [f"{'check':<{w}}{'max residual':>14}{'tolerance':>12}"
                 f"{'eval':>7}{'skip':>6}  status"]
        for c in self.checks:
            lines.append(
                f"{c.check:<{w}}{c.max_residual:>14.3e}{c.tolerance:>12.1e}"
                f"{c.evaluated:>7}{c.skipped:>6}  "
                f"{'PASS' if c.passed else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.overall_pass else 'FAIL'} "
                     f"(version {self.version}, config {self.config_hash})")
        return "\n".join(lines)


# -- figures ---------------------------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_solution_figure(sol, path):
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(sol.s, sol.f, lw=1.2)
    ax1.set_ylabel("f(s)")
    ax2.plot(sol.s, sol.fprime, lw=1.2, color="tab:orange")
    ax2.set_ylabel("f'(s)")
    ax2.set_xlabel("s")
    for m in sol.branch_marks:
        for ax in (ax1, ax2):
            ax.axvline(m, color="k", ls=":", lw=0.8)
    ax1.set_title(f"mean curvature profile (Q drift {sol.q_drift:.2e})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_profile_figure(curve, path, other=None):
    plt = _pyplot()
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    x, y, z = curve.position.T
    ax.plot(x, y, z, lw=1.2, label=curve.construction_tag)
    if other is not None:
        ox, oy, oz = other.position.T
        ax.plot(ox, oy, oz, lw=0.9, ls="--", label=other.construction_tag)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.legend()
    ax.set_title("profile curve")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_surface_figure(verts4, path):
    plt = _pyplot()
    fig = plt.figure(figsize=(10, 5))
    for k, (keep, label) in enumerate((( (0, 1, 2), "(x1, x2, x3)"),
                                       ((0, 1, 3), "(x1, x2, x4)"))):
        ax = fig.add_subplot(1, 2, k + 1, projection="3d")
        xs = verts4[:, :, keep[0]]
        ys = verts4[:, :, keep[1]]
        zs = verts4[:, :, keep[2]]
        ax.plot_surface(xs, ys, zs, rstride=2, cstride=2, cmap="viridis",
                        linewidth=0, antialiased=True, alpha=0.9)
        ax.set_title(label)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_residual_figure(report: VerificationReport, path):
    plt = _pyplot()
    names = [c.check for c in report.checks]
    vals = [max(c.max_residual, 1e-18) for c in report.checks]
    tols = [c.tolerance for c in report.checks]
    idx = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(8, 0.45 * len(names) + 1.5))
    colors = ["tab:green" if c.passed else "tab:red" for c in report.checks]
    ax.barh(idx, vals, color=colors, log=True)
    ax.plot(tols, idx, "k|", markersize=12, label="tolerance")
    ax.set_yticks(idx)
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("max residual (log scale)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
