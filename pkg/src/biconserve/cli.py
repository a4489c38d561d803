"""Command-line pipeline: solve, build, verify, sweep.

Exit codes: 0 success, 1 verification failure, 2 usage/parameter error,
3 numerical domain error.  All outputs are deterministic: the same
configuration produces byte-identical CSV/JSON/OBJ files.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    BiconserveError,
    InvalidParamsError,
)
from .geometry import (
    biconservativity_residual,
    build_rotational_surface,
    frame_rotation_check,
    frenet_lift_normal_connection,
    pnmcv_residual,
    point_geometry,
    shape_operator_residuals,
    structure_residuals,
    verification_grid,
)
from .linalg import rigid_align
from .meancurv import ModelParams, f_turning, solve_f
from .profile import (
    ProfileModel,
    frame_components_check,
    frenet_integrate,
    kappa_of,
    planarity_thickness,
    tau_of,
)
from .report import (
    CheckResult,
    VerificationReport,
    render_profile_figure,
    render_residual_figure,
    render_solution_figure,
    render_surface_figure,
    write_obj,
    write_profile_csv,
    write_solution_csv,
    write_surface_csv,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_TOLERANCES = {
    "shape_operator_e3": 1e-6,
    "shape_operator_e4": 1e-6,
    "mean_curvature_identity": 1e-8,
    "chart_isometry": 1e-8,
    "gradient_alignment": 1e-8,
    "biconservativity": 1e-6,
    "normal_parallelism": 1e-6,
    "frenet_lift_drift": 1e-6,
    "codazzi": 1e-6,
    "ricci": 1e-6,
    "connection_form": 1e-6,
    "curvature_law": 1e-6,
    "gauss_equation": 1e-7,
    "frame_rotation": 1e-6,
    "frame_components": 1e-6,
    "profile_congruence": 1e-7,
    "unit_speed": 1e-9,
    "conserved_quantity": 1e-9,
    "planarity": 1e-8,
    "torsion_zero": 1e-10,
}

_ALL_OUTPUTS = ("csv", "obj", "report", "figures")


@dataclass
class RunConfig:
    model: ModelParams
    verify_grid: tuple = (64, 64)
    perturb: float = 0.0
    strict: bool = False
    out: Path = Path("out")
    outputs: tuple = _ALL_OUTPUTS
    sweep_c: tuple = ()
    sweep_c2: tuple = ()
    sweep_f0: tuple = ()

    def tolerances(self) -> dict:
        scale = 0.5 if self.strict else 1.0
        return {k: v * scale for k, v in DEFAULT_TOLERANCES.items()}

    def hash(self) -> str:
        parts = []
        for f in fields(ModelParams):
            parts.append(f"{f.name}={getattr(self.model, f.name)!r}")
        parts += [f"verify_grid={self.verify_grid!r}",
                  f"perturb={self.perturb!r}", f"strict={self.strict!r}"]
        return hashlib.sha256(";".join(parts).encode()).hexdigest()[:12]


# -- configuration parsing -------------------------------------------------

def _parse_span(text: str) -> tuple:
    try:
        a, b = text.split(":")
        return (float(a), float(b))
    except ValueError as e:
        raise InvalidParamsError(f"bad span {text!r}; expected A:B") from e


def _parse_grid(text: str) -> tuple:
    try:
        a, b = text.lower().split("x")
        n_s, n_t = int(a), int(b)
    except ValueError as e:
        raise InvalidParamsError(f"bad grid {text!r}; expected NxM") from e
    if n_s < 2 or n_t < 2:
        raise InvalidParamsError("verify grid must be at least 2x2")
    return (n_s, n_t)


def _parse_values(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError as e:
        raise InvalidParamsError(f"bad numeric value(s) {text!r}") from e


_CONFIG_KEYS = {"c", "c2", "f0", "eps", "span", "grid", "grid_n", "tol_ode",
                "f_floor", "perturb", "strict", "out", "outputs"}


def load_config_file(path) -> dict:
    """Flat key-value config: one `key = value` per line, # comments."""
    raw = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParamsError(f"{path}:{ln}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise InvalidParamsError(f"{path}:{ln}: unknown key {key!r}")
        raw[key] = val
    return raw


def build_run_config(args) -> RunConfig:
    raw = load_config_file(args.config) if args.config else {}

    def pick(key, flag_val):
        return flag_val if flag_val is not None else raw.get(key)

    c_txt = pick("c", args.c)
    c2_txt = pick("c2", args.c2)
    f0_txt = pick("f0", args.f0)
    cs = _parse_values(c_txt) if c_txt is not None else (1.0,)
    c2s = _parse_values(c2_txt) if c2_txt is not None else (4.0,)
    f0s = _parse_values(f0_txt) if f0_txt is not None else (1.0,)

    eps = int(float(pick("eps", args.eps) or 1))
    span = _parse_span(str(pick("span", args.span) or "0:4"))
    grid = _parse_grid(str(pick("grid", args.grid) or "64x64"))
    grid_n = int(pick("grid_n", args.grid_n) or 2048)
    tol_ode = float(pick("tol_ode", args.tol_ode) or 1e-10)
    f_floor = float(pick("f_floor", None) or 1e-6)
    perturb = float(pick("perturb", args.perturb) or 0.0)
    strict = bool(args.strict or str(raw.get("strict", "")).lower()
                  in ("1", "true", "yes"))
    out = Path(pick("out", args.out) or "out")
    outputs = tuple((pick("outputs", None) or ",".join(_ALL_OUTPUTS))
                    .replace(" ", "").split(","))
    for o in outputs:
        if o not in _ALL_OUTPUTS:
            raise InvalidParamsError(f"unknown output kind {o!r}")

    combos = [(c, c2, f0) for c in cs for c2 in c2s for f0 in f0s]
    model = None
    first_err = None
    for c, c2, f0 in combos:
        try:
            model = ModelParams(c=c, c2=c2, f0=f0, eps0=eps, s_span=span,
                                tol_ode=tol_ode, grid_n=grid_n,
                                f_floor=f_floor)
            break
        except InvalidParamsError as e:
            first_err = e
    if model is None:
        # sweeps tolerate invalid rows, but they still need one valid
        # parameter set to anchor the configuration
        raise first_err
    return RunConfig(model=model, verify_grid=grid, perturb=perturb,
                     strict=strict, out=out, outputs=outputs,
                     sweep_c=cs, sweep_c2=c2s, sweep_f0=f0s)


# -- pipeline pieces -------------------------------------------------------

def _build_curves(sol, p):
    model = ProfileModel(sol, p)
    curve_cf = model.sample()
    s = curve_cf.s
    fmax = sol.fmax

    def kappa_fn(x):
        return kappa_of(min(float(sol.interpolator(x)), fmax), p.c)

    def tau_fn(x):
        f = min(float(sol.interpolator(x)), fmax)
        return tau_of(f, sol.fprime_at(x), p.c)

    init = (curve_cf.position[0], curve_cf.T[0], curve_cf.N[0],
            curve_cf.B[0])
    curve_fr = frenet_integrate(kappa_fn, tau_fn, init, s)
    _, _, rmsd = rigid_align(curve_cf.position, curve_fr.position)
    return model, curve_cf, curve_fr, rmsd


def _surface_vertices(surf, n_s, n_t):
    lo, hi = surf.s_range
    s_vals = np.linspace(lo, hi, n_s)
    period = surf.t_period or (2.0 * np.pi)
    t_vals = np.linspace(0.0, period, n_t, endpoint=False)
    verts = np.empty((n_s, n_t, 4))
    for i, s in enumerate(s_vals):
        for j, t in enumerate(t_vals):
            verts[i, j] = [c.value for c in surf(float(s), float(t))]
    return s_vals, t_vals, verts


class _GridStats:
    """Running max / count accumulator for one named check."""

    def __init__(self):
        self.max = 0.0
        self.evaluated = 0
        self.skipped = 0
        self.reasons = []

    def add(self, value):
        if value is None:
            self.skipped += 1
            return
        self.max = max(self.max, float(value))
        self.evaluated += 1

    def skip(self, reason):
        self.skipped += 1
        if reason not in self.reasons:
            self.reasons.append(reason)


_GRID_CHECKS = (
    "shape_operator_e3", "shape_operator_e4", "mean_curvature_identity",
    "chart_isometry", "gradient_alignment", "biconservativity",
    "normal_parallelism", "codazzi", "ricci", "connection_form",
    "curvature_law", "gauss_equation", "frame_rotation",
)


def _verify_row(surf, model, sol, p, s, t_vals, stats):
    """Evaluate every grid check along one s row."""
    f_target = min(float(sol.interpolator(s)), sol.fmax)
    fp_target = sol.fprime_at(s)
    meas, targ = frenet_lift_normal_connection(model, s)
    stats["frenet_lift_drift"].add(abs(meas - targ) / (1.0 + abs(targ)))
    first_K = None
    for t in t_vals:
        try:
            pg = point_geometry(surf, float(s), float(t))
        except BiconserveError as e:
            for name in _GRID_CHECKS:
                stats[name].skip(type(e).__name__)
            continue
        if first_K is None:
            first_K = pg.K
        so = shape_operator_residuals(pg, p)
        stats["shape_operator_e3"].add(so["A3"])
        stats["shape_operator_e4"].add(so["A4"])
        stats["mean_curvature_identity"].add(
            abs(pg.f - f_target) / f_target)
        g = pg.g
        stats["chart_isometry"].add(max(
            abs(g[0, 0] - 1.0), abs(g[0, 1]),
            abs(g[1, 1] * f_target ** 1.5 - 1.0)))
        e1f = pg.gradf @ np.array([1.0, 0.0])
        e2f = pg.gradf[1]
        stats["gradient_alignment"].add(
            (abs(e2f) + abs(abs(e1f) - abs(fp_target)))
            / (1.0 + abs(fp_target)))
        stats["biconservativity"].add(biconservativity_residual(pg))
        stats["normal_parallelism"].add(pnmcv_residual(pg))
        st = structure_residuals(pg, c=p.c)
        stats["codazzi"].add(st["codazzi"])
        stats["ricci"].add(st["ricci"])
        stats["connection_form"].add(st["connection"])
        stats["curvature_law"].add(st["curvature_law"])
        stats["gauss_equation"].add(pg.residual_gauss_curv)
        stats["frame_rotation"].add(frame_rotation_check(pg, model, p))
    return first_K


def run_verification(cfg: RunConfig):
    """Full check suite; returns (report, artifacts dict)."""
    p = cfg.model
    tols = cfg.tolerances()
    sol = solve_f(p)
    model, curve_cf, curve_fr, rmsd = _build_curves(sol, p)
    surf = build_rotational_surface(model, cfg.perturb)
    n_s, n_t = cfg.verify_grid
    s_vals, t_vals = verification_grid(surf, n_s, n_t)

    names = list(_GRID_CHECKS) + ["frenet_lift_drift"]
    threads = max(1, int(os.environ.get("BICONSERVE_THREADS", "1")))

    def worker(s):
        local = {name: _GridStats() for name in names}
        k0 = _verify_row(surf, model, sol, p, s, t_vals, local)
        return local, k0

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, s_vals))
    else:
        results = [worker(s) for s in s_vals]

    stats = {name: _GridStats() for name in names}
    K_at_start = None
    for local, k0 in results:  # merged in index order for determinism
        if K_at_start is None and k0 is not None:
            K_at_start = k0
        for name in names:
            stats[name].max = max(stats[name].max, local[name].max)
            stats[name].evaluated += local[name].evaluated
            stats[name].skipped += local[name].skipped
            for r in local[name].reasons:
                if r not in stats[name].reasons:
                    stats[name].reasons.append(r)

    checks = []
    for name in names:
        st = stats[name]
        checks.append(CheckResult(
            check=name, max_residual=st.max, tolerance=tols[name],
            passed=st.max < tols[name], evaluated=st.evaluated,
            skipped=st.skipped, skip_reasons=st.reasons))

    n_curve = len(curve_cf.s)
    fc = frame_components_check(curve_cf, sol, p)
    scalar_checks = [
        ("profile_congruence", rmsd, n_curve),
        ("unit_speed",
         float(np.max(np.abs(np.linalg.norm(curve_cf.T, axis=1) - 1.0))),
         n_curve),
        ("frame_components", max(fc.values()), n_curve),
        ("conserved_quantity", sol.q_drift, len(sol.s)),
    ]
    if p.c == 0.0:
        scalar_checks.append(("planarity", planarity_thickness(curve_cf),
                              n_curve))
        scalar_checks.append(("torsion_zero",
                              float(np.max(np.abs(curve_cf.tau))), n_curve))
    for name, val, n in scalar_checks:
        checks.append(CheckResult(check=name, max_residual=val,
                                  tolerance=tols[name],
                                  passed=val < tols[name], evaluated=n))

    report = VerificationReport(checks=checks, version=__version__,
                                config_hash=cfg.hash())
    artifacts = {"sol": sol, "model": model, "curve_cf": curve_cf,
                 "curve_fr": curve_fr, "rmsd": rmsd, "surf": surf,
                 "K_at_start": K_at_start}
    return report, artifacts


# -- commands --------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    sol = solve_f(cfg.model)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.outputs:
        write_solution_csv(sol, cfg.out / "f_solution.csv")
    if "figures" in cfg.outputs:
        render_solution_figure(sol, cfg.out / "f_solution.png")
    print(f"solved span s in [{sol.s_start:g}, {sol.s_reached:g}], "
          f"{len(sol.s)} samples")
    print(f"Q drift: {sol.q_drift:.3e}")
    print(f"turning points: "
          f"{', '.join(f'{m:.9g}' for m in sol.branch_marks) or 'none'}")
    for w in sol.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def cmd_build(cfg: RunConfig) -> int:
    p = cfg.model
    sol = solve_f(p)
    model, curve_cf, curve_fr, rmsd = _build_curves(sol, p)
    surf = build_rotational_surface(model, cfg.perturb)
    cfg.out.mkdir(parents=True, exist_ok=True)
    n_s, n_t = cfg.verify_grid
    s_vals, t_vals, verts = _surface_vertices(surf, n_s, n_t)
    if "csv" in cfg.outputs:
        write_profile_csv(curve_cf, cfg.out / "profile.csv")
        write_surface_csv(cfg.out / "surface_4d.csv", s_vals, t_vals, verts)
    if "obj" in cfg.outputs:
        write_obj(cfg.out / "mesh_123.obj", verts[:, :, (0, 1, 2)])
        write_obj(cfg.out / "mesh_124.obj", verts[:, :, (0, 1, 3)])
    if "figures" in cfg.outputs:
        render_profile_figure(curve_cf, cfg.out / "profile.png",
                              other=curve_fr)
        render_surface_figure(verts, cfg.out / "surface.png")
    print(f"profile congruence rmsd (closed-form vs Frenet): {rmsd:.3e}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    report, artifacts = run_verification(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if "report" in cfg.outputs:
        report.to_json(cfg.out / "report.json")
    if "csv" in cfg.outputs:
        write_solution_csv(artifacts["sol"], cfg.out / "f_solution.csv")
    if "figures" in cfg.outputs:
        render_residual_figure(report, cfg.out / "residuals.png")
        render_solution_figure(artifacts["sol"], cfg.out / "f_solution.png")
    print(report.table())
    return EXIT_OK if report.overall_pass else EXIT_VERIFY_FAIL


def cmd_sweep(cfg: RunConfig) -> int:
    combos = [(c, c2, f0) for c in cfg.sweep_c for c2 in cfg.sweep_c2
              for f0 in cfg.sweep_f0]
    check_names = list(_GRID_CHECKS) + [
        "frenet_lift_drift", "profile_congruence", "unit_speed",
        "frame_components", "conserved_quantity"]

    def row(combo):
        c, c2, f0 = combo
        try:
            model = replace(cfg.model, c=c, c2=c2, f0=f0)
        except InvalidParamsError as e:
            return {"c": c, "c2": c2, "f0": f0, "status": "invalid-params",
                    "error": str(e)}
        sub = replace(cfg, model=model)
        try:
            report, artifacts = run_verification(sub)
        except BiconserveError as e:
            return {"c": c, "c2": c2, "f0": f0,
                    "status": "invalid-params"
                    if isinstance(e, InvalidParamsError) else "numeric-error",
                    "error": str(e)}
        out = {"c": c, "c2": c2, "f0": f0,
               "status": "pass" if report.overall_pass else "fail",
               "f_turning": f_turning(model),
               "K_at_s0": artifacts["K_at_start"]}
        for chk in report.checks:
            out[chk.check] = chk.max_residual
        return out

    threads = max(1, int(os.environ.get("BICONSERVE_THREADS", "1")))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, combos))
    else:
        rows = [row(c) for c in combos]

    header = ["c", "c2", "f0", "status", "f_turning", "K_at_s0"] + check_names
    lines = [",".join(header)]
    for r in rows:
        cells = []
        for key in header:
            v = r.get(key)
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(repr(float(v)))
        lines.append(",".join(cells))
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"swept {len(rows)} parameter sets -> {cfg.out / 'sweep.csv'}")
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biconserve",
        description="Construct and verify rotational surfaces in E4 whose "
                    "normalized mean curvature direction is parallel.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("build", cmd_build),
                     ("verify", cmd_verify), ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--c", default=None)
        sp.add_argument("--c2", default=None)
        sp.add_argument("--f0", default=None)
        sp.add_argument("--eps", default=None)
        sp.add_argument("--span", default=None)
        sp.add_argument("--grid", default=None)
        sp.add_argument("--grid-n", dest="grid_n", default=None)
        sp.add_argument("--tol-ode", dest="tol_ode", default=None)
        sp.add_argument("--perturb", default=None)
        sp.add_argument("--strict", action="store_true")
        sp.add_argument("--out", default=None)
        sp.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        cfg = build_run_config(args)
        return args.func(cfg)
    except InvalidParamsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BiconserveError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
