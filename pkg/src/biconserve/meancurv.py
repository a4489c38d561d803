"""Mean-curvature profile ODE: admissible domain, quadrature solver, jets.

The mean curvature f(s) of the target surface family satisfies a first-order
ODE f' = (4/3) eps sqrt(W(f)) with W(f) = c2^2 f^{7/2} - c^2 f^5 - 9 f^4 and
a conserved first integral

    Q(f, f') = 9 f'^2 / (16 f^{7/2}) + c^2 f^{3/2} + 9 f^{1/2} = c2^2.

W has a single positive root f_max (the turning value, where f' = 0 and the
monotone branch flips) and f = 0 is only reached asymptotically.  The solver
integrates ds/df = 3/(4 sqrt(W)) by quadrature in f; near the turning value
the integrable inverse-square-root singularity is removed with the
substitution u = sqrt(f_max - f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import (
    DomainError,
    InvalidParamsError,
    NearTurningError,
    NoAdmissibleBranchError,
)
from .jets import Jet

EXCLUSION_BAND_FRACTION = 1e-4


def _radicand_raw(f, c, c2):
    return c2 * c2 * f ** 3.5 - c * c * f ** 5 - 9.0 * f ** 4


@dataclass(frozen=True)
class ModelParams:
    """Shape constant, integration constant and initial data for one surface.

    ``c`` controls the second shape operator (its eigenvalues are
    +/- c f^{3/2}); ``c2 > 0`` is the square root of the conserved quantity;
    ``f0`` is the initial mean curvature and ``eps0`` the initial monotone
    branch sign.
    """

    c: float
    c2: float
    f0: float
    eps0: int = 1
    s_span: tuple = (0.0, 4.0)
    tol_ode: float = 1e-10
    grid_n: int = 2048
    f_floor: float = 1e-6

    def __post_init__(self):
        if not (self.c2 > 0.0):
            raise InvalidParamsError("c2 must be positive")
        if not (self.f0 > 0.0):
            raise InvalidParamsError("f0 must be positive")
        if self.eps0 not in (1, -1):
            raise InvalidParamsError("eps0 must be +1 or -1")
        if not (self.s_span[1] > self.s_span[0]):
            raise InvalidParamsError("s_span must be a nonempty interval")
        if self.grid_n < 16:
            raise InvalidParamsError("grid_n too small")
        if not (self.f_floor > 0.0):
            raise InvalidParamsError("f_floor must be positive")
        if _radicand_raw(self.f0, self.c, self.c2) <= 0.0:
            raise NoAdmissibleBranchError(
                "f0 is at or beyond the turning value: grad f would vanish "
                "(constant-mean-curvature equilibrium is excluded)")


def radicand(f, p: ModelParams):
    """W(f) = c2^2 f^{7/2} - c^2 f^5 - 9 f^4; admissible exactly where >= 0."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise DomainError("radicand requires f > 0")
    out = _radicand_raw(f, p.c, p.c2)
    return float(out) if out.ndim == 0 else out


def fprime_rhs(f, p: ModelParams, eps: int):
    """Branch derivative f' = (4/3) eps sqrt(W(f))."""
    w = radicand(f, p)
    if np.any(np.asarray(w) < 0.0):
        raise DomainError("f outside the admissible domain (negative radicand)")
    out = (4.0 / 3.0) * eps * np.sqrt(w)
    return float(out) if np.ndim(out) == 0 else out


def conserved_quantity(f, fprime, c: float):
    """First integral Q; equals c2^2 along any exact solution."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise DomainError("conserved_quantity requires f > 0")
    fprime = np.asarray(fprime, dtype=float)
    out = (9.0 * fprime ** 2 / (16.0 * f ** 3.5)
           + c * c * f ** 1.5 + 9.0 * np.sqrt(f))
    return float(out) if out.ndim == 0 else out


def f_turning(p: ModelParams) -> float:
    """Unique positive root of c^2 f^{3/2} + 9 f^{1/2} = c2^2 (branch maximum)."""
    c2sq = p.c2 * p.c2
    f_flat = (c2sq / 9.0) ** 2
    if p.c == 0.0:
        return f_flat
    g = lambda f: p.c * p.c * f ** 1.5 + 9.0 * math.sqrt(f) - c2sq
    # The c^2 term only raises the left side, so the root sits below f_flat.
    lo = min(p.f0, f_flat) * 1e-12
    return float(brentq(g, lo, f_flat, xtol=1e-300, rtol=8.9e-16, maxiter=200))


# -- quadrature node generation -------------------------------------------

def _bracket_slope(f, fmax, c):
    """(c2^2 - c^2 f^{3/2} - 9 f^{1/2}) / (fmax - f), evaluated stably.

    Uses c2^2 = c^2 fmax^{3/2} + 9 fmax^{1/2} so the difference quotient
    has no cancellation as f -> fmax.
    """
    sf, sm = math.sqrt(f), math.sqrt(fmax)
    return (c * c * (fmax + sm * sf + f) + 9.0) / (sm + sf)


def _integrand_f(f, p):
    return 0.75 / math.sqrt(_radicand_raw(f, p.c, p.c2))

def _integrand_u(u, p, fmax):
    f = fmax - u * u
    d = _bracket_slope(f, fmax, p.c)
    return 1.5 / (f ** 1.75 * math.sqrt(d))


def _ascending_nodes(p, f_lo, f_hi, fmax, n):
    """f nodes ascending in [f_lo, f_hi] plus ds for each interval.

    ds[k] is the arc length spent moving from f[k] to f[k+1] on a monotone
    branch.  The part of the interval above fmax/2 is integrated in the
    u = sqrt(fmax - f) variable, where the integrand is smooth up to the
    turning value itself.
    """
    split = 0.5 * fmax
    f_nodes = []
    ds = []

    def _quad(fn, a, b, *args):
        val, _ = quad(fn, a, b, args=args, epsabs=1e-14, epsrel=1e-12, limit=200)
        return val

    if f_lo < min(split, f_hi):
        b_hi = min(split, f_hi)
        n_b = n if f_hi <= split else max(n // 2, 16)
        if f_lo < b_hi / 8.0:
            fs = np.geomspace(f_lo, b_hi, n_b)
        else:
            fs = np.linspace(f_lo, b_hi, n_b)
        f_nodes.extend(fs.tolist())
        for a, b in zip(fs[:-1], fs[1:]):
            ds.append(_quad(_integrand_f, a, b, p))
    if f_hi > split:
        a_lo = max(f_lo, split)
        u_lo = math.sqrt(max(fmax - a_lo, 0.0))
        u_hi = math.sqrt(max(fmax - f_hi, 0.0))
        n_a = max(n - len(f_nodes), 16)
        us = np.linspace(u_lo, u_hi, n_a)
        fs = fmax - us ** 2
        fs[0] = a_lo
        if f_hi >= fmax:
            fs[-1] = fmax
        start = 1 if f_nodes else 0  # avoid duplicating the boundary node
        f_nodes.extend(fs.tolist()[start:])
        for ua, ub in zip(us[:-1], us[1:]):
            # u decreases as f increases
            ds.append(_quad(_integrand_u, ub, ua, p, fmax))
    return np.array(f_nodes), np.array(ds)


@dataclass
class MeanCurvatureSolution:
    """Monotone-branch table of (s, f, f') with conserved-quantity audit."""

    params: ModelParams
    s: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    q: np.ndarray
    branch_marks: list
    q_drift: float
    fmax: float
    s_reached: float
    interpolator: CubicHermiteSpline
    warnings: list = field(default_factory=list)
    fpp_drift: float = float("nan")

    @property
    def s_start(self) -> float:
        return float(self.s[0])

    @property
    def exclusion_halfwidth(self) -> float:
        return EXCLUSION_BAND_FRACTION * (self.s_reached - self.s_start)

    def eps_at(self, s) -> int:
        if not self.branch_marks:
            return self.params.eps0
        s_turn = self.branch_marks[0]
        return self.params.eps0 if s <= s_turn else -self.params.eps0

    def in_exclusion_band(self, s) -> bool:
        return any(abs(s - m) < self.exclusion_halfwidth
                   for m in self.branch_marks)

    def f_at(self, s):
        return self.interpolator(s)

    def fprime_at(self, s: float) -> float:
        f = float(self.interpolator(s))
        w = max(_radicand_raw(min(f, self.fmax), self.params.c, self.params.c2), 0.0)
        return (4.0 / 3.0) * self.eps_at(s) * math.sqrt(w)

    def f_derivs(self, s: float, allow_near_turning: bool = False):
        """(f, f', f'', f''') at s; only f itself carries interpolation error."""
        lo, hi = self.s_start, self.s_reached
        if s < lo - 1e-12 or s > hi + 1e-12:
            raise DomainError(f"s={s} outside solved span [{lo}, {hi}]")
        if not allow_near_turning and self.in_exclusion_band(s):
            raise NearTurningError(
                f"s={s} is inside a turning-point exclusion band")
        p = self.params
        f = min(float(self.interpolator(s)), self.fmax)
        w = max(_radicand_raw(f, p.c, p.c2), 0.0)
        f1 = (4.0 / 3.0) * self.eps_at(s) * math.sqrt(w)
        c2_ = p.c * p.c
        f2 = 1.75 * f1 * f1 / f - 4.0 * f ** 3 - (4.0 / 3.0) * c2_ * f ** 4
        f3 = (3.5 * f1 * f2 / f - 1.75 * f1 ** 3 / (f * f)
              - 12.0 * f * f * f1 - (16.0 / 3.0) * c2_ * f ** 3 * f1)
        return f, f1, f2, f3

    def jet_at(self, s: float, t: float = 0.0,
               allow_near_turning: bool = False) -> Jet:
        """Degree-3 jet of f at chart point (s, t); f depends on s only."""
        f, f1, f2, f3 = self.f_derivs(s, allow_near_turning)
        return Jet.from_partials(
            {(0, 0): f, (1, 0): f1, (2, 0): f2, (3, 0): f3}, (s, t))

    def to_csv(self, path):
        from .report import write_solution_csv
        write_solution_csv(self, path)


def solve_f(p: ModelParams) -> MeanCurvatureSolution:
    """Integrate the profile ODE over the requested span.

    Quadrature in the f variable per monotone branch, stitched across the
    turning value by flipping the branch sign; the result is resampled
    uniformly in arc length and audited against the conserved quantity.
    """
    fmax = f_turning(p)
    s0, s_end = float(p.s_span[0]), float(p.s_span[1])
    n_branch = max(p.grid_n, 128) + 1
    warnings = []
    marks = []

    s_nodes = [s0]
    f_nodes = [p.f0]

    if p.eps0 == 1:
        fs, ds = _ascending_nodes(p, p.f0, fmax, fmax, n_branch)
        s_acc = s0
        for k in range(len(ds)):
            s_acc += ds[k]
            s_nodes.append(s_acc)
            f_nodes.append(fs[k + 1])
        s_turn = s_acc
        if s_turn <= s_end:
            marks.append(s_turn)
        f_desc_from = fmax
        s_from = s_turn
    else:
        f_desc_from = p.f0
        s_from = s0

    if s_from <= s_end:
        fs, ds = _ascending_nodes(p, p.f_floor, f_desc_from, fmax, n_branch)
        s_acc = s_from
        floor_hit = True
        for k in range(len(ds) - 1, -1, -1):
            s_acc += ds[k]
            s_nodes.append(s_acc)
            f_nodes.append(fs[k])
            if s_acc > s_end:
                floor_hit = False
                break
        if floor_hit and s_acc < s_end:
            warnings.append(
                f"span truncated at s={s_acc:.6g}: f reached the floor "
                f"{p.f_floor:g} before s={s_end:g}")

    s_nodes = np.array(s_nodes)
    f_nodes = np.array(f_nodes)
    # Branch signs at the nodes
    if marks:
        eps_nodes = np.where(s_nodes <= marks[0] + 1e-15, p.eps0, -p.eps0)
    else:
        eps_nodes = np.full(s_nodes.shape, p.eps0)
    w_nodes = np.maximum(_radicand_raw(np.minimum(f_nodes, fmax), p.c, p.c2), 0.0)
    fp_nodes = (4.0 / 3.0) * eps_nodes * np.sqrt(w_nodes)

    spline = CubicHermiteSpline(s_nodes, f_nodes, fp_nodes)

    s_reached = min(float(s_nodes[-1]), s_end)
    samples_s = np.linspace(s0, s_reached, p.grid_n)
    samples_f = np.minimum(spline(samples_s), fmax)
    if marks:
        eps_s = np.where(samples_s <= marks[0], p.eps0, -p.eps0)
    else:
        eps_s = np.full(samples_s.shape, p.eps0)
    w_s = np.maximum(_radicand_raw(samples_f, p.c, p.c2), 0.0)
    samples_fp = (4.0 / 3.0) * eps_s * np.sqrt(w_s)
    q = conserved_quantity(samples_f, samples_fp, p.c)
    c2sq = p.c2 * p.c2
    q_drift = float(np.max(np.abs(q - c2sq)) / c2sq)

    # Second-derivative audit: finite differences of f' vs the closed form,
    # away from the turning value where the one-sided branch switch sits.
    h = samples_s[1] - samples_s[0]
    fpp_fd = (samples_fp[2:] - samples_fp[:-2]) / (2.0 * h)
    fpp_formula = (1.75 * samples_fp ** 2 / samples_f
                   - 4.0 * samples_f ** 3
                   - (4.0 / 3.0) * p.c * p.c * samples_f ** 4)[1:-1]
    keep = np.ones(fpp_fd.shape, dtype=bool)
    for m in marks:
        keep &= np.abs(samples_s[1:-1] - m) > 10.0 * h
    scale = 1.0 + np.max(np.abs(fpp_formula))
    fpp_drift = float(np.max(np.abs(fpp_fd - fpp_formula)[keep]) / scale) \
        if np.any(keep) else float("nan")

    return MeanCurvatureSolution(
        params=p, s=samples_s, f=samples_f, fprime=samples_fp, q=q,
        branch_marks=marks, q_drift=q_drift, fmax=fmax, s_reached=s_reached,
        interpolator=spline, warnings=warnings, fpp_drift=fpp_drift)
