"""Profile curve of the rotational surface, built two independent ways.

The generating curve alpha(s) = (alpha1, alpha2, alpha3) lives in a
3-dimensional hyperplane and is reconstructed either from the closed-form
quadrature expressions (first component 1/(c2 f^{3/4}), the other two as
integrals of cos/sin of a phase against f^{1/4} sqrt(c^2 f + 9)), or by
integrating the Frenet system for the curvature/torsion pair

    kappa = f sqrt(1 + c^2 f),    tau = c f' / (2 sqrt(f) (1 + c^2 f)).

Both constructions must agree up to a rigid motion; certifying that is part
of the verification suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import jets as J
from .errors import DomainError, InvalidCurvatureError
from .meancurv import MeanCurvatureSolution, ModelParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(7)


def kappa_of(f, c: float):
    """Curvature of the profile curve as a function of mean curvature."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise DomainError("kappa_of requires f > 0")
    out = f * np.sqrt(1.0 + c * c * f)
    return float(out) if out.ndim == 0 else out


def tau_of(f, fprime, c: float):
    """Torsion of the profile curve; vanishes for c = 0 or at turning points."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise DomainError("tau_of requires f > 0")
    fprime = np.asarray(fprime, dtype=float)
    out = c * fprime / (2.0 * np.sqrt(f) * (1.0 + c * c * f))
    return float(out) if out.ndim == 0 else out


def _cumulative_integral(xs: np.ndarray, fn) -> np.ndarray:
    """Cumulative integral of a smooth vectorized integrand over a grid.

    Composite Gauss-Legendre per interval; the grid is halved-interval
    refined until the endpoint value is stable to 1e-10.
    """

    def _pass(grid):
        a, b = grid[:-1], grid[1:]
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = fn(pts.ravel()).reshape(pts.shape)
        return (vals * _GL_WEIGHTS[None, :]).sum(axis=1) * half

    grid = xs
    increments = _pass(grid)
    for _ in range(3):
        finer = np.unique(np.concatenate(
            [grid, 0.5 * (grid[:-1] + grid[1:])]))
        inc_f = _pass(finer)
        if abs(inc_f.sum() - increments.sum()) < 1e-10:
            break
        grid, increments = finer, inc_f
    # Re-aggregate increments onto the original grid
    if grid.shape != xs.shape:
        idx = np.searchsorted(grid, xs)
        cum = np.concatenate([[0.0], np.cumsum(increments)])
        return cum[idx]
    return np.concatenate([[0.0], np.cumsum(increments)])


def theta_solve(sol: MeanCurvatureSolution, p: ModelParams) -> CubicHermiteSpline:
    """Rotation phase theta(s) with theta' = 2 c c2 f^{5/4} / (c^2 f + 9).

    Normalized to theta(s_start) = 0; identically zero for c = 0.
    """
    s = sol.s

    def rate(x):
        f = np.minimum(np.asarray(sol.interpolator(x)), sol.fmax)
        return 2.0 * p.c * p.c2 * f ** 1.25 / (p.c * p.c * f + 9.0)

    if p.c == 0.0:
        theta = np.zeros_like(s)
    else:
        theta = _cumulative_integral(s, rate)
    return CubicHermiteSpline(s, theta, rate(s))


@dataclass
class ProfileCurve:
    """Arc-length sampled curve in E3 with its Frenet data."""

    s: np.ndarray
    position: np.ndarray   # (n, 3)
    T: np.ndarray          # unit tangent
    N: np.ndarray          # principal normal
    B: np.ndarray          # binormal (= T x N)
    kappa: np.ndarray
    tau: np.ndarray
    construction_tag: str
    model: Optional["ProfileModel"] = None

    def to_csv(self, path):
        from .report import write_profile_csv
        write_profile_csv(self, path)


def planarity_thickness(curve: ProfileCurve) -> float:
    """Third singular value of the centered sample cloud (0 for plane curves)."""
    pos = curve.position - curve.position.mean(axis=0)
    return float(np.linalg.svd(pos, compute_uv=False)[2])


class ProfileModel:
    """Closed-form profile machinery: phase and position quadratures plus jets.

    Holds cubic Hermite tables for theta, alpha2, alpha3 on the solver grid
    (values by quadrature, derivatives closed-form), and exposes degree-3
    jets of the curve components at arbitrary arc length.  Integration
    constants are fixed as theta(s0) = 0, alpha2(s0) = alpha3(s0) = 0.
    """

    def __init__(self, sol: MeanCurvatureSolution, p: ModelParams):
        self.sol = sol
        self.p = p
        self.theta = theta_solve(sol, p)
        s = sol.s

        def _f(x):
            return np.minimum(np.asarray(sol.interpolator(x)), sol.fmax)

        def rate2(x):
            f = _f(x)
            return (np.cos(self.theta(x)) * f ** 0.25
                    * np.sqrt(p.c * p.c * f + 9.0) / p.c2)

        def rate3(x):
            f = _f(x)
            return (np.sin(self.theta(x)) * f ** 0.25
                    * np.sqrt(p.c * p.c * f + 9.0) / p.c2)

        self.alpha2 = CubicHermiteSpline(s, _cumulative_integral(s, rate2),
                                         rate2(s))
        self.alpha3 = CubicHermiteSpline(s, _cumulative_integral(s, rate3),
                                         rate3(s))
        # Per-arclength jet coefficient caches; the coefficients are pure
        # s-partials, so one entry serves every chart point (s, *).
        self._alpha_cache: dict = {}
        self._frame_cache: dict = {}

    # -- jets -------------------------------------------------------------

    def f_jet(self, s: float, t: float = 0.0,
              allow_near_turning: bool = True) -> J.Jet:
        return self.sol.jet_at(s, t, allow_near_turning=allow_near_turning)

    def theta_jet(self, s: float, t: float = 0.0,
                  allow_near_turning: bool = True) -> J.Jet:
        fj = self.f_jet(s, t, allow_near_turning).truncate(2)
        c, c2 = self.p.c, self.p.c2
        rate = (2.0 * c * c2) * J.powr(fj, 5, 4) / (fj * (c * c) + 9.0)
        return J.integrate_s(rate, float(self.theta(s)))

    def alpha_jets(self, s: float, t: float = 0.0,
                   allow_near_turning: bool = True):
        """Degree-3 jets of (alpha1, alpha2, alpha3) at chart point (s, t)."""
        key = float(s)
        cached = self._alpha_cache.get(key)
        if cached is None:
            p = self.p
            fj = self.f_jet(s, t, allow_near_turning)
            a1 = J.powr(fj, -3, 4) / p.c2
            th = self.theta_jet(s, t, allow_near_turning)
            amp = J.powr(fj, 1, 4) * J.sqrt(fj * (p.c * p.c) + 9.0) / p.c2
            a2 = J.integrate_s((J.cos(th) * amp).truncate(2),
                               float(self.alpha2(s)))
            a3 = J.integrate_s((J.sin(th) * amp).truncate(2),
                               float(self.alpha3(s)))
            cached = tuple(tuple(a.coeffs) for a in (a1, a2, a3))
            self._alpha_cache[key] = cached
        else:
            if not allow_near_turning and self.sol.in_exclusion_band(s):
                # re-run the guard the cache would otherwise bypass
                self.sol.f_derivs(s, allow_near_turning=False)
        return tuple(J.Jet(list(c), (s, t)) for c in cached)

    def frame_jets(self, s: float, t: float = 0.0,
                   allow_near_turning: bool = True):
        """Jets of the Frenet frame (T deg-2, N and B deg-1) at arc length s."""
        key = float(s)
        cached = self._frame_cache.get(key)
        if cached is None:
            p = self.p
            a = self.alpha_jets(s, t, allow_near_turning)
            tj = [x.derivative("s") for x in a]
            tpj = [x.derivative("s") for x in tj]
            fj = self.f_jet(s, t, allow_near_turning).truncate(2)
            kj = fj * J.sqrt(fj * (p.c * p.c) + 1.0)
            nj = [x / kj for x in tpj]
            # B = N x T: the torsion convention here is tau = <N', B>, and
            # the constructed curve has <N', T x N> = -tau.
            bj = [nj[1] * tj[2] - nj[2] * tj[1],
                  nj[2] * tj[0] - nj[0] * tj[2],
                  nj[0] * tj[1] - nj[1] * tj[0]]
            cached = tuple(
                (tuple(x.coeffs), x.degree) for x in (*tj, *nj, *bj))
            self._frame_cache[key] = cached
        js = [J.Jet(list(c), (s, t), d) for c, d in cached]
        return js[0:3], js[3:6], js[6:9]

    # -- vectorized closed-form sampling ----------------------------------

    def _eps(self, s: np.ndarray) -> np.ndarray:
        p, sol = self.p, self.sol
        if sol.branch_marks:
            return np.where(s <= sol.branch_marks[0], p.eps0, -p.eps0)
        return np.full(np.shape(s), float(p.eps0))

    def sample(self, s_grid: Optional[np.ndarray] = None) -> ProfileCurve:
        p, sol = self.p, self.sol
        s = sol.s if s_grid is None else np.asarray(s_grid, dtype=float)
        f = np.minimum(np.asarray(sol.interpolator(s)), sol.fmax)
        eps = self._eps(s)
        from .meancurv import _radicand_raw
        fp = (4.0 / 3.0) * eps * np.sqrt(
            np.maximum(_radicand_raw(f, p.c, p.c2), 0.0))
        csq = p.c * p.c
        fpp = 1.75 * fp * fp / f - 4.0 * f ** 3 - (4.0 / 3.0) * csq * f ** 4

        th = self.theta(s)
        rate = 2.0 * p.c * p.c2 * f ** 1.25 / (csq * f + 9.0)
        amp = f ** 0.25 * np.sqrt(csq * f + 9.0) / p.c2

        a1 = 1.0 / (p.c2 * f ** 0.75)
        a2 = self.alpha2(s)
        a3 = self.alpha3(s)
        pos = np.stack([a1, a2, a3], axis=1)

        t1 = -0.75 * fp / (p.c2 * f ** 1.75)
        t2 = np.cos(th) * amp
        t3 = np.sin(th) * amp
        tvec = np.stack([t1, t2, t3], axis=1)

        # T' components, closed form
        tp1 = -0.75 * (fpp / f ** 1.75 - 1.75 * fp * fp / f ** 2.75) / p.c2
        damp = (0.25 * f ** -0.75 * np.sqrt(csq * f + 9.0)
                + f ** 0.25 * csq / (2.0 * np.sqrt(csq * f + 9.0))) * fp / p.c2
        tp2 = -np.sin(th) * rate * amp + np.cos(th) * damp
        tp3 = np.cos(th) * rate * amp + np.sin(th) * damp

        kappa = kappa_of(f, p.c)
        nvec = np.stack([tp1, tp2, tp3], axis=1) / kappa[:, None]
        bvec = np.cross(nvec, tvec)
        tau = tau_of(f, fp, p.c)
        return ProfileCurve(s=s, position=pos, T=tvec, N=nvec, B=bvec,
                            kappa=kappa, tau=tau,
                            construction_tag="closed_form", model=self)


def closed_form_profile(sol: MeanCurvatureSolution, p: ModelParams,
                        s_grid: Optional[np.ndarray] = None) -> ProfileCurve:
    """Profile curve from the closed-form quadrature construction."""
    return ProfileModel(sol, p).sample(s_grid)


def _orthonormalize_frame(t, n, b):
    t = t / np.linalg.norm(t)
    n = n - (n @ t) * t
    n = n / np.linalg.norm(n)
    b = b - (b @ t) * t - (b @ n) * n
    return t, n, b / np.linalg.norm(b)


def frenet_integrate(kappa: Callable, tau: Callable, init_frame, s_grid,
                     max_step: float = 5e-4) -> ProfileCurve:
    """Integrate alpha' = T, T' = kappa N, N' = -kappa T + tau B, B' = -tau N.

    Classic fourth-order Runge-Kutta with an orthonormality-projecting step:
    the frame is re-orthonormalized after every step, so drift stays at
    roundoff level.  ``init_frame`` is (position, T, N, B) at s_grid[0].
    """
    s_grid = np.asarray(s_grid, dtype=float)
    pos0, t0, n0, b0 = (np.asarray(v, dtype=float) for v in init_frame)

    def rhs(s, pos, t, n, b):
        k, w = float(kappa(s)), float(tau(s))
        if k <= 0.0:
            raise InvalidCurvatureError(
                f"kappa(s={s}) = {k}; Frenet frame needs kappa > 0")
        return t, k * n, -k * t + w * b, -w * n

    out_pos = [pos0]
    out_t, out_n, out_b = [t0], [n0], [b0]
    pos, t, n, b = pos0, t0, n0, b0
    for sa, sb in zip(s_grid[:-1], s_grid[1:]):
        nsub = max(1, int(math.ceil(abs(sb - sa) / max_step)))
        h = (sb - sa) / nsub
        s = sa
        for _ in range(nsub):
            k1 = rhs(s, pos, t, n, b)
            k2 = rhs(s + 0.5 * h, pos + 0.5 * h * k1[0], t + 0.5 * h * k1[1],
                     n + 0.5 * h * k1[2], b + 0.5 * h * k1[3])
            k3 = rhs(s + 0.5 * h, pos + 0.5 * h * k2[0], t + 0.5 * h * k2[1],
                     n + 0.5 * h * k2[2], b + 0.5 * h * k2[3])
            k4 = rhs(s + h, pos + h * k3[0], t + h * k3[1],
                     n + h * k3[2], b + h * k3[3])
            pos = pos + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            t = t + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            n = n + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            b = b + (h / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
            t, n, b = _orthonormalize_frame(t, n, b)
            s += h
        out_pos.append(pos)
        out_t.append(t)
        out_n.append(n)
        out_b.append(b)

    kappa_s = np.array([float(kappa(x)) for x in s_grid])
    tau_s = np.array([float(tau(x)) for x in s_grid])
    return ProfileCurve(s=s_grid, position=np.array(out_pos),
                        T=np.array(out_t), N=np.array(out_n),
                        B=np.array(out_b), kappa=kappa_s, tau=tau_s,
                        construction_tag="frenet")


def frame_components_check(curve: ProfileCurve, sol: MeanCurvatureSolution,
                           p: ModelParams) -> dict:
    """Max deviation of the frame's first components from their closed forms.

    The targets are t1 = alpha1', n1 = f^{1/4}(c^2 f + 3)/(c2 sqrt(c^2 f + 1))
    and b1 = -2 c f^{3/4}/(c2 sqrt(c^2 f + 1)); the initial frame convention
    of the builders makes these strict equalities, not up-to-sign matches.
    """
    s = curve.s
    f = np.minimum(np.asarray(sol.interpolator(s)), sol.fmax)
    if sol.branch_marks:
        eps = np.where(s <= sol.branch_marks[0], p.eps0, -p.eps0)
    else:
        eps = np.full(s.shape, float(p.eps0))
    from .meancurv import _radicand_raw
    w = np.maximum(_radicand_raw(f, p.c, p.c2), 0.0)
    csq = p.c * p.c
    t1 = -eps * np.sqrt(w) / (p.c2 * f ** 1.75)
    n1 = f ** 0.25 * (csq * f + 3.0) / (p.c2 * np.sqrt(csq * f + 1.0))
    b1 = -2.0 * p.c * f ** 0.75 / (p.c2 * np.sqrt(csq * f + 1.0))
    return {
        "t1": float(np.max(np.abs(curve.T[:, 0] - t1))),
        "n1": float(np.max(np.abs(curve.N[:, 0] - n1))),
        "b1": float(np.max(np.abs(curve.B[:, 0] - b1))),
    }
