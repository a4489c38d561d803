"""Rotational surface assembly and jet-based differential-geometry audit.

An immersion is represented purely by an evaluator returning degree-3 jets
of its four Cartesian components at a chart point.  Everything else --
metric, frames, second fundamental form, shape operators, mean curvature
vector, connection forms, Gaussian curvature and all structural residuals --
is recomputed from those jets, so the audit is independent of the closed
forms used to build the surface.

Frame derivatives are obtained by running the frame construction itself in
jet arithmetic (jets of the pipeline), never by finite-differencing frames
across grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets as J
from .errors import DomainError, OutOfChartError
from .linalg import eig_sym2
from .meancurv import MeanCurvatureSolution, ModelParams, _radicand_raw
from .profile import ProfileModel

GRAD_DEGENERACY_THRESHOLD = 1e-7


# -- jet-vector helpers ----------------------------------------------------

def _vdot(a, b):
    acc = a[0] * b[0]
    for x, y in zip(a[1:], b[1:]):
        acc = acc + x * y
    return acc


def _vaxpy(alpha, x, y):
    """alpha * x + y for jet vectors."""
    return [alpha * xi + yi for xi, yi in zip(x, y)]


def _vscale(alpha, x):
    return [alpha * xi for xi in x]


def _values(vec):
    return np.array([c.value for c in vec])


def _dvalues(vec, which):
    return np.array([c.derivative(which).value for c in vec])


# -- immersions ------------------------------------------------------------

@dataclass
class ImmersionJet:
    """Chart evaluator producing degree-3 jets of the four components."""

    evaluator: Callable
    s_range: tuple
    t_period: Optional[float] = None
    exclusion_bands: list = field(default_factory=list)
    params: Optional[ModelParams] = None
    profile_model: Optional[ProfileModel] = None
    tag: str = "immersion"

    def __call__(self, s: float, t: float):
        lo, hi = self.s_range
        if s < lo - 1e-12 or s > hi + 1e-12:
            raise OutOfChartError(f"s={s} outside chart range [{lo}, {hi}]")
        return self.evaluator(s, t)

    def in_exclusion_band(self, s: float) -> bool:
        return any(lo <= s <= hi for lo, hi in self.exclusion_bands)


def build_rotational_surface(model: ProfileModel,
                             perturb: float = 0.0) -> ImmersionJet:
    """Immersion jets of (a1 cos(c2 t), a1 sin(c2 t), a2, a3).

    Chart coordinates are the intrinsic (s, t), in which the induced metric
    is ds^2 + f^{-3/2} dt^2; one full revolution is t in [0, 2 pi / c2).
    With ``perturb`` nonzero the third component is scaled by (1 + perturb),
    producing a negative-control surface that stays immersed but loses the
    defining curvature property.
    """
    sol, p = model.sol, model.p
    c2 = p.c2

    def evaluator(s, t):
        a1, a2, a3 = model.alpha_jets(s, t, allow_near_turning=True)
        if perturb:
            a2 = a2 * (1.0 + perturb)
        phi = J.Jet.variable("t", (s, t)) * c2
        cphi, sphi = J.cos(phi), J.sin(phi)
        return (a1 * cphi, a1 * sphi, a2, a3)

    w = sol.exclusion_halfwidth
    bands = [(m - w, m + w) for m in sol.branch_marks]
    return ImmersionJet(evaluator=evaluator,
                        s_range=(sol.s_start, sol.s_reached),
                        t_period=2.0 * math.pi / c2,
                        exclusion_bands=bands, params=p, profile_model=model,
                        tag="perturbed" if perturb else "rotational")


def sphere_immersion(radius: float = 1.0) -> ImmersionJet:
    """Round sphere in the x4 = 0 hyperplane; reference case for the audit."""

    def evaluator(s, t):
        base = (s, t)
        sj = J.Jet.variable("s", base)
        tj = J.Jet.variable("t", base)
        cs, ss = J.cos(sj), J.sin(sj)
        ct, st = J.cos(tj), J.sin(tj)
        return (radius * cs * ct, radius * cs * st, radius * ss,
                J.Jet.constant(0.0, base))

    return ImmersionJet(evaluator=evaluator, s_range=(-1.4, 1.4),
                        t_period=2.0 * math.pi, tag="sphere")


# -- pointwise geometry ----------------------------------------------------

@dataclass
class PointGeometry:
    """All first/second-order invariants of an immersion at one chart point."""

    s: float
    t: float
    g: np.ndarray            # 2x2 first fundamental form
    e1: np.ndarray           # tangent unit vectors (E4 components)
    e2: np.ndarray
    e3: np.ndarray           # H / |H|
    e4: np.ndarray           # completes a det +1 frame
    h: np.ndarray            # h[k, i, j]: component along e_{3+k} of h(e_i, e_j)
    A3: np.ndarray
    A4: np.ndarray
    H: np.ndarray
    f: float
    gradf: np.ndarray        # components (e1(f), e2(f))
    K: float                 # intrinsic Gaussian curvature
    K_extrinsic: float       # det A3 + det A4
    omega12: np.ndarray      # (omega_12(e1), omega_12(e2))
    normconn: np.ndarray     # |normal projection of D_{e_i} e3|, i = 1, 2
    residual_gauss_curv: float
    degenerate_frame: bool
    e1_sign: float
    chart: dict = field(repr=False, default_factory=dict)


def point_geometry(surf: ImmersionJet, s: float, t: float,
                   f_floor: float = 1e-8) -> PointGeometry:
    """Compute every invariant at (s, t) from the immersion jets alone."""
    x = surf(s, t)
    base = x[0].base

    xs = [c.derivative("s") for c in x]        # degree 2
    xt = [c.derivative("t") for c in x]
    xss = [c.derivative("s") for c in xs]      # degree 1
    xst = [c.derivative("t") for c in xs]
    xtt = [c.derivative("t") for c in xt]

    g11 = _vdot(xs, xs)
    g12 = _vdot(xs, xt)
    g22 = _vdot(xt, xt)
    det_g = g11 * g22 - g12 * g12
    if det_g.value <= 0.0:
        raise DomainError(f"degenerate metric at (s={s}, t={t})")
    gi11, gi12, gi22 = g22 / det_g, -g12 / det_g, g11 / det_g

    # Orthonormal tangent frame built from the chart directions; chart
    # coefficients are carried as jets so the frame stays differentiable.
    c1s = 1.0 / J.sqrt(g11)
    u1 = _vscale(c1s, xs)
    wvec = _vaxpy(-(g12 / g11), xs, xt)
    wnorm = J.sqrt(_vdot(wvec, wvec))
    c2s = -(g12 / g11) / wnorm
    c2t = 1.0 / wnorm
    u2 = [w / wnorm for w in wvec]

    # Normal 2-frame: orthonormalize the two ambient axes least aligned
    # with the tangent plane (choice is locally constant, hence smooth).
    u1v, u2v = _values(u1), _values(u2)
    scores = u1v ** 2 + u2v ** 2
    k1, k2 = sorted(np.argsort(scores)[:2])
    m1 = [J.Jet.constant(1.0 if k == k1 else 0.0, base) for k in range(4)]
    for ref in (u1, u2):
        m1 = _vaxpy(-_vdot(m1, ref), ref, m1)
    m1 = _vscale(1.0 / J.sqrt(_vdot(m1, m1)), m1)
    m2 = [J.Jet.constant(1.0 if k == k2 else 0.0, base) for k in range(4)]
    for ref in (u1, u2, m1):
        m2 = _vaxpy(-_vdot(m2, ref), ref, m2)
    m2 = _vscale(1.0 / J.sqrt(_vdot(m2, m2)), m2)

    # Normal components of the second derivatives (degree-1 jets).
    secs = {"ss": xss, "st": xst, "tt": xtt}
    p1 = {ab: _vdot(v, m1) for ab, v in secs.items()}
    p2 = {ab: _vdot(v, m2) for ab, v in secs.items()}

    # Mean curvature vector H = (1/2) g^{ab} (normal part of x_ab).
    tr1 = gi11 * p1["ss"] + 2.0 * gi12 * p1["st"] + gi22 * p1["tt"]
    tr2 = gi11 * p2["ss"] + 2.0 * gi12 * p2["st"] + gi22 * p2["tt"]
    Hvec = _vaxpy(0.5 * tr1, m1, _vscale(0.5 * tr2, m2))
    f_jet = J.sqrt(_vdot(Hvec, Hvec))
    f = f_jet.value
    if f < f_floor:
        raise DomainError(
            f"mean curvature {f:.3e} below floor at (s={s}, t={t})")
    e3 = [c / f_jet for c in Hvec]

    # Gradient of f in the orthonormal tangent frame.
    dfs, dft = f_jet.partial(1, 0), f_jet.partial(0, 1)
    u1f = c1s.value * dfs
    u2f = c2s.value * dfs + c2t.value * dft
    grad_norm = math.hypot(u1f, u2f)
    degenerate = grad_norm < GRAD_DEGENERACY_THRESHOLD * (1.0 + abs(f))
    sign = 1.0
    if not degenerate:
        # Align e1 with grad f (for the built family grad f is along the
        # s-direction, so this is a pure sign choice).
        sign = 1.0 if u1f >= 0.0 else -1.0
    e1 = _vscale(J.Jet.constant(sign, base), u1)
    e2 = u2
    e1v = sign * u1v
    gradf = np.array([sign * u1f, u2f])

    # e4: the leftover normal direction, oriented so det(e1,e2,e3,e4) = +1.
    cand1 = abs(_vdot(m1, e3).value)
    cand2 = abs(_vdot(m2, e3).value)
    mpick = m1 if cand1 <= cand2 else m2
    e4 = _vaxpy(-_vdot(mpick, e3), e3, mpick)
    e4 = _vscale(1.0 / J.sqrt(_vdot(e4, e4)), e4)
    e3v, e4v = _values(e3), _values(e4)
    if np.linalg.det(np.stack([e1v, _values(e2), e3v, e4v])) < 0.0:
        e4 = [-c for c in e4]
        e4v = -e4v

    # Chart coefficients of the frame (values).
    ce1 = np.array([sign * c1s.value, 0.0])
    ce2 = np.array([c2s.value, c2t.value])

    # Frame components of h, and the shape operators.
    m1e3, m2e3 = _vdot(m1, e3), _vdot(m2, e3)
    m1e4, m2e4 = _vdot(m1, e4), _vdot(m2, e4)
    H3 = {ab: p1[ab] * m1e3 + p2[ab] * m2e3 for ab in secs}
    H4 = {ab: p1[ab] * m1e4 + p2[ab] * m2e4 for ab in secs}

    def _frame_form(Hn):
        hv = np.array([[Hn["ss"].value, Hn["st"].value],
                       [Hn["st"].value, Hn["tt"].value]])
        out = np.empty((2, 2))
        for i, ci in enumerate((ce1, ce2)):
            for j, cj in enumerate((ce1, ce2)):
                out[i, j] = ci @ hv @ cj
        return out

    A3 = _frame_form(H3)
    A4 = _frame_form(H4)

    # Connection form of the tangent frame.
    de1 = {"s": _dvalues(e1, "s"), "t": _dvalues(e1, "t")}
    e2val = _values(e2)
    omega12 = np.array([
        (ce1[0] * de1["s"] + ce1[1] * de1["t"]) @ e2val,
        (ce2[0] * de1["s"] + ce2[1] * de1["t"]) @ e2val,
    ])

    # Normal connection of e3 (and the antisymmetrized derivative feeding
    # the normal-curvature check).
    de3 = {"s": _dvalues(e3, "s"), "t": _dvalues(e3, "t")}
    de4 = {"s": _dvalues(e4, "s"), "t": _dvalues(e4, "t")}
    sigma_chart = np.array([de3["s"] @ e4v, de3["t"] @ e4v])
    normconn = np.empty(2)
    sigma_frame = np.empty(2)
    for i, ci in enumerate((ce1, ce2)):
        d = ci[0] * de3["s"] + ci[1] * de3["t"]
        normconn[i] = math.hypot(d @ e3v, d @ e4v)
        sigma_frame[i] = ci[0] * sigma_chart[0] + ci[1] * sigma_chart[1]
    dsigma_st = de3["t"] @ de4["s"] - de3["s"] @ de4["t"]

    # Gaussian curvature, intrinsic and extrinsic.
    K_ext = float(np.linalg.det(A3) + np.linalg.det(A4))
    if abs(g12.value) < 1e-8 and abs(g11.value - 1.0) < 1e-8:
        root = J.sqrt(g22)
        K_int = -root.partial(2, 0) / root.value
    else:
        K_int = _brioschi(g11, g12, g22)
    res_gauss = abs(K_int - K_ext) / (1.0 + abs(K_int))

    chart = {
        "g11": g11, "g12": g12, "g22": g22,
        "H3": H3, "H4": H4,
        "sigma_chart": sigma_chart, "dsigma_st": dsigma_st,
        "ce1": ce1, "ce2": ce2,
        "sigma_frame": sigma_frame,
        "grad_chart": np.array([dfs, dft]),
    }

    g = np.array([[g11.value, g12.value], [g12.value, g22.value]])
    h = np.stack([A3, A4])
    return PointGeometry(
        s=s, t=t, g=g, e1=e1v, e2=e2val, e3=e3v, e4=e4v, h=h, A3=A3, A4=A4,
        H=_values(Hvec), f=f, gradf=gradf, K=float(K_int),
        K_extrinsic=K_ext, omega12=omega12, normconn=normconn,
        residual_gauss_curv=float(res_gauss), degenerate_frame=degenerate,
        e1_sign=sign, chart=chart)


def _brioschi(g11, g12, g22) -> float:
    """Brioschi intrinsic curvature from metric jets (general chart)."""
    E, F, G = g11, g12, g22
    Es, Et = E.partial(1, 0), E.partial(0, 1)
    Fs, Ft = F.partial(1, 0), F.partial(0, 1)
    Gs, Gt = G.partial(1, 0), G.partial(0, 1)
    Ett = E.partial(0, 2)
    Fst = F.partial(1, 1)
    Gss = G.partial(2, 0)
    m1 = np.array([
        [-0.5 * Ett + Fst - 0.5 * Gss, 0.5 * Es, Fs - 0.5 * Et],
        [Ft - 0.5 * Gs, E.value, F.value],
        [0.5 * Gt, F.value, G.value],
    ])
    m2 = np.array([
        [0.0, 0.5 * Et, 0.5 * Gs],
        [0.5 * Et, E.value, F.value],
        [0.5 * Gs, F.value, G.value],
    ])
    det_g = E.value * G.value - F.value ** 2
    return float((np.linalg.det(m1) - np.linalg.det(m2)) / det_g ** 2)


# -- residual operations ---------------------------------------------------

def biconservativity_residual(pg: PointGeometry) -> float:
    """Relative size of A_{e3}(grad f) + f grad f (zero iff biconservative)."""
    v = pg.A3 @ pg.gradf + pg.f * pg.gradf
    return float(np.linalg.norm(v)
                 / (1.0 + pg.f * np.linalg.norm(pg.gradf)))


def pnmcv_residual(pg: PointGeometry) -> float:
    """Max norm of the normal-connection derivative of the H direction."""
    return float(np.max(pg.normconn))


def structure_residuals(pg: PointGeometry, c: Optional[float] = None) -> dict:
    """Codazzi/Ricci/connection residuals, plus the curvature law if c given.

    Codazzi and Ricci vanish identically for any immersion into flat
    4-space; they audit the jet pipeline, not the surface family.  The
    connection residual checks omega_12(e1) = 0 and
    omega_12(e2) = -3 e1(f)/(4 f), and is only meaningful when the frame is
    aligned with grad f (None when degenerate).
    """
    ch = pg.chart
    out = {}

    # Codazzi: symmetrized covariant derivative of h in chart indices.
    g = pg.g
    gi = np.linalg.inv(g)
    dg = np.empty((2, 2, 2))  # dg[a, b, c] = d_a g_bc
    for a, wa in enumerate("st"):
        for (b, c_), key in (((0, 0), "g11"), ((0, 1), "g12"), ((1, 1), "g22")):
            v = ch[key].derivative(wa).value
            dg[a, b, c_] = v
            dg[a, c_, b] = v
    gamma = np.empty((2, 2, 2))  # gamma[c, a, b]
    for cc in range(2):
        for a in range(2):
            for b in range(2):
                gamma[cc, a, b] = 0.5 * sum(
                    gi[cc, d] * (dg[a, b, d] + dg[b, a, d] - dg[d, a, b])
                    for d in range(2))

    def _tab(Hn):
        val = np.array([[Hn["ss"].value, Hn["st"].value],
                        [Hn["st"].value, Hn["tt"].value]])
        der = np.empty((2, 2, 2))  # der[a, b, c] = d_a H_bc
        for a, wa in enumerate("st"):
            for (b, c_), key in (((0, 0), "ss"), ((0, 1), "st"), ((1, 1), "tt")):
                v = Hn[key].derivative(wa).value
                der[a, b, c_] = v
                der[a, c_, b] = v
        return val, der

    h3, dh3 = _tab(ch["H3"])
    h4, dh4 = _tab(ch["H4"])
    sig = ch["sigma_chart"]

    def _cov(der, val, other, sgn, a, b, c_):
        # (normal-covariant derivative of h)(a; b, c), one frame component
        out_ = der[a, b, c_] + sgn * sig[a] * other[b, c_]
        for d in range(2):
            out_ -= gamma[d, a, b] * val[d, c_] + gamma[d, a, c_] * val[b, d]
        return out_

    scale = 1.0 + max(np.max(np.abs(dh3)), np.max(np.abs(dh4)),
                      np.max(np.abs(gamma)) * max(np.max(np.abs(h3)),
                                                  np.max(np.abs(h4))))
    cod = 0.0
    for c_ in range(2):
        cod = max(cod, abs(_cov(dh3, h3, h4, -1.0, 0, 1, c_)
                           - _cov(dh3, h3, h4, -1.0, 1, 0, c_)))
        cod = max(cod, abs(_cov(dh4, h4, h3, +1.0, 0, 1, c_)
                           - _cov(dh4, h4, h3, +1.0, 1, 0, c_)))
    out["codazzi"] = float(cod / scale)

    # Ricci: normal curvature vs the shape-operator commutator.
    ce1, ce2 = ch["ce1"], ch["ce2"]
    area = ce1[0] * ce2[1] - ce1[1] * ce2[0]
    lhs = area * ch["dsigma_st"]
    comm = pg.A3 @ pg.A4 - pg.A4 @ pg.A3
    rhs = -comm[0, 1]
    rscale = 1.0 + max(abs(lhs), np.max(np.abs(pg.A3)) * np.max(np.abs(pg.A4)))
    out["ricci"] = float(abs(lhs - rhs) / rscale)

    # Tangent connection against the target family's closed form.
    if pg.degenerate_frame:
        out["connection"] = None
    else:
        e1f = pg.gradf[0]
        out["connection"] = float(
            abs(pg.omega12[0])
            + abs(pg.omega12[1] + 3.0 * e1f / (4.0 * pg.f)))

    if c is not None:
        k_target = -3.0 * pg.f ** 2 - c * c * pg.f ** 3
        out["curvature_law"] = float(abs(pg.K - k_target) / (1.0 + abs(pg.K)))
    return out


def shape_operator_residuals(pg: PointGeometry, p: ModelParams) -> dict:
    """Eigenvalue deviations of A3 from {-f, 3f} and A4 from {+-c f^{3/2}}."""
    f = pg.f
    (lo3, hi3), _ = eig_sym2(pg.A3)
    t3 = sorted([-f, 3.0 * f])
    r3 = max(abs(lo3 - t3[0]), abs(hi3 - t3[1])) / (1.0 + abs(f))
    (lo4, hi4), _ = eig_sym2(pg.A4)
    lam = abs(p.c) * f ** 1.5
    t4 = sorted([-lam, lam])
    r4 = max(abs(lo4 - t4[0]), abs(hi4 - t4[1])) / (1.0 + lam)
    return {"A3": float(r3), "A4": float(r4)}


def frame_rotation_check(pg: PointGeometry, model: ProfileModel,
                         p: ModelParams) -> float:
    """Deviation of the measured normal frame from the rotated Frenet lift.

    The target is e3 = (-ehat3 + c sqrt(f) ehat4) / sqrt(c^2 f + 1) with
    ehat3, ehat4 the rotational lifts of the profile normal and binormal;
    the e4 comparison is resolved up to the orientation convention's sign.
    """
    s, t = pg.s, pg.t
    _, nj, bj = model.frame_jets(s, t)
    nvals = _values(nj)
    bvals = _values(bj)
    phi = p.c2 * t
    cph, sph = math.cos(phi), math.sin(phi)
    ehat3 = np.array([nvals[0] * cph, nvals[0] * sph, nvals[1], nvals[2]])
    ehat4 = np.array([bvals[0] * cph, bvals[0] * sph, bvals[1], bvals[2]])
    f = pg.f
    den = math.sqrt(p.c * p.c * f + 1.0)
    e3_target = (-ehat3 + p.c * math.sqrt(f) * ehat4) / den
    e4_target = (p.c * math.sqrt(f) * ehat3 + ehat4) / den
    r3 = np.linalg.norm(pg.e3 - e3_target)
    r4 = min(np.linalg.norm(pg.e4 - e4_target),
             np.linalg.norm(pg.e4 + e4_target))
    return float(r3 + r4)


def frenet_lift_normal_connection(model: ProfileModel, s: float,
                                  t: float = 0.0) -> tuple:
    """(measured, target) norm of the normal-connection derivative of the
    raw Frenet normal lift ehat3 along the arc-length direction.

    Unlike the normalized mean curvature direction, ehat3 is not parallel;
    its drift rate equals 2|c| sqrt(W(f)/f) / (3 (c^2 f + 1)) and serves as
    the negative control for the parallelism check.
    """
    p = model.p
    _, nj, bj = model.frame_jets(s, t)
    phi_jet = J.Jet.variable("t", (s, t)) * p.c2
    cph, sph = J.cos(phi_jet), J.sin(phi_jet)
    ehat3 = [nj[0] * cph, nj[0] * sph, nj[1], nj[2]]
    ehat4 = [bj[0] * cph, bj[0] * sph, bj[1], bj[2]]
    d3 = _dvalues(ehat3, "s")
    e3v, e4v = _values(ehat3), _values(ehat4)
    measured = math.hypot(d3 @ e3v, d3 @ e4v)
    f = min(float(model.sol.interpolator(s)), model.sol.fmax)
    w = max(_radicand_raw(f, p.c, p.c2), 0.0)
    target = 2.0 * abs(p.c) * math.sqrt(w / f) / (3.0 * (p.c * p.c * f + 1.0))
    return measured, target


# -- grid evaluation -------------------------------------------------------

def verification_grid(surf: ImmersionJet, n_s: int, n_t: int):
    """Chart sample points avoiding exclusion bands in s.

    Returns (s values, t values); t covers one period (or [0, 2 pi) when the
    immersion is not periodic).
    """
    lo, hi = surf.s_range
    pad = 1e-9 * (hi - lo)
    s_all = np.linspace(lo + pad, hi - pad, n_s + 8)
    keep = np.array([not surf.in_exclusion_band(s) for s in s_all])
    s_vals = s_all[keep][:n_s]
    period = surf.t_period if surf.t_period else 2.0 * math.pi
    t_vals = np.linspace(0.0, period, n_t, endpoint=False)
    return s_vals, t_vals
