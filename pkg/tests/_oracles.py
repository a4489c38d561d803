"""Independent numerical oracles used to cross-check the library.

These deliberately avoid the code paths under test: the ODE oracle is a
generic adaptive integrator on the second-order form of the curvature
equation, the derivative oracle is Richardson-extrapolated central
differencing, and the root oracle is plain bisection.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def curvature_ode_oracle(c, c2, f0, eps0, s_eval, rtol=1e-12, atol=1e-14):
    """Integrate f'' = (7/4) f'^2/f - 4 f^3 - (4/3) c^2 f^4 adaptively.

    The second-order form is smooth through the turning value, so it makes
    an oracle independent of the quadrature-in-f construction (which is
    organized around monotone branches).
    """
    w0 = c2 * c2 * f0 ** 3.5 - c * c * f0 ** 5 - 9.0 * f0 ** 4
    fp0 = (4.0 / 3.0) * eps0 * np.sqrt(w0)

    def rhs(_, y):
        f, fp = y
        return [fp, 1.75 * fp * fp / f - 4.0 * f ** 3
                - (4.0 / 3.0) * c * c * f ** 4]

    s_eval = np.asarray(s_eval, dtype=float)
    res = solve_ivp(rhs, (s_eval[0], s_eval[-1]), [f0, fp0], t_eval=s_eval,
                    method="DOP853", rtol=rtol, atol=atol)
    if not res.success:
        raise RuntimeError(f"oracle integration failed: {res.message}")
    return res.y[0], res.y[1]


def richardson_partial(func, s, t, i, j, h=None):
    """Partial d^(i+j) func / ds^i dt^j by Richardson-extrapolated stencils.

    Supports all multi-indices with i + j <= 3; ``func`` is a plain scalar
    function of (s, t).  The default step grows with the order: nesting
    first-derivative stencils amplifies roundoff roughly like eps / h^order.
    """
    if h is None:
        h = {0: 1e-3, 1: 1e-3, 2: 4e-3, 3: 1.5e-2}[i + j]
    def reduce_s(g, order):
        if order == 0:
            return g
        inner = reduce_s(g, order - 1)
        return lambda x, y: _richardson1(lambda u: inner(u, y), x, h)

    def reduce_t(g, order):
        if order == 0:
            return g
        inner = reduce_t(g, order - 1)
        return lambda x, y: _richardson1(lambda v: inner(x, v), y, h)

    return reduce_t(reduce_s(func, i), j)(s, t)


def _richardson1(g, x, h):
    """First derivative via central differences at h and h/2, extrapolated."""
    d1 = (g(x + h) - g(x - h)) / (2.0 * h)
    d2 = (g(x + 0.5 * h) - g(x - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def bisect_root(g, lo, hi, iters=200):
    glo = g(lo)
    assert glo * g(hi) <= 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if glo * gm <= 0.0:
            hi = mid
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)
