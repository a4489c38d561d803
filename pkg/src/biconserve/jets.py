"""Truncated bivariate Taylor (jet) arithmetic in chart variables (s, t).

A jet stores raw partial derivatives d^(i+j)/ds^i dt^j of a scalar quantity at
a fixed chart point, up to total degree 3.  All the geometry downstream reads
partial derivatives straight out of these jets, so coefficients are kept as
raw partials, never as normalized Taylor coefficients.

Jets are immutable values: every operation returns a fresh jet and two jets
can only be combined when they are expanded at the identical base point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from .errors import (
    BasePointMismatchError,
    DomainError,
    OrderOverflowError,
    SingularJetError,
)

MAX_DEGREE = 3

# Graded ordering of multi-indices; the degree-d list is a prefix of the
# degree-(d+1) list, so flat coefficient lists of lower degree are prefixes.
_INDEX = [(0, 0),
          (1, 0), (0, 1),
          (2, 0), (1, 1), (0, 2),
          (3, 0), (2, 1), (1, 2), (0, 3)]
_POS = {ij: k for k, ij in enumerate(_INDEX)}
_COUNT = [1, 3, 6, 10]  # number of coefficients for degree 0..3


def _build_mul_table(degree):
    table = []
    for t, (i, j) in enumerate(_INDEX[:_COUNT[degree]]):
        for a in range(i + 1):
            for b in range(j + 1):
                w = math.comb(i, a) * math.comb(j, b)
                table.append((t, _POS[(a, b)], _POS[(i - a, j - b)], float(w)))
    return table


_MUL = [_build_mul_table(d) for d in range(MAX_DEGREE + 1)]


class Jet:
    """Raw-partial jet of a scalar function at a fixed chart point."""

    __slots__ = ("coeffs", "degree", "base")

    def __init__(self, coeffs: Iterable[float], base, degree: int = MAX_DEGREE):
        coeffs = list(coeffs)
        if degree < 0 or degree > MAX_DEGREE:
            raise OrderOverflowError(f"unsupported jet degree {degree}")
        if len(coeffs) != _COUNT[degree]:
            raise ValueError(
                f"degree-{degree} jet needs {_COUNT[degree]} coefficients, "
                f"got {len(coeffs)}")
        self.coeffs = coeffs
        self.degree = degree
        self.base = (float(base[0]), float(base[1]))

    # -- construction -----------------------------------------------------

    @staticmethod
    def constant(value: float, base, degree: int = MAX_DEGREE) -> "Jet":
        c = [0.0] * _COUNT[degree]
        c[0] = float(value)
        return Jet(c, base, degree)

    @staticmethod
    def variable(which: str, base, degree: int = MAX_DEGREE) -> "Jet":
        """Coordinate jet: value from the base point, unit first derivative."""
        if which not in ("s", "t"):
            raise ValueError("which must be 's' or 't'")
        c = [0.0] * _COUNT[degree]
        c[0] = base[0] if which == "s" else base[1]
        if degree >= 1:
            c[_POS[(1, 0)] if which == "s" else _POS[(0, 1)]] = 1.0
        return Jet(c, base, degree)

    @staticmethod
    def from_partials(partials: dict, base, degree: int = MAX_DEGREE) -> "Jet":
        c = [0.0] * _COUNT[degree]
        for (i, j), v in partials.items():
            if i + j > degree:
                raise OrderOverflowError(f"partial ({i},{j}) beyond degree {degree}")
            c[_POS[(i, j)]] = float(v)
        return Jet(c, base, degree)

    # -- queries ----------------------------------------------------------

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def partial(self, i: int, j: int) -> float:
        """Stored raw partial d^(i+j)/ds^i dt^j."""
        if i < 0 or j < 0 or i + j > self.degree:
            raise OrderOverflowError(
                f"partial ({i},{j}) exceeds jet degree {self.degree}")
        return self.coeffs[_POS[(i, j)]]

    def truncate(self, degree: int) -> "Jet":
        if degree > self.degree:
            raise OrderOverflowError("cannot extend a jet by truncation")
        return Jet(self.coeffs[:_COUNT[degree]], self.base, degree)

    def derivative(self, which: str) -> "Jet":
        """Jet of the partial derivative; truncation order drops by one."""
        if self.degree == 0:
            raise OrderOverflowError("cannot differentiate a degree-0 jet")
        d = self.degree - 1
        di, dj = (1, 0) if which == "s" else (0, 1)
        c = [self.coeffs[_POS[(i + di, j + dj)]] for (i, j) in _INDEX[:_COUNT[d]]]
        return Jet(c, self.base, d)

    def __repr__(self):
        parts = ", ".join(f"{ij}:{self.coeffs[_POS[ij]]:.6g}"
                          for ij in _INDEX[:_COUNT[self.degree]])
        return f"Jet(base={self.base}, {{{parts}}})"

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.base != self.base:
                raise BasePointMismatchError(
                    f"jet base points differ: {self.base} vs {other.base}")
            return other
        if isinstance(other, (int, float)):
            return Jet.constant(float(other), self.base, self.degree)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = min(self.degree, o.degree)
        n = _COUNT[d]
        return Jet([self.coeffs[k] + o.coeffs[k] for k in range(n)], self.base, d)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-c for c in self.coeffs], self.base, self.degree)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = min(self.degree, o.degree)
        n = _COUNT[d]
        return Jet([self.coeffs[k] - o.coeffs[k] for k in range(n)], self.base, d)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            f = float(other)
            return Jet([c * f for c in self.coeffs], self.base, self.degree)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = min(self.degree, o.degree)
        a, b = self.coeffs, o.coeffs
        out = [0.0] * _COUNT[d]
        for t, p, q, w in _MUL[d]:
            out[t] += w * a[p] * b[q]
        return Jet(out, self.base, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * _reciprocal(o)

    def __rtruediv__(self, other):
        return _reciprocal(self) * float(other)


def _compose(a: Jet, derivs) -> Jet:
    """Univariate composition phi(a) from derivatives of phi at a.value.

    ``derivs`` lists phi, phi', phi'', phi''' at the jet's value; the
    truncated chain rule is exact at the stored degree.
    """
    delta = Jet(list(a.coeffs), a.base, a.degree)
    delta.coeffs[0] = 0.0
    out = Jet.constant(derivs[0], a.base, a.degree)
    if a.degree >= 1:
        out = out + delta * derivs[1]
    if a.degree >= 2:
        out = out + (delta * delta) * (derivs[2] / 2.0)
    if a.degree >= 3:
        out = out + (delta * delta * delta) * (derivs[3] / 6.0)
    return out


def _reciprocal(a: Jet) -> Jet:
    v = a.value
    if v == 0.0:
        raise SingularJetError("division by a jet with zero value coefficient")
    return _compose(a, [1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4])


def powr(a: Jet, p: int, q: int = 1) -> Jet:
    """Rational power a**(p/q); the exponent is taken as an exact pair."""
    r = Fraction(p, q)
    v = a.value
    if r.denominator == 1 and r >= 0:
        # Non-negative integer power: defined for any value.
        k = int(r)
        out = Jet.constant(1.0, a.base, a.degree)
        for _ in range(k):
            out = out * a
        return out
    if v <= 0.0:
        raise DomainError(
            f"fractional power {p}/{q} of a non-positive jet value {v}")
    rf = float(r)
    d0 = v ** rf
    d1 = rf * v ** (rf - 1.0)
    d2 = rf * (rf - 1.0) * v ** (rf - 2.0)
    d3 = rf * (rf - 1.0) * (rf - 2.0) * v ** (rf - 3.0)
    return _compose(a, [d0, d1, d2, d3])


def sqrt(a: Jet) -> Jet:
    return powr(a, 1, 2)


def sin(a: Jet) -> Jet:
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, [s, c, -s, -c])


def cos(a: Jet) -> Jet:
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, [c, -s, -c, s])


def integrate_s(g: Jet, value: float) -> Jet:
    """Jet of an s-antiderivative of ``g`` with prescribed value.

    Only valid for quantities with no t-dependence: every t-partial of ``g``
    must vanish, and the result inherits zero t-partials.
    """
    for (i, j) in _INDEX[:_COUNT[g.degree]]:
        if j > 0 and g.coeffs[_POS[(i, j)]] != 0.0:
            raise DomainError("integrate_s requires a t-independent jet")
    d = min(g.degree + 1, MAX_DEGREE)
    c = [0.0] * _COUNT[d]
    c[0] = float(value)
    for i in range(d):
        c[_POS[(i + 1, 0)]] = g.coeffs[_POS[(i, 0)]]
    return Jet(c, g.base, d)


# Functional wrappers ------------------------------------------------------

def jet_variable(which: str, value: float, other: float = 0.0) -> Jet:
    """Degree-3 coordinate jet of s or t with the stated value."""
    base = (value, other) if which == "s" else (other, value)
    return Jet.variable(which, base)


def jet_func(a: Jet, func: str, p: int | None = None, q: int = 1) -> Jet:
    if func == "sqrt":
        return sqrt(a)
    if func == "pow_rational":
        if p is None:
            raise ValueError("pow_rational requires the exponent pair (p, q)")
        return powr(a, p, q)
    if func == "sin":
        return sin(a)
    if func == "cos":
        return cos(a)
    raise ValueError(f"unknown jet function {func!r}")


def extract_partial(a: Jet, i: int, j: int) -> float:
    return a.partial(i, j)
