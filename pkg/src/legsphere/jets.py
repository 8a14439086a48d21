"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`Jet` holds the Taylor coefficients of a smooth quantity at a
point, up to a fixed total degree, in up to three variables.  Sums,
products, quotients, square roots and partial derivatives of jets are
computed exactly on the coefficients, so any expression assembled from
jets yields machine-precision derivatives of the result -- no finite
differencing.  This is what lets fourth-order quantities (the bitension
field) come out at ~1e-10 instead of drowning in stencil noise.

Coefficients are stored as ``coef[monomial, *value_shape]`` where the
monomial order is graded lexicographic; ``coef[k]`` is the partial
derivative divided by the factorial of the exponent tuple.
"""

from functools import lru_cache
import itertools
import math

import numpy as np


@lru_cache(maxsize=None)
def monomials(nvars, degree):
    """Exponent tuples with total degree <= degree, graded lexicographic."""
    mons = [e for e in itertools.product(range(degree + 1), repeat=nvars)
            if sum(e) <= degree]
    mons.sort(key=lambda e: (sum(e), e))
    return tuple(mons)


@lru_cache(maxsize=None)
def _tables(nvars, degree):
    """Multiplication triples and per-variable derivative maps."""
    mons = monomials(nvars, degree)
    index = {e: i for i, e in enumerate(mons)}
    ii, jj, kk = [], [], []
    for i, ei in enumerate(mons):
        for j, ej in enumerate(mons):
            s = tuple(a + b for a, b in zip(ei, ej))
            if sum(s) <= degree:
                ii.append(i)
                jj.append(j)
                kk.append(index[s])
    mul = (np.array(ii), np.array(jj), np.array(kk))

    # deriv[v] = (source indices, target indices, exponent factors)
    deriv = []
    for v in range(nvars):
        src, dst, fac = [], [], []
        for i, e in enumerate(mons):
            if e[v] > 0:
                lower = tuple(x - (1 if w == v else 0) for w, x in enumerate(e))
                src.append(i)
                dst.append(index[lower])
                fac.append(float(e[v]))
        deriv.append((np.array(src), np.array(dst), np.array(fac)))
    return mons, index, mul, tuple(deriv)


class Jet:
    """Taylor coefficients of a scalar or array quantity at a point."""

    __slots__ = ("coef", "nvars", "degree")

    def __init__(self, coef, nvars, degree):
        self.coef = np.asarray(coef, dtype=float)
        self.nvars = nvars
        self.degree = degree

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, nvars, degree):
        value = np.asarray(value, dtype=float)
        n = len(monomials(nvars, degree))
        coef = np.zeros((n,) + value.shape)
        coef[0] = value
        return cls(coef, nvars, degree)

    @classmethod
    def from_partials(cls, partials, nvars, degree):
        """Build a jet from a map {exponent tuple: partial derivative}."""
        mons, index, _, _ = _tables(nvars, degree)
        sample = np.asarray(next(iter(partials.values())), dtype=float)
        coef = np.zeros((len(mons),) + sample.shape)
        for e, val in partials.items():
            fact = math.prod(math.factorial(k) for k in e)
            coef[index[e]] = np.asarray(val, dtype=float) / fact
        return cls(coef, nvars, degree)

    # -- access --------------------------------------------------------

    def value(self):
        """The quantity itself (degree-zero coefficient)."""
        return self.coef[0]

    def deriv(self, var):
        """Partial derivative along ``var``; exact, drops one degree of validity."""
        _, _, _, deriv = _tables(self.nvars, self.degree)
        src, dst, fac = deriv[var]
        out = np.zeros_like(self.coef)
        shaped = fac.reshape((-1,) + (1,) * (self.coef.ndim - 1))
        out[dst] = self.coef[src] * shaped
        return Jet(out, self.nvars, self.degree)

    # -- ring operations ----------------------------------------------

    def _wrap(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.asarray(other, dtype=float), self.nvars, self.degree)

    def __add__(self, other):
        other = self._wrap(other)
        a, b = self.coef, other.coef
        while a.ndim < b.ndim:
            a = a[..., None]
        while b.ndim < a.ndim:
            b = b[..., None]
        return Jet(a + b, self.nvars, self.degree)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.nvars, self.degree)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coef * other, self.nvars, self.degree)
        ii, jj, kk = _tables(self.nvars, self.degree)[2]
        a = self.coef[ii]
        b = other.coef[jj]
        while a.ndim < b.ndim:
            a = a[..., None]
        while b.ndim < a.ndim:
            b = b[..., None]
        prod = a * b
        out = np.zeros((self.coef.shape[0],) + prod.shape[1:])
        np.add.at(out, kk, prod)
        return Jet(out, self.nvars, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- analytic operations -------------------------------------------

    def reciprocal(self):
        """1/self via the truncated geometric series; constant term must be nonzero."""
        c0 = self.coef[0]
        if np.any(np.abs(c0) < 1e-300):
            raise ZeroDivisionError("jet with vanishing constant term")
        u = self * (1.0 / c0) - 1.0          # nilpotent up to truncation
        acc = Jet.constant(np.ones_like(c0), self.nvars, self.degree)
        for _ in range(self.degree):
            acc = 1.0 - u * acc              # Horner form of 1 - u + u^2 - ...
        return acc * (1.0 / c0)

    def sqrt(self):
        """Square root via binomial series; constant term must be positive."""
        c0 = self.coef[0]
        if np.any(c0 <= 0):
            raise ValueError("jet sqrt needs a positive constant term")
        u = self * (1.0 / c0) - 1.0
        coeffs = [1.0, 0.5, -0.125, 0.0625, -0.0390625][: self.degree + 1]
        acc = Jet.constant(np.full_like(c0, coeffs[-1]), self.nvars, self.degree)
        for ck in reversed(coeffs[:-1]):
            acc = acc * u + ck
        return acc * np.sqrt(c0)

    # -- array-value helpers --------------------------------------------

    def __getitem__(self, key):
        if isinstance(key, tuple):
            return Jet(self.coef[(slice(None),) + key], self.nvars, self.degree)
        return Jet(self.coef[:, key], self.nvars, self.degree)

    def sum_last(self):
        """Sum over the last value axis (turns vector products into dots)."""
        return Jet(self.coef.sum(axis=-1), self.nvars, self.degree)


def dot(a, b):
    """Euclidean inner product of two vector jets."""
    return (a * b).sum_last()


def stack(jets):
    """Stack scalar/array jets along a new first value axis."""
    coef = np.stack([j.coef for j in jets], axis=1)
    return Jet(coef, jets[0].nvars, jets[0].degree)


def inverse_symmetric(mat):
    """Inverse of a symmetric m x m matrix of scalar jets (m <= 3).

    ``mat`` is a nested list; returns the same layout.  Uses the adjugate,
    which stays exact under jet arithmetic.
    """
    m = len(mat)
    if m == 1:
        return [[mat[0][0].reciprocal()]]
    if m == 2:
        a, b = mat[0]
        c, d = mat[1]
        det = a * d - b * c
        inv = det.reciprocal()
        return [[d * inv, -b * inv], [-c * inv, a * inv]]
    if m == 3:
        a, b, c = mat[0]
        d, e, f = mat[1]
        g, h, i = mat[2]
        ca = e * i - f * h
        cb = c * h - b * i
        cc = b * f - c * e
        cd = f * g - d * i
        ce = a * i - c * g
        cf = c * d - a * f
        cg = d * h - e * g
        ch = b * g - a * h
        ci = a * e - b * d
        det = a * ca + b * cd + c * cg
        inv = det.reciprocal()
        return [[ca * inv, cb * inv, cc * inv],
                [cd * inv, ce * inv, cf * inv],
                [cg * inv, ch * inv, ci * inv]]
    raise ValueError("only m <= 3 supported")
