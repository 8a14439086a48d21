"""Finite-difference stencils with Richardson extrapolation.

Used only where an independent numerical cross-check is wanted (chart
curvature oracle, derivative spot checks); the main pipeline differentiates
exactly through jets.
"""

import numpy as np

# 4th-order central first derivative: offsets and weights (divide by h).
_OFF1 = np.array([-2, -1, 1, 2])
_W1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0

# 4th-order central second derivative: offsets and weights (divide by h^2).
_OFF2 = np.array([-2, -1, 0, 1, 2])
_W2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

DEFAULT_STEP = 1e-3


def _step(x, i, h):
    return h * max(1.0, abs(float(x[i])))


def diff(f, x, i, h=DEFAULT_STEP, richardson=True):
    """First partial derivative of ``f`` at ``x`` along coordinate ``i``.

    ``f`` maps an array to a scalar or array; the stencil is 4th-order
    central, optionally sharpened by one Richardson step.
    """
    x = np.asarray(x, dtype=float)
    hh = _step(x, i, h)

    def d(step):
        acc = 0.0
        for w, o in zip(_W1, _OFF1):
            xp = x.copy()
            xp[i] += o * step
            acc = acc + w * np.asarray(f(xp))
        return acc / step

    if not richardson:
        return d(hh)
    return (16.0 * d(hh / 2.0) - d(hh)) / 15.0


def diff2(f, x, i, j, h=DEFAULT_STEP, richardson=True):
    """Second partial derivative of ``f`` at ``x`` along coordinates ``i, j``."""
    x = np.asarray(x, dtype=float)
    hi = _step(x, i, h)
    hj = _step(x, j, h)

    if i == j:
        def d(step):
            acc = 0.0
            for w, o in zip(_W2, _OFF2):
                xp = x.copy()
                xp[i] += o * step
                acc = acc + w * np.asarray(f(xp))
            return acc / step ** 2
        base = hi
    else:
        # tensor product of two first-derivative stencils
        def d(step):
            acc = 0.0
            for wa, oa in zip(_W1, _OFF1):
                for wb, ob in zip(_W1, _OFF1):
                    xp = x.copy()
                    xp[i] += oa * step
                    xp[j] += ob * step * (hj / hi)
                    acc = acc + wa * wb * np.asarray(f(xp))
            return acc / (step * step * (hj / hi))
        base = hi

    if not richardson:
        return d(base)
    return (16.0 * d(base / 2.0) - d(base)) / 15.0


def gradient(f, x, h=DEFAULT_STEP, richardson=True):
    """All first partials of ``f`` at ``x``, stacked along a new first axis."""
    x = np.asarray(x, dtype=float)
    return np.stack([diff(f, x, i, h=h, richardson=richardson)
                     for i in range(x.size)])
