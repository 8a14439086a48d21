"""Deterministic low-discrepancy sampling of immersion domains."""

import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

# keep samples away from chart boundaries (pole degeneracy of the S^2 chart)
EDGE_MARGIN = 0.05


def halton(domain, count, seed=0):
    """Halton points inside a box, shrunk slightly away from the edges."""
    d = len(domain)
    eng = qmc.Halton(d=d, scramble=True, seed=seed)
    pts = eng.random(count)
    lo = np.array([a for a, _ in domain])
    hi = np.array([b for _, b in domain])
    return lo + (EDGE_MARGIN + (1.0 - 2.0 * EDGE_MARGIN) * pts) * (hi - lo)


def sphere_directions(count, seed=0, dim=3):
    """Quasi-random unit vectors (Halton pushed through the normal quantile)."""
    eng = qmc.Halton(d=dim, scramble=True, seed=seed)
    pts = eng.random(count)
    pts = np.clip(pts, 1e-12, 1.0 - 1e-12)
    v = ndtri(pts)
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return v / norms
