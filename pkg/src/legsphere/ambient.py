"""The ambient deformed sphere S^{2n+1}(eps).

The unit sphere in C^{n+1} carries its standard contact metric structure
(xi0 = -Jz, eta0 its dual form, phi the tangential part of J).  Rescaling

    eta = alpha * eta0,   xi = xi0 / alpha,   g = alpha*g0 + alpha*(alpha-1)*eta0 (x) eta0

with alpha = 4/(eps+3) produces the structure of phi-sectional curvature
eps > -3.  Points and vectors live in R^{2(n+1)} with interleaved
(Re, Im) pairs, so J acts as the block rotation (x, y) -> (-y, x).

The module exposes raw ndarray kernels (fast path for the engine) plus a
thin validated API in terms of :class:`AmbientPoint` / :class:`AmbientVector`.
"""

from dataclasses import dataclass, field

import numpy as np

ON_SPHERE_TOL = 1e-12
TANGENT_TOL = 1e-10


class DomainError(ValueError):
    """Input violates a geometric precondition (off-sphere, non-tangent...)."""


# ---------------------------------------------------------------------------
# ndarray kernels
# ---------------------------------------------------------------------------

def j_mul(v):
    """Complex-structure action J on interleated (Re, Im) coordinates."""
    v = np.asarray(v)
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def xi0(z):
    """Undeformed Reeb vector -Jz at z."""
    return -j_mul(z)


def eta0(z, x):
    """Undeformed contact form: <-Jz, x>."""
    return np.sum(xi0(z) * x, axis=-1)


def phi(z, x):
    """Tangential part of Jx at z (same tensor before and after deformation)."""
    return j_mul(x) - eta0(z, x)[..., None] * np.asarray(z)


def metric(alpha, z, x, y):
    """Deformed metric g = alpha*<.,.> + alpha*(alpha-1)*eta0 (x) eta0."""
    return (alpha * np.sum(x * y, axis=-1)
            + alpha * (alpha - 1.0) * eta0(z, x) * eta0(z, y))


def connection(alpha, z, x, y, dy):
    """Levi-Civita connection of the deformed metric, applied pointwise.

    ``dy`` is the Euclidean directional derivative of the field y along x.
    The round-sphere connection (dy + <x,y> z) is corrected by the
    deformation difference tensor -(alpha-1)*(eta0(x) phi(y) + eta0(y) phi(x));
    metric compatibility and torsion-freeness are enforced by tests, with a
    chart-based Christoffel computation as the independent oracle.
    """
    z = np.asarray(z)
    round_part = dy + np.sum(x * y, axis=-1)[..., None] * z
    corr = (eta0(z, x)[..., None] * phi(z, y)
            + eta0(z, y)[..., None] * phi(z, x))
    return round_part - (alpha - 1.0) * corr


def curvature(epsilon, alpha, z, x, y, w):
    """Curvature tensor R(x, y)w of the deformed structure.

    Standard space-form closed form: with betaR = (eps+3)/4 and
    gammaR = (eps-1)/4,

      R(X,Y)Z = betaR (g(Y,Z)X - g(X,Z)Y)
              + gammaR (eta(X)eta(Z)Y - eta(Y)eta(Z)X
                        + g(X,Z)eta(Y)xi - g(Y,Z)eta(X)xi
                        + g(phiY,Z)phiX - g(phiX,Z)phiY - 2 g(phiX,Y)phiZ).
    """
    beta_r = (epsilon + 3.0) / 4.0
    gamma_r = (epsilon - 1.0) / 4.0
    g = lambda u, v: metric(alpha, z, u, v)
    eta = lambda u: alpha * eta0(z, u)
    xi = xi0(z) / alpha
    px, py, pw = phi(z, x), phi(z, y), phi(z, w)
    out = beta_r * (g(y, w) * x - g(x, w) * y)
    if gamma_r != 0.0:
        out = out + gamma_r * (
            eta(x) * eta(w) * y - eta(y) * eta(w) * x
            + g(x, w) * eta(y) * xi - g(y, w) * eta(x) * xi
            + g(py, w) * px - g(px, w) * py - 2.0 * g(px, y) * pw)
    return out


def project_tangent(z, v):
    """Remove the radial component, making v tangent to the sphere at z."""
    z = np.asarray(z)
    return v - np.sum(v * z, axis=-1)[..., None] * z


# ---------------------------------------------------------------------------
# validated types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SasakiStructure:
    """The deformed sphere S^{2n+1}(epsilon), n <= 3."""

    n: int
    epsilon: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise DomainError(f"n must be 1, 2 or 3, got {self.n}")
        if not self.epsilon > -3.0:
            raise DomainError(f"epsilon must exceed -3, got {self.epsilon}")

    @property
    def alpha(self):
        return 4.0 / (self.epsilon + 3.0)

    @property
    def beta_r(self):
        """Curvature coefficient (epsilon+3)/4 = 1/alpha."""
        return (self.epsilon + 3.0) / 4.0

    @property
    def gamma_r(self):
        """Curvature coefficient (epsilon-1)/4; beta_r - gamma_r = 1."""
        return (self.epsilon - 1.0) / 4.0

    @property
    def ambient_dim(self):
        return 2 * (self.n + 1)


@dataclass(frozen=True)
class AmbientPoint:
    """A point of the unit sphere, as real interleaved coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        if abs(np.linalg.norm(c) - 1.0) > ON_SPHERE_TOL:
            raise DomainError("point is not on the unit sphere")


@dataclass(frozen=True)
class AmbientVector:
    """A tangent vector to the sphere at ``base``."""

    base: AmbientPoint
    comps: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.comps, dtype=float)
        object.__setattr__(self, "comps", v)
        if abs(float(v @ self.base.coords)) > TANGENT_TOL * max(1.0, np.linalg.norm(v)):
            raise DomainError("vector is not tangent to the sphere")


def _check_base(*vectors):
    base = vectors[0].base
    for v in vectors[1:]:
        if v.base is not base and not np.array_equal(v.base.coords, base.coords):
            raise DomainError("vectors have mismatched base points")
    return base


def structure_tensors(struct, p):
    """Reeb vector, contact form and phi at ``p``: (xi, eta, phi_map).

    xi is returned as an :class:`AmbientVector`; eta and phi_map are
    callables on tangent vectors at ``p``.
    """
    z = p.coords
    xi_vec = AmbientVector(p, xi0(z) / struct.alpha)

    def eta(x):
        return struct.alpha * float(eta0(z, x.comps))

    def phi_map(x):
        return AmbientVector(p, phi(z, x.comps))

    return xi_vec, eta, phi_map


def metric_at(struct, p, x, y):
    """Deformed metric g(x, y) at p."""
    _check_base(x, y)
    return float(metric(struct.alpha, p.coords, x.comps, y.comps))


def ambient_connection(struct, p, x, yfield, dy=None, h=1e-3):
    """Covariant derivative of a field along a curve through ``p``.

    ``yfield`` is either a callable t -> ndarray giving the field along a
    curve c(t) with c(0) = p, c'(0) = x (its derivative is then taken by a
    4th-order stencil), or an ndarray giving the field value at p, in which
    case ``dy`` must supply the Euclidean derivative of the field along x.
    """
    from . import findiff

    z = p.coords
    if callable(yfield):
        y_val = np.asarray(yfield(0.0), dtype=float)
        dy_val = findiff.diff(lambda t: yfield(float(t[0])), np.array([0.0]), 0, h=h)
    else:
        if dy is None:
            raise DomainError("field derivative required when yfield is a value")
        y_val = np.asarray(yfield, dtype=float)
        dy_val = np.asarray(dy, dtype=float)
    if abs(float(y_val @ z)) > 1e-8 * max(1.0, np.linalg.norm(y_val)):
        raise DomainError("field is not tangent at p")
    out = connection(struct.alpha, z, x.comps, y_val, dy_val)
    return AmbientVector(p, project_tangent(z, out))


def curvature_at(struct, p, x, y, w):
    """Curvature R(x, y)w of the deformed structure at p."""
    _check_base(x, y, w)
    val = curvature(struct.epsilon, struct.alpha, p.coords,
                    x.comps, y.comps, w.comps)
    return AmbientVector(p, val)
