"""Submanifold geometry of an immersion into the deformed sphere.

Per sample point the engine assembles, through exact jet arithmetic, the
induced metric, Christoffel symbols, second fundamental form, mean
curvature, the covariant derivative of the second fundamental form, the
intrinsic curvature tensor, and the tension/bitension fields.  Every
quantity is a closed-form function of the immersion's Taylor coefficients,
so residuals of true identities land at roughly machine precision times a
modest condition factor.

Tolerance ladder used by the built-in checks: 1e-12 for algebraic
identities of the immersion itself, 1e-8 for first-derivative quantities,
1e-6 for fourth-derivative quantities (error grows with derivative order
because the frame orthonormalisation is iterative).
"""

from dataclasses import dataclass

import numpy as np

from . import ambient, sampling
from .ambient import DomainError
from .jets import Jet, inverse_symmetric

TOL_ALGEBRAIC = 1e-12
TOL_FIRST_ORDER = 1e-8
TOL_FOURTH_ORDER = 1e-6

DEFAULT_SAMPLES = 50


class ImmersionDegeneracyError(ValueError):
    """The differential is rank deficient at the requested point."""


@dataclass(frozen=True)
class FrameData:
    """Orthonormal tangent frame and the induced normal frame at a point."""

    point: np.ndarray            # domain coordinates
    position: np.ndarray         # ambient coordinates of the image
    tangent_frame: np.ndarray    # (m, 2n+2), g-orthonormal
    normal_frame: np.ndarray     # (m, 2n+2), the phi-rotated tangent frame
    xi: np.ndarray               # Reeb vector at the image point
    coords: np.ndarray           # (m, m) frame in coordinate-basis components


@dataclass(frozen=True)
class FundamentalForms:
    """Induced metric and second fundamental form data at a point."""

    metric: np.ndarray       # (m, m) induced metric on coordinate fields
    hphi: np.ndarray         # (m, m, m) frame components <h(e_i,e_j), phi e_k>
    hxi: np.ndarray          # (m, m) frame components <h(e_i,e_j), xi>
    H: np.ndarray            # mean curvature vector, ambient components
    norm_H: float


@dataclass(frozen=True)
class NablaH:
    """Covariant derivative of h resolved in the normal frame."""

    phi_comps: np.ndarray    # (m, m, m, m): <(nabla_{e_i} h)(e_j, e_k), phi e_l>
    xi_comps: np.ndarray     # (m, m, m):    <(nabla_{e_i} h)(e_j, e_k), xi>


class _Point:
    """Everything the engine knows at one domain point."""

    __slots__ = ("u", "z", "tangents", "g", "ginv", "gamma", "h", "T", "hxi",
                 "H", "V", "tau2", "frame", "frame_coords", "phi_frame", "xi",
                 "nabla_h_vec", "riem")


def _jet_j(v):
    return Jet(ambient.j_mul(v.coef), v.nvars, v.degree)


def _compute_point(imm, struct, u):
    """Run the jet pipeline at ``u``."""
    m = imm.nvars
    alpha = struct.alpha
    u = np.asarray(u, dtype=float)

    F = Jet(imm.real_jet(u), m, 4)
    Fi = [F.deriv(i) for i in range(m)]

    def dot(a, b):
        return (a * b).sum_last()

    minus_jf = -_jet_j(F)

    def eta0(x):
        return dot(minus_jf, x)

    def phi(x):
        return _jet_j(x) - eta0(x) * F

    def nabla(i, w):
        """Ambient covariant derivative of the field w along coordinate i."""
        out = w.deriv(i) + dot(Fi[i], w) * F
        if alpha != 1.0:
            out = out - (alpha - 1.0) * (eta0(Fi[i]) * phi(w) + eta0(w) * phi(Fi[i]))
        return out

    def gjet(x, y):
        out = alpha * dot(x, y)
        if alpha != 1.0:
            out = out + (alpha * (alpha - 1.0)) * eta0(x) * eta0(y)
        return out

    gmat = [[gjet(Fi[i], Fi[j]) for j in range(m)] for i in range(m)]
    ginv = inverse_symmetric(gmat)

    # Christoffel symbols of the induced metric, as jets
    dg = [[[gmat[i][j].deriv(k) for j in range(m)] for i in range(m)]
          for k in range(m)]
    gamma = [[[None] * m for _ in range(m)] for _ in range(m)]
    for k in range(m):
        for i in range(m):
            for j in range(i + 1):
                acc = None
                for l in range(m):
                    term = ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                    acc = term if acc is None else acc + term
                acc = acc * 0.5
                gamma[k][i][j] = acc
                gamma[k][j][i] = acc

    # second fundamental form on coordinate fields
    h = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1):
            acc = nabla(i, Fi[j])
            for k in range(m):
                acc = acc - gamma[k][i][j] * Fi[k]
            h[i][j] = acc
            h[j][i] = acc

    # tension field tau = trace_g h = m * H
    V = None
    for i in range(m):
        for j in range(m):
            term = ginv[i][j] * h[i][j]
            V = term if V is None else V + term

    pt = _Point()
    pt.u = u
    pt.z = F.value()
    pt.tangents = np.stack([x.value() for x in Fi])
    pt.g = np.array([[gmat[i][j].value() for j in range(m)] for i in range(m)])
    pt.ginv = np.array([[ginv[i][j].value() for j in range(m)] for i in range(m)])
    pt.gamma = np.array([[[gamma[k][i][j].value() for j in range(m)]
                          for i in range(m)] for k in range(m)])
    pt.h = np.stack([[h[i][j].value() for j in range(m)] for i in range(m)])
    pt.V = V.value()
    pt.H = pt.V / m

    # orthonormal tangent frame by Gram-Schmidt in the deformed metric
    z = pt.z

    def gp(x, y):
        return ambient.metric(alpha, z, x, y)

    frame = []
    coords = np.zeros((m, m))
    scale = max(np.sqrt(abs(gp(t, t))) for t in pt.tangents)
    for i in range(m):
        v = pt.tangents[i].copy()
        ci = np.zeros(m)
        ci[i] = 1.0
        for k, e in enumerate(frame):
            proj = gp(v, e)
            v = v - proj * e
            ci = ci - proj * coords[k]
        nrm = np.sqrt(max(gp(v, v), 0.0))
        if nrm < 1e-10 * max(scale, 1.0):
            raise ImmersionDegeneracyError(
                f"rank-deficient differential at {tuple(u)}")
        frame.append(v / nrm)
        coords[i] = ci / nrm
    pt.frame = np.stack(frame)
    pt.frame_coords = coords
    pt.xi = ambient.xi0(z) / alpha
    pt.phi_frame = np.stack([ambient.phi(z, e) for e in pt.frame])

    # frame components of h over the normal frame {phi e_k, xi}
    h_frame = np.einsum('ai,bj,ij...->ab...', coords, coords, pt.h)
    pt.T = np.array([[[gp(h_frame[a, b], pt.phi_frame[k]) for k in range(m)]
                      for b in range(m)] for a in range(m)])
    pt.hxi = np.array([[gp(h_frame[a, b], pt.xi) for b in range(m)]
                       for a in range(m)])

    # bitension: rough Laplacian of V plus the ambient curvature term
    W = [nabla(j, V) for j in range(m)]
    lap = np.zeros_like(pt.V)
    for i in range(m):
        for j in range(m):
            second = nabla(i, W[j]).value()
            for k in range(m):
                second = second - pt.gamma[k][i][j] * W[k].value()
            lap = lap + pt.ginv[i, j] * second
    curv = np.zeros_like(pt.V)
    for i in range(m):
        for j in range(m):
            curv = curv + pt.ginv[i, j] * ambient.curvature(
                struct.epsilon, alpha, z, pt.V, pt.tangents[i], pt.tangents[j])
    pt.tau2 = lap + curv

    # covariant derivative of h on coordinate fields, normal part
    nh = np.zeros((m, m, m, pt.V.size))
    for i in range(m):
        for j in range(m):
            for k in range(j + 1):
                raw = nabla(i, h[j][k]).value()
                for l in range(m):
                    raw = raw - pt.gamma[l][i][j] * pt.h[l, k] \
                              - pt.gamma[l][i][k] * pt.h[j, l]
                # remove the tangential part (normal-connection projection)
                rhs = np.array([gp(raw, t) for t in pt.tangents])
                coef = np.linalg.solve(pt.g, rhs)
                raw = raw - coef @ pt.tangents
                nh[i, j, k] = raw
                nh[i, k, j] = raw
    pt.nabla_h_vec = nh

    # intrinsic curvature R^l_{kij} of the induced metric (exact)
    dgam = np.zeros((m, m, m, m))
    for e in range(m):
        for l in range(m):
            for i in range(m):
                for j in range(i + 1):
                    val = gamma[l][i][j].deriv(e).value()
                    dgam[e, l, i, j] = val
                    dgam[e, l, j, i] = val
    riem = np.zeros((m, m, m, m))
    gam0 = pt.gamma
    for l in range(m):
        for k in range(m):
            for i in range(m):
                for j in range(m):
                    val = dgam[i, l, j, k] - dgam[j, l, i, k]
                    for mm in range(m):
                        val += gam0[l, i, mm] * gam0[mm, j, k] \
                             - gam0[l, j, mm] * gam0[mm, i, k]
                    riem[l, k, i, j] = val
    pt.riem = riem
    return pt


class Geometry:
    """Differential-geometry pipeline for one immersion."""

    def __init__(self, imm):
        self.imm = imm
        self.struct = ambient.SasakiStructure(n=imm.n, epsilon=imm.epsilon)
        self._cache = {}

    @property
    def epsilon(self):
        return self.struct.epsilon

    # -- point-level data ------------------------------------------------

    def point(self, u):
        key = tuple(np.asarray(u, dtype=float))
        if key not in self._cache:
            self._cache[key] = _compute_point(self.imm, self.struct, u)
        return self._cache[key]

    def sample_points(self, count=DEFAULT_SAMPLES, seed=0):
        return sampling.halton(self.imm.domain, count, seed=seed)

    def frame_at(self, u):
        pt = self.point(u)
        return FrameData(point=pt.u, position=pt.z, tangent_frame=pt.frame,
                         normal_frame=pt.phi_frame, xi=pt.xi,
                         coords=pt.frame_coords)

    def fundamental_forms(self, u):
        pt = self.point(u)
        alpha = self.struct.alpha
        nh = np.sqrt(max(ambient.metric(alpha, pt.z, pt.H, pt.H), 0.0))
        return FundamentalForms(metric=pt.g, hphi=pt.T, hxi=pt.hxi,
                                H=pt.H, norm_H=nh)

    def h_tensor(self, u):
        return self.point(u).T

    # -- pointwise predicates ---------------------------------------------

    def gauss_sectional(self, u, i, j):
        """Sectional curvature K_ij of a frame plane, via the ambient split.

        K_ij = (eps+3)/4 + <h(e_i,e_i), h(e_j,e_j)> - ||h(e_i,e_j)||^2.
        """
        if i == j:
            raise DomainError("sectional curvature needs two distinct directions")
        pt = self.point(u)
        beta = self.struct.beta_r
        inner = pt.T[i, i] @ pt.T[j, j] + pt.hxi[i, i] * pt.hxi[j, j]
        cross = pt.T[i, j] @ pt.T[i, j] + pt.hxi[i, j] ** 2
        return float(beta + inner - cross)

    def intrinsic_sectional(self, u, i, j):
        """Sectional curvature of a frame plane from the induced metric only."""
        if i == j:
            raise DomainError("sectional curvature needs two distinct directions")
        pt = self.point(u)
        C = pt.frame_coords
        vec = np.einsum('lkab,a,b,k->l', pt.riem, C[i], C[j], C[j])
        return float(np.einsum('l,lm,m->', vec, pt.g, C[i]))

    def frame_curvature(self, u):
        """Intrinsic curvature R_{ijkl} = <R(e_i,e_j)e_k, e_l> in the frame."""
        pt = self.point(u)
        C = pt.frame_coords
        low = np.einsum('lkab,lm->mkab', pt.riem, pt.g)
        return np.einsum('ia,jb,kc,ld,dcab->ijkl', C, C, C, C, low)

    def nabla_h(self, u):
        pt = self.point(u)
        alpha = self.struct.alpha

        def gp(x, y):
            return ambient.metric(alpha, pt.z, x, y)

        C = pt.frame_coords
        nh_frame = np.einsum('ia,jb,kc,abc...->ijk...', C, C, C, pt.nabla_h_vec)
        m = self.imm.nvars
        phi_comps = np.empty((m, m, m, m))
        xi_comps = np.empty((m, m, m))
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    vec = nh_frame[i, j, k]
                    xi_comps[i, j, k] = gp(vec, pt.xi)
                    for l in range(m):
                        phi_comps[i, j, k, l] = gp(vec, pt.phi_frame[l])
        return NablaH(phi_comps=phi_comps, xi_comps=xi_comps)

    def tension(self, u):
        """tau(f) = m H, the trace of the second fundamental form."""
        return self.point(u).V

    def bitension(self, u):
        return self.point(u).tau2

    def h_umbilical_detect(self, u, tol=TOL_FOURTH_ORDER):
        """Search for an axis realising the two-coefficient normal form.

        Returns (lambda_coeff, mu_coeff, axis, residual) or None when no
        unit direction fits h(e1,e1) = lam phi e1, h(e_j,e_j) = mu phi e1,
        h(e1,e_j) = mu phi e_j, h(e_j,e_k) = 0 within ``tol``.
        """
        lam, mu, axis, resid = umbilical_fit(self.h_tensor(u))
        if resid > tol:
            return None
        return lam, mu, axis, resid

    # -- sampled residuals -------------------------------------------------

    def check_legendrian(self, samples=DEFAULT_SAMPLES, seed=0):
        """Max |eta(df(d_i))| over sample points and coordinate directions."""
        alpha = self.struct.alpha
        worst = 0.0
        zero = (0,) * self.imm.nvars
        for u in sampling.halton(self.imm.domain, samples, seed=seed):
            z = _interleave(self.imm.derivative(u, zero))
            for i in range(self.imm.nvars):
                e = [0] * self.imm.nvars
                e[i] = 1
                dvr = _interleave(self.imm.derivative(u, e))
                worst = max(worst, abs(alpha * ambient.eta0(z, dvr)))
        return worst

    def c_parallel_residual(self, samples=DEFAULT_SAMPLES, seed=0):
        """Max norm of the tangential-phi part of nabla h over samples."""
        worst = 0.0
        for u in self.sample_points(samples, seed=seed):
            nh = self.nabla_h(u)
            norms = np.sqrt(np.sum(nh.phi_comps ** 2, axis=-1))
            worst = max(worst, float(np.max(norms)))
        return worst

    def bitension_max(self, samples=DEFAULT_SAMPLES, seed=0):
        alpha = self.struct.alpha
        worst = 0.0
        for u in self.sample_points(samples, seed=seed):
            pt = self.point(u)
            worst = max(worst, np.sqrt(max(
                ambient.metric(alpha, pt.z, pt.tau2, pt.tau2), 0.0)))
        return worst

    def biminimal_residual(self, samples=DEFAULT_SAMPLES, seed=0):
        """Max norm of the normal component of the bitension field."""
        alpha = self.struct.alpha
        worst = 0.0
        for u in self.sample_points(samples, seed=seed):
            pt = self.point(u)

            def gp(x, y):
                return ambient.metric(alpha, pt.z, x, y)

            rhs = np.array([gp(pt.tau2, t) for t in pt.tangents])
            coef = np.linalg.solve(pt.g, rhs)
            normal = pt.tau2 - coef @ pt.tangents
            worst = max(worst, np.sqrt(max(gp(normal, normal), 0.0)))
        return worst

    def condition_6h(self, samples=DEFAULT_SAMPLES, seed=0):
        """Max norm of Tr h(., A_H .) - 6H over samples."""
        alpha = self.struct.alpha
        worst = 0.0
        m = self.imm.nvars
        for u in self.sample_points(samples, seed=seed):
            pt = self.point(u)

            def gp(x, y):
                return ambient.metric(alpha, pt.z, x, y)

            C = pt.frame_coords
            h_frame = np.einsum('ai,bj,ij...->ab...', C, C, pt.h)
            a_h = np.array([[gp(h_frame[i, j], pt.H) for j in range(m)]
                            for i in range(m)])
            trace = np.einsum('ij,ij...->...', a_h, h_frame)
            diff = trace - 6.0 * pt.H
            worst = max(worst, np.sqrt(max(gp(diff, diff), 0.0)))
        return worst

    def mean_curvature_norms(self, samples=DEFAULT_SAMPLES, seed=0):
        return np.array([self.fundamental_forms(u).norm_H
                         for u in self.sample_points(samples, seed=seed)])


def _interleave(z):
    out = np.empty(2 * len(z))
    out[0::2] = np.real(z)
    out[1::2] = np.imag(z)
    return out


# ---------------------------------------------------------------------------
# the two-coefficient normal form fit
# ---------------------------------------------------------------------------

def umbilical_pattern(lam, mu, axis):
    """Symmetric tensor lam y^{(x)3} + mu Sym3(y (x) (I - y y^T))."""
    y = np.asarray(axis, dtype=float)
    q = np.eye(y.size) - np.outer(y, y)
    base = np.einsum('i,jk->ijk', y, q)
    sym = base + np.transpose(base, (1, 0, 2)) + np.transpose(base, (2, 1, 0))
    return lam * np.einsum('i,j,k->ijk', y, y, y) + mu * sym


def _umbilical_score(T, y):
    """Best-fit (lam, mu) for an axis, plus the captured squared norm."""
    lam = float(np.einsum('ijk,i,j,k->', T, y, y, y))
    mmat = np.einsum('ijk,i->jk', T, y)
    mu = (float(np.trace(mmat)) - lam) / 2.0
    return lam, mu, lam ** 2 + 6.0 * mu ** 2


def umbilical_fit(T, starts=128, seed=0):
    """Best axis for the two-coefficient normal form of a symmetric 3-tensor.

    Returns (lam, mu, axis, frobenius_residual).  The normal-form tensor
    with axis y is lam y^{(x)3} + mu Sym3(y (x) (I - y y^T)); those two
    basis tensors are orthogonal with squared norms 1 and 6, so the fit is
    a linear projection per axis and only the axis needs searching.  Sign
    convention: mu >= 0, and lam >= 0 when mu vanishes.
    """
    total = float(np.einsum('ijk,ijk->', T, T))
    trace_vec = np.einsum('ijj->i', T)
    best = None
    for y in sampling.sphere_directions(starts, seed=seed):
        _, _, score = _umbilical_score(T, y)
        if best is None or score > best[0]:
            best = (score, y)
    y = best[1]
    step = 0.1
    for _ in range(400):
        lam, mu, score = _umbilical_score(T, y)
        glam = 3.0 * np.einsum('ijk,j,k->i', T, y, y)
        gmu = 0.5 * (trace_vec - glam)
        grad = 2.0 * lam * glam + 12.0 * mu * gmu
        grad = grad - (grad @ y) * y
        cand = y + step * grad
        cand /= np.linalg.norm(cand)
        if _umbilical_score(T, cand)[2] > score:
            y = cand
        else:
            step *= 0.5
            if step < 1e-14:
                break
    lam, mu, _ = _umbilical_score(T, y)
    if mu < 0.0 or (abs(mu) < 1e-12 and lam < 0.0):
        y = -y
        lam, mu, _ = _umbilical_score(T, y)
    resid = np.sqrt(max(total - lam ** 2 - 6.0 * mu ** 2, 0.0))
    return float(lam), float(mu), y, float(resid)
