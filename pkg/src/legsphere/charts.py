"""Stereographic chart of the deformed sphere and a numerical curvature oracle.

The closed-form connection and curvature in :mod:`legsphere.ambient` are
cross-checked here the hard way: pull the deformed metric back through a
stereographic chart, differentiate it with finite-difference stencils,
assemble Christoffel symbols and the Riemann tensor, and push back to the
embedding.  Slow but independent -- this module is the arbiter whenever
the closed forms are in doubt.
"""

import numpy as np

from . import ambient, findiff


def chart_point(x):
    """Stereographic parametrisation: R^{2n+1} -> S^{2n+1} c R^{2n+2}."""
    x = np.asarray(x, dtype=float)
    s = x @ x
    return np.concatenate([2.0 * x, [1.0 - s]]) / (1.0 + s)


def chart_jacobian(x):
    """Exact differential of :func:`chart_point`, shape (2n+2, 2n+1)."""
    x = np.asarray(x, dtype=float)
    k = x.size
    s = x @ x
    denom = 1.0 + s
    jac = np.zeros((k + 1, k))
    jac[:k, :] = 2.0 * np.eye(k) / denom
    jac[:k, :] -= 4.0 * np.outer(x, x) / denom ** 2
    jac[k, :] = -2.0 * x / denom - (1.0 - s) * 2.0 * x / denom ** 2
    return jac


def chart_metric(struct, x):
    """Deformed metric components G_ij(x) in the stereographic chart."""
    z = chart_point(x)
    jac = chart_jacobian(x)
    k = x.size
    g = np.empty((k, k))
    for i in range(k):
        for j in range(i + 1):
            g[i, j] = g[j, i] = ambient.metric(struct.alpha, z, jac[:, i], jac[:, j])
    return g


def christoffel(struct, x, h=findiff.DEFAULT_STEP):
    """Christoffel symbols Gamma^c_{ ab } of the pulled-back metric, by stencils."""
    k = np.asarray(x).size
    g = chart_metric(struct, x)
    g_inv = np.linalg.inv(g)
    dg = np.stack([findiff.diff(lambda y: chart_metric(struct, y), x, a, h=h)
                   for a in range(k)])
    gamma = 0.5 * (np.einsum('cd,abd->cab', g_inv, dg)
                   + np.einsum('cd,bda->cab', g_inv, dg)
                   - np.einsum('cd,dab->cab', g_inv, dg))
    return gamma


def riemann(struct, x, h=findiff.DEFAULT_STEP):
    """Riemann tensor R^a_{bcd} (endomorphism convention) in the chart.

    Convention: R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
    so in coordinates R(d_c, d_d) d_b = R^a_{bcd} d_a with

        R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                    + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}.
    """
    k = np.asarray(x).size
    g = chart_metric(struct, x)
    g_inv = np.linalg.inv(g)
    dg = np.stack([findiff.diff(lambda y: chart_metric(struct, y), x, a, h=h)
                   for a in range(k)])
    ddg = np.empty((k, k, k, k))
    for a in range(k):
        for b in range(a + 1):
            val = findiff.diff2(lambda y: chart_metric(struct, y), x, a, b, h=h)
            ddg[a, b] = ddg[b, a] = val

    dg_inv = -np.einsum('ab,ebc,cd->ead', g_inv, dg, g_inv)

    def gamma_from(gi, dgm):
        return 0.5 * (np.einsum('cd,abd->cab', gi, dgm)
                      + np.einsum('cd,bda->cab', gi, dgm)
                      - np.einsum('cd,dab->cab', gi, dgm))

    gamma = gamma_from(g_inv, dg)
    # d_e Gamma^c_{ab} by the product rule on the assembly formula
    dgamma = (0.5 * (np.einsum('ecd,abd->ecab', dg_inv, dg)
                     + np.einsum('ecd,bda->ecab', dg_inv, dg)
                     - np.einsum('ecd,dab->ecab', dg_inv, dg))
              + 0.5 * (np.einsum('cd,eabd->ecab', g_inv, ddg)
                       + np.einsum('cd,ebda->ecab', g_inv, ddg)
                       - np.einsum('cd,edab->ecab', g_inv, ddg)))

    riem = (np.einsum('cadb->abcd', dgamma)
            - np.einsum('dacb->abcd', dgamma)
            + np.einsum('ace,edb->abcd', gamma, gamma)
            - np.einsum('ade,ecb->abcd', gamma, gamma))
    return riem


def curvature_via_chart(struct, x, i, j, k, h=findiff.DEFAULT_STEP):
    """Ambient components of R(d_i, d_j) d_k computed entirely in the chart."""
    riem = riemann(struct, x, h=h)
    jac = chart_jacobian(x)
    return jac @ riem[:, k, i, j]


def curvature_closed_form(struct, x, i, j, k):
    """Ambient components of R(d_i, d_j) d_k from the space-form closed form."""
    z = chart_point(x)
    jac = chart_jacobian(x)
    return ambient.curvature(struct.epsilon, struct.alpha, z,
                             jac[:, i], jac[:, j], jac[:, k])


def connection_via_chart(struct, x, i, j, h=findiff.DEFAULT_STEP):
    """Ambient components of nabla_{d_i} d_j from chart Christoffel symbols.

    This is the Levi-Civita connection of the pulled-back deformed metric by
    construction, so it arbitrates the closed-form difference-tensor formula.
    """
    gamma = christoffel(struct, x, h=h)
    jac = chart_jacobian(x)
    return jac @ gamma[:, i, j]


def connection_closed_form(struct, x, i, j, h=findiff.DEFAULT_STEP):
    """Closed-form nabla_{d_i} d_j on the same chart coordinate fields."""
    z = chart_point(x)
    jac = chart_jacobian(x)
    dy = findiff.diff(lambda y: chart_jacobian(y)[:, j], x, i, h=h)
    return ambient.connection(struct.alpha, z, jac[:, i], jac[:, j], dy)
