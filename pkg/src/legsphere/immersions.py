"""Explicit Legendrian immersion families with exact derivative oracles.

Every immersion here is a product of univariate analytic factors per
complex coordinate (exponentials and sphere-chart trigonometric factors),
so all partial derivatives up to order four are available in closed form.
That exactness is what the downstream curvature/bitension pipeline relies
on for its error budget.
"""

from dataclasses import dataclass
import math

import mpmath
import numpy as np

from .ambient import DomainError

MAX_DERIVATIVE_ORDER = 4
UNIT_NORM_TOL = 1e-12


class ConstraintError(ValueError):
    """A family parameter violates one of its defining inequalities."""


# ---------------------------------------------------------------------------
# components built from univariate factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """A univariate analytic factor: exp(i(f t + p)), cos(f t + p) or sin(f t + p)."""

    kind: str           # "exp" | "cos" | "sin"
    var: int
    freq: float
    phase: float = 0.0

    def dval(self, t, order):
        arg = self.freq * t + self.phase
        if self.kind == "exp":
            return (1j * self.freq) ** order * np.exp(1j * arg)
        shift = arg + order * (np.pi / 2.0)
        scale = self.freq ** order
        if self.kind == "cos":
            return scale * np.cos(shift)
        if self.kind == "sin":
            return scale * np.sin(shift)
        raise ValueError(f"unknown factor kind {self.kind!r}")


@dataclass(frozen=True)
class Component:
    """One complex coordinate: amplitude times a product of univariate factors.

    Each domain variable may appear in at most one factor, so a mixed
    partial is just the product of per-factor derivatives.
    """

    amplitude: complex
    factors: tuple

    def __post_init__(self):
        vars_seen = [f.var for f in self.factors]
        if len(set(vars_seen)) != len(vars_seen):
            raise ValueError("each variable may appear in at most one factor")

    def dval(self, u, multi):
        covered = {f.var: f for f in self.factors}
        for var, order in enumerate(multi):
            if order > 0 and var not in covered:
                return 0.0 + 0.0j
        out = complex(self.amplitude)
        for f in self.factors:
            out *= f.dval(u[f.var], multi[f.var])
        return out


class ExponentialImmersion:
    """An analytic map into the unit sphere of C^{n+1} with exact derivatives."""

    def __init__(self, components, nvars, epsilon, domain, name="", params=None):
        self.components = tuple(components)
        self.nvars = nvars
        self.epsilon = float(epsilon)
        self.domain = tuple(domain)
        self.name = name
        self.params = params
        if len(self.domain) != nvars:
            raise ValueError("domain must give one interval per variable")

    @property
    def n(self):
        """Complex dimension of the ambient space minus one (sphere S^{2n+1})."""
        return len(self.components) - 1

    def value(self, u):
        u = np.asarray(u, dtype=float)
        zero = (0,) * self.nvars
        return np.array([c.dval(u, zero) for c in self.components])

    def real_value(self, u):
        return _interleave(self.value(u))

    def derivative(self, u, multi):
        """Exact partial derivative for a multi-index, |multi| <= 4."""
        multi = tuple(int(k) for k in multi)
        if len(multi) != self.nvars:
            raise DomainError("multi-index length must match the domain dimension")
        if any(k < 0 for k in multi):
            raise DomainError("multi-index entries must be nonnegative")
        if sum(multi) > MAX_DERIVATIVE_ORDER:
            raise DomainError(
                f"derivative order {sum(multi)} exceeds {MAX_DERIVATIVE_ORDER}")
        u = np.asarray(u, dtype=float)
        return np.array([c.dval(u, multi) for c in self.components])

    def real_jet(self, u, degree=MAX_DERIVATIVE_ORDER):
        """Taylor coefficients of the real coordinates, ordered like jets.monomials."""
        from .jets import monomials
        mons = monomials(self.nvars, degree)
        coef = np.empty((len(mons), 2 * (self.n + 1)))
        for idx, e in enumerate(mons):
            fact = math.prod(math.factorial(k) for k in e)
            coef[idx] = _interleave(self.derivative(u, e)) / fact
        return coef

    def unit_norm_residual(self, points):
        """Max deviation of the pointwise squared norm from 1."""
        worst = 0.0
        for u in points:
            v = self.value(u)
            worst = max(worst, abs(float(np.sum(np.abs(v) ** 2)) - 1.0))
        return worst


def _interleave(z):
    out = np.empty(2 * len(z))
    out[0::2] = np.real(z)
    out[1::2] = np.imag(z)
    return out


def derivatives(imm, point, order):
    """Exact partial derivative of an immersion; module-level convenience."""
    return imm.derivative(point, order)


# ---------------------------------------------------------------------------
# the flat torus family
# ---------------------------------------------------------------------------

def _require(cond, label):
    if not cond:
        raise ConstraintError(f"constraint violated: {label}")


@dataclass(frozen=True)
class FlatFamilyParams:
    """Parameters (epsilon, lambda, a, c, d) of the flat torus family."""

    epsilon: float
    lam: float
    a: float
    c: float
    d: float

    def __post_init__(self):
        al = self.alpha
        _require(-1.0 / math.sqrt(al) < self.lam < 0.0,
                 "-1/sqrt(alpha) < lambda < 0")
        _require(self.a > 0.0, "a > 0")
        _require(self.a <= (self.lam ** 2 - al) / self.lam + 1e-12,
                 "a <= (lambda^2 - alpha)/lambda")
        _require(self.a >= self.d >= 0.0, "a >= d >= 0")
        _require(self.a > 2.0 * self.c, "a > 2c")
        _require(abs(self.lam ** 2 - 1.0 / (3.0 * al)) > 1e-12,
                 "lambda^2 != 1/(3 alpha)")
        _require(4.0 * self.c * (2.0 * self.c - self.a) + self.d ** 2 >= 0.0,
                 "4c(2c-a) + d^2 >= 0")
        _require(self.rho2 > 0.0, "rho2 > 0")

    @property
    def alpha(self):
        return 4.0 / (self.epsilon + 3.0)

    @property
    def rho1(self):
        rad = math.sqrt(4.0 * self.c * (2.0 * self.c - self.a) + self.d ** 2)
        return (rad + self.d) / 2.0

    @property
    def rho2(self):
        rad = math.sqrt(4.0 * self.c * (2.0 * self.c - self.a) + self.d ** 2)
        return (rad - self.d) / 2.0


def build_flat(params):
    """Flat-family immersion for admissible parameters.

    The four components carry amplitudes
    (lam/sqrt(lam^2+1/alpha), 1/sqrt(alpha(c-a)(2c-a)),
     1/sqrt(alpha rho1(rho1+rho2)), 1/sqrt(alpha rho2(rho1+rho2)))
    and frequency vectors (1/(alpha lam), 0, 0), (-lam, c-a, 0),
    (-lam, -c, -rho1), (-lam, -c, rho2) in the (u, v, w) domain.

    The squared amplitudes sum to 1 exactly when
    1/alpha + lambda^2 + a*c - c^2 = 0; the constructor rejects parameter
    sets violating that identity since the image would leave the sphere.
    """
    al, lam, a, c, d = params.alpha, params.lam, params.a, params.c, params.d
    r1, r2 = params.rho1, params.rho2
    amps = np.array([
        lam / math.sqrt(lam ** 2 + 1.0 / al),
        1.0 / math.sqrt(al * (c - a) * (2.0 * c - a)),
        1.0 / math.sqrt(al * r1 * (r1 + r2)),
        1.0 / math.sqrt(al * r2 * (r1 + r2)),
    ])
    if abs(float(np.sum(amps ** 2)) - 1.0) > 1e-10:
        raise ConstraintError(
            "unit-norm identity fails: 1/alpha + lambda^2 + a*c - c^2 = 0 is violated")
    freqs = [
        (1.0 / (al * lam), 0.0, 0.0),
        (-lam, c - a, 0.0),
        (-lam, -c, -r1),
        (-lam, -c, r2),
    ]
    comps = [
        Component(amp, tuple(Factor("exp", v, f) for v, f in enumerate(fr) if f != 0.0))
        for amp, fr in zip(amps, freqs)
    ]
    dom = ((-np.pi, np.pi),) * 3
    return ExponentialImmersion(comps, 3, params.epsilon, dom,
                                name="flat-family", params=params)


# ---------------------------------------------------------------------------
# the non-flat (curve x sphere) family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonFlatFamilyParams:
    """Parameters (epsilon, mu) of the non-flat family."""

    epsilon: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise DomainError(f"mu must be positive, got {self.mu}")


# colatitude/longitude chart of S^2, restricted away from the poles
SPHERE_CHART_DOMAIN = ((0.1, np.pi - 0.1), (-np.pi, np.pi))


def sphere_factors():
    """Factor tuples for the unit-sphere chart y(v, w), variables (1, 2)."""
    return (
        (Factor("sin", 1, 1.0), Factor("cos", 2, 1.0)),   # sin v cos w
        (Factor("sin", 1, 1.0), Factor("sin", 2, 1.0)),   # sin v sin w
        (Factor("cos", 1, 1.0),),                          # cos v
    )


def build_nonflat(params):
    """Non-flat family f(x, y) = (A e^{-ix/mu}, B e^{i mu x} y(v, w)).

    A = sqrt(mu^2/(mu^2+1)), B = sqrt(1/(mu^2+1)); the pointwise norm is
    A^2 + B^2 ||y||^2 = 1 identically.
    """
    mu = params.mu
    amp_curve = math.sqrt(mu ** 2 / (mu ** 2 + 1.0))
    amp_sphere = math.sqrt(1.0 / (mu ** 2 + 1.0))
    comps = [Component(amp_curve, (Factor("exp", 0, -1.0 / mu),))]
    for facs in sphere_factors():
        comps.append(Component(amp_sphere, (Factor("exp", 0, mu),) + facs))
    dom = ((-np.pi, np.pi),) + SPHERE_CHART_DOMAIN
    return ExponentialImmersion(comps, 3, params.epsilon, dom,
                                name="nonflat-family", params=params)


# ---------------------------------------------------------------------------
# named constant parameter sets (radicals evaluated at 40 digits, rounded once)
# ---------------------------------------------------------------------------

def _mpf(expr):
    with mpmath.workdps(40):
        return float(expr())


def corollary_quadruplet():
    """(lambda, a, c, d) of the epsilon=1 flat example."""
    return (
        _mpf(lambda: -1 / mpmath.sqrt(5)),
        _mpf(lambda: 3 * mpmath.sqrt(3) / mpmath.sqrt(10)),
        _mpf(lambda: -mpmath.sqrt(3) / mpmath.sqrt(10)),
        _mpf(lambda: mpmath.sqrt(2)),
    )


def theorem2_quadruplet(which):
    """The three flat quadruplets of the parallel-Lagrangian classification."""
    s13 = mpmath.sqrt(13)
    s3 = mpmath.sqrt(3)
    table = {
        1: (lambda: -mpmath.sqrt((4 - s13) / 3),
            lambda: mpmath.sqrt((7 - s13) / 6),
            lambda: -mpmath.sqrt((7 - s13) / 6),
            lambda: mpmath.mpf(0)),
        2: (lambda: -mpmath.sqrt(1 / (5 + 2 * s3)),
            lambda: mpmath.sqrt((45 + 21 * s3) / 13),
            lambda: -mpmath.sqrt(6 / (21 + 11 * s3)),
            lambda: mpmath.mpf(0)),
        3: (lambda: -mpmath.sqrt(1 / (6 + s13)),
            lambda: mpmath.sqrt((523 + 139 * s13) / 138),
            lambda: -mpmath.sqrt((79 - 17 * s13) / 138),
            lambda: mpmath.sqrt((14 + 2 * s13) / 3)),
    }
    if which not in table:
        raise DomainError(f"quadruplet index must be 1, 2 or 3, got {which}")
    return tuple(_mpf(f) for f in table[which])


def theorem2_mu2(sign):
    """mu^2 = (4 +/- sqrt(13))/3 for the non-flat parallel-Lagrangian cases."""
    if sign not in (+1, -1):
        raise DomainError("sign must be +1 or -1")
    return _mpf(lambda: (4 + sign * mpmath.sqrt(13)) / 3)


def build_theorem2_flat(which):
    """Flat immersion at epsilon=1 for one of the three named quadruplets."""
    lam, a, c, d = theorem2_quadruplet(which)
    return build_flat(FlatFamilyParams(1.0, lam, a, c, d))


# ---------------------------------------------------------------------------
# Legendre curves and closedness
# ---------------------------------------------------------------------------

def legendre_curve(mu, epsilon=1.0):
    """The curve z(x) = (A e^{-ix/mu}, B e^{i mu x}) into S^3.

    Satisfies Re<z'(x), i z(x)> = 0 identically (a Legendre curve); it is a
    geodesic of the deformed S^3 exactly when mu^2 = 1.
    """
    if not mu > 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    amp1 = math.sqrt(mu ** 2 / (mu ** 2 + 1.0))
    amp2 = math.sqrt(1.0 / (mu ** 2 + 1.0))
    comps = [
        Component(amp1, (Factor("exp", 0, -1.0 / mu),)),
        Component(amp2, (Factor("exp", 0, mu),)),
    ]
    return ExponentialImmersion(comps, 1, epsilon, ((0.0, 2 * np.pi),),
                                name="legendre-curve", params=("mu", mu))


def closedness_epsilon(s, t):
    """epsilon = (-9s^2 + 8st - 3t^2)/(3s^2 - 8st + t^2) for integer (s, t)."""
    s, t = float(s), float(t)
    den = 3 * s ** 2 - 8 * s * t + t ** 2
    if den == 0.0:
        raise DomainError("zero denominator in the closedness formula")
    return (-9 * s ** 2 + 8 * s * t - 3 * t ** 2) / den


# ---------------------------------------------------------------------------
# product decomposition (epsilon = 1 only)
# ---------------------------------------------------------------------------

def great_legendrian_sphere():
    """Totally geodesic Legendrian S^3 in the round S^7: the real points."""
    f = [
        (Factor("cos", 0, 1.0),),
        (Factor("sin", 0, 1.0), Factor("cos", 1, 1.0)),
        (Factor("sin", 0, 1.0), Factor("sin", 1, 1.0), Factor("cos", 2, 1.0)),
        (Factor("sin", 0, 1.0), Factor("sin", 1, 1.0), Factor("sin", 2, 1.0)),
    ]
    comps = [Component(1.0, facs) for facs in f]
    dom = ((0.15, np.pi - 0.15), (0.15, np.pi - 0.15), (-np.pi, np.pi))
    return ExponentialImmersion(comps, 3, 1.0, dom, name="great-legendrian-sphere")


def product_decomposition(imm):
    """Split an epsilon=1 flat-family immersion into (curve in S^3, surface in S^5).

    f(u, v, w) = (z1(u), z2(u) y(v, w)) with the curve a Legendre curve and
    the surface a Legendrian in the round S^5; reassembly is exact.
    """
    params = imm.params
    if not isinstance(params, FlatFamilyParams) or params.epsilon != 1.0:
        raise DomainError("product decomposition applies to epsilon=1 flat-family immersions")
    lam, a, c = params.lam, params.a, params.c
    r1, r2 = params.rho1, params.rho2
    scale = math.sqrt(lam ** 2 + 1.0)
    curve = ExponentialImmersion(
        [Component(lam / scale, (Factor("exp", 0, 1.0 / lam),)),
         Component(1.0 / scale, (Factor("exp", 0, -lam),))],
        1, 1.0, ((0.0, 2 * np.pi),), name="factor-curve")
    surf_amps = [
        scale / math.sqrt((c - a) * (2.0 * c - a)),
        scale / math.sqrt(r1 * (r1 + r2)),
        scale / math.sqrt(r2 * (r1 + r2)),
    ]
    surf_freqs = [(c - a, 0.0), (-c, -r1), (-c, r2)]
    surface = ExponentialImmersion(
        [Component(amp, tuple(Factor("exp", v, f) for v, f in enumerate(fr) if f != 0.0))
         for amp, fr in zip(surf_amps, surf_freqs)],
        2, 1.0, ((-np.pi, np.pi), (-np.pi, np.pi)), name="factor-surface")
    return curve, surface


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

IMMERSION_IDS = (
    "corollary-flat",
    "corollary-nonflat",
    "thm1-flat",
    "thm1-nonflat",
    "thm2-flat-1",
    "thm2-flat-2",
    "thm2-flat-3",
    "thm2-nonflat-plus",
    "thm2-nonflat-minus",
)


def get_immersion(name, epsilon=None, mu2=None, quadruplet=None):
    """Build a named immersion; optional overrides for parametrised families."""
    if name == "corollary-flat":
        lam, a, c, d = corollary_quadruplet()
        return build_flat(FlatFamilyParams(1.0, lam, a, c, d))
    if name == "corollary-nonflat":
        return build_nonflat(NonFlatFamilyParams(1.0, 1.0))
    if name == "thm1-flat":
        eps = 1.0 if epsilon is None else float(epsilon)
        if quadruplet is None:
            if eps != 1.0:
                raise DomainError(
                    "thm1-flat at epsilon != 1 needs an explicit quadruplet "
                    "(run the flat solver to obtain one)")
            quadruplet = corollary_quadruplet()
        lam, a, c, d = quadruplet
        return build_flat(FlatFamilyParams(eps, lam, a, c, d))
    if name == "thm1-nonflat":
        eps = 2.0 if epsilon is None else float(epsilon)
        if mu2 is None:
            from .solver import nonflat_mu
            roots = nonflat_mu(eps)
            if not roots:
                raise DomainError(f"no admissible mu^2 at epsilon={eps}")
            mu2 = max(roots)
        if not mu2 > 0.0:
            raise DomainError("mu^2 must be positive")
        return build_nonflat(NonFlatFamilyParams(eps, math.sqrt(mu2)))
    if name in ("thm2-flat-1", "thm2-flat-2", "thm2-flat-3"):
        return build_theorem2_flat(int(name[-1]))
    if name in ("thm2-nonflat-plus", "thm2-nonflat-minus"):
        sign = +1 if name.endswith("plus") else -1
        return build_nonflat(NonFlatFamilyParams(1.0, math.sqrt(theorem2_mu2(sign))))
    raise DomainError(f"unknown immersion id {name!r}")
