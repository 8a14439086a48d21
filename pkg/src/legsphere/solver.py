"""Constraint-system solving with the bitension field as ground truth.

The flat-family parameters satisfy a four-equation algebraic system whose
first equation circulates in two variants (a printed one, linear in the
spectral parameter, and one quadratic in it).  Every algebraic root is
post-validated by building the immersion and measuring its bitension
field; the oracle, not the printed algebra, decides which roots are real.
The same policy applies to the non-flat locus in mu^2, where the oracle
again disagrees with one printed coefficient; both variants ship and
reports always carry both residuals.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import immersions
from .ambient import DomainError
from .engine import Geometry, TOL_FOURTH_ORDER
from .immersions import ConstraintError, FlatFamilyParams, NonFlatFamilyParams

VARIANTS = ("as_printed", "lambda_squared_corrected")

MINIMAL_MU2 = 1.0 / 3.0      # the non-flat family is minimal exactly here


def _check_variant(variant):
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")


def flat_system_residual(epsilon, lam, a, c, d, variant="lambda_squared_corrected"):
    """The four left-hand sides of the flat-family system, unfiltered.

    ``variant`` selects the first equation's middle term: the printed
    -2(eps+1)*lambda or the corrected -2(eps+1)*lambda^2.  At the known
    epsilon=1 solution the corrected variant vanishes to machine precision
    while the printed one leaves a residual near -1.0355; both are exposed
    so reports can document the discrepancy.
    """
    _check_variant(variant)
    k = (epsilon + 3.0) / 4.0          # 1/alpha
    mid = lam if variant == "as_printed" else lam ** 2
    e1 = (3 * lam ** 2 - k) * (3 * lam ** 4 - 2 * (epsilon + 1) * mid + k ** 2) \
        + lam ** 4 * ((a + c) ** 2 + d ** 2)
    e2 = (a + c) * (5 * lam ** 2 + a ** 2 + c ** 2 - 7 * k + 4) + c * d ** 2
    e3 = d * (5 * lam ** 2 + d ** 2 + 3 * c ** 2 + a * c - 7 * k + 4)
    e4 = k + lam ** 2 + a * c - c ** 2
    return np.array([e1, e2, e3, e4])


def _flat_system_batch(epsilon, x):
    """Corrected-variant residuals for a batch of (lam, a, c, d) rows."""
    k = (epsilon + 3.0) / 4.0
    lam, a, c, d = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    e1 = (3 * lam ** 2 - k) * (3 * lam ** 4 - 2 * (epsilon + 1) * lam ** 2 + k ** 2) \
        + lam ** 4 * ((a + c) ** 2 + d ** 2)
    e2 = (a + c) * (5 * lam ** 2 + a ** 2 + c ** 2 - 7 * k + 4) + c * d ** 2
    e3 = d * (5 * lam ** 2 + d ** 2 + 3 * c ** 2 + a * c - 7 * k + 4)
    e4 = k + lam ** 2 + a * c - c ** 2
    return np.stack([e1, e2, e3, e4], axis=1)


def _flat_jacobian_batch(epsilon, x):
    """Exact Jacobian of the corrected-variant system for a batch of rows."""
    k = (epsilon + 3.0) / 4.0
    ee = epsilon + 1.0
    lam, a, c, d = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    n = x.shape[0]
    jac = np.zeros((n, 4, 4))
    s = a + c
    quart = 3 * lam ** 4 - 2 * ee * lam ** 2 + k ** 2
    jac[:, 0, 0] = 6 * lam * quart + (3 * lam ** 2 - k) * (12 * lam ** 3 - 4 * ee * lam) \
        + 4 * lam ** 3 * (s ** 2 + d ** 2)
    jac[:, 0, 1] = lam ** 4 * 2 * s
    jac[:, 0, 2] = lam ** 4 * 2 * s
    jac[:, 0, 3] = lam ** 4 * 2 * d
    p = 5 * lam ** 2 + a ** 2 + c ** 2 - 7 * k + 4
    jac[:, 1, 0] = s * 10 * lam
    jac[:, 1, 1] = p + s * 2 * a
    jac[:, 1, 2] = p + s * 2 * c + d ** 2
    jac[:, 1, 3] = 2 * c * d
    q = 5 * lam ** 2 + d ** 2 + 3 * c ** 2 + a * c - 7 * k + 4
    jac[:, 2, 0] = 10 * lam * d
    jac[:, 2, 1] = d * c
    jac[:, 2, 2] = d * (6 * c + a)
    jac[:, 2, 3] = q + 2 * d ** 2
    jac[:, 3, 0] = 2 * lam
    jac[:, 3, 1] = c
    jac[:, 3, 2] = a - 2 * c
    jac[:, 3, 3] = 0.0
    return jac


@dataclass(frozen=True)
class SolverConfig:
    grid: int = 24
    newton_tol: float = 1e-12
    max_iter: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.grid <= 0 or self.newton_tol <= 0 or self.max_iter <= 0:
            raise DomainError("grid, newton_tol and max_iter must be positive")


@dataclass(frozen=True)
class FlatRoot:
    """One root of the flat system, with its oracle verdict."""

    epsilon: float
    lam: float
    a: float
    c: float
    d: float
    residual_printed: float
    residual_corrected: float
    bitension: float
    lambda2_margin: float      # |lambda^2 - 1/(3 alpha)|
    status: str                # "validated" | "algebra-only"
    reason: str = ""

    def quadruplet(self):
        return (self.lam, self.a, self.c, self.d)

    def to_dict(self):
        return {
            "kind": "solution",
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "a": self.a,
            "c": self.c,
            "d": self.d,
            "residual_printed": self.residual_printed,
            "residual_corrected": self.residual_corrected,
            "bitension": self.bitension,
            "lambda2_margin": self.lambda2_margin,
            "status": self.status,
            "reason": self.reason,
        }


@dataclass
class SolveResult:
    validated: list = field(default_factory=list)
    algebra_only: list = field(default_factory=list)

    @property
    def all_roots(self):
        return self.validated + self.algebra_only


def _grid_starts(epsilon, grid):
    """Deterministic starts covering the admissible parameter box.

    c is seeded from the exactly solvable fourth equation
    c^2 - a c = 1/alpha + lambda^2, whose negative root is the only one
    compatible with a > 2c.
    """
    alpha = 4.0 / (epsilon + 3.0)
    k = 1.0 / alpha
    lam_max = min(1.0 / math.sqrt(alpha), math.sqrt(alpha))
    starts = []
    for i in range(grid):
        lam = -lam_max * (i + 0.5) / grid
        a_max = (lam ** 2 - alpha) / lam
        for j in range(grid):
            a = a_max * (j + 0.5) / grid
            c = (a - math.sqrt(a ** 2 + 4.0 * (k + lam ** 2))) / 2.0
            for kk in range(grid):
                d = a * 0.9 * kk / max(grid - 1, 1)
                starts.append((lam, a, c, d))
    return np.array(starts)


def solve_flat(epsilon, config=None):
    """All flat-family roots at one epsilon, split by the bitension oracle.

    Grid multi-start Newton (damping 0.5 on divergence) on the corrected
    variant, deduplication at distance 1e-8 after canonicalising d >= 0,
    then post-validation: a root is ``validated`` only if the immersion it
    defines exists (constraints hold) and has max bitension norm below
    1e-6; everything else lands in the ``algebra-only`` bucket.  An empty
    validated set is a meaningful outcome, not an error.
    """
    if not epsilon > -3.0:
        raise DomainError("epsilon must exceed -3")
    config = config or SolverConfig()
    x = _grid_starts(epsilon, config.grid)
    n = x.shape[0]
    active = np.ones(n, dtype=bool)
    res = _flat_system_batch(epsilon, x)
    for _ in range(config.max_iter):
        norms = np.max(np.abs(res), axis=1)
        active = norms > config.newton_tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        jac = _flat_jacobian_batch(epsilon, x[idx])
        try:
            delta = np.linalg.solve(jac, res[idx][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            delta = np.stack([np.linalg.lstsq(j, r, rcond=None)[0]
                              for j, r in zip(jac, res[idx])])
        step = np.ones(len(idx))
        for _ in range(5):
            cand = x[idx] - step[:, None] * delta
            cand_res = _flat_system_batch(epsilon, cand)
            worse = np.max(np.abs(cand_res), axis=1) > np.max(np.abs(res[idx]), axis=1)
            if not worse.any():
                break
            step[worse] *= 0.5
        x[idx] = x[idx] - step[:, None] * delta
        res[idx] = _flat_system_batch(epsilon, x[idx])

    norms = np.max(np.abs(res), axis=1)
    good = x[norms < config.newton_tol]
    good = good[np.all(np.isfinite(good), axis=1)]
    good[:, 3] = np.abs(good[:, 3])        # the system is even in d

    alpha = 4.0 / (epsilon + 3.0)
    excluded = 1.0 / (3.0 * alpha)

    # The system always contains the root lambda^2 = 1/(3 alpha), a = -c,
    # d = 0, where the first equation's leading factor vanishes.  It is a
    # degenerate (singular-Jacobian) root and the immersion it defines is
    # minimal, so it never classifies; Newton scatters hundreds of
    # near-copies around it.  Collapse them before deduplication.
    deg_mask = np.abs(good[:, 0] ** 2 - excluded) < 1e-5
    hit_degenerate = bool(deg_mask.any())
    good = good[~deg_mask]

    # deduplicate at distance 1e-8, then re-polish each representative
    roots = []
    for row in sorted(map(tuple, good)):
        if not any(np.linalg.norm(np.subtract(row, r)) < 1e-8 for r in roots):
            roots.append(row)
    polished = []
    for row in roots:
        y = np.array([row])
        for _ in range(8):
            r = _flat_system_batch(epsilon, y)
            if np.max(np.abs(r)) < 1e-15:
                break
            jac = _flat_jacobian_batch(epsilon, y)
            try:
                y = y - np.linalg.solve(jac, r[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                break
        polished.append(tuple(y[0]))

    result = SolveResult()
    if hit_degenerate:
        lam_deg = -math.sqrt(excluded)
        c_deg = -math.sqrt(2.0 * excluded)
        result.algebra_only.append(FlatRoot(
            epsilon=epsilon, lam=lam_deg, a=-c_deg, c=c_deg, d=0.0,
            residual_printed=float(np.max(np.abs(flat_system_residual(
                epsilon, lam_deg, -c_deg, c_deg, 0.0, "as_printed")))),
            residual_corrected=0.0, bitension=0.0, lambda2_margin=0.0,
            status="algebra-only",
            reason="excluded: lambda^2 = 1/(3 alpha) (minimal family)"))

    for lam, a, c, d in polished:
        r_printed = float(np.max(np.abs(flat_system_residual(
            epsilon, lam, a, c, d, "as_printed"))))
        r_corr = float(np.max(np.abs(flat_system_residual(
            epsilon, lam, a, c, d, "lambda_squared_corrected"))))
        margin = abs(lam ** 2 - excluded)
        bit = math.inf
        status, reason = "algebra-only", ""
        try:
            params = FlatFamilyParams(epsilon, lam, a, c, d)
            imm = immersions.build_flat(params)
            geo = Geometry(imm)
            bit = geo.bitension_max(samples=8, seed=config.seed)
            min_h = float(np.min(geo.mean_curvature_norms(samples=8,
                                                          seed=config.seed)))
            if bit >= TOL_FOURTH_ORDER:
                reason = "bitension oracle rejects"
            elif min_h <= NONMINIMAL_THRESHOLD:
                reason = "minimal (biharmonic but not proper)"
            else:
                status = "validated"
        except (ConstraintError, DomainError) as exc:
            reason = str(exc)
        root = FlatRoot(epsilon=epsilon, lam=lam, a=a, c=c, d=d,
                        residual_printed=r_printed, residual_corrected=r_corr,
                        bitension=bit, lambda2_margin=margin,
                        status=status, reason=reason)
        (result.validated if status == "validated" else result.algebra_only).append(root)
    key = lambda r: (r.lam, r.a, r.c, r.d)
    result.validated.sort(key=key)
    result.algebra_only.sort(key=key)
    return result


# ---------------------------------------------------------------------------
# the non-flat locus
# ---------------------------------------------------------------------------

def nonflat_mu(epsilon, variant="as_printed"):
    """Admissible mu^2 values of the non-flat family at one epsilon.

    ``as_printed`` evaluates (4 eps + 4 +/- 2 sqrt(13 eps^2 + 14 eps - 11))
    / (3 (3 + eps)) with the separate special case mu^2 = 1 at eps = 1,
    keeping only positive roots; empty when the radicand is negative.

    ``radical_corrected`` drops the factor 2 on the radical.  That is where
    the bitension oracle actually vanishes: the corrected roots have
    product exactly 1/3 and reproduce mu^2 = 1 at eps = 1 once the minimal
    root mu^2 = 1/3 (where H vanishes identically) is excluded, whereas
    the printed formula's eps -> 1 limit {4/3, 0} contradicts the eps = 1
    case.  Scans report, solvers document both.
    """
    _check_variant(variant)
    disc = 13.0 * epsilon ** 2 + 14.0 * epsilon - 11.0
    if variant == "as_printed":
        if epsilon == 1.0:
            return (1.0,)
        if disc < 0.0:
            return ()
        root = 2.0 * math.sqrt(disc)
    else:
        if disc < 0.0:
            return ()
        root = math.sqrt(disc)
    den = 3.0 * (3.0 + epsilon)
    vals = [(4.0 * epsilon + 4.0 + root) / den, (4.0 * epsilon + 4.0 - root) / den]
    out = sorted({v for v in vals
                  if v > 0.0 and abs(v - MINIMAL_MU2) > 1e-12})
    return tuple(out)


@dataclass(frozen=True)
class ScanResult:
    epsilon: float
    samples: tuple              # ((mu2, residual), ...)
    minima: tuple               # refined ((mu2, residual), ...)


def _nonflat_residual(epsilon, mu2, seed):
    """Max bitension norm of the non-flat immersion on a fixed 20-point grid."""
    imm = immersions.build_nonflat(NonFlatFamilyParams(epsilon, math.sqrt(mu2)))
    return Geometry(imm).bitension_max(samples=20, seed=seed)


def scan_mu(epsilon, mu2_min=0.5, mu2_max=3.0, steps=60, seed=0, refine=True):
    """Empirical bitension-residual curve over a mu^2 range.

    Evaluates the max bitension norm on a fixed 20-point grid per mu^2,
    locates interior local minima of the sampled curve and, by default,
    sharpens each with a golden-section refinement.  The scan reports; it
    asserts nothing.
    """
    if mu2_min <= 0.0 or mu2_max <= mu2_min:
        raise DomainError("need 0 < mu2_min < mu2_max")
    grid = np.linspace(mu2_min, mu2_max, steps)
    vals = [_nonflat_residual(epsilon, m, seed) for m in grid]
    samples = tuple((float(m), float(v)) for m, v in zip(grid, vals))

    minima = []
    for i in range(1, steps - 1):
        if vals[i] < vals[i - 1] and vals[i] < vals[i + 1]:
            lo, hi = grid[i - 1], grid[i + 1]
            if refine:
                phi_r = (math.sqrt(5.0) - 1.0) / 2.0
                aa, bb = lo, hi
                x1 = bb - phi_r * (bb - aa)
                x2 = aa + phi_r * (bb - aa)
                f1 = _nonflat_residual(epsilon, x1, seed)
                f2 = _nonflat_residual(epsilon, x2, seed)
                for _ in range(40):
                    if f1 < f2:
                        bb, x2, f2 = x2, x1, f1
                        x1 = bb - phi_r * (bb - aa)
                        f1 = _nonflat_residual(epsilon, x1, seed)
                    else:
                        aa, x1, f1 = x1, x2, f2
                        x2 = aa + phi_r * (bb - aa)
                        f2 = _nonflat_residual(epsilon, x2, seed)
                    if bb - aa < 1e-10:
                        break
                best = (x1, f1) if f1 < f2 else (x2, f2)
            else:
                best = (grid[i], vals[i])
            minima.append((float(best[0]), float(best[1])))
    return ScanResult(epsilon=epsilon, samples=samples, minima=tuple(minima))


# ---------------------------------------------------------------------------
# the parallel-Lagrangian suite
# ---------------------------------------------------------------------------

THEOREM2_CASES = {
    1: "thm2-flat-1",
    2: "thm2-flat-2",
    3: "thm2-flat-3",
    "nonflat_plus": "thm2-nonflat-plus",
    "nonflat_minus": "thm2-nonflat-minus",
}

NONMINIMAL_THRESHOLD = 1e-6


def theorem2_verify(which, samples=20, seed=0):
    """Checks for one parallel-Lagrangian case at epsilon=1.

    Runs the Legendrian residual, the nabla-h alignment residual,
    non-minimality of H, and the Tr h(., A_H .) = 6H identity; flat cases
    additionally report their constraint margins (positive = satisfied;
    encoded as residual = -margin against tolerance 0).
    """
    from .report import CheckRecord, Report

    if which not in THEOREM2_CASES:
        raise DomainError(f"unknown case {which!r}; expected one of "
                          f"{sorted(map(str, THEOREM2_CASES))}")
    name = THEOREM2_CASES[which]
    imm = immersions.get_immersion(name)
    geo = Geometry(imm)
    min_h = float(np.min(geo.mean_curvature_norms(samples=samples, seed=seed)))
    records = [
        CheckRecord("legendrian", name, geo.check_legendrian(samples, seed=seed),
                    1e-12, samples),
        CheckRecord("c-parallel", name, geo.c_parallel_residual(samples, seed=seed),
                    1e-6, samples),
        CheckRecord("nonminimal", name, NONMINIMAL_THRESHOLD - min_h, 0.0, samples),
        CheckRecord("condition-6h", name, geo.condition_6h(samples, seed=seed),
                    1e-6, samples),
    ]
    payload = {}
    if isinstance(which, int):
        p = imm.params
        # strict margins carry tolerance 0; the non-strict ones (a >= d >= 0,
        # tight at d = 0) allow exact equality up to roundoff
        margins = {
            "a-2c": (p.a - 2.0 * p.c, 0.0),
            "a-d": (p.a - p.d, 1e-12),
            "d": (p.d, 1e-12),
            "lambda-above": (p.lam + 1.0, 0.0),
            "lambda-below": (-p.lam, 0.0),
        }
        for label, (margin, tol) in margins.items():
            records.append(CheckRecord(f"margin-{label}", name, -margin, tol, 0))
        payload["quadruplet"] = {"lambda": p.lam, "a": p.a, "c": p.c, "d": p.d}
    rep = Report(records=records, config={"which": str(which), "samples": samples,
                                          "seed": seed})
    rep.payload.update(payload)
    return rep
