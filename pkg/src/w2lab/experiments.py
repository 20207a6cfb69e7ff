"""End-to-end experiments: rate reproduction, lattice floor, halfspace distance.

Each experiment consumes a dataclass config carrying its own root seed and
derives one generator per (grid point, replica) job through the documented
splitting rule, so reports are bit-identical across runs and across worker
counts.  Experiments return plain report dataclasses; serialization lives in
:mod:`w2lab.reporting`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr, roots_legendre
from scipy.stats import t as student_t

from .gaussmath import CovarianceSpec, GaussianModel, sample_gaussian
from .samplers import (
    BoundedSampler,
    LatticeSpec,
    lattice_distance,
    make_lattice_custom,
    make_rademacher_product,
    make_scaled_basis,
    make_sphere_uniform,
    require_lattice_support,
)
from .seeding import rng_for
from .transport import (
    EmpiricalMeasure,
    w2_exact,
    w2_projection_lower,
    w2_quantile_1d,
    sinkhorn_w2,
)

# job-path codes for the seed-splitting rule: distinct first components keep
# every experiment's streams disjoint under one root seed
_RATE_JOB = 1
_LOWER_W2_JOB = 2
_LOWER_PROXY_JOB = 3
_CI_JOB = 4
_CI_W2_JOB = 5


@dataclass(frozen=True)
class SamplerSpec:
    """Config-file description of a sampler; ``build()`` realizes it.

    ``outcomes``/``probs`` (tuples of tuples / tuple of floats) describe a
    lattice_custom support and are ignored by the parametric kinds.
    """

    kind: str
    dim: int
    scale: float = 1.0  # rademacher scale, or beta for basis/sphere kinds
    outcomes: Optional[tuple] = None
    probs: Optional[tuple] = None

    def build(self) -> BoundedSampler:
        if self.kind == "rademacher_product":
            return make_rademacher_product(self.dim, self.scale)
        if self.kind == "scaled_basis":
            return make_scaled_basis(self.dim, self.scale)
        if self.kind == "sphere_uniform":
            return make_sphere_uniform(self.dim, self.scale)
        if self.kind == "lattice_custom":
            if self.outcomes is None or self.probs is None:
                raise ValueError("lattice_custom needs explicit outcomes and probs")
            outs = np.asarray(self.outcomes, dtype=float)
            if outs.ndim != 2 or outs.shape[1] != self.dim:
                raise ValueError(
                    f"outcomes must be rows of length dim={self.dim}"
                )
            return make_lattice_custom(outs, np.asarray(self.probs, dtype=float))
        raise ValueError(f"unknown sampler kind {self.kind!r}")


def estimate_w2(
    sn: np.ndarray,
    z: np.ndarray,
    estimator: str,
    rng: Optional[np.random.Generator] = None,
    projection_directions: int = 16,
    sinkhorn_eps_rel: float = 0.01,
) -> float:
    """Dispatch a two-cloud W2 estimate through the chosen estimator."""
    if estimator == "quantile_1d":
        if sn.shape[1] != 1:
            raise ValueError("quantile_1d estimator requires dim = 1")
        return w2_quantile_1d(sn[:, 0], z[:, 0])
    if estimator == "exact":
        cost, _ = w2_exact(EmpiricalMeasure(sn), EmpiricalMeasure(z))
        return math.sqrt(cost)
    if estimator == "sinkhorn":
        sub_x = sn[:: max(1, len(sn) // 64)]
        sub_y = z[:: max(1, len(z) // 64)]
        pair = ((sub_x[:, None, :] - sub_y[None, :, :]) ** 2).sum(-1)
        eps = max(sinkhorn_eps_rel * float(np.median(pair)), 1e-9)
        cost, _ = sinkhorn_w2(EmpiricalMeasure(sn), EmpiricalMeasure(z), epsilon=eps)
        return math.sqrt(max(cost, 0.0))
    if estimator == "projection_lower":
        if rng is None:
            raise ValueError("projection_lower needs an rng for directions")
        d = sn.shape[1]
        dirs = rng.standard_normal((projection_directions, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = np.concatenate([np.eye(d), dirs])
        return w2_projection_lower(
            EmpiricalMeasure(sn), EmpiricalMeasure(z), dirs
        )
    raise ValueError(f"unknown estimator {estimator!r}")


# ---------------------------------------------------------------------------
# Rate experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateExperimentConfig:
    sampler: SamplerSpec
    n_grid: tuple = tuple(2**k for k in range(4, 13))
    replicas: int = 10
    m: int = 10**5
    estimator: str = "quantile_1d"
    root_seed: int = 20260810

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n grid must be strictly increasing")
        if self.replicas < 3:
            raise ValueError("need replicas >= 3 for CI reporting")
        object.__setattr__(self, "n_grid", grid)


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log mean-W2 against log n, over replica means."""

    slope: float
    intercept: float
    correlation: float


@dataclass(frozen=True)
class RatePoint:
    n: int
    w2_hat: float  # replica mean
    ci_lo: float
    ci_hi: float
    bound: float
    replica_values: tuple


@dataclass(frozen=True)
class RateReport:
    config: RateExperimentConfig
    points: tuple
    fit: RateFit
    all_below_bound: bool

    @property
    def bound_margin_min(self) -> float:
        return min(p.bound - max(p.replica_values) for p in self.points)


def main_rate_bound(d: int, beta: float, n: int) -> float:
    """The main upper bound 5 sqrt(d) beta (1 + log n) / sqrt(n)."""
    return 5.0 * math.sqrt(d) * beta * (1.0 + math.log(n)) / math.sqrt(n)


def _replica_ci(values: np.ndarray) -> tuple[float, float]:
    r = len(values)
    mean = float(values.mean())
    half = float(
        student_t.ppf(0.975, r - 1) * values.std(ddof=1) / math.sqrt(r)
    )
    return mean - half, mean + half


def clt_rate_experiment(cfg: RateExperimentConfig) -> RateReport:
    """Estimate W2(S_n, Z) over the n grid and test the rate bound pointwise.

    S_n = n^{-1/2} (X_1 + ... + X_n) is sampled through the sampler's exact
    sum fast path; each replica draws a fresh (S_n cloud, Z cloud) pair.
    """
    s = cfg.sampler.build()
    if cfg.estimator == "quantile_1d" and s.dim != 1:
        raise ValueError("quantile_1d estimator requires a 1-d sampler")
    model = GaussianModel(s.cov, 1.0)
    points = []
    all_below = True
    for i_n, n in enumerate(cfg.n_grid):
        vals = []
        bound = main_rate_bound(s.dim, s.bound, n)
        for r in range(cfg.replicas):
            rng = rng_for(cfg.root_seed, _RATE_JOB, i_n, r)
            sn = s.draw_sum(n, cfg.m, rng) / math.sqrt(n)
            z = sample_gaussian(model, cfg.m, rng)
            w2_hat = estimate_w2(sn, z, cfg.estimator, rng=rng)
            vals.append(w2_hat)
            if w2_hat > bound:
                all_below = False
        arr = np.array(vals)
        lo, hi = _replica_ci(arr)
        points.append(
            RatePoint(
                n=n, w2_hat=float(arr.mean()), ci_lo=lo, ci_hi=hi,
                bound=bound, replica_values=tuple(vals),
            )
        )
    log_n = np.log([p.n for p in points])
    log_w = np.log([p.w2_hat for p in points])
    a = np.vstack([log_n, np.ones_like(log_n)]).T
    slope, intercept = np.linalg.lstsq(a, log_w, rcond=None)[0]
    fit = RateFit(
        slope=float(slope),
        intercept=float(intercept),
        correlation=float(np.corrcoef(log_n, log_w)[0, 1]),
    )
    return RateReport(
        config=cfg, points=tuple(points), fit=fit, all_below_bound=all_below
    )


# ---------------------------------------------------------------------------
# Lattice lower bound
# ---------------------------------------------------------------------------

def expected_lattice_distance(
    cov: CovarianceSpec, spec: LatticeSpec, m: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of E d_L(Z), Z ~ N(0, Sigma).

    A certified lower-bound ingredient: for S_n supported on the lattice,
    W2(S_n, Z) >= E d_L(Z) up to the MC error.
    """
    if m < 10**5:
        raise ValueError("need m >= 1e5 draws for a stable estimate")
    z = sample_gaussian(GaussianModel(cov, 1.0), m, rng)
    d = lattice_distance(z, spec)
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(m))


def unit_cell_mean_distance(dim: int, nodes: int = 60) -> float:
    """Mean distance to the cell center over the unit cube, by quadrature.

    Scales to a lattice of spacing L as L * value; 1/4 in one dimension,
    about 0.3826 in two.  The integrand |x| has a kink at the origin, so the
    quadrature runs over symmetric subregions where it is smooth (for d = 2,
    the octant substitution y = t x makes the radial factor polynomial).
    """
    x, w = roots_legendre(nodes)
    if dim == 1:
        # 2 * integral of x over [0, 1/2]
        u = 0.25 * (x + 1.0)
        return float(2.0 * (0.25 * w) @ u)
    if dim == 2:
        # 8 congruent octants; on {0 <= y <= x <= 1/2} substitute y = t x:
        # integral = (int_0^{1/2} x^2 dx) * (int_0^1 sqrt(1+t^2) dt)
        t = 0.5 * (x + 1.0)
        radial = float((0.5 * w) @ np.sqrt(1.0 + t**2))
        return 8.0 * (0.5**3 / 3.0) * radial
    raise ValueError("unit-cell constant implemented for dim in {1, 2}")


@dataclass(frozen=True)
class LowerBoundPoint:
    n: int
    ell_n: float
    sqrtn_w2_hat: float
    sqrtn_proxy: float
    proxy_se: float
    percube_measured: float  # measured per-cube mean distance / ell_n
    percube_quadrature: float  # quadrature value of the same constant
    percube_claim_half_sqrtd: float  # the 0.5*sqrt(d) comparison constant


@dataclass(frozen=True)
class LowerBoundReport:
    dim: int
    beta: float
    target: float  # sqrt(d) * beta / 4
    points: tuple
    plateau_value: float  # sqrt(n) * proxy at the largest n

    @property
    def plateau_vs_target(self) -> float:
        return self.plateau_value / self.target


@dataclass(frozen=True)
class LowerExperimentConfig:
    sampler: SamplerSpec
    n_grid: tuple = (64, 256, 1024, 4096)
    m_w2: int = 10**5
    m_proxy: int = 2 * 10**5
    estimator: str = "quantile_1d"
    root_seed: int = 20260810


def lattice_lower_experiment(cfg: LowerExperimentConfig) -> LowerBoundReport:
    """Track sqrt(n) * W2 and the certified lattice proxy along the n grid.

    The sampler must take values in beta * Z^d (validated).  At scale n the
    normalized sum lives on the lattice with spacing ell_n = beta / sqrt(n),
    so E d_L(Z) with that spacing lower-bounds W2(S_n, Z); its sqrt(n)-scaled
    plateau is compared against sqrt(d) * beta / 4.
    """
    s = cfg.sampler.build()
    require_lattice_support(s)
    model = GaussianModel(s.cov, 1.0)
    cell_const = unit_cell_mean_distance(s.dim)
    points = []
    for i_n, n in enumerate(cfg.n_grid):
        ell = s.bound / math.sqrt(n)
        spec = LatticeSpec(spacing=ell, dim=s.dim)
        rng_p = rng_for(cfg.root_seed, _LOWER_PROXY_JOB, i_n)
        proxy, se = expected_lattice_distance(s.cov, spec, cfg.m_proxy, rng_p)
        rng_w = rng_for(cfg.root_seed, _LOWER_W2_JOB, i_n)
        sn = s.draw_sum(n, cfg.m_w2, rng_w) / math.sqrt(n)
        z = sample_gaussian(model, cfg.m_w2, rng_w)
        w2_hat = estimate_w2(sn, z, cfg.estimator, rng=rng_w)
        # measured per-cube constant: mean distance of uniform cell points
        u = (rng_p.random((10**5, s.dim)) - 0.5) * ell
        percube = float(np.sqrt((u**2).sum(axis=1)).mean()) / ell
        points.append(
            LowerBoundPoint(
                n=n,
                ell_n=ell,
                sqrtn_w2_hat=math.sqrt(n) * w2_hat,
                sqrtn_proxy=math.sqrt(n) * proxy,
                proxy_se=math.sqrt(n) * se,
                percube_measured=percube,
                percube_quadrature=cell_const,
                percube_claim_half_sqrtd=0.5 * math.sqrt(s.dim),
            )
        )
    target = math.sqrt(s.dim) * s.bound / 4.0
    return LowerBoundReport(
        dim=s.dim,
        beta=s.bound,
        target=target,
        points=tuple(points),
        plateau_value=points[-1].sqrtn_proxy,
    )


# ---------------------------------------------------------------------------
# Halfspace (convex-indicator proxy) experiment
# ---------------------------------------------------------------------------

def ks_statistic_gaussian(proj: np.ndarray, sd: float) -> float:
    """Exact sup_t |F_hat(t) - Phi(t/sd)| for a 1-d sample."""
    x = np.sort(np.asarray(proj, dtype=float))
    m = x.size
    cdf = ndtr(x / sd)
    hi = np.max(np.arange(1, m + 1) / m - cdf)
    lo = np.max(cdf - np.arange(0, m) / m)
    return float(max(hi, lo))


@dataclass(frozen=True)
class HalfspacePoint:
    n: int
    delta_hat: float
    w2_hat: float
    rhs: float  # 5 d^{1/6} w2^{2/3}
    slack: float  # statistical widening added before the verdict
    passed: bool


@dataclass(frozen=True)
class HalfspaceConfig:
    sampler: SamplerSpec
    n_grid: tuple = tuple(2**k for k in range(4, 13))
    m: int = 10**5
    w2_m: Optional[int] = None  # defaults to m (cap applies for exact)
    directions: int = 16
    estimator: str = "quantile_1d"
    root_seed: int = 20260810


@dataclass(frozen=True)
class HalfspaceReport:
    config: HalfspaceConfig
    points: tuple
    decay_slope: float  # slope of log delta_hat vs log n
    all_passed: bool


def conversion_bound(d: int, w2: float) -> float:
    """The convex-indicator conversion 5 d^{1/6} W2^{2/3}."""
    return 5.0 * d ** (1.0 / 6.0) * w2 ** (2.0 / 3.0)


def halfspace_distance(
    sn: np.ndarray, cov: CovarianceSpec, directions: np.ndarray
) -> float:
    """Sup over sampled halfspaces of |P_hat(S in A) - P(Z in A)|.

    Halfspaces {x : <x, u> <= t} scan all t for each direction u; the
    Gaussian side is the exact 1-d normal CDF of <Z, u>.  A restricted
    supremum, hence a certified lower bound on the full convex-set distance.
    """
    best = 0.0
    for u in directions:
        sd = math.sqrt(float(np.sum(u * u * cov.variances)))
        best = max(best, ks_statistic_gaussian(sn @ u, sd))
    return best


def _direction_set(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    dirs = rng.standard_normal((count, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.concatenate([np.eye(d), dirs])


def ci_halfspace_experiment(cfg: HalfspaceConfig) -> HalfspaceReport:
    """Measure the halfspace distance along the n grid and test the conversion.

    The verdict widens the conversion bound by 5 binomial standard errors
    (0.5/sqrt(m) scale), since delta_hat is estimated from m samples while
    the Gaussian side is exact.
    """
    s = cfg.sampler.build()
    model = GaussianModel(s.cov, 1.0)
    w2_m = cfg.w2_m or cfg.m
    slack = 5.0 * 0.5 / math.sqrt(cfg.m)
    points = []
    all_passed = True
    for i_n, n in enumerate(cfg.n_grid):
        rng = rng_for(cfg.root_seed, _CI_JOB, i_n)
        sn = s.draw_sum(n, cfg.m, rng) / math.sqrt(n)
        dirs = _direction_set(s.dim, cfg.directions, rng)
        delta_hat = halfspace_distance(sn, s.cov, dirs)
        rng_w = rng_for(cfg.root_seed, _CI_W2_JOB, i_n)
        sn_w = s.draw_sum(n, w2_m, rng_w) / math.sqrt(n)
        z_w = sample_gaussian(model, w2_m, rng_w)
        w2_hat = estimate_w2(sn_w, z_w, cfg.estimator, rng=rng_w)
        rhs = conversion_bound(s.dim, w2_hat)
        ok = delta_hat <= rhs + slack
        all_passed = all_passed and ok
        points.append(
            HalfspacePoint(
                n=n, delta_hat=delta_hat, w2_hat=w2_hat, rhs=rhs,
                slack=slack, passed=ok,
            )
        )
    log_n = np.log([p.n for p in points])
    log_d = np.log([max(p.delta_hat, 1e-12) for p in points])
    a = np.vstack([log_n, np.ones_like(log_n)]).T
    slope = float(np.linalg.lstsq(a, log_d, rcond=None)[0][0])
    return HalfspaceReport(
        config=cfg, points=tuple(points), decay_slope=slope, all_passed=all_passed
    )


@dataclass(frozen=True)
class CalibrationResult:
    delta_hat: float
    delta_exact: float
    w2: float
    rhs: float
    passed: bool


def ci_calibration(
    m: int, rng: np.random.Generator, shift: float = 0.5
) -> CalibrationResult:
    """Shifted-Gaussian calibration of the halfspace machinery.

    N(shift, 1) against N(0, 1): the exact halfspace supremum is
    2 Phi(shift/2) - 1 at the midpoint threshold, W2 equals |shift|, and the
    conversion bound is evaluated at the exact W2.
    """
    x = rng.standard_normal(m) + shift
    delta_hat = ks_statistic_gaussian(x, 1.0)
    delta_exact = 2.0 * float(ndtr(shift / 2.0)) - 1.0
    w2 = abs(shift)
    rhs = conversion_bound(1, w2)
    return CalibrationResult(
        delta_hat=delta_hat,
        delta_exact=delta_exact,
        w2=w2,
        rhs=rhs,
        passed=delta_hat <= rhs + 5.0 * 0.5 / math.sqrt(m),
    )


def bentkus_reference_curve(d: int, n: int, beta3: float) -> float:
    """Reference-only convex-distance curve d^{1/4} beta3^3 / sqrt(n).

    Plot overlay with the constant taken as 1; never asserted against
    measurements (non-normative).
    """
    return d**0.25 * beta3**3 / math.sqrt(n)
