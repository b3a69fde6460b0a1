"""Statistical comparison harness for the Monte Carlo experiments.

One- and two-sample Kolmogorov-Smirnov tests with p-values from the
asymptotic Kolmogorov distribution (adequate for n >= 100, which every
experiment here satisfies), a binned chi-square check, Wilson intervals and
quadrature-based CDF construction from kernel densities.

Multivariate laws are compared marginal-by-marginal plus pairwise-gap
marginals; a full multivariate KS is impractical and the marginal tests
already separate the competing hypotheses at the sample sizes used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, DomainError

__all__ = [
    "EmpiricalSample",
    "ks_one_sample",
    "ks_two_sample",
    "kolmogorov_sf",
    "cdf_from_density",
    "CdfResult",
    "wilson_interval",
    "chi2_binned",
    "TestReport",
]


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("empty sample")
        if not np.isfinite(v).all():
            raise DomainError("sample contains non-finite values")
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != v.shape or (w < 0).any() or w.sum() <= 0:
                raise DomainError("weights must be non-negative with positive total")
            object.__setattr__(self, "weights", w)

    def mean_with_error(self) -> tuple[float, float]:
        v, w = self.values, self.weights
        if w is None:
            m = float(v.mean())
            se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
            return m, se
        wt = w / w.sum()
        m = float((wt * v).sum())
        var = float((wt * (v - m) ** 2).sum())
        n_eff = float(w.sum() ** 2 / (w**2).sum())
        return m, math.sqrt(var / n_eff)


def kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution."""
    if t <= 0.0:
        return 1.0
    if t < 1.0:
        # theta-function form converges fast for small arguments
        a = math.pi**2 / (8.0 * t * t)
        s = sum(math.exp(-((2 * k - 1) ** 2) * a) for k in range(1, 20))
        return max(0.0, min(1.0, 1.0 - math.sqrt(2.0 * math.pi) / t * s))
    s = 0.0
    for k in range(1, 101):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * t * t)
        s += term
        if abs(term) < 1e-16:
            break
    return max(0.0, min(1.0, 2.0 * s))


def _as_values(sample) -> np.ndarray:
    if isinstance(sample, EmpiricalSample):
        if sample.weights is not None:
            raise DomainError("KS tests take unweighted samples")
        return sample.values
    return EmpiricalSample(np.asarray(sample)).values


def ks_one_sample(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """Exact KS statistic against a CDF; asymptotic p-value (use n >= 100)."""
    v = np.sort(_as_values(sample))
    n = v.size
    F = np.asarray(cdf(v), dtype=float)
    up = np.arange(1, n + 1) / n - F
    lo = F - np.arange(0, n) / n
    d = float(max(up.max(), lo.max()))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS statistic; asymptotic p-value with the effective sample size."""
    a = np.sort(_as_values(a))
    b = np.sort(_as_values(b))
    everything = np.concatenate([a, b])
    ca = np.searchsorted(a, everything, side="right") / a.size
    cb = np.searchsorted(b, everything, side="right") / b.size
    d = float(np.abs(ca - cb).max())
    n_eff = a.size * b.size / (a.size + b.size)
    return d, kolmogorov_sf(math.sqrt(n_eff) * d)


@dataclass(frozen=True)
class CdfResult:
    """Quadrature CDF plus the total mass it integrates to.

    The CDF is *not* renormalized; acceptance checks assert the reported
    total lies in [1 - tol, 1 + tol] instead of silently dividing it out.
    """

    cdf: Callable[[np.ndarray], np.ndarray]
    total_mass: float
    support: tuple[float, float]

    def __call__(self, x):
        return self.cdf(x)


def cdf_from_density(
    density: Callable[[float], float],
    support: tuple[float, float],
    rtol: float = 1e-9,
    grid_points: int = 1500,
) -> CdfResult:
    """Build a CDF from a 1-D density by adaptive quadrature.

    Semi-infinite supports are truncated where the remaining tail mass drops
    below 1e-12.  The cumulative values are computed panel-by-panel and
    interpolated monotonically.
    """
    lo, hi = support
    if not hi > lo:
        raise DomainError("empty support interval")
    if math.isinf(hi):
        # grow the cutoff until the tail is negligible
        width = 1.0
        hi = lo + width
        total_probe, _ = quad(density, lo, np.inf, limit=400)
        while True:
            tail, _ = quad(density, hi, np.inf, limit=400)
            if tail < 1e-12 * max(total_probe, 1e-300):
                break
            width *= 2.0
            hi = lo + width
            if width > 1e12:
                raise ConvergenceError("density tail does not decay; cannot truncate support")
    grid = np.linspace(lo, hi, grid_points)
    panel = np.empty(grid_points - 1)
    for i in range(grid_points - 1):
        panel[i], _ = quad(density, grid[i], grid[i + 1], epsabs=1e-13, epsrel=rtol, limit=80)
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    total = float(cum[-1])

    def cdf(x):
        x = np.asarray(x, dtype=float)
        vals = np.interp(x, grid, cum, left=0.0, right=total)
        return vals if vals.ndim else float(vals)

    return CdfResult(cdf=cdf, total_mass=total, support=(lo, hi))


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0 or successes < 0 or successes > trials:
        raise DomainError("need 0 <= successes <= trials with trials > 0")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def chi2_binned(sample, cdf: Callable, bins: int = 20) -> tuple[float, float]:
    """Equal-probability binned chi-square statistic and its asymptotic p-value."""
    from scipy.stats import chi2 as chi2_dist

    v = _as_values(sample)
    n = v.size
    qs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    # invert the cdf on the sample range by bisection
    lo, hi = v.min() - 1.0, v.max() + 1.0
    edges = []
    for q in qs:
        a, b = lo, hi
        for _ in range(80):
            m = 0.5 * (a + b)
            if float(cdf(m)) < q:
                a = m
            else:
                b = m
        edges.append(0.5 * (a + b))
    counts, _ = np.histogram(v, bins=[-np.inf, *edges, np.inf])
    expected = n / bins
    stat = float(((counts - expected) ** 2 / expected).sum())
    return stat, float(chi2_dist.sf(stat, bins - 1))


@dataclass
class TestReport:
    """JSON-serializable record of one statistical check."""

    name: str
    statistic: float
    p_value: Optional[float] = None
    n: Optional[int] = None
    tolerance: Optional[float] = None
    passed: bool = False
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        rec = {
            "test": self.name,
            "statistic": self.statistic,
            "p": self.p_value,
            "n": self.n,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }
        rec.update(self.extra)
        return json.dumps(rec)
