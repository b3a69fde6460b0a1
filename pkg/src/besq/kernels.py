"""Closed-form transition densities, non-collision probabilities and entrance laws.

All determinant ratios are evaluated as exp of log-det differences with
per-row scaling extracted before LU factorization: the matrix entries span
hundreds of orders of magnitude for large times or drifts, so nothing here
multiplies raw Bessel values together.

Coinciding drift coordinates are not supported numerically except for the
all-zero spectrum, which is a distinguished flag on :class:`DriftSpectrum`
and dispatches to the Vandermonde (zero-drift) forms.  Callers with nearly
tied spectra should perturb the ties; the densities move by at most about
10x the relative perturbation at interior points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diffspec import BesselParams, DiffusionSpec
from .errors import DomainError, OrderingError, SingularDenominatorError
from .specfun import log_gamma, log_iv_norm, log_phi

__all__ = [
    "ChamberPoint",
    "DriftSpectrum",
    "besq_density",
    "log_besq_density",
    "conditioned_density",
    "conditioned_density_many",
    "laguerre_density",
    "noncollision_prob",
    "conditioned_density_generic",
    "entrance_density",
    "entrance_density_many",
]

_LOG_UNDERFLOW = math.log(1e-300)


def as_chamber(x) -> np.ndarray:
    """Validate strictly increasing positive coordinates."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise OrderingError("chamber point must be non-empty")
    if not (x > 0.0).all():
        raise OrderingError(f"chamber coordinates must be positive, got {x}")
    if x.size > 1 and not (np.diff(x) > 0.0).all():
        raise OrderingError(f"chamber coordinates must be strictly increasing, got {x}")
    return x


@dataclass(frozen=True)
class ChamberPoint:
    """Strictly ordered positive coordinate vector."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", as_chamber(self.coords))

    def __len__(self):
        return self.coords.size


@dataclass(frozen=True)
class DriftSpectrum:
    """Ordered generalized-drift parameters mu (eigenvalues of M* M).

    The all-zero spectrum is a distinguished flag (``DriftSpectrum.zero(n)``),
    never a vector of ties.
    """

    mu: np.ndarray | None
    size: int = field(default=0)

    def __post_init__(self):
        if self.mu is not None:
            mu = np.asarray(self.mu, dtype=float).ravel()
            if mu.size == 0:
                raise OrderingError("drift spectrum must be non-empty")
            if not (mu >= 0.0).all():
                raise OrderingError(f"drift parameters must be >= 0, got {mu}")
            if mu.size > 1 and not (np.diff(mu) > 0.0).all():
                raise OrderingError(f"drift parameters must be strictly increasing, got {mu}")
            object.__setattr__(self, "mu", mu)
            object.__setattr__(self, "size", mu.size)
        elif self.size < 1:
            raise OrderingError("degenerate spectrum needs an explicit size")

    @classmethod
    def zero(cls, n: int) -> "DriftSpectrum":
        return cls(mu=None, size=n)

    @property
    def degenerate(self) -> bool:
        return self.mu is None

    @property
    def lambdas(self) -> np.ndarray:
        if self.mu is None:
            return np.zeros(self.size)
        return self.mu / 2.0


def slogdet_from_logs(logmat: np.ndarray) -> tuple[float, float]:
    """(sign, log|det|) of a matrix given entrywise logs, with per-row scaling.

    Raises if the scaled determinant underflows below 1e-300 (the input is
    numerically collided).
    """
    L = np.asarray(logmat, dtype=float)
    n = L.shape[0]
    if n == 1:
        v = float(L[0, 0])
        if v == -np.inf:
            return 0.0, -np.inf
        return 1.0, v
    r = L.max(axis=1)
    if not np.isfinite(r).all():
        bad = ~np.isfinite(r)
        if (r[bad] == -np.inf).all():
            return 0.0, -np.inf
        raise DomainError("non-finite log entries in determinant")
    if n == 2:
        d = math.exp(L[0, 0] - r[0] + L[1, 1] - r[1]) - math.exp(L[0, 1] - r[0] + L[1, 0] - r[1])
        if d == 0.0 or abs(d) < 1e-300:
            raise SingularDenominatorError(
                "scaled determinant underflowed below 1e-300; input too close to collided"
            )
        return math.copysign(1.0, d), math.log(abs(d)) + float(r.sum())
    sign, logdet = np.linalg.slogdet(np.exp(L - r[:, None]))
    if sign == 0.0 or logdet < _LOG_UNDERFLOW:
        raise SingularDenominatorError(
            "scaled determinant underflowed below 1e-300; input too close to collided"
        )
    return float(sign), float(logdet + r.sum())


def log_vandermonde(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return 0.0
    diffs = x[None, :] - x[:, None]
    return float(np.log(diffs[np.triu_indices(x.size, k=1)]).sum())


def log_besq_density(params: BesselParams, t: float, x: float, y) -> float | np.ndarray:
    """log q_t(x, y) of the squared Bessel transition density; x = 0 gives the entrance limit."""
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    nu = params.nu
    yy = np.asarray(y, dtype=float)
    if (yy <= 0.0).any():
        raise DomainError("besq_density requires y > 0")
    x = float(x)
    if x < 0.0:
        raise DomainError("besq_density requires x >= 0")
    two_t = 2.0 * t
    u = x * yy / (two_t * two_t)
    if u.ndim == 0:
        u = float(u)
    out = nu * np.log(yy / two_t) - math.log(two_t) - (x + yy) / two_t + log_iv_norm(nu, u)
    if np.ndim(y) == 0:
        return float(out)
    return out


def besq_density(params: BesselParams, t: float, x: float, y):
    """q_t(x, y) = (1/2t) (y/x)^{nu/2} e^{-(x+y)/2t} I_nu(sqrt(xy)/t)."""
    return np.exp(log_besq_density(params, t, x, y))


def _log_phi_matrix(nu: float, lambdas: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return np.array([[log_phi(nu, lam, p) for p in pts] for lam in lambdas])


def _log_q_matrix(params: BesselParams, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.array([log_besq_density(params, t, xi, y) for xi in x])


def conditioned_density(
    params: BesselParams, mu: DriftSpectrum, t: float, x, y
) -> float:
    """Transition density of drifted non-colliding squared Bessel coordinates.

    exp(-sum mu_i t / 2) det(phi_{mu_i/2}(y_j)) / det(phi_{mu_i/2}(x_j))
    times the Karlin-McGregor determinant det(q_t(x_i, y_j)).  The zero
    spectrum dispatches to :func:`laguerre_density`.
    """
    x = as_chamber(x)
    y = as_chamber(y)
    if mu.degenerate:
        return laguerre_density(params, t, x, y)
    if mu.size != x.size or x.size != y.size:
        raise OrderingError("mu, x, y must have matching lengths")
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    nu = params.nu
    lam = mu.lambdas
    s_y, ld_y = slogdet_from_logs(_log_phi_matrix(nu, lam, y))
    s_x, ld_x = slogdet_from_logs(_log_phi_matrix(nu, lam, x))
    s_q, ld_q = slogdet_from_logs(_log_q_matrix(params, t, x, y))
    log_val = -0.5 * float(mu.mu.sum()) * t + ld_y - ld_x + ld_q
    return s_y * s_x * s_q * math.exp(log_val)


def laguerre_density(params: BesselParams, t: float, x, y) -> float:
    """Zero-drift kernel: Vandermonde ratio times the Karlin-McGregor determinant."""
    x = as_chamber(x)
    y = as_chamber(y)
    if x.size != y.size:
        raise OrderingError("x and y must have matching lengths")
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    s_q, ld_q = slogdet_from_logs(_log_q_matrix(params, t, x, y))
    return s_q * math.exp(log_vandermonde(y) - log_vandermonde(x) + ld_q)


def noncollision_prob(spec: DiffusionSpec, lambdas, x) -> float:
    """P(no collision ever) = det(psi_{lam_i}(x_j)) / prod_i psi_{lam_i}(x_i)."""
    x = as_chamber(x)
    lambdas = np.asarray(lambdas, dtype=float).ravel()
    if lambdas.size != x.size:
        raise OrderingError("lambdas and x must have matching lengths")
    if lambdas.size > 1 and not (np.diff(lambdas) > 0.0).all():
        raise OrderingError("lambdas must be strictly increasing")
    L = np.array([[spec.log_psi_eval(lam, xi) for xi in x] for lam in lambdas])
    s, ld = slogdet_from_logs(L)
    val = s * math.exp(ld - float(np.trace(L)))
    if val > 1.0 + 1e-10:
        raise DomainError(f"non-collision probability {val} exceeds 1 beyond tolerance")
    return min(val, 1.0)


def conditioned_density_generic(
    spec: DiffusionSpec, p_t, lambdas, t: float, x, y
) -> float:
    """General-diffusion analogue of :func:`conditioned_density`.

    ``p_t(x_i, y_j)`` is the one-dimensional transition density of the base
    diffusion.  Inaccessible-boundary and asymptotic-ordering conditions on a
    user-supplied spec are caller obligations.
    """
    x = as_chamber(x)
    y = as_chamber(y)
    lambdas = np.asarray(lambdas, dtype=float).ravel()
    if not (lambdas.size == x.size == y.size):
        raise OrderingError("lambdas, x, y must have matching lengths")
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    Ly = np.array([[spec.log_psi_eval(lam, yi) for yi in y] for lam in lambdas])
    Lx = np.array([[spec.log_psi_eval(lam, xi) for xi in x] for lam in lambdas])
    Lq = np.log(np.array([[float(p_t(xi, yj)) for yj in y] for xi in x]))
    s_y, ld_y = slogdet_from_logs(Ly)
    s_x, ld_x = slogdet_from_logs(Lx)
    s_q, ld_q = slogdet_from_logs(Lq)
    return s_y * s_x * s_q * math.exp(-t * lambdas.sum() + ld_y - ld_x + ld_q)


def _slogdet_from_logs_batch(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched (sign, log|det|) for log-entry matrices of shape (B, n, n)."""
    r = L.max(axis=2)
    sign, ld = np.linalg.slogdet(np.exp(L - r[..., None]))
    return sign, ld + r.sum(axis=1)


def conditioned_density_many(
    params: BesselParams, mu: DriftSpectrum, t: float, x, ys: np.ndarray
) -> np.ndarray:
    """Vectorized :func:`conditioned_density` over a batch of chamber points ys (B, N)."""
    x = as_chamber(x)
    ys = np.asarray(ys, dtype=float)
    B, N = ys.shape
    if x.size != N:
        raise OrderingError("x and ys must have matching widths")
    nu = params.nu
    Lq = np.empty((B, N, N))
    for i in range(N):
        for j in range(N):
            Lq[:, i, j] = log_besq_density(params, t, float(x[i]), ys[:, j])
    s_q, ld_q = _slogdet_from_logs_batch(Lq)
    if mu.degenerate:
        lv = np.zeros(B)
        for i in range(N):
            for j in range(i + 1, N):
                lv += np.log(ys[:, j] - ys[:, i])
        return s_q * np.exp(lv - log_vandermonde(x) + ld_q)
    lam = mu.lambdas
    Lp = np.empty((B, N, N))
    for i in range(N):
        for j in range(N):
            Lp[:, i, j] = log_phi(nu, float(lam[i]), ys[:, j])
    s_p, ld_p = _slogdet_from_logs_batch(Lp)
    s_x, ld_x = slogdet_from_logs(_log_phi_matrix(nu, lam, x))
    return s_q * s_p * s_x * np.exp(-0.5 * float(mu.mu.sum()) * t + ld_p - ld_x + ld_q)


def entrance_density_many(
    params: BesselParams, mu: DriftSpectrum, t: float, ys: np.ndarray
) -> np.ndarray:
    """Vectorized :func:`entrance_density` over a batch of chamber points ys (B, N)."""
    ys = np.asarray(ys, dtype=float)
    B, N = ys.shape
    if mu.size != N:
        raise OrderingError("mu and ys must have matching widths")
    nu = params.nu
    two_t = 2.0 * t
    w = ys / two_t
    log_colfac = (nu * np.log(w) - ys / two_t - math.log(two_t)).sum(axis=1)
    log_rowfac = float((-math.log(two_t) * np.arange(N)).sum())
    P = np.empty((B, N, N))
    for i in range(N):
        for k in range(i + 1):
            coef = math.comb(i, k) * (-1.0) ** (i - k) / math.gamma(nu + k + 1.0)
            if k == 0:
                P[:, i, :] = coef
            else:
                P[:, i, :] += coef * w**k
    s_num, ld_p = np.linalg.slogdet(P)
    ld_num = ld_p + log_colfac + log_rowfac
    if mu.degenerate:
        lv = np.zeros(B)
        for i in range(N):
            for j in range(i + 1, N):
                lv += np.log(ys[:, j] - ys[:, i])
        log_norm = sum(math.lgamma(k + 1.0) for k in range(1, N))
        return s_num * np.exp(lv + ld_num - log_norm)
    lam = mu.lambdas
    ld_den = log_vandermonde(mu.mu) - sum(
        log_gamma(i + nu) + (2.0 * (i - 1.0) + nu) * math.log(2.0) for i in range(1, N + 1)
    )
    Lp = np.empty((B, N, N))
    for i in range(N):
        for j in range(N):
            Lp[:, i, j] = log_phi(nu, float(lam[i]), ys[:, j])
    s_p, ld_p2 = _slogdet_from_logs_batch(Lp)
    return s_num * s_p * np.exp(-float(lam.sum()) * t + ld_num - ld_den + ld_p2)


def _entrance_poly_table(nu: float, N: int, w: np.ndarray) -> np.ndarray:
    """Rows i = 0..N-1 of p_i(w) = sum_{k<=i} C(i,k) (-1)^{i-k} w^k / Gamma(nu+k+1)."""
    out = np.empty((N, w.size))
    for i in range(N):
        acc = np.zeros_like(w)
        for k in range(i + 1):
            coef = math.comb(i, k) * (-1.0) ** (i - k) / math.gamma(nu + k + 1.0)
            acc += coef * w**k
        out[i] = acc
    return out


def entrance_density(params: BesselParams, mu: DriftSpectrum, t: float, y) -> float:
    """Density of the process entering from the origin, at time t > 0.

    Built from the exact derivative recursion d/dx q_t^{(nu)} =
    (q_t^{(nu+1)} - q_t^{(nu)}) / 2t expanded at x = 0, so the numerator
    matrix reduces to polynomials in y_j/(2t) times a common column factor.
    """
    y = as_chamber(y)
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    N = y.size
    nu = params.nu
    two_t = 2.0 * t
    w = y / two_t
    # column factor y^nu e^{-y/2t} / (2t)^{nu+1} and (2t)^{-(i-1)} row factors
    log_colfac = nu * np.log(w) - y / two_t - math.log(two_t)
    log_rowfac = -math.log(two_t) * np.arange(N)
    P = _entrance_poly_table(nu, N, w)
    s_num, ld_p = np.linalg.slogdet(P)
    if s_num == 0.0:
        raise SingularDenominatorError("entrance numerator determinant vanished")
    ld_num = ld_p + log_colfac.sum() + log_rowfac.sum()

    if mu.degenerate:
        # Vandermonde limit of the drift construction
        if mu.size != N:
            raise OrderingError("mu and y must have matching lengths")
        log_norm = sum(math.lgamma(k + 1.0) for k in range(1, N))
        return s_num * math.exp(log_vandermonde(y) + ld_num - log_norm)

    if mu.size != N:
        raise OrderingError("mu and y must have matching lengths")
    lam = mu.lambdas
    # denominator det( mu_j^{i-1} / (Gamma(i+nu) 2^{2(i-1)+nu}) )
    ld_den = log_vandermonde(mu.mu) - sum(
        log_gamma(i + nu) + (2.0 * (i - 1.0) + nu) * math.log(2.0) for i in range(1, N + 1)
    )
    s_psi, ld_psi = slogdet_from_logs(_log_phi_matrix(nu, lam, y))
    log_val = -float(lam.sum()) * t + ld_num - ld_den + ld_psi
    return s_num * s_psi * math.exp(log_val)
