"""Modified Bessel functions of the first kind and derived quantities.

Everything downstream (transition kernels, determinants, SDE drifts) is built
on four primitives: ``besseli`` / ``besseli_scaled``, the eigenfunction-type
series ``phi``, the drift ratio ``bessel_ratio`` and ``log_gamma``.  All of
them accept scalars or numpy arrays and are safe to call concurrently.

The kernel layer multiplies many Bessel factors together, so log-scaled
companions (``log_besseli``, ``log_phi``, ``log_iv_norm``) are the real
workhorses; the plain functions just exponentiate them.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "besseli",
    "besseli_scaled",
    "log_besseli",
    "phi",
    "log_phi",
    "phi_log_deriv",
    "bessel_ratio",
    "log_gamma",
    "log_iv_norm",
]

# Series/asymptotic switchover for besseli.  25 is right for small orders; for
# nu beyond ~3.5 the large-argument expansion cannot reach 1e-12 at x=25, so
# the boundary grows with the order (big-order arguments fall back to a
# log-domain series around the peak term).
_SWITCH = 25.0


def _asym_min(nu: float) -> float:
    return max(_SWITCH, 1.4 * nu * nu + 20.0)


def _check_order(nu) -> float:
    """Resolve the order: nu >= 0 passes through, negative integers reflect."""
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError(f"Bessel order must be finite, got {nu}")
    if nu < 0.0:
        n = round(nu)
        if abs(nu - n) > 1e-9:
            raise DomainError(f"negative non-integer order {nu} not supported")
        nu = -float(n)
    return nu


# ---------------------------------------------------------------------------
# scalar paths (hot inside adaptive quadrature)
# ---------------------------------------------------------------------------

def _log_iv_series_scalar(nu: float, x: float) -> float:
    # I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_m t_m,  t_0 = 1
    q = 0.25 * x * x
    s = 1.0
    t = 1.0
    for m in range(200):
        t *= q / ((m + 1.0) * (m + nu + 1.0))
        s += t
        if t < 1e-17 * s:
            break
    return nu * math.log(0.5 * x) - math.lgamma(nu + 1.0) + math.log(s)


def _hankel_sum_scalar(nu: float, x: float) -> float:
    # sum of the large-argument expansion; truncated at the smallest term
    mu = 4.0 * nu * nu
    s = 1.0
    u = 1.0
    prev = math.inf
    for k in range(1, 30):
        u *= -(mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        au = abs(u)
        if au >= prev:
            break
        s += u
        prev = au
        if au < 1e-17:
            break
    return s


def _log_iv_bigorder_scalar(nu: float, x: float) -> float:
    # log-domain series around the peak term; covers large x with large order
    half = 0.5 * x
    mstar = 0.5 * (math.sqrt(nu * nu + x * x) - nu)
    lo = max(0, int(mstar - 9.0 * math.sqrt(mstar + 1.0) - 20.0))
    hi = int(mstar + 9.0 * math.sqrt(mstar + 1.0) + 30.0)
    m = np.arange(lo, hi + 1, dtype=float)
    logt = (2.0 * m + nu) * math.log(half) - _lgamma_arr(m + 1.0) - _lgamma_arr(m + nu + 1.0)
    top = logt.max()
    return top + math.log(np.exp(logt - top).sum())


def _log_besseli_scalar(nu: float, x: float) -> float:
    if x == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    if x <= _SWITCH:
        return _log_iv_series_scalar(nu, x)
    if x >= _asym_min(nu):
        return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(_hankel_sum_scalar(nu, x))
    return _log_iv_bigorder_scalar(nu, x)


def _log_iv_norm_scalar(nu: float, u: float) -> float:
    # log sum_m u^m / (m! Gamma(m+nu+1)); continuous down to u = 0
    if u <= 156.25:  # matches the z = 2 sqrt(u) <= 25 series regime
        s = 1.0
        t = 1.0
        for m in range(200):
            t *= u / ((m + 1.0) * (m + nu + 1.0))
            s += t
            if t < 1e-17 * s:
                break
        return math.log(s) - math.lgamma(nu + 1.0)
    z = 2.0 * math.sqrt(u)
    return _log_besseli_scalar(nu, z) - 0.5 * nu * math.log(u)


# ---------------------------------------------------------------------------
# array paths
# ---------------------------------------------------------------------------

def _lgamma_arr(x):
    from scipy.special import gammaln

    return gammaln(x)


def _series_terms_needed(umax: float) -> int:
    return min(200, int(22 + 3.0 * math.sqrt(max(umax, 0.0))))


def _log_iv_series_arr(nu: float, x: np.ndarray) -> np.ndarray:
    q = 0.25 * x * x
    s = np.ones_like(x)
    t = np.ones_like(x)
    nterms = _series_terms_needed(float(q.max(initial=0.0)))
    for m in range(nterms):
        t = t * (q / ((m + 1.0) * (m + nu + 1.0)))
        s += t
    return nu * np.log(0.5 * x) - math.lgamma(nu + 1.0) + np.log(s)


def _hankel_sum_arr(nu: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    s = np.ones_like(x)
    u = np.ones_like(x)
    live = np.ones_like(x, dtype=bool)
    prev = np.full_like(x, np.inf)
    for k in range(1, 30):
        u = u * (-(mu - (2.0 * k - 1.0) ** 2) / (8.0 * k) / x)
        au = np.abs(u)
        live = live & (au < prev)
        s = np.where(live, s + u, s)
        prev = au
        if not live.any() or float(au[live].max(initial=0.0)) < 1e-17:
            break
    return s


def _log_besseli_arr(nu: float, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    zero = x == 0.0
    small = (~zero) & (x <= _SWITCH)
    big = (~zero) & (x >= _asym_min(nu))
    mid = ~(zero | small | big)
    out[zero] = 0.0 if nu == 0.0 else -np.inf
    if small.any():
        out[small] = _log_iv_series_arr(nu, x[small])
    if big.any():
        xb = x[big]
        out[big] = xb - 0.5 * np.log(2.0 * np.pi * xb) + np.log(_hankel_sum_arr(nu, xb))
    if mid.any():
        out[mid] = [_log_iv_bigorder_scalar(nu, float(v)) for v in x[mid]]
    return out


def _log_iv_norm_arr(nu: float, u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    small = u <= 156.25
    if small.any():
        us = u[small]
        s = np.ones_like(us)
        t = np.ones_like(us)
        nterms = _series_terms_needed(float(us.max(initial=0.0)))
        for m in range(nterms):
            t = t * (us / ((m + 1.0) * (m + nu + 1.0)))
            s += t
        out[small] = np.log(s) - math.lgamma(nu + 1.0)
    if (~small).any():
        ub = u[~small]
        z = 2.0 * np.sqrt(ub)
        out[~small] = _log_besseli_arr(nu, z) - 0.5 * nu * np.log(ub)
    return out


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------

def log_besseli(nu, x):
    """log I_nu(x) for x >= 0; negative integer orders resolve by reflection."""
    nu = _check_order(nu)
    if np.isscalar(x) or np.ndim(x) == 0:
        x = float(x)
        if x < 0.0:
            raise DomainError(f"besseli requires x >= 0, got {x}")
        return _log_besseli_scalar(nu, x)
    x = np.asarray(x, dtype=float)
    if (x < 0.0).any():
        raise DomainError("besseli requires x >= 0")
    if x.size <= 8:
        return np.array([_log_besseli_scalar(nu, v) for v in x.ravel()]).reshape(x.shape)
    return _log_besseli_arr(nu, x)


def besseli(nu, x):
    """Modified Bessel function I_nu(x).

    Overflows past x ~ 709; large-argument callers should use
    :func:`besseli_scaled` instead.
    """
    return np.exp(log_besseli(nu, x))


def besseli_scaled(nu, x):
    """e^{-x} I_nu(x), finite for all x >= 0."""
    return np.exp(log_besseli(nu, x) - np.asarray(x, dtype=float))


def log_iv_norm(nu, u):
    """log of sum_m u^m / (m! Gamma(m+nu+1)) = log( u^{-nu/2} I_nu(2 sqrt(u)) ).

    Smooth down to u = 0 where the value is -log Gamma(nu+1).  This is the
    shared core of ``phi`` and of the squared Bessel transition density.
    """
    nu = _check_order(nu)
    if np.isscalar(u) or np.ndim(u) == 0:
        u = float(u)
        if u < 0.0:
            raise DomainError(f"log_iv_norm requires u >= 0, got {u}")
        return _log_iv_norm_scalar(nu, u)
    u = np.asarray(u, dtype=float)
    if (u < 0.0).any():
        raise DomainError("log_iv_norm requires u >= 0")
    if u.size <= 8:
        return np.array([_log_iv_norm_scalar(nu, v) for v in u.ravel()]).reshape(u.shape)
    return _log_iv_norm_arr(nu, u)


def log_phi(nu, lam, x):
    """log of phi_lam(x) = (2 lam x)^{-nu/2} I_nu( sqrt(2 lam x) ).

    Continuous at lam = 0 and x = 0 with value -nu log 2 - log Gamma(nu+1).
    """
    if (np.isscalar(lam) or np.ndim(lam) == 0) and (np.isscalar(x) or np.ndim(x) == 0):
        lam = float(lam)
        xf = float(x)
        if lam < 0.0 or xf < 0.0:
            raise DomainError("phi requires lam >= 0 and x >= 0")
        nu = _check_order(nu)
        return -nu * math.log(2.0) + _log_iv_norm_scalar(nu, lam * xf * 0.5)
    lam = np.asarray(lam, dtype=float)
    xx = np.asarray(x, dtype=float)
    if (lam < 0.0).any() or (xx < 0.0).any():
        raise DomainError("phi requires lam >= 0 and x >= 0")
    u = lam * xx * 0.5
    return -float(_check_order(nu)) * math.log(2.0) + log_iv_norm(nu, u)


def phi(nu, lam, x):
    """Series sum_m (lam x)^m / (m! Gamma(m+nu+1) 2^{m+nu}); positive increasing in x."""
    return np.exp(log_phi(nu, lam, x))


def phi_log_deriv(nu, lam, x):
    """d/dx log phi_lam(x) = (lam/2) * ivnorm(nu+1, lam x/2) / ivnorm(nu, lam x/2)."""
    nu = _check_order(nu)
    lam = np.asarray(lam, dtype=float)
    xx = np.asarray(x, dtype=float)
    u = lam * xx * 0.5
    if u.ndim == 0:
        u = float(u)
    return 0.5 * lam * np.exp(log_iv_norm(nu + 1.0, u) - log_iv_norm(nu, u))


def _ratio_backward_scalar(nu: float, z: float, depth: int) -> float:
    r = 0.0
    for k in range(depth, 0, -1):
        r = 1.0 / (2.0 * (nu + k) / z + r)
    return r


def _ratio_backward_arr(nu: float, z: np.ndarray, depth: int) -> np.ndarray:
    r = np.zeros_like(z)
    for k in range(depth, 0, -1):
        r = 1.0 / (2.0 * (nu + k) / z + r)
    return r


def bessel_ratio(nu, z):
    """I_{nu+1}(z) / I_nu(z) for z >= 0; equals 0 at z = 0 and lies in [0, 1).

    Backward (Miller-style) recurrence below the asymptotic regime -- the
    direct quotient loses digits near 0 -- and a quotient of large-argument
    expansions beyond it.
    """
    nu = _check_order(nu)
    scalar = np.isscalar(z) or np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    if (z < 0.0).any():
        raise DomainError("bessel_ratio requires z >= 0")
    zf = np.atleast_1d(z)
    out = np.zeros_like(zf)
    pos = zf > 0.0
    asym = pos & (zf >= _asym_min(nu + 1.0))
    rec = pos & ~asym
    if rec.any():
        zr = zf[rec]
        depth = int(zr.max()) + 40
        out[rec] = _ratio_backward_arr(nu, zr, depth)
    if asym.any():
        za = zf[asym]
        out[asym] = _hankel_sum_arr(nu + 1.0, za) / _hankel_sum_arr(nu, za)
    if scalar:
        return float(out[0])
    return out.reshape(z.shape)


def log_gamma(x):
    """log Gamma(x) for x > 0."""
    if np.isscalar(x) or np.ndim(x) == 0:
        x = float(x)
        if x <= 0.0:
            raise DomainError(f"log_gamma requires x > 0, got {x}")
        return math.lgamma(x)
    x = np.asarray(x, dtype=float)
    if (x <= 0.0).any():
        raise DomainError("log_gamma requires x > 0")
    return _lgamma_arr(x)
