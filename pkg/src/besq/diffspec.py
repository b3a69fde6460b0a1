"""Generic one-dimensional diffusion descriptions and the squared Bessel instance.

A :class:`DiffusionSpec` packages the generator coefficients together with the
strictly positive increasing eigenfunctions ``psi_lam`` and the scale/speed
densities relative to a reference point ``c``.  Two transformations act on
specs: the Doob transform by ``psi_lam`` (adds the generalized drift) and the
dual (drift ``a' - b``, swaps entrance/exit behaviour at 0).

Only the squared Bessel family ships as a concrete instance; a user-supplied
spec must bring its own eigenfunctions.  Boundary-classification conditions on
user specs cannot be machine-checked and remain caller obligations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .specfun import log_phi, phi, phi_log_deriv

__all__ = ["BesselParams", "DiffusionSpec", "besq_spec", "doob_of", "dual_of"]


@dataclass(frozen=True)
class BesselParams:
    """Squared Bessel dimension delta >= 2; index nu = delta/2 - 1."""

    delta: float

    def __post_init__(self):
        if not (self.delta >= 2.0):
            raise DomainError(f"delta must be >= 2 (entrance boundary at 0), got {self.delta}")

    @property
    def nu(self) -> float:
        return self.delta / 2.0 - 1.0


@dataclass(frozen=True)
class DiffusionSpec:
    """One-dimensional diffusion on (0, inf) with eigenfunction and scale/speed data.

    ``a`` is the diffusion coefficient (positive on the open interval), ``b``
    the drift, ``psi(lam, x)`` a strictly positive increasing eigenfunction
    with eigenvalue lam, ``psi_log_deriv`` its logarithmic derivative in x.
    ``speed_density * a * scale_density == 1`` pointwise.
    """

    a: Callable
    b: Callable
    psi: Optional[Callable]
    psi_log_deriv: Optional[Callable]
    speed_density: Callable
    scale_density: Callable
    ref_point: float
    a_prime: Optional[Callable] = None
    log_psi: Optional[Callable] = None

    def log_psi_eval(self, lam, x):
        if self.log_psi is not None:
            return self.log_psi(lam, x)
        if self.psi is None:
            raise DomainError("spec has no eigenfunction data")
        return np.log(self.psi(lam, x))


def besq_spec(params: BesselParams, ref_point: float = 1.0) -> DiffusionSpec:
    """Spec of the squared Bessel diffusion: a(x) = 2x, b(x) = delta.

    Eigenfunctions are phi_lam with index nu; scale and speed densities are
    the closed forms s'(x) = (c/x)^{delta/2}, m(x) = x^{delta/2-1} / (2 c^{delta/2}).
    """
    if ref_point <= 0.0:
        raise DomainError(f"ref_point must be positive, got {ref_point}")
    delta = float(params.delta)
    nu = params.nu
    c = float(ref_point)
    half = delta / 2.0

    return DiffusionSpec(
        a=lambda x: 2.0 * np.asarray(x, dtype=float),
        b=lambda x: np.full_like(np.asarray(x, dtype=float), delta),
        psi=lambda lam, x: phi(nu, lam, x),
        psi_log_deriv=lambda lam, x: phi_log_deriv(nu, lam, x),
        speed_density=lambda x: np.asarray(x, dtype=float) ** (half - 1.0) / (2.0 * c**half),
        scale_density=lambda x: (c / np.asarray(x, dtype=float)) ** half,
        ref_point=c,
        a_prime=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
        log_psi=lambda lam, x: log_phi(nu, lam, x),
    )


def doob_of(spec: DiffusionSpec, lam: float) -> DiffusionSpec:
    """Doob transform by psi_lam: drift gains 2 a psi'/psi, speed density gains psi^2.

    lam = 0 returns the spec unchanged.  The transformed eigenfunctions are
    psi_{lam+kappa}/psi_lam (eigenvalue kappa); their normalization is
    arbitrary and chosen so kappa = 0 gives the constant 1.
    """
    lam = float(lam)
    if lam < 0.0:
        raise DomainError(f"lam must be >= 0, got {lam}")
    if lam == 0.0:
        return spec
    if spec.psi is None or spec.psi_log_deriv is None:
        raise DomainError("doob_of needs eigenfunction data on the spec")
    c = spec.ref_point
    psi_c = spec.psi(lam, c)

    def b_new(x):
        return spec.b(x) + 2.0 * spec.a(x) * spec.psi_log_deriv(lam, x)

    def speed_new(x):
        return spec.psi(lam, x) ** 2 * spec.speed_density(x) / psi_c**2

    def scale_new(x):
        return spec.scale_density(x) * psi_c**2 / spec.psi(lam, x) ** 2

    def psi_new(kappa, x):
        return spec.psi(lam + kappa, x) / spec.psi(lam, x)

    def psi_log_deriv_new(kappa, x):
        return spec.psi_log_deriv(lam + kappa, x) - spec.psi_log_deriv(lam, x)

    def log_psi_new(kappa, x):
        return spec.log_psi_eval(lam + kappa, x) - spec.log_psi_eval(lam, x)

    return replace(
        spec,
        b=b_new,
        psi=psi_new,
        psi_log_deriv=psi_log_deriv_new,
        speed_density=speed_new,
        scale_density=scale_new,
        log_psi=log_psi_new,
    )


def dual_of(spec: DiffusionSpec) -> DiffusionSpec:
    """Dual diffusion: drift a'(x) - b(x); entrance and exit at 0 swap roles.

    Scale and speed follow s_hat'(x) = a(c) m(x) and m_hat(x) = s'(x) / a(c).
    The dual carries no increasing eigenfunction data.
    """
    if spec.a_prime is None:
        raise DomainError("dual_of needs an analytic derivative a_prime on the spec")
    a_c = float(spec.a(spec.ref_point))

    def b_hat(x):
        return spec.a_prime(x) - spec.b(x)

    def scale_hat(x):
        return a_c * spec.speed_density(x)

    def speed_hat(x):
        return spec.scale_density(x) / a_c

    return replace(
        spec,
        b=b_hat,
        psi=None,
        psi_log_deriv=None,
        speed_density=speed_hat,
        scale_density=scale_hat,
        log_psi=None,
    )
