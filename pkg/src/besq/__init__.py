"""Toolkit for non-colliding squared Bessel diffusions with generalized drifts.

Three equivalent descriptions of the same Markov process are implemented and
cross-validated against each other:

* eigenvalues of a drifted complex matrix Brownian motion (:mod:`besq.matproc`),
* independent Bessel-type diffusions conditioned to never collide, with exact
  determinantal kernels (:mod:`besq.kernels`),
* interacting reflected diffusions on an interlacing half array
  (:mod:`besq.sde`, :mod:`besq.gibbs`).
"""

from .diffspec import BesselParams, DiffusionSpec, besq_spec, doob_of, dual_of

__version__ = "0.1.0"

__all__ = [
    "BesselParams",
    "DiffusionSpec",
    "besq_spec",
    "doob_of",
    "dual_of",
    "__version__",
]
