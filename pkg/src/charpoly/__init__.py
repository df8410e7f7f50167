"""charpoly: correlation functions of characteristic polynomials of sparse
weighted random matrices.

Subpackages and modules:
  ensemble     matrix law, sampling substreams, coupling constants
  detkit       log-domain determinants and Monte Carlo estimation
  intrep       deterministic quadrature of the exact order-1 representation
  saddle       stationary-point landscape, contour bound, root solves
  asymptotics  closed-form limits (sinc, factorized, Airy edge, S_hat_2m)
  algebra      Grassmann/exterior machinery and the unitary-integral check
  kernels      numba-accelerated hot loops with a numpy fallback
  cli          command-line interface
"""

__version__ = "0.1.0"

SPEC_VERSION = 1  # schema tag carried in every output file

from . import algebra, asymptotics, detkit, ensemble, intrep, kernels, saddle

__all__ = [
    "algebra",
    "asymptotics",
    "detkit",
    "ensemble",
    "intrep",
    "kernels",
    "saddle",
    "SPEC_VERSION",
    "__version__",
]
