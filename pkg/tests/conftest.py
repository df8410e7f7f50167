"""Shared test oracles.

Everything here is deliberately independent of the package implementation
paths it is used to check: the Gamma values come from a local Lanczos
implementation, the n = 2 expectation from a symbolic Wick expansion over the
explicit Bernoulli patterns, and the semicircle CDF from direct quadrature of
the density.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

# ---------------------------------------------------------------------------
# Independent Gamma (Lanczos, g = 7, 9 coefficients)
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_C = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]


def lanczos_gamma(x: float) -> float:
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


# ---------------------------------------------------------------------------
# Exact n = 2 expectation of det(M - l1) det(M - l2)
# ---------------------------------------------------------------------------

def wick_f2_n2(p: float, l1: float, l2: float) -> float:
    """Closed form from the moment identities E d^2 = 1/2, E d^4 = 1/(2p),
    E w^2 = 1, E |w_off|^4 = 2 at n = 2 (derived by Wick expansion)."""
    return (0.5 + l1 * l2) ** 2 - (l1**2 + l2**2) / 2.0 + 1.0 / p


def wick_f2_n2_enumeration(p: float, l1: float, l2: float) -> float:
    """The same expectation by brute force: average over the 8 Bernoulli
    patterns of (d11, d12, d22) of the symbolic Gaussian expectation."""
    import sympy as sp

    w11, w22, B = sp.symbols("w11 w22 B")  # B stands for |w12|^2
    total = sp.Integer(0)
    q = sp.nsimplify(p) / 2  # edge probability p/n at n = 2
    dval = 1 / sp.sqrt(sp.nsimplify(p))
    for b11 in (0, 1):
        for b12 in (0, 1):
            for b22 in (0, 1):
                prob = (
                    (q if b11 else 1 - q)
                    * (q if b12 else 1 - q)
                    * (q if b22 else 1 - q)
                )
                d11 = dval * b11
                d12 = dval * b12
                d22 = dval * b22
                det1 = (d11 * w11 - l1) * (d22 * w22 - l1) - d12**2 * B
                det2 = (d11 * w11 - l2) * (d22 * w22 - l2) - d12**2 * B
                poly = sp.Poly(sp.expand(det1 * det2), w11, w22, B)
                ev = sp.Integer(0)
                gauss = {0: 1, 1: 0, 2: 1, 3: 0, 4: 3}
                b_mom = {0: 1, 1: 1, 2: 2}
                for monom, coef in poly.terms():
                    e11, e22, eb = monom
                    ev += coef * gauss[e11] * gauss[e22] * b_mom[eb]
                total += prob * ev
    return float(total)


# ---------------------------------------------------------------------------
# Semicircle CDF by quadrature of the density
# ---------------------------------------------------------------------------

def semicircle_cdf(points: np.ndarray) -> np.ndarray:
    grid = np.linspace(-2.0, 2.0, 40001)
    dens = np.sqrt(np.clip(4.0 - grid**2, 0.0, None)) / (2.0 * math.pi)
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
    cum /= cum[-1]
    return np.interp(points, grid, cum, left=0.0, right=1.0)


# ---------------------------------------------------------------------------
# Richardson extrapolated epsilon limits (first order in eps)
# ---------------------------------------------------------------------------

def richardson_limit(f, eps: float) -> float:
    """lim_{e->0} f(e) assuming f(e) = L + c1 e + c2 e^2 + ...."""
    return 2.0 * f(eps / 2.0) - f(eps)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.Philox(key=[987654321, 0]))
