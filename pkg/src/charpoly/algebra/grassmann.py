"""Sign-exact Grassmann (anticommuting) polynomial arithmetic.

Generators come in N conjugate pairs (bar_1, psi_1, ..., bar_N, psi_N).  A
monomial is a bitmask over 2N positions in the canonical interleaved order
bar_1 < psi_1 < bar_2 < psi_2 < ...; every product sign is the parity of the
transpositions needed to merge two masks into that order.  This is the single
pinned convention; the measure ordering of the Berezin integral (the product
of d(bar_j) d(psi_j) in increasing j) maps onto it as one global factor
(-1)^N, applied in berezin_integrate_full and nowhere else.

Coefficients are complex; elements are sparse dicts keyed by mask.  Intended
for brute-force verification at N <= 12 generators per kind, not production.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GrassmannElement",
    "psi",
    "psi_bar",
    "scalar",
    "grassmann_multiply",
    "grassmann_exp",
    "berezin_integrate_full",
    "hubbard_stratonovich_check",
    "hubbard_stratonovich_grassmann_check",
    "MAX_GENERATOR_PAIRS",
]

MAX_GENERATOR_PAIRS = 12


def _merge_sign(m1: int, m2: int) -> int:
    """Parity sign of merging monomial m2 past m1 into canonical order.

    For each generator bit in m2, count how many set bits of m1 lie strictly
    above it; the total parity is the sign.
    """
    sign = 1
    higher = m1
    b = 0
    mm = m2
    while mm:
        if mm & 1:
            if (higher >> (b + 1)).bit_count() & 1:
                sign = -sign
        mm >>= 1
        b += 1
    return sign


@dataclass
class GrassmannElement:
    """Sparse polynomial in 2N anticommuting generators."""

    n_pairs: int
    coeff: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.n_pairs <= MAX_GENERATOR_PAIRS:
            raise ValueError(
                f"generator pair count must be in [1, {MAX_GENERATOR_PAIRS}]"
            )

    def copy(self) -> "GrassmannElement":
        return GrassmannElement(self.n_pairs, dict(self.coeff))

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = scalar(self.n_pairs, other)
        if other.n_pairs != self.n_pairs:
            raise ValueError("mismatched generator counts")
        out = dict(self.coeff)
        for mask, c in other.coeff.items():
            new = out.get(mask, 0.0) + c
            if new == 0:
                out.pop(mask, None)
            else:
                out[mask] = new
        return GrassmannElement(self.n_pairs, out)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = scalar(self.n_pairs, other)
        return self + (other * (-1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            if other == 0:
                return GrassmannElement(self.n_pairs, {})
            return GrassmannElement(
                self.n_pairs, {m: c * other for m, c in self.coeff.items()}
            )
        return grassmann_multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.__mul__(other)
        return grassmann_multiply(other, self)

    def scalar_part(self) -> complex:
        return self.coeff.get(0, 0.0)

    def coefficient(self, mask: int) -> complex:
        return self.coeff.get(mask, 0.0)

    def is_zero(self) -> bool:
        return not self.coeff

    def parity_split(self):
        """(even, odd) grading by total generator count."""
        even = {m: c for m, c in self.coeff.items() if m.bit_count() % 2 == 0}
        odd = {m: c for m, c in self.coeff.items() if m.bit_count() % 2 == 1}
        return (
            GrassmannElement(self.n_pairs, even),
            GrassmannElement(self.n_pairs, odd),
        )


def _bit_bar(j: int) -> int:
    return 1 << (2 * (j - 1))


def _bit_psi(j: int) -> int:
    return 1 << (2 * (j - 1) + 1)


def psi(n_pairs: int, j: int) -> GrassmannElement:
    """The generator psi_j, 1-indexed."""
    if not 1 <= j <= n_pairs:
        raise ValueError(f"generator index {j} out of range")
    return GrassmannElement(n_pairs, {_bit_psi(j): 1.0})


def psi_bar(n_pairs: int, j: int) -> GrassmannElement:
    """The conjugate generator bar(psi)_j, 1-indexed."""
    if not 1 <= j <= n_pairs:
        raise ValueError(f"generator index {j} out of range")
    return GrassmannElement(n_pairs, {_bit_bar(j): 1.0})


def scalar(n_pairs: int, value: complex) -> GrassmannElement:
    if value == 0:
        return GrassmannElement(n_pairs, {})
    return GrassmannElement(n_pairs, {0: value})


def grassmann_multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Sign-exact product; monomials sharing a generator annihilate."""
    if a.n_pairs != b.n_pairs:
        raise ValueError("mismatched generator counts")
    out: dict = {}
    for m1, c1 in a.coeff.items():
        for m2, c2 in b.coeff.items():
            if m1 & m2:
                continue
            sign = _merge_sign(m1, m2)
            mask = m1 | m2
            new = out.get(mask, 0.0) + sign * c1 * c2
            if new == 0:
                out.pop(mask, None)
            else:
                out[mask] = new
    return GrassmannElement(a.n_pairs, out)


def grassmann_exp(x: GrassmannElement) -> GrassmannElement:
    """exp of an element: e^c times the terminating series of the nilpotent part."""
    c0 = x.scalar_part()
    nil = x - c0
    result = scalar(x.n_pairs, 1.0)
    power = scalar(x.n_pairs, 1.0)
    for k in range(1, 2 * x.n_pairs + 1):
        power = grassmann_multiply(power, nil)
        if power.is_zero():
            break
        result = result + power * (1.0 / math.factorial(k))
    if c0 != 0:
        result = result * complex(np.exp(c0))
    return result


def berezin_integrate_full(e: GrassmannElement) -> complex:
    """Integral against the measure prod_j d(bar_j) d(psi_j).

    Reversing that differential string into the canonical generator order
    costs (2N choose 2) transpositions, with parity (-1)^N; the integral is
    therefore (-1)^N times the coefficient of the full monomial
    bar_1 psi_1 ... bar_N psi_N.  With this convention the Gaussian identity
    integral(exp(-sum bar_j A_jk psi_k)) = det A holds exactly.
    """
    full = (1 << (2 * e.n_pairs)) - 1
    return (-1.0) ** e.n_pairs * e.coefficient(full)


def bilinear_form(n_pairs: int, matrix: np.ndarray) -> GrassmannElement:
    """sum_jk bar_j A_jk psi_k for an n x n matrix A."""
    a = np.asarray(matrix)
    if a.shape != (n_pairs, n_pairs):
        raise ValueError("matrix shape must match the generator count")
    out: dict = {}
    for j in range(1, n_pairs + 1):
        for k in range(1, n_pairs + 1):
            c = complex(a[j - 1, k - 1])
            if c == 0:
                continue
            mask = _bit_bar(j) | _bit_psi(k)
            sign = _merge_sign(_bit_bar(j), _bit_psi(k))
            out[mask] = out.get(mask, 0.0) + sign * c
    return GrassmannElement(n_pairs, out)


def hubbard_stratonovich_check(y: complex, a: float, nodes: int = 96) -> float:
    """|e^{y^2} - (a/sqrt(pi)) Int e^{2axy - a^2 x^2} dx| by Gauss-Hermite.

    Substituting u = a x reduces the right side to the standard weight
    e^{-u^2}; the identity holds for any complex y and positive a.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    u, w = np.polynomial.hermite.hermgauss(nodes)
    rhs = (w * np.exp(2.0 * u * y)).sum() / math.sqrt(math.pi)
    return abs(np.exp(y * y) - rhs)


def hubbard_stratonovich_grassmann_check(y: GrassmannElement, a: float) -> float:
    """Even-argument version, verified by exact Gaussian moments.

    Expands (a/sqrt(pi)) Int e^{2axy} e^{-a^2x^2} dx term by term: odd moments
    vanish and Int x^{2j} contributes (2j-1)!!/(2a^2)^j, so the right side is
    sum_j y^{2j}/j! which must reproduce e^{y^2} coefficient by coefficient.
    Returns the largest coefficient deviation.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    even, odd = y.parity_split()
    if not odd.is_zero():
        raise ValueError("the squared-argument identity needs an even element")
    lhs = grassmann_exp(grassmann_multiply(y, y))
    rhs = scalar(y.n_pairs, 1.0)
    y_power = scalar(y.n_pairs, 1.0)
    for j in range(1, 2 * y.n_pairs + 1):
        y_power = grassmann_multiply(y_power, grassmann_multiply(y, y))
        if y_power.is_zero():
            break
        # (2a)^(2j) * (2j-1)!! / ((2a^2)^j * (2j)!) = 1/j!
        rhs = rhs + y_power * (1.0 / math.factorial(j))
    diff = lhs - rhs
    if diff.is_zero():
        return 0.0
    return max(abs(c) for c in diff.coeff.values())
