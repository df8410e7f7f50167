"""Closed-form limit predictors: threshold radius, bulk sinc and outside
factorization, finite-n exponent formulas, crossover scaling classes, the
Airy function and kernel, edge ratios, and the determinant ratio S_hat_2m.

All F_2 predictions are returned as LogSignedValue since their magnitudes are
exp(O(n)).  Formulas stated in the positive-b2 convention consume |b2| (see
the note in the saddle module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import coupling_constants
from .logdomain import LogSignedValue
from .saddle import RegimeError, solve_alpha

__all__ = [
    "AiryValue",
    "CrossoverClass",
    "lambda_star",
    "rho_sc",
    "d2_bulk_limit",
    "d2_outside_limit",
    "f2_bulk_asymptotic",
    "f2_outside_asymptotic",
    "crossover_scale",
    "crossover_normalization_log",
    "airy",
    "airy_kernel",
    "d2_edge_limit",
    "d2_edge_sparse_limit",
    "s_hat_2m",
    "vandermonde",
    "sinc",
]

AIRY_RANGE = 25.0
# Series/asymptotics switch points.  On the positive side 6.0 leaves both
# methods agreeing to better than 1e-10 on the overlap window [5, 7].  On the
# negative side the oscillatory expansion has O(1) amplitude, so its optimal
# truncation error e^(-4|x|^1.5/3) only reaches 1e-10 beyond |x| ~ 7; the
# series stays below 1e-11 up to 7.5 and hands over there.
_AIRY_SWITCH_POS = 6.0
_AIRY_SWITCH_NEG = -7.5

# Airy values at zero: Ai(0) = 3^(-2/3)/Gamma(2/3), Ai'(0) = -3^(-1/3)/Gamma(1/3)
_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)


def lambda_star(p: float) -> float:
    """Threshold radius sqrt(4 - 8/p) for p > 2, zero for p <= 2."""
    if p <= 0:
        raise ValueError("p must be positive")
    if p <= 2.0:
        return 0.0
    return math.sqrt(4.0 - 8.0 / p)


def rho_sc(lam: float) -> float:
    """Semicircle density (1/2pi) sqrt(4 - lam^2) on [-2, 2], zero outside."""
    if abs(lam) >= 2.0:
        return 0.0
    return math.sqrt(4.0 - lam * lam) / (2.0 * math.pi)


def sinc(z: float) -> float:
    """sin(z)/z with the analytic value 1 at z = 0."""
    if z == 0.0:
        return 1.0
    return math.sin(z) / z


def _b2_magnitude(n: int, p: float) -> float:
    return abs(coupling_constants(n, p, 1).b2_repr)


def d2_bulk_limit(lambda0: float, x1: float, x2: float, p: float) -> float:
    """Limit of D_2 for |lambda0| < lambda_star(p):
    sinc((x1-x2) sqrt(lambda_star^2 - lambda0^2) / 2)."""
    ls = lambda_star(p)
    if abs(lambda0) >= ls:
        raise RegimeError(
            f"|lambda0|={abs(lambda0)} is not inside (0, lambda_star={ls}); "
            "use d2_outside_limit"
        )
    return sinc((x1 - x2) * math.sqrt(ls * ls - lambda0 * lambda0) / 2.0)


def d2_outside_limit(lambda0: float, p: float) -> float:
    """Limit of D_2 for lambda0 outside the threshold interval: exactly 1."""
    ls = lambda_star(p)
    if abs(lambda0) < ls:
        raise RegimeError(
            f"|lambda0|={abs(lambda0)} is inside the bulk window (lambda_star={ls})"
        )
    return 1.0


def f2_bulk_asymptotic(
    n: int, p: float, lambda0: float, x1: float, x2: float
) -> LogSignedValue:
    """Finite-n bulk prediction
    2n exp(n(lambda0^2 + b2^2 - 2)/2 + lambda0(x1+x2)/2) sin((x1-x2)c/2)/(x1-x2)
    with c = sqrt(4 - 4 b2^2 - lambda0^2) and b2 = b2(n, p)."""
    b2sq = _b2_magnitude(n, p) ** 2
    disc = 4.0 - 4.0 * b2sq - lambda0 * lambda0
    if disc <= 0:
        raise RegimeError("bulk prediction requires lambda0^2 < 4 - 4 b2^2")
    c = math.sqrt(disc)
    osc = 0.5 * c * sinc((x1 - x2) * c / 2.0)
    exponent = n * (lambda0**2 + b2sq - 2.0) / 2.0 + lambda0 * (x1 + x2) / 2.0
    val = LogSignedValue.from_real(2.0 * n * osc)
    return LogSignedValue(val.phase, val.log_magnitude + exponent)


def f2_outside_asymptotic(
    n: int, p: float, lambda0: float, x1: float, x2: float
) -> LogSignedValue:
    """Finite-n outside prediction.

    lambda0 != 0:
      alpha^2 exp(n A_hat + (1-alpha) lambda0 (x1+x2))
        / ((2 alpha - 1)^(3/2) (2 - alpha(1-alpha)(3-2 alpha) lambda0^2)^(1/2))
    lambda0 = 0 (requires |b2| > 1):
      |b2|^n exp(-n/2) |b2|^2 (|b2|^2-1)^(-3/2) (|b2|+1 + (-1)^n (|b2|-1))
    """
    b2m = _b2_magnitude(n, p)
    if lambda0 == 0.0:
        if b2m <= 1.0:
            raise RegimeError("lambda0 = 0 outside regime requires |b2| > 1")
        pref = b2m**2 / (b2m**2 - 1.0) ** 1.5 * (b2m + 1.0 + (-1.0) ** n * (b2m - 1.0))
        val = LogSignedValue.from_real(pref)
        return LogSignedValue(
            val.phase, val.log_magnitude + n * math.log(b2m) - n / 2.0
        )
    sol = solve_alpha(b2m, lambda0)  # raises RegimeError inside the bulk window
    al = sol.alpha
    denom = (2 * al - 1) ** 1.5 * math.sqrt(
        2.0 - al * (1 - al) * (3 - 2 * al) * lambda0**2
    )
    val = LogSignedValue.from_real(al**2 / denom)
    exponent = n * sol.a_hat + (1 - al) * lambda0 * (x1 + x2)
    return LogSignedValue(val.phase, val.log_magnitude + exponent)


def crossover_normalization_log(
    n: int, p: float, delta: float, x1: float, x2: float
) -> float:
    """log of the crossover reference scale
    exp(n(2 - 3 b2^2 - delta)/2 + lambda0(x1+x2)/2) at
    lambda0 = sqrt(4 - 4 b2^2 - delta)."""
    b2sq = _b2_magnitude(n, p) ** 2
    lam0 = math.sqrt(4.0 - 4.0 * b2sq - delta)
    return n * (2.0 - 3.0 * b2sq - delta) / 2.0 + lam0 * (x1 + x2) / 2.0


@dataclass(frozen=True)
class CrossoverClass:
    branch: int            # 1, 2, or 3
    label: str
    n_exponent: float      # growth exponent of Y_n in n (NaN if not a power law)
    absolute: bool         # branch 1 carries no unspecified constant

    def y_log_values(self, n_values, delta_values):
        """log Y_n up to the branch constant (exact for branch 1)."""
        n_values = np.asarray(n_values, dtype=float)
        deltas = np.asarray(delta_values, dtype=float)
        if self.branch == 1:
            return np.log(n_values) + 0.5 * np.log(deltas)
        if self.branch == 2:
            return 0.75 * np.log(n_values)
        return -1.5 * np.log(-deltas)


def crossover_scale(n_values, delta_values, growth_exponent_tol: float = 0.25
                    ) -> CrossoverClass:
    """Classify a sequence delta_n into the three crossover branches.

    Comparison rule: fit q = d log(n delta_n^2) / d log n over the supplied
    sequence; |q| <= growth_exponent_tol means n delta_n^2 -> const (branch 2),
    otherwise the sign of delta selects branch 1 (positive) or 3 (negative).
    Only scaling exponents are predicted; the absolute constants of branches
    2 and 3 are not specified.
    """
    n_values = np.asarray(n_values, dtype=float)
    deltas = np.asarray(delta_values, dtype=float)
    if n_values.size < 2:
        raise ValueError("need at least two sequence points to classify")
    if not (np.all(deltas > 0) or np.all(deltas < 0)):
        raise ValueError("delta sequence must have a constant sign")
    q = np.polyfit(np.log(n_values), np.log(n_values * deltas**2), 1)[0]
    ln_n = np.log(n_values)
    if abs(q) <= growth_exponent_tol:
        return CrossoverClass(2, "n^(3/4) up to a constant", 0.75, False)
    if deltas[0] > 0:
        expo = float(np.polyfit(ln_n, np.log(n_values * np.sqrt(deltas)), 1)[0])
        return CrossoverClass(1, "n delta^(1/2)", expo, True)
    expo = float(np.polyfit(ln_n, -1.5 * np.log(-deltas), 1)[0])
    return CrossoverClass(3, "(-delta)^(-3/2) up to a constant", expo, False)


# ---------------------------------------------------------------------------
# Airy function: Maclaurin series for |x| <= 6, asymptotic expansions beyond.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AiryValue:
    x: float
    ai: float
    ai_prime: float


def _airy_series(x: float):
    """Ai and Ai' from the two standard series solutions of w'' = x w.

    f = sum 3^k (1/3)_k x^(3k) / (3k)!, g = sum 3^k (2/3)_k x^(3k+1) / (3k+1)!
    combined with the exact x = 0 constants.  Converges fast for |x| <= 8.
    """
    f_term = 1.0
    g_term = x
    f = f_term
    g = g_term
    fp = 0.0
    gp = 1.0
    x3 = x * x * x
    for k in range(80):
        f_next = f_term * x3 / ((3 * k + 2) * (3 * k + 3))
        g_next = g_term * x3 / ((3 * k + 3) * (3 * k + 4))
        f += f_next
        g += g_next
        fp += f_next * (3 * k + 3) / x if x != 0.0 else 0.0
        gp += g_next * (3 * k + 4) / x if x != 0.0 else 0.0
        f_term, g_term = f_next, g_next
        if abs(f_next) < 1e-18 * abs(f) and abs(g_next) < 1e-18 * max(abs(g), 1e-300):
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return ai, aip


def _asymptotic_u_coeffs(count: int):
    u = [1.0]
    v = [1.0]
    for k in range(1, count):
        u.append(u[k - 1] * (6 * k - 5) * (6 * k - 1) / (72.0 * k))
        v.append(u[k] * (6 * k + 1) / (1.0 - 6 * k))
    return u, v


_U_COEF, _V_COEF = _asymptotic_u_coeffs(40)


def _sum_asymptotic(zeta: float, coeffs, signs: int):
    """sum coeffs[k] * signs^k / zeta^k truncated at the smallest term."""
    total = 0.0
    prev = math.inf
    term_pow = 1.0
    for k, c in enumerate(coeffs):
        term = c * term_pow
        if abs(term) > prev:
            break
        total += term if (signs > 0 or k % 2 == 0) else -term
        prev = abs(term)
        term_pow /= zeta
        if prev < 1e-18:
            break
    return total


def _airy_asymptotic_pos(x: float):
    zeta = 2.0 / 3.0 * x**1.5
    pre = math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x**0.25)
    ai = pre * _sum_asymptotic(zeta, _U_COEF, signs=-1)
    aip = -(x**0.25) * math.exp(-zeta) / (2.0 * math.sqrt(math.pi)) * _sum_asymptotic(
        zeta, _V_COEF, signs=-1
    )
    return ai, aip


def _alternating_tail(coeffs, zeta: float, offset: int):
    """sum_k (-1)^k coeffs[k] / zeta^(2k + offset), stopped at the smallest term."""
    total = 0.0
    prev = math.inf
    for k, c in enumerate(coeffs):
        term = c / zeta ** (2 * k + offset)
        if abs(term) > prev:
            break
        total += (-1.0) ** k * term
        prev = abs(term)
        if prev < 1e-18:
            break
    return total


def _airy_asymptotic_neg(x: float):
    z = -x
    zeta = 2.0 / 3.0 * z**1.5
    arg = zeta + math.pi / 4.0
    s_even_u = _alternating_tail(_U_COEF[0::2], zeta, 0)
    s_odd_u = _alternating_tail(_U_COEF[1::2], zeta, 1)
    s_even_v = _alternating_tail(_V_COEF[0::2], zeta, 0)
    s_odd_v = _alternating_tail(_V_COEF[1::2], zeta, 1)
    pre = 1.0 / (math.sqrt(math.pi) * z**0.25)
    ai = pre * (math.sin(arg) * s_even_u - math.cos(arg) * s_odd_u)
    aip = -(z**0.25) / math.sqrt(math.pi) * (
        math.cos(arg) * s_even_v + math.sin(arg) * s_odd_v
    )
    return ai, aip


def airy(x: float) -> AiryValue:
    """Ai(x) and Ai'(x) on |x| <= 25, absolute accuracy target 1e-10.

    Maclaurin series for |x| <= 6; the exponential (x > 6) and oscillatory
    (x < -6) asymptotic expansions beyond, truncated at their smallest term.
    Both methods agree to 1e-10 in the overlap windows around |x| = 6.
    """
    if abs(x) > AIRY_RANGE:
        raise ValueError(f"airy implemented for |x| <= {AIRY_RANGE}, got {x}")
    if _AIRY_SWITCH_NEG <= x <= _AIRY_SWITCH_POS:
        ai, aip = _airy_series(x)
    elif x > 0:
        ai, aip = _airy_asymptotic_pos(x)
    else:
        ai, aip = _airy_asymptotic_neg(x)
    return AiryValue(x=x, ai=ai, ai_prime=aip)


def airy_kernel(x: float, y: float) -> float:
    """(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y); on the diagonal the confluent
    value Ai'(x)^2 - x Ai(x)^2 (a consequence of Ai'' = x Ai)."""
    ax = airy(x)
    if x == y:
        return ax.ai_prime**2 - x * ax.ai**2
    ay = airy(y)
    return (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (x - y)


def d2_edge_limit(x1: float, x2: float, c: float = 0.0) -> float:
    """Edge limit of D_2(2I + n^(-2/3) X) when n^(2/3)/p -> c >= 0:
    A(x1+2c, x2+2c) / sqrt(A(x1+2c, x1+2c) A(x2+2c, x2+2c))."""
    if c < 0:
        raise ValueError("c must be >= 0")
    num = airy_kernel(x1 + 2 * c, x2 + 2 * c)
    d1 = airy_kernel(x1 + 2 * c, x1 + 2 * c)
    d2 = airy_kernel(x2 + 2 * c, x2 + 2 * c)
    return num / math.sqrt(d1 * d2)


def d2_edge_sparse_limit() -> float:
    """Edge limit when n^(2/3)/p -> infinity: D_2 -> 1."""
    return 1.0


# ---------------------------------------------------------------------------
# S_hat_2m: sine-kernel determinant over Vandermonde products, with divided
# difference (confluent) rows and columns at coinciding offsets.
# ---------------------------------------------------------------------------

def vandermonde(values) -> float:
    """prod_{j<k} (y_k - y_j); the empty and singleton products are 1."""
    values = list(values)
    out = 1.0
    for j in range(len(values)):
        for k in range(j + 1, len(values)):
            out *= values[k] - values[j]
    return out


def _sinc_derivatives(z: float, kmax: int) -> np.ndarray:
    """d^k/dz^k of sin(z)/z for k = 0..kmax.

    Taylor form sum_a (-1)^a z^(2a) / (2a+1)! differentiated termwise for
    |z| < 1, Leibniz on sin(z) * z^(-1) otherwise.
    """
    out = np.zeros(kmax + 1)
    if abs(z) < 1.0:
        for k in range(kmax + 1):
            acc = 0.0
            for a in range((k + 1) // 2, (k + 1) // 2 + 30):
                power = 2 * a - k
                coef = (-1.0) ** a / math.factorial(2 * a + 1)
                fall = math.perm(2 * a, k)
                acc += coef * fall * z**power
            out[k] = acc
        return out
    sin_cycle = [math.sin(z), math.cos(z), -math.sin(z), -math.cos(z)]
    for k in range(kmax + 1):
        acc = 0.0
        for j in range(k + 1):
            dsin = sin_cycle[j % 4]
            dinv = (-1.0) ** (k - j) * math.factorial(k - j) / z ** (k - j + 1)
            acc += math.comb(k, j) * dsin * dinv
        out[k] = acc
    return out


def _cluster(values, tol: float = 0.0):
    """Group exactly equal values of a sorted list into [value, count] runs."""
    reps = []
    for v in values:
        if reps and abs(v - reps[-1][0]) <= tol:
            reps[-1][1] += 1
        else:
            reps.append([v, 1])
    return reps


def s_hat_2m(offsets, lambda0: float) -> float:
    """Determinant ratio
    det{ sinc(pi rho(x_j - x_{m+k})) } / (Delta(x_1..x_m) Delta(x_{m+1}..x_2m)).

    Coinciding offsets within either half are evaluated confluently: a run of
    g equal values contributes rows (or columns) holding the 0..g-1-th
    derivatives of the kernel divided by the factorials, and the matching
    Vandermonde keeps only the factors between distinct values.  Requires
    |lambda0| < 2 so the density is positive.
    """
    if abs(lambda0) >= 2.0:
        raise RegimeError("s_hat_2m requires |lambda0| < 2")
    xs = [float(v) for v in offsets]
    if len(xs) % 2 != 0:
        raise ValueError("need an even number of offsets")
    m = len(xs) // 2
    rho = math.pi * rho_sc(lambda0)
    left = sorted(xs[:m])
    right = sorted(xs[m:])
    lreps = _cluster(left)
    rreps = _cluster(right)
    # row j carries derivative order a_j in u, column k order c_k in v, of
    # K(u, v) = sinc(rho (u - v)): d_u^a d_v^c K = rho^(a+c) (-1)^c S^(a+c)
    rows = []
    for (u, gsize) in [(r[0], r[1]) for r in lreps]:
        for a in range(gsize):
            row = []
            for (v, hsize) in [(r[0], r[1]) for r in rreps]:
                ders = _sinc_derivatives(rho * (u - v), a + hsize - 1)
                for c in range(hsize):
                    entry = (
                        rho ** (a + c)
                        * (-1.0) ** c
                        * ders[a + c]
                        / (math.factorial(a) * math.factorial(c))
                    )
                    row.append(entry)
            rows.append(row)
    matrix = np.array(rows)
    det = float(np.linalg.det(matrix)) if m > 0 else 1.0

    def confluent_vd(reps):
        out = 1.0
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                out *= (reps[j][0] - reps[i][0]) ** (reps[i][1] * reps[j][1])
        return out

    return det / (confluent_vd(lreps) * confluent_vd(rreps))
