"""Stationary-point landscape of the order-1 exponent f.

Contains the contour bound function h_alpha with its randomized verifier, the
outside-regime root solve for alpha, the stationary points of f with analytic
Hessians, and the edge parameterization beta.

Sign convention: h_alpha and the verifier accept any real b2 (the bound holds
for all of them).  The outside-regime and edge formulas are stated for
positive b2 in closed form; they consume |b2|, which is documented here once
and applies everywhere below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "LandscapePoint",
    "SaddlePoint",
    "OutsideRegimeSolution",
    "EdgeParameters",
    "Lemma2Report",
    "RegimeError",
    "h_alpha",
    "h_alpha_bound",
    "verify_lemma2",
    "equality_family_points",
    "solve_alpha",
    "stationary_points_m1",
    "edge_parameters",
    "f_gradient",
    "f_hessian",
]

_DEGENERATE_TOL = 1e-12


class RegimeError(ValueError):
    """Parameters violate the regime hypothesis of the requested formula."""


@dataclass(frozen=True)
class LandscapePoint:
    t1: float
    t2: float
    s: float
    b2: float
    lambda0: float
    alpha: float

    def __post_init__(self):
        if not 0.5 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [1/2, 1), got {self.alpha}")


@dataclass(frozen=True)
class SaddlePoint:
    t1: complex
    t2: complex
    s: float
    f_value: complex
    hessian: np.ndarray
    classification: str  # bulk_pair | outside | edge
    gradient_residual: float


@dataclass(frozen=True)
class OutsideRegimeSolution:
    alpha: float
    a_hat: float
    beta: float


@dataclass(frozen=True)
class EdgeParameters:
    beta: float
    b2_magnitude: float


@dataclass
class Lemma2Report:
    samples: int
    violations: int
    max_gap: float                 # largest h_alpha - bound seen (<= 0 expected)
    equality_gaps: dict            # family name -> worst |h - bound| on the grid
    perturbation_min_drop: float   # smallest strict decrease under perturbation
    passed: bool


def h_alpha(point: LandscapePoint) -> float:
    """(1/2)(log A - t1^2 - t2^2 - s^2 - d^2 - 2 a(1-a) l0^2) with
    A = (b2 s - t1 t2 + a^2 l0^2)^2 + a^2 l0^2 (t1+t2)^2 and d = b2(1-a)/a.

    Total on the reals: A = 0 returns -inf.
    """
    t1, t2, s, b2, l0, al = (
        point.t1, point.t2, point.s, point.b2, point.lambda0, point.alpha,
    )
    a_quad = (b2 * s - t1 * t2 + al**2 * l0**2) ** 2 + al**2 * l0**2 * (t1 + t2) ** 2
    if a_quad == 0.0:
        return -math.inf
    return 0.5 * (
        math.log(a_quad)
        - t1**2
        - t2**2
        - s**2
        - ((1 - al) / al) ** 2 * b2**2
        - 2 * al * (1 - al) * l0**2
    )


def h_alpha_bound(alpha: float) -> float:
    """The sharp upper bound (1/2) log (alpha/(1-alpha))^2 - 1."""
    return 0.5 * math.log((alpha / (1 - alpha)) ** 2) - 1.0


def equality_family_points(grid: int = 10):
    """Representative points of the four equality families of the bound.

    Yields (family, LandscapePoint) pairs.  Families:
      a: alpha=1/2, t1=-t2=+-sqrt(4-4b2^2-l0^2)/2, s=b2
      b: alpha=1/2, t1=t2=+-sqrt(4-4b2^2-l0^2)/2, s=-b2, b2*l0=0
      c: t1=t2=0, s=b2(1-a)/a, a(1-a)l0^2 + ((1-a)/a)^2 b2^2 = 1
      d: t1=t2=0, s=-b2(1-a)/a, b2=+-a/(1-a), l0=0
    """
    b2s = np.linspace(-0.9, 0.9, grid)
    l0s = np.linspace(-1.5, 1.5, grid)
    for b2 in b2s:
        for l0 in l0s:
            disc = 4 - 4 * b2**2 - l0**2
            if disc <= 0:
                continue
            t = math.sqrt(disc) / 2
            for sign in (1.0, -1.0):
                yield "a", LandscapePoint(sign * t, -sign * t, b2, b2, l0, 0.5)
    for b2 in b2s:
        disc = 4 - 4 * b2**2
        t = math.sqrt(disc) / 2
        for sign in (1.0, -1.0):
            yield "b", LandscapePoint(sign * t, sign * t, -b2, b2, 0.0, 0.5)
    for l0 in l0s:
        if abs(l0) >= 2.0 or l0 == 0.0:
            continue
        t = math.sqrt(4 - l0**2) / 2
        for sign in (1.0, -1.0):
            yield "b", LandscapePoint(sign * t, sign * t, 0.0, 0.0, l0, 0.5)
    for al in np.linspace(0.55, 0.95, grid):
        for b2 in b2s:
            rest = 1.0 - ((1 - al) / al) ** 2 * b2**2
            if rest <= 0:
                continue
            l0 = math.sqrt(rest / (al * (1 - al)))
            yield "c", LandscapePoint(0.0, 0.0, b2 * (1 - al) / al, b2, l0, al)
    for al in np.linspace(0.55, 0.95, grid):
        for sign in (1.0, -1.0):
            b2 = sign * al / (1 - al)
            yield "d", LandscapePoint(0.0, 0.0, -b2 * (1 - al) / al, b2, 0.0, al)


def verify_lemma2(
    sample_count: int = 1_000_000,
    box: float = 3.0,
    seed: int = 20240,
    alpha_range: tuple = (0.5, 0.99),
    violation_tol: float = 1e-12,
    equality_tol: float = 1e-10,
    perturbation: float = 1e-3,
    grid: int = 10,
    batch: int = 250_000,
) -> Lemma2Report:
    """Randomized and structured verification of the contour bound.

    Random points are drawn in deterministic per-batch substreams and checked
    for h_alpha <= bound + violation_tol.  Each equality family is then
    instantiated on a parameter grid, required to meet the bound to
    equality_tol, and required to drop strictly below it after a random
    perturbation of size `perturbation`.
    """
    violations = 0
    max_gap = -math.inf
    done = 0
    batch_index = 0
    while done < sample_count:
        count = min(batch, sample_count - done)
        rng = np.random.Generator(np.random.Philox(key=[seed, batch_index]))
        rows = np.empty((count, 6))
        rows[:, :3] = rng.uniform(-box, box, size=(count, 3))      # t1 t2 s
        rows[:, 3] = rng.uniform(-box, box, size=count)            # b2
        rows[:, 4] = rng.uniform(-box, box, size=count)            # lambda0
        rows[:, 5] = rng.uniform(alpha_range[0], alpha_range[1], size=count)
        gaps = kernels.lemma2_scan(rows)
        finite = gaps[np.isfinite(gaps)]
        if finite.size:
            max_gap = max(max_gap, float(finite.max()))
        violations += int((gaps > violation_tol).sum())
        done += count
        batch_index += 1

    rng = np.random.Generator(np.random.Philox(key=[seed, 2**32]))
    equality_gaps: dict = {}
    min_drop = math.inf
    for family, pt in equality_family_points(grid):
        bound = h_alpha_bound(pt.alpha)
        gap = abs(h_alpha(pt) - bound)
        equality_gaps[family] = max(equality_gaps.get(family, 0.0), gap)
        direction = rng.standard_normal(5)
        direction /= np.linalg.norm(direction)
        moved = LandscapePoint(
            pt.t1 + perturbation * direction[0],
            pt.t2 + perturbation * direction[1],
            pt.s + perturbation * direction[2],
            pt.b2 + perturbation * direction[3],
            pt.lambda0 + perturbation * direction[4],
            pt.alpha,
        )
        min_drop = min(min_drop, bound - h_alpha(moved))
    passed = (
        violations == 0
        and all(g <= equality_tol for g in equality_gaps.values())
        and min_drop > 0.0
    )
    return Lemma2Report(
        samples=sample_count,
        violations=violations,
        max_gap=max_gap,
        equality_gaps=equality_gaps,
        perturbation_min_drop=min_drop,
        passed=passed,
    )


def solve_alpha(b2: float, lambda0: float) -> OutsideRegimeSolution:
    """Root of a(1-a) l0^2 + ((1-a)/a)^2 b2^2 = 1 on (1/2, 1) by bisection.

    The left side is monotone decreasing in alpha, positive at 1/2 exactly
    when l0^2/4 + b2^2 > 1 (the outside regime), and -1 at alpha -> 1, so
    bisection cannot fail.  Also returns A_hat, the exponent value at the
    outside stationary point, and beta = 2 alpha - 1.
    """
    b2sq = b2 * b2
    l0sq = lambda0 * lambda0
    if l0sq / 4.0 + b2sq <= 1.0:
        raise RegimeError(
            f"lambda0^2/4 + b2^2 = {l0sq/4 + b2sq:.6f} <= 1: inside the bulk window"
        )

    def g(a: float) -> float:
        return a * (1 - a) * l0sq + ((1 - a) / a) ** 2 * b2sq - 1.0

    lo, hi = 0.5, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    alpha = 0.5 * (lo + hi)
    a_hat = (
        0.5 * ((1 - alpha) / alpha) ** 2 * b2sq
        + (1 - alpha) * l0sq
        + math.log(alpha / (1 - alpha))
        - 1.0
    )
    return OutsideRegimeSolution(alpha=alpha, a_hat=a_hat, beta=2 * alpha - 1)


def f_gradient(t1: complex, t2: complex, s: complex, b2: float, lambda0: float):
    """Analytic gradient of f in (t1, t2, s)."""
    a = b2 * s - t1 * t2
    return np.array(
        [
            -t2 / a - (t1 + 1j * lambda0),
            -t1 / a - (t2 + 1j * lambda0),
            b2 / a - s,
        ]
    )


def f_hessian(t1: complex, t2: complex, s: complex, b2: float, lambda0: float):
    """Analytic Hessian of f in (t1, t2, s)."""
    a = b2 * s - t1 * t2
    return np.array(
        [
            [-(t2 / a) ** 2 - 1.0, -1.0 / a - t1 * t2 / a**2, b2 * t2 / a**2],
            [-1.0 / a - t1 * t2 / a**2, -(t1 / a) ** 2 - 1.0, b2 * t1 / a**2],
            [b2 * t2 / a**2, b2 * t1 / a**2, -((b2 / a) ** 2) - 1.0],
        ]
    )


def _f(t1, t2, s, b2, lambda0):
    return (
        np.log(b2 * s - t1 * t2)
        - 0.5 * ((t1 + 1j * lambda0) ** 2 + (t2 + 1j * lambda0) ** 2 + s**2)
    )


def _make_saddle(t1, t2, s, b2, lambda0, classification) -> SaddlePoint:
    res = float(np.abs(f_gradient(t1, t2, s, b2, lambda0)).max())
    if res > 1e-10:
        raise RuntimeError(
            f"stationary point residual {res:.2e} above 1e-10 at "
            f"({t1}, {t2}, {s}); classification {classification}"
        )
    return SaddlePoint(
        t1=t1,
        t2=t2,
        s=s,
        f_value=complex(_f(t1, t2, s, b2, lambda0)),
        hessian=f_hessian(t1, t2, s, b2, lambda0),
        classification=classification,
        gradient_residual=res,
    )


def stationary_points_m1(b2: float, lambda0: float):
    """Stationary points of f for the order-1 representation.

    Bulk regime (4 - 4 b2^2 - lambda0^2 > 0): the pair
    (t_eta - i lambda0/2, t_nu - i lambda0/2, b2) with
    t_eta = +-sqrt(4 - 4b2^2 - lambda0^2)/2, eta != nu.  At lambda0 = 0 the
    equal-sign points (t, t, -b2) are stationary as well and are included.
    Outside regime: the single point (-i a l0, -i a l0, b2(1-a)/a) with |b2|.
    At the regime boundary the coincident pair is returned as 'edge'.
    """
    disc = 4.0 - 4.0 * b2 * b2 - lambda0 * lambda0
    points = []
    if disc > _DEGENERATE_TOL:
        t_star = math.sqrt(disc) / 2.0
        shift = -0.5j * lambda0
        for eta, nu in ((t_star, -t_star), (-t_star, t_star)):
            points.append(
                _make_saddle(eta + shift, nu + shift, b2, b2, lambda0, "bulk_pair")
            )
        if lambda0 == 0.0 and b2 != 0.0:
            for t in (t_star, -t_star):
                points.append(_make_saddle(t, t, -b2, b2, lambda0, "bulk_pair"))
        return points
    if abs(disc) <= _DEGENERATE_TOL:
        shift = -0.5j * lambda0
        points.append(_make_saddle(shift, shift, b2, b2, lambda0, "edge"))
        return points
    sol = solve_alpha(abs(b2), lambda0)
    al = sol.alpha
    t = -1j * al * lambda0
    s = (1 - al) / al * abs(b2)
    points.append(_make_saddle(t, t, s, abs(b2), lambda0, "outside"))
    if lambda0 == 0.0:
        # second real root of b2/(b2 s) = s on the lambda0 = 0 contour
        points.append(_make_saddle(t, t, -s, abs(b2), lambda0, "outside"))
    return points


def edge_parameters(p: float, n: int | None = None) -> EdgeParameters:
    """Solve |b2| = beta (1 + beta) / (1 - beta) for beta in (0, 1).

    |b2| is the n -> infinity value sqrt(2/p) unless n is given, in which case
    the finite-n sqrt(2(n-p)/(pn)) is used.  Requires p > 2 so that |b2| < 1
    keeps the root on the (0, 1) branch; beta ~ sqrt(2/p) for large p.
    """
    if p <= 2:
        raise RegimeError(f"edge parameterization requires p > 2, got p={p}")
    if n is None:
        b2m = math.sqrt(2.0 / p)
    else:
        if not 0 < p <= n:
            raise ValueError("require 0 < p <= n")
        b2m = math.sqrt(2.0 * (n - p) / (p * n))
    if b2m == 0.0:
        return EdgeParameters(beta=0.0, b2_magnitude=0.0)

    def g(beta: float) -> float:
        return beta * (1 + beta) / (1 - beta) - b2m

    lo, hi = 0.0, 1.0 - 1e-15
    if g(hi) < 0:
        raise RegimeError("no root in (0, 1) for the edge parameter")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return EdgeParameters(beta=0.5 * (lo + hi), b2_magnitude=b2m)
