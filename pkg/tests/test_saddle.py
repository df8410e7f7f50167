"""Landscape bound, root solves, stationary points, edge parameterization."""

import math

import numpy as np
import pytest

from charpoly import saddle
from charpoly.saddle import (
    LandscapePoint,
    RegimeError,
    edge_parameters,
    equality_family_points,
    f_gradient,
    f_hessian,
    h_alpha,
    h_alpha_bound,
    solve_alpha,
    stationary_points_m1,
    verify_lemma2,
)


def _fd_gradient(t1, t2, s, b2, lam0, h=1e-6):
    def f(a, b, c):
        return np.log(b2 * c - a * b) - 0.5 * ((a + 1j * lam0) ** 2 + (b + 1j * lam0) ** 2 + c**2)

    return np.array([
        (f(t1 + h, t2, s) - f(t1 - h, t2, s)) / (2 * h),
        (f(t1, t2 + h, s) - f(t1, t2 - h, s)) / (2 * h),
        (f(t1, t2, s + h) - f(t1, t2, s - h)) / (2 * h),
    ])


def _fd_hessian(t1, t2, s, b2, lam0, h=1e-5):
    coords = np.array([t1, t2, s], dtype=complex)

    def f(v):
        a, b, c = v
        return np.log(b2 * c - a * b) - 0.5 * ((a + 1j * lam0) ** 2 + (b + 1j * lam0) ** 2 + c**2)

    out = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            vpp = coords.copy(); vpp[i] += h; vpp[j] += h
            vpm = coords.copy(); vpm[i] += h; vpm[j] -= h
            vmp = coords.copy(); vmp[i] -= h; vmp[j] += h
            vmm = coords.copy(); vmm[i] -= h; vmm[j] -= h
            out[i, j] = (f(vpp) - f(vpm) - f(vmp) + f(vmm)) / (4 * h * h)
    return out


# ---------------------------------------------------------------------------
# h_alpha
# ---------------------------------------------------------------------------

def test_h_equality_case_a():
    pt = LandscapePoint(1.0, -1.0, 0.0, 0.0, 0.0, 0.5)
    assert h_alpha(pt) == pytest.approx(-1.0, abs=1e-14)
    assert h_alpha_bound(0.5) == -1.0


def test_h_equality_case_c_at_edge_of_window():
    pt = LandscapePoint(0.0, 0.0, 0.0, 0.0, 2.0, 0.5)
    assert h_alpha(pt) == pytest.approx(-1.0, abs=1e-14)


def test_h_equality_case_b():
    pt = LandscapePoint(0.8, 0.8, -0.6, 0.6, 0.0, 0.5)
    assert h_alpha(pt) == pytest.approx(h_alpha_bound(0.5), abs=1e-12)


def test_h_equality_case_d():
    pt = LandscapePoint(0.0, 0.0, -1.0, 3.0, 0.0, 0.75)
    assert h_alpha(pt) == pytest.approx(h_alpha_bound(0.75), abs=1e-12)


def test_h_strictly_below_bound_generic():
    pt = LandscapePoint(0.7, 0.3, -1.2, 0.4, 0.9, 0.6)
    assert h_alpha(pt) < h_alpha_bound(0.6)


def test_h_sentinel_on_degenerate_quadratic():
    pt = LandscapePoint(0.0, 0.0, 0.0, 0.0, 0.0, 0.5)
    assert h_alpha(pt) == -math.inf


def test_alpha_domain_enforced():
    with pytest.raises(ValueError):
        LandscapePoint(0.0, 0.0, 0.0, 0.0, 0.0, 0.3)


def test_contour_realpart_identity():
    # Re f on the shifted bulk contour equals h_{1/2} + b2^2/2 + lambda0^2/2
    rng = np.random.Generator(np.random.Philox(key=[5, 5]))
    for _ in range(50):
        t1, t2, s = rng.uniform(-2, 2, 3)
        b2 = rng.uniform(-0.9, 0.9)
        lam0 = rng.uniform(-1.5, 1.5)
        f = (
            np.log(b2 * s - (t1 - 0.5j * lam0) * (t2 - 0.5j * lam0) + 0j)
            - 0.5 * ((t1 + 0.5j * lam0) ** 2 + (t2 + 0.5j * lam0) ** 2 + s**2)
        )
        pt = LandscapePoint(t1, t2, s, b2, lam0, 0.5)
        assert f.real == pytest.approx(
            h_alpha(pt) + b2**2 / 2 + lam0**2 / 2, abs=1e-12
        )


def test_verify_lemma2_small_budget():
    report = verify_lemma2(sample_count=100_000, seed=7)
    assert report.passed
    assert report.violations == 0
    assert report.max_gap <= 1e-12
    assert set(report.equality_gaps) == {"a", "b", "c", "d"}
    assert report.perturbation_min_drop > 0


def test_equality_families_meet_bound():
    worst = 0.0
    for _, pt in equality_family_points(grid=8):
        worst = max(worst, abs(h_alpha(pt) - h_alpha_bound(pt.alpha)))
    assert worst < 1e-10


# ---------------------------------------------------------------------------
# solve_alpha
# ---------------------------------------------------------------------------

def test_alpha_closed_form_lambda0_zero():
    sol = solve_alpha(3.0, 0.0)
    assert sol.alpha == pytest.approx(0.75, abs=1e-12)
    neg = solve_alpha(-3.0, 0.0)  # sign enters squared
    assert neg.alpha == pytest.approx(0.75, abs=1e-12)


def test_alpha_closed_form_b2_zero():
    sol = solve_alpha(0.0, math.sqrt(8.0))
    assert sol.alpha == pytest.approx((1 + math.sqrt(0.5)) / 2, abs=1e-12)


def test_alpha_residual():
    sol = solve_alpha(0.5, 2.5)
    res = sol.alpha * (1 - sol.alpha) * 2.5**2 + ((1 - sol.alpha) / sol.alpha) ** 2 * 0.25 - 1
    assert abs(res) < 1e-12


def test_alpha_regime_guard():
    with pytest.raises(RegimeError, match="bulk"):
        solve_alpha(0.3, 1.0)


def test_alpha_monotone_in_lambda0():
    alphas = [solve_alpha(0.5, l0).alpha for l0 in (2.0, 2.5, 3.0, 4.0)]
    assert all(a < b for a, b in zip(alphas, alphas[1:]))


def test_a_hat_equals_f_at_stationary_point():
    for b2, lam0 in ((0.5, 2.5), (1.5, 1.0), (3.0, 0.0)):
        sol = solve_alpha(b2, lam0)
        al = sol.alpha
        t = -1j * al * lam0
        s = (1 - al) / al * b2
        f = np.log(b2 * s - t * t) - 0.5 * ((t + 1j * lam0) ** 2 * 2 + s**2)
        assert f.imag == pytest.approx(0.0, abs=1e-12)
        assert sol.a_hat == pytest.approx(f.real, abs=1e-12)


# ---------------------------------------------------------------------------
# stationary points
# ---------------------------------------------------------------------------

def test_bulk_saddles_origin():
    pts = stationary_points_m1(0.0, 0.0)
    coords = sorted((p.t1.real, p.t2.real) for p in pts)
    assert coords == [(-1.0, 1.0), (1.0, -1.0)]
    for p in pts:
        assert p.s == 0.0
        assert p.classification == "bulk_pair"
        assert np.linalg.det(p.hessian) == pytest.approx(-4.0, abs=1e-12)
        assert p.f_value == pytest.approx(-1.0, abs=1e-13)


def test_bulk_saddle_values_and_hessian_general():
    for b2, lam0 in ((-0.5, 0.8), (-0.3, 0.0), (-0.7, 1.2)):
        pts = [p for p in stationary_points_m1(b2, lam0)
               if p.t1.real != p.t2.real]
        disc = 4 - 4 * b2**2 - lam0**2
        for p in pts:
            assert p.f_value.real == pytest.approx(
                b2**2 / 2 + lam0**2 / 2 - 1, abs=1e-12
            )
            assert np.linalg.det(p.hessian) == pytest.approx(-disc, abs=1e-8)
            fd = _fd_hessian(p.t1, p.t2, p.s, b2, lam0)
            assert np.abs(fd - p.hessian).max() < 1e-6


def test_gradient_residuals_below_tolerance():
    for b2, lam0 in ((-0.5, 0.8), (0.0, math.sqrt(8.0)), (-2.0, 0.0)):
        for p in stationary_points_m1(b2, lam0):
            assert p.gradient_residual < 1e-10
            fd = _fd_gradient(p.t1, p.t2, p.s,
                              abs(b2) if p.classification == "outside" else b2,
                              lam0)
            assert np.abs(fd).max() < 1e-8


def test_lambda0_zero_extra_pair_present():
    pts = stationary_points_m1(-0.5, 0.0)
    equal_sign = [p for p in pts if p.t1 == p.t2]
    assert len(equal_sign) == 2
    for p in equal_sign:
        assert p.s == pytest.approx(0.5)  # s = -b2


def test_outside_point_and_hessian_sign():
    pts = stationary_points_m1(0.0, math.sqrt(8.0))
    assert len(pts) == 1
    p = pts[0]
    assert p.classification == "outside"
    sol = solve_alpha(0.0, math.sqrt(8.0))
    assert p.t1 == pytest.approx(-1j * sol.alpha * math.sqrt(8.0))
    assert np.linalg.det(p.hessian).real < 0
    fd = _fd_hessian(p.t1, p.t2, p.s, 0.0, math.sqrt(8.0))
    assert np.abs(fd - p.hessian).max() < 1e-6


def test_edge_classification_at_degenerate_disc():
    pts = stationary_points_m1(0.0, 2.0)
    assert len(pts) == 1
    assert pts[0].classification == "edge"


def test_analytic_hessian_matches_fd_random_points():
    rng = np.random.Generator(np.random.Philox(key=[9, 9]))
    for _ in range(20):
        t1, t2 = rng.uniform(-1.5, 1.5, 2) - 1j * rng.uniform(-0.5, 0.5, 2)
        s = rng.uniform(-1.5, 1.5)
        b2 = rng.uniform(-0.9, 0.9)
        lam0 = rng.uniform(-1.0, 1.0)
        if abs(b2 * s - t1 * t2) < 0.2:
            continue
        # second differences float on an eps/h^2 roundoff floor, so the
        # oracle uses a larger step and Richardson for the h^2 truncation
        fd = (4.0 * _fd_hessian(t1, t2, s, b2, lam0, h=1e-4)
              - _fd_hessian(t1, t2, s, b2, lam0, h=2e-4)) / 3.0
        assert np.abs(fd - f_hessian(t1, t2, s, b2, lam0)).max() < 1e-6
        fdg = _fd_gradient(t1, t2, s, b2, lam0)
        assert np.abs(fdg - f_gradient(t1, t2, s, b2, lam0)).max() < 1e-8


# ---------------------------------------------------------------------------
# edge parameters
# ---------------------------------------------------------------------------

def test_edge_beta_zero_at_p_eq_n():
    ep = edge_parameters(200.0, n=200)
    assert ep.beta == 0.0 and ep.b2_magnitude == 0.0


def test_edge_beta_near_asymptotic():
    # beta = sqrt(2/p) (1 - 2 sqrt(2/p) + O(2/p)): the first-order correction
    # is -2 sqrt(2/p), about -17% at p = 200, so that is the honest bound
    ep = edge_parameters(200.0, n=10**6)
    root = math.sqrt(2.0 / 200.0)
    assert abs(ep.beta - root) / root < 3.0 * root


def test_edge_beta_round_trip():
    ep = edge_parameters(10.0)
    back = ep.beta * (1 + ep.beta) / (1 - ep.beta)
    assert back == pytest.approx(ep.b2_magnitude, abs=1e-12)


def test_edge_requires_p_above_two():
    with pytest.raises(RegimeError):
        edge_parameters(2.0)


def test_edge_asymptotic_trend():
    vals = [edge_parameters(p).beta * math.sqrt(p / 2.0) for p in (10, 100, 1000, 10000)]
    assert all(abs(v - 1.0) > abs(w - 1.0) for v, w in zip(vals, vals[1:]))
    for p, v in zip((10, 100, 1000, 10000), vals):
        assert abs(v - 1.0) < 3.0 * math.sqrt(2.0 / p)
