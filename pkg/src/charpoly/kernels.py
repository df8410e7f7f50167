"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

Backend selection: numba is used when importable unless the environment
variable CHARPOLY_BACKEND is set to "numpy".  Thread count comes from
CHARPOLY_THREADS (overridable via set_threads); results are independent of it
because every parallel loop writes per-slice outputs that are reduced
sequentially in slice order afterwards.

The quadrature kernel evaluates, slice by slice in s, the integrand of the
order-1 representation on a shifted contour t_j = u_j - i*gamma:

    (t1 - t2) exp(-i(x1 t1 + x2 t2)) exp(n f(T, s)),
    f = log(b2 s - t1 t2) - ((t1 + i l0)^2 + (t2 + i l0)^2 + s^2) / 2.

Two passes per slice: a cheap all-real pass finds the slice maximum of
Re(n f)/n, then the complex pass touches only points within _LOG_CUT nats of
that maximum (the rest are below 1e-20 of the slice peak).  exp(n log A) is
exact for integer n whatever branch the log picks, so the principal branch
is used without any branch tracking.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "backend_name",
    "set_threads",
    "get_threads",
    "quadrature_slices",
    "lemma2_scan",
]

_LOG_CUT = 46.0  # exp(-46) ~ 1e-20 relative to the slice peak

_WANT_NUMBA = os.environ.get("CHARPOLY_BACKEND", "numba").lower() != "numpy"
_numba = None
if _WANT_NUMBA:
    try:
        os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
        import numba as _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba = None


def backend_name() -> str:
    return "numba" if _numba is not None else "numpy"


def set_threads(k: int) -> None:
    if k < 1:
        raise ValueError("thread count must be >= 1")
    if _numba is not None:
        _numba.set_num_threads(min(k, _numba.config.NUMBA_NUM_THREADS))


def get_threads() -> int:
    if _numba is not None:
        return _numba.get_num_threads()
    return 1


def _init_threads_from_env() -> None:
    raw = os.environ.get("CHARPOLY_THREADS", "").strip()
    if raw:
        try:
            set_threads(int(raw))
        except ValueError:
            raise ValueError(f"CHARPOLY_THREADS must be an integer, got {raw!r}")


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _quadrature_slices_numpy(u, w, gamma, lam0, b2, n, x1, x2, confluent):
    N = u.shape[0]
    t = u - 1j * gamma
    t1 = t[:, None]
    t2 = t[None, :]
    c = lam0 - gamma
    re_t = -0.5 * (u * u - c * c)          # Re of -(t + i lam0)^2 / 2
    im_t = -u * c
    re_2d = re_t[:, None] + re_t[None, :]
    im_2d = im_t[:, None] + im_t[None, :]
    uu = u[:, None] * u[None, :]
    usum = u[:, None] + u[None, :]
    if confluent:
        g2d = 0.5 * (t1 - t2) ** 2 * np.exp(-1j * x1 * (t1 + t2))
    else:
        g2d = (t1 - t2) * np.exp(-1j * (x1 * t1 + x2 * t2))
    w2d = w[:, None] * w[None, :]
    ms = np.empty(N)
    sums = np.empty(N, dtype=complex)
    gg = gamma * gamma
    for k in range(N):
        sk = u[k]
        ar = b2 * sk - uu + gg
        ai = gamma * usum
        with np.errstate(divide="ignore"):
            re = 0.5 * np.log(ar * ar + ai * ai) + re_2d - 0.5 * sk * sk
        m = re.max()
        keep = re >= m - _LOG_CUT / n
        ph = np.arctan2(ai[keep], ar[keep])
        z = np.exp(n * (re[keep] - m) + 1j * n * (ph + im_2d[keep]))
        sums[k] = (w2d[keep] * g2d[keep] * z).sum()
        ms[k] = n * m
    return ms, sums.real.copy(), sums.imag.copy()


def _lemma2_scan_numpy(samples, bound_gap_out):
    """samples: (count, 6) rows of (t1, t2, s, b2, lam0, alpha)."""
    t1, t2, s, b2, l0, al = samples.T
    a_quad = (b2 * s - t1 * t2 + al**2 * l0**2) ** 2 + al**2 * l0**2 * (t1 + t2) ** 2
    with np.errstate(divide="ignore"):
        h = 0.5 * (
            np.log(a_quad)
            - t1**2
            - t2**2
            - s**2
            - ((1 - al) / al) ** 2 * b2**2
            - 2 * al * (1 - al) * l0**2
        )
    bound = 0.5 * np.log((al / (1 - al)) ** 2) - 1.0
    np.subtract(h, bound, out=bound_gap_out)
    return bound_gap_out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _numba is not None:
    from numba import njit, prange

    @njit(parallel=True, cache=True)
    def _quadrature_slices_numba(u, w, gamma, lam0, b2, n, x1, x2, confluent):
        N = u.shape[0]
        ms = np.empty(N)
        s_re = np.empty(N)
        s_im = np.empty(N)
        c = lam0 - gamma
        re_t = np.empty(N)
        im_t = np.empty(N)
        for i in range(N):
            re_t[i] = -0.5 * (u[i] * u[i] - c * c)
            im_t[i] = -u[i] * c
        gg = gamma * gamma
        cut = _LOG_CUT / n
        for k in prange(N):
            sk = u[k]
            base = -0.5 * sk * sk
            m = -1.0e300
            for i in range(N):
                ri = re_t[i] + base
                for j in range(N):
                    ar = b2 * sk - (u[i] * u[j] - gg)
                    ai = gamma * (u[i] + u[j])
                    re = 0.5 * math.log(ar * ar + ai * ai) + ri + re_t[j]
                    if re > m:
                        m = re
            thr = m - cut
            acc_r = 0.0
            acc_i = 0.0
            for i in range(N):
                t1 = complex(u[i], -gamma)
                ri = re_t[i] + base
                for j in range(N):
                    ar = b2 * sk - (u[i] * u[j] - gg)
                    ai = gamma * (u[i] + u[j])
                    re = 0.5 * math.log(ar * ar + ai * ai) + ri + re_t[j]
                    if re < thr:
                        continue
                    t2 = complex(u[j], -gamma)
                    ph = math.atan2(ai, ar) + im_t[i] + im_t[j]
                    if confluent:
                        g = 0.5 * (t1 - t2) ** 2 * np.exp(-1j * x1 * (t1 + t2))
                    else:
                        g = (t1 - t2) * np.exp(-1j * (x1 * t1 + x2 * t2))
                    amp = math.exp(n * (re - m))
                    ang = n * ph
                    z = w[i] * w[j] * amp * complex(math.cos(ang), math.sin(ang)) * g
                    acc_r += z.real
                    acc_i += z.imag
            ms[k] = n * m
            s_re[k] = acc_r
            s_im[k] = acc_i
        return ms, s_re, s_im

    @njit(parallel=True, cache=True)
    def _lemma2_scan_numba(samples, gaps):
        count = samples.shape[0]
        for r in prange(count):
            t1 = samples[r, 0]
            t2 = samples[r, 1]
            s = samples[r, 2]
            b2 = samples[r, 3]
            l0 = samples[r, 4]
            al = samples[r, 5]
            aq = (b2 * s - t1 * t2 + al * al * l0 * l0) ** 2 \
                + al * al * l0 * l0 * (t1 + t2) ** 2
            if aq <= 0.0:
                gaps[r] = -1.0e300
                continue
            h = 0.5 * (
                math.log(aq)
                - t1 * t1
                - t2 * t2
                - s * s
                - ((1 - al) / al) ** 2 * b2 * b2
                - 2 * al * (1 - al) * l0 * l0
            )
            gaps[r] = h - (0.5 * math.log((al / (1 - al)) ** 2) - 1.0)
        return gaps


def quadrature_slices(u, w, gamma, lam0, b2, n, x1, x2, confluent=False):
    """Per-s-slice (n*max_log, sum_re, sum_im) arrays for the 3D quadrature.

    The caller combines slices in index order, so the output is deterministic
    for any thread count.
    """
    u = np.ascontiguousarray(u, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if _numba is not None:
        return _quadrature_slices_numba(
            u, w, float(gamma), float(lam0), float(b2), int(n),
            float(x1), float(x2), bool(confluent),
        )
    return _quadrature_slices_numpy(u, w, gamma, lam0, b2, n, x1, x2, confluent)


def lemma2_scan(samples: np.ndarray) -> np.ndarray:
    """Gaps h_alpha - bound for rows (t1, t2, s, b2, lam0, alpha) <= 0 expected."""
    samples = np.ascontiguousarray(samples, dtype=float)
    gaps = np.empty(samples.shape[0])
    if _numba is not None:
        return _lemma2_scan_numba(samples, gaps)
    return _lemma2_scan_numpy(samples, gaps)


_init_threads_from_env()
