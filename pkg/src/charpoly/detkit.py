"""Determinant products and Monte Carlo estimation of their expectations.

Estimates F_2m(Lambda) = E prod_j det(M - lambda_j) and the normalized ratio
D_2m.  Every per-sample product is kept in the log domain; the mean is formed
as exp(L*) * mean(phase_i * exp(L_i - L*)) with L* the largest log magnitude,
so nothing overflows.  Monte Carlo here is a small-n tool: the relative
variance of F grows quickly with n, so estimation is refused above
MC_MAX_N and large n is served by the quadrature module instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .ensemble import EnsembleParams, iter_sample_batches
from .logdomain import LogSignedValue, log_mean_and_spread

__all__ = [
    "SpectralWindow",
    "MCEstimate",
    "DEstimate",
    "signed_log_det",
    "mc_estimate_F",
    "mc_estimate_D",
    "FactorizationError",
    "DegenerateEstimateError",
    "MC_MAX_N",
]

# Relative MC variance of F_2 grows polynomially in n (the fourth-to-second
# moment ratio picks up an n^2 factor already in the GUE-like regime), so the
# sampler refuses sizes where no sane sample budget converges.
MC_MAX_N = 200

_PIVOT_TINY = 1e-290


class FactorizationError(RuntimeError):
    """LU factorization produced non-finite entries (distinct from det = 0)."""


class DegenerateEstimateError(RuntimeError):
    """Every Monte Carlo sample was exactly zero."""


@dataclass(frozen=True)
class SpectralWindow:
    """Evaluation points lambda_j = lambda0 + x_j / n (bulk scale) or
    lambda_j = lambda0 + x_j * n^(-2/3) with lambda0 = +-2 (edge scale)."""

    m: int
    lambda0: float
    offsets: tuple
    scale: str = "bulk"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order m must be >= 1")
        if len(self.offsets) != 2 * self.m:
            raise ValueError(f"expected {2*self.m} offsets, got {len(self.offsets)}")
        if self.scale not in ("bulk", "edge"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.scale == "edge" and abs(self.lambda0) != 2.0:
            raise ValueError("edge scale pins lambda0 at +2 or -2")

    def lambdas(self, n: int) -> np.ndarray:
        x = np.asarray(self.offsets, dtype=float)
        if self.scale == "bulk":
            return self.lambda0 + x / n
        return self.lambda0 + x * float(n) ** (-2.0 / 3.0)

    def effective_offsets(self, n: int) -> np.ndarray:
        """Offsets rescaled to the 1/n convention used by the quadrature."""
        return (self.lambdas(n) - self.lambda0) * n


@dataclass(frozen=True)
class MCEstimate:
    mean: LogSignedValue
    std_error_rel: float
    n_samples: int
    degenerate: bool = False

    def value(self) -> float:
        return self.mean.to_float()


@dataclass(frozen=True)
class DEstimate:
    value: float
    std_error: float
    numerator: MCEstimate
    denominators: tuple = field(repr=False)


def signed_log_det(m: np.ndarray, shift: float = 0.0) -> LogSignedValue:
    """det(M - shift*I) of a Hermitian matrix via pivoted LU.

    Accumulates log|pivot| and the pivot phases together with the permutation
    sign.  Because M is Hermitian and the shift real, the determinant is real;
    the accumulated phase is snapped to +-1 and a phase that is not close to
    real raises FactorizationError.  A pivot below the underflow threshold is
    reported as an exact zero rather than an error.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    scale = np.abs(m).max() + abs(shift) + 1.0
    if np.abs(m - m.conj().T).max() > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    a = m - shift * np.eye(m.shape[0], dtype=m.dtype)
    lu, piv = lu_factor(a.astype(complex), check_finite=False)
    diag = np.diag(lu)
    if not np.isfinite(diag).all():
        raise FactorizationError("non-finite pivots in LU factorization")
    if np.abs(diag).min() < _PIVOT_TINY:
        return LogSignedValue.exact_zero()
    swaps = int(np.sum(piv != np.arange(len(piv))))
    phase = (-1.0) ** swaps * np.prod(diag / np.abs(diag))
    log_mag = float(np.log(np.abs(diag)).sum())
    return _snap_real_phase(phase, log_mag)


def _snap_real_phase(phase: complex, log_mag: float) -> LogSignedValue:
    if abs(phase.imag) > 1e-6:
        raise FactorizationError(
            f"determinant of a Hermitian matrix came out non-real (phase {phase})"
        )
    return LogSignedValue(1.0 if phase.real > 0 else -1.0, log_mag)


def _batch_product_logdet(block: np.ndarray, lambdas: np.ndarray):
    """Per-sample log|prod det(M - lambda_j)| and +-1 sign for a sample stack."""
    c, n, _ = block.shape
    logs = np.zeros(c)
    signs = np.ones(c)
    zero = np.zeros(c, dtype=bool)
    eye = np.eye(n)
    for lam in lambdas:
        sgn, ld = np.linalg.slogdet(block - lam * eye)
        zero |= sgn == 0
        im = np.abs(sgn.imag) if np.iscomplexobj(sgn) else 0.0
        if np.max(im, initial=0.0) > 1e-6:
            raise FactorizationError("non-real determinant phase in batch")
        signs *= np.where(sgn.real >= 0, 1.0, -1.0)
        logs += ld
    logs[zero] = -np.inf
    return logs, signs


def mc_estimate_F(
    params: EnsembleParams,
    window: SpectralWindow,
    n_samples: int,
    stream: int = 0,
) -> MCEstimate:
    """Monte Carlo mean of prod_j det(M - lambda_j) over n_samples matrices.

    Deterministic given (params.seed, stream): samples are indexed, per-sample
    values are assembled in index order, and the reduction is a single numpy
    sum, so batching and worker count cannot change the result.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if params.n > MC_MAX_N:
        raise ValueError(
            f"Monte Carlo variance is prohibitive for n={params.n} (cap {MC_MAX_N}); "
            "use the quadrature module"
        )
    lambdas = window.lambdas(params.n)
    logs = np.empty(n_samples)
    signs = np.empty(n_samples)
    for start, block in iter_sample_batches(params, n_samples, stream=stream):
        lg, sg = _batch_product_logdet(block, lambdas)
        logs[start : start + len(lg)] = lg
        signs[start : start + len(sg)] = sg
    if not np.isfinite(logs).any():
        return MCEstimate(
            mean=LogSignedValue.exact_zero(),
            std_error_rel=math.inf,
            n_samples=n_samples,
            degenerate=True,
        )
    mean, rel = log_mean_and_spread(logs, signs)
    return MCEstimate(mean=mean, std_error_rel=rel, n_samples=n_samples)


def _ratio_from_estimates(numerator: MCEstimate, denominators) -> DEstimate:
    """D = numerator / (prod denominators)^(1/2m) with first-order errors."""
    two_m = len(denominators)
    for j, d in enumerate(denominators):
        if d.degenerate or d.mean.zero:
            raise DegenerateEstimateError(f"denominator {j} is exactly zero")
        if d.std_error_rel * 3.0 >= 1.0:
            raise DegenerateEstimateError(
                f"denominator {j} is consistent with zero at 3 sigma "
                f"(relative error {d.std_error_rel:.3g}); refusing the ratio"
            )
    log_d = numerator.mean.log_magnitude - sum(
        d.mean.log_magnitude for d in denominators
    ) / two_m
    sign = numerator.mean.sign
    for d in denominators:
        if d.mean.sign < 0:
            raise DegenerateEstimateError("denominator estimate is negative")
    rel_err = math.sqrt(
        numerator.std_error_rel**2
        + sum((d.std_error_rel / two_m) ** 2 for d in denominators)
    )
    value = sign * math.exp(log_d)
    return DEstimate(
        value=value,
        std_error=abs(value) * rel_err,
        numerator=numerator,
        denominators=tuple(denominators),
    )


def mc_estimate_D(
    params: EnsembleParams,
    lambda0: float,
    offsets,
    n_samples: int,
    scale: str = "bulk",
) -> DEstimate:
    """Ratio estimate of D_2m.

    The numerator uses stream 0 and denominator j uses stream j+1, so the
    estimates are independent (documented substream layout; no coupling or
    antithetic tricks).
    """
    offsets = tuple(float(x) for x in offsets)
    if len(offsets) % 2 != 0:
        raise ValueError("need an even number of offsets")
    m = len(offsets) // 2
    window = SpectralWindow(m=m, lambda0=lambda0, offsets=offsets, scale=scale)
    numerator = mc_estimate_F(params, window, n_samples, stream=0)
    # denominator substreams are ranked by offset value (not position), so
    # permuting the offsets permutes the denominators with their noise and
    # the ratio is exactly permutation invariant
    order = sorted(range(len(offsets)), key=lambda j: (offsets[j], j))
    stream_of = {j: rank + 1 for rank, j in enumerate(order)}
    denominators = []
    for j, x in enumerate(offsets):
        wj = SpectralWindow(m=m, lambda0=lambda0, offsets=(x,) * (2 * m), scale=scale)
        denominators.append(
            mc_estimate_F(params, wj, n_samples, stream=stream_of[j])
        )
    if offsets.count(offsets[0]) == len(offsets):
        # numerator and denominators estimate the same quantity
        return DEstimate(value=1.0, std_error=0.0, numerator=numerator,
                         denominators=tuple(denominators))
    return _ratio_from_estimates(numerator, denominators)
