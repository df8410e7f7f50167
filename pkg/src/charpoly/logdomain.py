"""Overflow-safe arithmetic for determinant-scale quantities.

Products of characteristic polynomials at moderate matrix size already span
hundreds of orders of magnitude, so every value that can leave the float64
range is carried as (phase, log magnitude).  The phase is a unit complex
number; for real quantities it is exactly +1.0 or -1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogSignedValue:
    """A complex number stored as ``phase * exp(log_magnitude)``.

    ``zero`` marks an exact zero; the other fields are then meaningless.
    """

    phase: complex
    log_magnitude: float
    zero: bool = False

    def __post_init__(self):
        if not self.zero:
            mag = abs(self.phase)
            if not 0.999999999 <= mag <= 1.000000001:
                raise ValueError(f"phase must lie on the unit circle, got |{self.phase}| = {mag}")

    @staticmethod
    def from_real(x: float) -> "LogSignedValue":
        if x == 0.0:
            return LogSignedValue(1.0, -math.inf, zero=True)
        return LogSignedValue(1.0 if x > 0 else -1.0, math.log(abs(x)))

    @staticmethod
    def from_complex(z: complex) -> "LogSignedValue":
        if z == 0:
            return LogSignedValue(1.0, -math.inf, zero=True)
        return LogSignedValue(z / abs(z), math.log(abs(z)))

    @staticmethod
    def exact_zero() -> "LogSignedValue":
        return LogSignedValue(1.0, -math.inf, zero=True)

    @property
    def sign(self) -> float:
        """Real sign (+1/-1) for values with a real phase."""
        if self.zero:
            return 0.0
        if abs(self.phase.imag if isinstance(self.phase, complex) else 0.0) > 1e-9:
            raise ValueError("sign requested for a value with non-real phase")
        return 1.0 if complex(self.phase).real > 0 else -1.0

    def to_float(self) -> float:
        """The represented value as a float; raises on overflow or complex phase."""
        if self.zero:
            return 0.0
        if self.log_magnitude > 700.0:
            raise OverflowError(f"value exp({self.log_magnitude}) does not fit in float64")
        return self.sign * math.exp(self.log_magnitude)

    def to_complex(self) -> complex:
        if self.zero:
            return 0.0 + 0.0j
        if self.log_magnitude > 700.0:
            raise OverflowError(f"value exp({self.log_magnitude}) does not fit in float64")
        return complex(self.phase) * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogSignedValue") -> "LogSignedValue":
        if self.zero or other.zero:
            return LogSignedValue.exact_zero()
        ph = complex(self.phase) * complex(other.phase)
        return LogSignedValue(ph / abs(ph), self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogSignedValue") -> "LogSignedValue":
        if other.zero:
            raise ZeroDivisionError("division by an exact-zero LogSignedValue")
        if self.zero:
            return LogSignedValue.exact_zero()
        ph = complex(self.phase) / complex(other.phase)
        return LogSignedValue(ph / abs(ph), self.log_magnitude - other.log_magnitude)

    def powi(self, k: float) -> "LogSignedValue":
        """Real power; phase must be real for non-integer k."""
        if self.zero:
            return LogSignedValue.exact_zero()
        ph = complex(self.phase) ** k
        return LogSignedValue(ph / abs(ph), k * self.log_magnitude)


def signed_logsumexp(log_mags: np.ndarray, phases: np.ndarray) -> LogSignedValue:
    """Sum of ``phases[i] * exp(log_mags[i])`` in the log domain.

    The shift is the maximum log magnitude, so no intermediate overflows.
    The reduction is a single numpy sum over the array in index order, which
    makes the result independent of how samples were produced or batched.
    """
    log_mags = np.asarray(log_mags, dtype=float)
    finite = np.isfinite(log_mags)
    if not finite.any():
        return LogSignedValue.exact_zero()
    shift = log_mags[finite].max()
    terms = np.where(finite, np.exp(np.where(finite, log_mags, -np.inf) - shift), 0.0)
    total = complex((np.asarray(phases) * terms).sum())
    if total == 0:
        return LogSignedValue.exact_zero()
    return LogSignedValue(total / abs(total), shift + math.log(abs(total)))


def log_mean_and_spread(log_mags: np.ndarray, phases: np.ndarray):
    """Mean and relative standard error of signed log-domain samples.

    Returns ``(mean: LogSignedValue, rel_std_error: float)``.  The spread is
    computed in the shifted linear domain because the estimand is the
    linear-domain mean, not the mean of the logs.
    """
    log_mags = np.asarray(log_mags, dtype=float)
    n = log_mags.size
    if n < 2:
        raise ValueError("need at least 2 samples for a standard error")
    finite = np.isfinite(log_mags)
    if not finite.any():
        return LogSignedValue.exact_zero(), math.inf
    shift = log_mags[finite].max()
    v = np.where(finite, np.exp(np.where(finite, log_mags, -np.inf) - shift), 0.0)
    v = np.asarray(phases) * v
    mean = v.mean()
    spread = v.std(ddof=1) / math.sqrt(n)
    if mean == 0:
        return LogSignedValue.exact_zero(), math.inf
    mean_c = complex(mean)
    rel = float(spread / abs(mean_c))
    return LogSignedValue(mean_c / abs(mean_c), shift + math.log(abs(mean_c))), rel
