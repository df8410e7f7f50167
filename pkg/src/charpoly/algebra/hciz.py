"""Unitary-group integral of exp(z tr A U* B U): closed form vs Haar Monte Carlo.

The closed form for a normal A with distinct eigenvalues a_j and real diagonal
B is

    (prod_{j=1}^{n-1} j!) det{ exp(z a_j b_k) } / (z^{(n^2-n)/2} Delta(a) Delta(b)).

Haar unitaries are drawn as the QR factor of a complex Ginibre matrix with the
R-diagonal phases divided out (the standard unbiased construction), in
deterministic per-batch substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["HcizReport", "hciz_closed_form", "haar_unitaries", "hciz_check"]

_SMALL_Z = 1e-7


class DegenerateSpectrumError(ValueError):
    """Equal eigenvalues: the determinant form degenerates.  The symmetrized
    integration-measure variant of the identity covers that case; it is not
    evaluated here."""


@dataclass(frozen=True)
class HcizReport:
    mc_mean: complex
    mc_std_error: float
    closed_form: complex
    z_score: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.z_score < 3.0


def hciz_closed_form(a_values, b_values, z: complex) -> complex:
    """Determinant-ratio value; a first-order series guard covers small z,
    where the raw ratio is 0/0 (the integral tends to 1)."""
    a = np.asarray(a_values, dtype=complex)
    b = np.asarray(b_values, dtype=float)
    n = a.size
    if b.size != n:
        raise ValueError("eigenvalue lists must have equal length")
    spread_a = min(abs(x - y) for i, x in enumerate(a) for y in a[i + 1:])
    spread_b = min(abs(x - y) for i, x in enumerate(b) for y in b[i + 1:])
    if spread_a == 0 or spread_b == 0:
        raise DegenerateSpectrumError(
            "distinct eigenvalues required for the determinant form"
        )
    if abs(z) * max(np.abs(a).max(), 1.0) * max(np.abs(b).max(), 1.0) < _SMALL_Z:
        return 1.0 + z * complex(a.sum()) * float(b.sum()) / n
    pref = 1.0
    for j in range(1, n):
        pref *= math.factorial(j)
    det = np.linalg.det(np.exp(z * np.outer(a, b)))
    vd_a = np.prod([a[k] - a[j] for j in range(n) for k in range(j + 1, n)])
    vd_b = np.prod([b[k] - b[j] for j in range(n) for k in range(j + 1, n)])
    return pref * det / (z ** ((n * n - n) // 2) * vd_a * vd_b)


def haar_unitaries(dim: int, count: int, seed: int, batch_index: int) -> np.ndarray:
    """Stack of Haar unitaries from one substream batch."""
    rng = np.random.Generator(np.random.Philox(key=[seed, batch_index]))
    g = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal(
        (count, dim, dim)
    )
    q, r = np.linalg.qr(g)
    diag = np.einsum("bii->bi", r)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def hciz_check(
    a_matrix,
    b_diag,
    z: complex,
    n_samples: int = 1_000_000,
    seed: int = 5150,
    batch: int = 50_000,
) -> HcizReport:
    """Monte Carlo over Haar unitaries vs the closed form; reports a z-score.

    A may be any normal 2x2 or 3x3 matrix (eigenvalues are extracted), B is a
    real diagonal.  Raises DegenerateSpectrumError when either spectrum has a
    repeated eigenvalue.
    """
    a = np.asarray(a_matrix, dtype=complex)
    if a.shape[0] != a.shape[1] or a.shape[0] not in (2, 3):
        raise ValueError("A must be 2x2 or 3x3")
    if np.abs(a @ a.conj().T - a.conj().T @ a).max() > 1e-10 * (np.abs(a).max() + 1) ** 2:
        raise ValueError("A must be normal")
    b = np.asarray(b_diag, dtype=float)
    a_evals = np.linalg.eigvals(a)
    closed = hciz_closed_form(a_evals, b, z)
    n = a.shape[0]
    bmat = np.diag(b).astype(complex)
    vals = np.empty(n_samples, dtype=complex)
    done = 0
    batch_index = 0
    while done < n_samples:
        count = min(batch, n_samples - done)
        u = haar_unitaries(n, count, seed, batch_index)
        inner = np.einsum("bij,jk,bkl,li->b", u.conj().transpose(0, 2, 1), bmat, u, a)
        vals[done : done + count] = np.exp(z * inner)
        done += count
        batch_index += 1
    mean = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(n_samples)
    z_score = abs(mean - closed) / se if se > 0 else math.inf
    return HcizReport(
        mc_mean=complex(mean),
        mc_std_error=float(se),
        closed_form=complex(closed),
        z_score=float(z_score),
        n_samples=n_samples,
    )
