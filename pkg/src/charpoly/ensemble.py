"""Sparse weighted random matrix ensemble and its coupling constants.

The matrix law is Hermitian with entries ``d_jk * w_jk`` where the dilution
factors d_jk equal p^(-1/2) with probability p/n (0 otherwise) and the
weights are Gaussian: off-diagonal w = w1 + i*w2 with Var(w1) = Var(w2) = 1/2,
real diagonal with variance 1.  At p = n the law is the GUE normalization
E|M_jk|^2 = 1/n.

Randomness is counter based.  Samples are grouped into fixed-size chunks and
each chunk owns a Philox substream keyed by (seed, stream << 40 | chunk), so
any sample can be regenerated in isolation and results never depend on worker
count or iteration order.  Within a chunk the draw order is pinned: Gaussian
weights first (real parts, imaginary parts, diagonal), Bernoulli uniforms
last.  Gaussians use numpy's ziggurat transform (Generator.standard_normal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EnsembleParams",
    "CouplingSet",
    "coupling_constants",
    "sample_matrix",
    "sample_chunk",
    "chunk_size",
    "empirical_spectrum",
    "SpectrumHistogram",
]

# Samples per substream for small matrices; shrinks with n so a chunk's draw
# buffers stay around 32 MB.  Part of the determinism contract: it depends
# only on n.
_CHUNK_BUDGET = 4_194_304


def chunk_size(n: int) -> int:
    return int(min(4096, max(1, _CHUNK_BUDGET // (n * n))))


@dataclass(frozen=True)
class EnsembleParams:
    """Matrix size n, sparsity p (edge probability p/n), and stream seed."""

    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0 < self.p <= self.n:
            raise ValueError(f"require 0 < p <= n, got p={self.p}, n={self.n}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class CouplingSet:
    """The n,p-dependent constants entering the integral representation.

    a[l-1] holds a_l for l = 1..2m, defined by matching
    exp(sum_l a_l y^l) = 1 + sum_l y^l / (l! p^(l-1) n) through degree 2m.
    b[l-1] = i^l l! sqrt(n a_l) (principal square root when a_l < 0) and
    b_tilde[l-1] is zero for odd l and (1/2 - 2^(-l/2)) a_{l/2} for even l.
    """

    n: int
    p: float
    m: int
    a: tuple = field(repr=False)
    b: tuple = field(repr=False)
    b_tilde: tuple = field(repr=False)

    @property
    def b2_repr(self) -> float:
        """The real constant -sqrt(4 n a_2) = -sqrt(2(n-p)/(pn)) used by the
        order-1 integral representation.  Equals b[1] since a_2 >= 0."""
        return -math.sqrt(4.0 * self.n * self.a[1])


def coupling_constants(n: int, p: float, m: int) -> CouplingSet:
    """Formal-logarithm computation of the coupling constants.

    With q_l = 1/(l! p^(l-1) n), the a_l are the power series coefficients of
    log(1 + sum q_l y^l), obtained from the standard recurrence
    a_l = q_l - (1/l) sum_{k<l} k a_k q_{l-k}.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"order m must be a positive integer, got {m}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 0 < p <= n:
        raise ValueError(f"require 0 < p <= n, got p={p}, n={n}")
    deg = 2 * m
    q = [0.0] * (deg + 1)
    for l in range(1, deg + 1):
        q[l] = 1.0 / (math.factorial(l) * p ** (l - 1) * n)
    a = [0.0] * (deg + 1)
    if p == n:
        # degenerate Bernoulli: the generating polynomial is the truncated
        # exp(y/n), whose formal log is y/n exactly through degree 2m
        a[1] = 1.0 / n
    else:
        for l in range(1, deg + 1):
            s = sum(k * a[k] * q[l - k] for k in range(1, l))
            a[l] = q[l] - s / l
    b = []
    for l in range(1, deg + 1):
        root = complex(n * a[l]) ** 0.5
        b.append((1j) ** l * math.factorial(l) * root)
    b_tilde = []
    for l in range(1, deg + 1):
        if l % 2 == 1:
            b_tilde.append(0.0)
        else:
            half = l // 2
            b_tilde.append((0.5 - 2.0 ** (-half)) * a[half])
    return CouplingSet(n=n, p=p, m=m, a=tuple(a[1:]), b=tuple(b), b_tilde=tuple(b_tilde))


def _chunk_generator(seed: int, stream: int, chunk_index: int) -> np.random.Generator:
    key2 = (np.uint64(stream) << np.uint64(40)) | np.uint64(chunk_index)
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), key2]))


def sample_chunk(params: EnsembleParams, chunk_index: int, stream: int = 0) -> np.ndarray:
    """All matrices of one substream chunk, shape (chunk_size(n), n, n)."""
    n = params.n
    c = chunk_size(n)
    rng = _chunk_generator(params.seed, stream, chunk_index)
    wr = rng.standard_normal((c, n, n)) * math.sqrt(0.5)
    wi = rng.standard_normal((c, n, n)) * math.sqrt(0.5)
    wd = rng.standard_normal((c, n))
    u = rng.random((c, n, n))
    d = (u < params.p / n) / math.sqrt(params.p)
    m = d * (wr + 1j * wi)
    out = np.triu(m, 1)
    out += out.conj().transpose(0, 2, 1)
    diag = d[:, np.arange(n), np.arange(n)] * wd
    out[:, np.arange(n), np.arange(n)] = diag
    return out


def sample_matrix(params: EnsembleParams, sample_index: int, stream: int = 0) -> np.ndarray:
    """One Hermitian sample, bit-identical however its chunk is consumed."""
    if sample_index < 0:
        raise ValueError("sample_index must be nonnegative")
    c = chunk_size(params.n)
    return sample_chunk(params, sample_index // c, stream)[sample_index % c]


def iter_sample_batches(params: EnsembleParams, n_samples: int, stream: int = 0):
    """Yield (start_index, stack) pairs covering samples 0..n_samples-1."""
    c = chunk_size(params.n)
    done = 0
    chunk = 0
    while done < n_samples:
        block = sample_chunk(params, chunk, stream)
        take = min(c, n_samples - done)
        yield done, block[:take]
        done += take
        chunk += 1


@dataclass
class SpectrumHistogram:
    edges: np.ndarray
    mass: np.ndarray
    eigenvalues: np.ndarray

    def total_mass(self) -> float:
        return float(self.mass.sum())


def empirical_spectrum(
    params: EnsembleParams,
    n_samples: int,
    bins: int = 120,
    grid_range: tuple = (-4.0, 4.0),
) -> SpectrumHistogram:
    """Pooled eigenvalue histogram over n_samples matrices.

    Mass is a probability per bin (sums to 1 including overflow bins at the
    grid ends).  Eigensolver failures propagate as LinAlgError rather than
    being skipped.
    """
    if params.n < 2:
        raise ValueError("spectral diagnostics need n >= 2")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    evs = []
    for _, block in iter_sample_batches(params, n_samples):
        vals = np.linalg.eigvalsh(block)
        if not np.isfinite(vals).all():
            raise np.linalg.LinAlgError("eigen-solver returned non-finite eigenvalues")
        evs.append(vals.ravel())
    pooled = np.sort(np.concatenate(evs))
    lo, hi = grid_range
    edges = np.linspace(lo, hi, bins + 1)
    clipped = np.clip(pooled, lo, np.nextafter(hi, lo))
    counts, _ = np.histogram(clipped, bins=edges)
    mass = counts / pooled.size
    return SpectrumHistogram(edges=edges, mass=mass, eigenvalues=pooled)
