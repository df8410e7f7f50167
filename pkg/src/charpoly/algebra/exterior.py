"""Operators on exterior powers and their wedge product.

An operator on the k-th exterior power of C^n is stored densely in the basis
e_{a_1} ^ ... ^ e_{a_k} over strictly increasing index tuples in
lexicographic order.  The wedge of operators A (level q) and B (level r) is
the alternation of A tensor B restricted to level q + r; in coordinates

    (A ^ B)_{ab} = (q! r! / (q+r)!) *
        sum over (q,r)-shuffles pi, sigma of sgn(pi) sgn(sigma)
            A_{a_pi', b_sigma'} B_{a_pi'', b_sigma''},

where a_pi' keeps the q entries selected by pi and a_pi'' the rest.  The
top-level builder combines coupling-weighted factors over all partitions
k_1 + 2 k_2 + ... + 2m k_2m = 2m and reads off the resulting scalar on the
one-dimensional top exterior power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..ensemble import CouplingSet

__all__ = [
    "multi_indices",
    "shuffle_splits",
    "ExteriorOperator",
    "wedge_operators",
    "wedge_power",
    "compound_matrix",
    "build_A2m",
    "partitions_weighted",
]


def multi_indices(n: int, k: int):
    """Strictly increasing k-tuples from 1..n in lexicographic order."""
    return [tuple(c) for c in combinations(range(1, n + 1), k)]


def shuffle_splits(q: int, r: int):
    """(positions_for_A, positions_for_B, sign) for all (q, r)-shuffles."""
    out = []
    allpos = range(q + r)
    for sel in combinations(allpos, q):
        rest = tuple(i for i in allpos if i not in sel)
        swaps = sum(sel[i] - i for i in range(q))
        out.append((sel, rest, -1.0 if swaps % 2 else 1.0))
    return out


@dataclass
class ExteriorOperator:
    """Dense matrix of an operator on the level-k exterior power of C^n."""

    n: int
    level: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dim = math.comb(self.n, self.level)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"level-{self.level} operator on C^{self.n} needs a "
                f"{dim}x{dim} matrix, got {self.matrix.shape}"
            )

    @staticmethod
    def identity(n: int, level: int) -> "ExteriorOperator":
        dim = math.comb(n, level)
        return ExteriorOperator(n, level, np.eye(dim, dtype=complex))

    @staticmethod
    def from_level1(n: int, matrix) -> "ExteriorOperator":
        return ExteriorOperator(n, 1, np.asarray(matrix, dtype=complex))

    @staticmethod
    def diagonal_level1(values) -> "ExteriorOperator":
        values = list(values)
        return ExteriorOperator(len(values), 1, np.diag(np.asarray(values, complex)))

    @staticmethod
    def top_scalar(n: int, value: complex) -> "ExteriorOperator":
        return ExteriorOperator(n, n, np.array([[value]], dtype=complex))

    def scale(self, c: complex) -> "ExteriorOperator":
        return ExteriorOperator(self.n, self.level, self.matrix * c)

    def minus_identity_times(self, c: complex) -> "ExteriorOperator":
        dim = math.comb(self.n, self.level)
        return ExteriorOperator(self.n, self.level, self.matrix - c * np.eye(dim))

    def as_scalar(self) -> complex:
        if self.level != self.n:
            raise ValueError("only the top level is canonically a scalar")
        return complex(self.matrix[0, 0])


def wedge_operators(a: ExteriorOperator, b: ExteriorOperator) -> ExteriorOperator:
    """Exterior product of operators by the shuffle-sum formula."""
    if a.n != b.n:
        raise ValueError("operators live on different ambient spaces")
    q, r = a.level, b.level
    n = a.n
    if q + r > n:
        raise ValueError(f"level overflow: {q} + {r} > {n}")
    idx_q = multi_indices(n, q)
    idx_r = multi_indices(n, r)
    idx_qr = multi_indices(n, q + r)
    pos_q = {t: i for i, t in enumerate(idx_q)}
    pos_r = {t: i for i, t in enumerate(idx_r)}
    shuffles = shuffle_splits(q, r)
    dim = len(idx_qr)
    out = np.zeros((dim, dim), dtype=complex)
    factor = math.factorial(q) * math.factorial(r) / math.factorial(q + r)
    for ia, alpha in enumerate(idx_qr):
        a_parts = [
            (pos_q[tuple(alpha[i] for i in sel)], pos_r[tuple(alpha[i] for i in rest)], sg)
            for sel, rest, sg in shuffles
        ]
        for ib, beta in enumerate(idx_qr):
            acc = 0.0 + 0.0j
            for sel, rest, sg_b in shuffles:
                b_first = pos_q[tuple(beta[i] for i in sel)]
                b_second = pos_r[tuple(beta[i] for i in rest)]
                for a_first, a_second, sg_a in a_parts:
                    acc += (
                        sg_a
                        * sg_b
                        * a.matrix[a_first, b_first]
                        * b.matrix[a_second, b_second]
                    )
            out[ia, ib] = factor * acc
    return ExteriorOperator(n, q + r, out)


def wedge_power(a: ExteriorOperator, k: int) -> ExteriorOperator:
    if k < 1:
        raise ValueError("wedge power needs k >= 1")
    out = a
    for _ in range(k - 1):
        out = wedge_operators(out, a)
    return out


def compound_matrix(u: np.ndarray, level: int) -> ExteriorOperator:
    """The induced operator on the level-k exterior power (minor determinants)."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    idx = multi_indices(n, level)
    dim = len(idx)
    out = np.empty((dim, dim), dtype=complex)
    for i, alpha in enumerate(idx):
        rows = [a - 1 for a in alpha]
        for j, beta in enumerate(idx):
            cols = [b - 1 for b in beta]
            out[i, j] = np.linalg.det(u[np.ix_(rows, cols)])
    return ExteriorOperator(n, level, out)


def partitions_weighted(two_m: int):
    """All (k_1, ..., k_2m) with k_1 + 2 k_2 + ... + 2m k_2m = 2m."""
    results = []

    def recurse(q, remaining, acc):
        if q > two_m:
            if remaining == 0:
                results.append(tuple(acc))
            return
        max_k = remaining // q
        for k in range(max_k + 1):
            recurse(q + 1, remaining - q * k, acc + [k])

    recurse(1, two_m, [])
    return results


def build_A2m(
    level1: ExteriorOperator,
    higher: dict,
    couplings: CouplingSet,
) -> complex:
    """Top-level scalar sum over partitions of coupling-weighted wedges.

    level1 is the level-1 factor (diagonal T or any conjugated version);
    higher maps level l >= 2 to the corresponding operator.  Each partition
    (k_1, ..., k_2m) contributes

        (2m)! * prod_q 1/((q!)^{k_q} k_q!) *
            wedge over q of (b_q G_q - btilde_q I)^(^ k_q)

    with G_1 = level1 (btilde_1 = 0).  At order 1 this reproduces
    b2 s - t1 t2 as a bilinear polynomial; partitions with k_q > 0 but no
    operator provided raise.
    """
    two_m = 2 * couplings.m
    n = level1.n
    if n != two_m:
        raise ValueError(f"level-1 operator must act on C^{two_m}, got C^{n}")
    if level1.level != 1:
        raise ValueError("first factor must be a level-1 operator")
    for l, op in higher.items():
        if not 2 <= l <= two_m:
            raise ValueError(f"operator level {l} outside 2..{two_m}")
        if op.n != two_m or op.level != l:
            raise ValueError(f"operator for level {l} has wrong dimensions")
    total = 0.0 + 0.0j
    for part in partitions_weighted(two_m):
        weight = math.factorial(two_m)
        for q, k in enumerate(part, start=1):
            weight /= math.factorial(q) ** k * math.factorial(k)
        factors = []
        usable = True
        for q, k in enumerate(part, start=1):
            if k == 0:
                continue
            if q == 1:
                base = level1.scale(couplings.b[0])
            else:
                if q not in higher:
                    usable = False
                    break
                base = higher[q].scale(couplings.b[q - 1]).minus_identity_times(
                    couplings.b_tilde[q - 1]
                )
            factors.extend([base] * k)
        if not usable:
            raise ValueError(
                f"partition {part} needs a level operator that was not provided"
            )
        wedge = factors[0]
        for f in factors[1:]:
            wedge = wedge_operators(wedge, f)
        total += weight * wedge.as_scalar()
    return total
