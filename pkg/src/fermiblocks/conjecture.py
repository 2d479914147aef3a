"""Multi-block asymptotics: entropies, mutual information and sub-matrix determinants.

Blocks are half-open ``[u, v)``; every distance below is a raw endpoint
difference, so a block has length ``v - u`` and the gap between blocks
``i < j`` is ``u_j - v_i``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

from .asymptotics import coefficients, single_interval_expansion, weight_for
from .corrmat import BlockSet, build_thermodynamic, interval, toeplitz_submatrix
from .spectral import eigenvalues, entropy_from_spectrum, log_abs_det, renyi_entropy
from .symbol import Symbol

__all__ = [
    "SingularMatrixError",
    "cross_ratio",
    "cross_ratios",
    "cross_ratio_product",
    "entropy_conjecture",
    "entropy_decomposition",
    "mutual_information_conjecture",
    "mutual_information_numeric",
    "mutual_information_numeric_many",
    "tripartite_information",
    "log_det",
    "det_conjecture_log_rhs",
    "det_mutual_information_numeric",
    "det_mutual_information_conjecture",
]


class SingularMatrixError(ArithmeticError):
    pass


def cross_ratio(b1: tuple, b2: tuple) -> float:
    """(u2 - v1)(v2 - u1) / ((u2 - u1)(v2 - v1)) for blocks b1 before b2."""
    (u1, v1), (u2, v2) = b1, b2
    return ((u2 - v1) * (v2 - u1)) / ((u2 - u1) * (v2 - v1))


def cross_ratios(X: BlockSet) -> dict:
    """All pairwise cross ratios y_ij, keyed by (i, j) with i < j."""
    if X.p < 2:
        raise ValueError("cross ratios need at least two blocks")
    return {(i, j): cross_ratio(X.blocks[i], X.blocks[j])
            for i, j in combinations(range(X.p), 2)}


def cross_ratio_product(X: BlockSet) -> float:
    if X.p < 2:
        return 1.0
    return math.prod(cross_ratios(X).values())


def _log_geometry(X: BlockSet) -> float:
    """log[ prod_{i,j} |u_i - v_j| / prod_{i<j} (u_j - u_i)(v_j - v_i) ]."""
    u, v = X.u, X.v
    num = math.fsum(math.log(abs(ui - vj)) for ui in u for vj in v)
    den = math.fsum(math.log(u[j] - u[i]) + math.log(v[j] - v[i])
                    for i, j in combinations(range(X.p), 2))
    return num - den


def entropy_conjecture(s: Symbol, a, X: BlockSet) -> float:
    c = coefficients(s, weight_for(a))
    return c.A * X.size + c.B * _log_geometry(X) + X.p * c.C


def entropy_decomposition(s: Symbol, a, X: BlockSet) -> float:
    """The same asymptotic entropy written as a signed sum of single-interval expansions."""
    w = weight_for(a)
    u, v = X.u, X.v
    S = lambda lo, hi: single_interval_expansion(s, w, hi - lo)
    terms = [S(u[j], v[i]) for i in range(X.p) for j in range(i + 1)]
    for i, j in combinations(range(X.p), 2):
        terms += [S(v[i], u[j]), -S(v[i], v[j]), -S(u[i], u[j])]
    return math.fsum(terms)


def mutual_information_conjecture(s: Symbol, a, X: BlockSet) -> float:
    """-B log prod_{i<j} y_ij."""
    if X.p < 2:
        raise ValueError("mutual information needs at least two blocks")
    B = coefficients(s, weight_for(a)).B
    return -B * math.fsum(math.log(y) for y in cross_ratios(X).values())


@lru_cache(maxsize=4096)
def _block_spectrum(s: Symbol, length: int):
    # translation invariance: a single block's spectrum depends only on its length
    return eigenvalues(build_thermodynamic(s, interval(0, length)))


def mutual_information_numeric(s: Symbol, a, X: BlockSet) -> float:
    """sum_i S(block_i) - S(union), every entropy from the exact spectrum."""
    return mutual_information_numeric_many(s, [a], X)[0]


def mutual_information_numeric_many(s: Symbol, alphas, X: BlockSet) -> list:
    """:func:`mutual_information_numeric` for several indices from one diagonalisation."""
    union = eigenvalues(build_thermodynamic(s, X))
    singles = [_block_spectrum(s, v - u) for u, v in X.blocks]
    out = []
    for a in alphas:
        parts = [entropy_from_spectrum(sp, a) for sp in singles]
        out.append(math.fsum(parts) - entropy_from_spectrum(union, a))
    return out


def tripartite_information(s: Symbol, a, X: BlockSet) -> float:
    """S1 + S2 + S3 - S12 - S13 - S23 + S123 for three blocks (numeric)."""
    if X.p != 3:
        raise ValueError("tripartite information needs exactly three blocks")
    total = 0.0
    for k in (1, 2, 3):
        sign = 1.0 if k % 2 else -1.0
        for idx in combinations(range(3), k):
            sub = BlockSet(tuple(X.blocks[i] for i in idx))
            total += sign * renyi_entropy(build_thermodynamic(s, sub), a)
    return total


@lru_cache(maxsize=8192)
def _interval_log_det(s: Symbol, length: int) -> float:
    return log_det(s, interval(0, length))


def log_det(s: Symbol, K: BlockSet) -> float:
    """log|D(K)| of the principal Toeplitz sub-matrix on K."""
    val = log_abs_det(toeplitz_submatrix(s, K))
    if math.isinf(val):
        raise SingularMatrixError(f"singular sub-matrix on {K.blocks}")
    return val


def det_conjecture_log_rhs(s: Symbol, X: BlockSet) -> float:
    """log of the product of single-interval Toeplitz determinants that should match D(X)."""
    u, v = X.u, X.v
    D = lambda lo, hi: _interval_log_det(s, hi - lo)
    terms = [D(a, b) for a, b in X.blocks]
    for i, j in combinations(range(X.p), 2):
        terms += [D(u[i], v[j]), D(v[i], u[j]), -D(u[i], u[j]), -D(v[i], v[j])]
    return math.fsum(terms)


def det_mutual_information_numeric(s: Symbol, X: BlockSet) -> float:
    """log D(X_1) + log D(X_2) - log D(X_1 u X_2)."""
    if X.p != 2:
        raise ValueError("determinant mutual information is defined for two blocks")
    singles = math.fsum(_interval_log_det(s, v - u) for u, v in X.blocks)
    return singles - log_det(s, X)


def det_mutual_information_conjecture(s: Symbol, X: BlockSet) -> float:
    """-B_D log y with B_D the log-determinant log coefficient."""
    return mutual_information_conjecture(s, "logdet", X)
