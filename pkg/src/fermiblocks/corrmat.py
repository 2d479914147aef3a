"""Correlation matrices of block unions and principal Toeplitz sub-matrices."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .symbol import Symbol, SymbolKind, fourier_coefficients

__all__ = [
    "BlockSet",
    "ModeSet",
    "CorrelationMatrix",
    "builtin_modes",
    "build_finite",
    "build_thermodynamic",
    "toeplitz_submatrix",
    "finite_vs_thermo_gap",
    "dump_matrix",
    "load_matrix",
]

HERMITIAN_TOL = 1e-13
FBM_MAGIC = b"FBM1"


@dataclass(frozen=True)
class BlockSet:
    """Sorted union of disjoint half-open site intervals ``[u, v)``.

    Adjacent blocks must be separated by at least one site; ``v_i == u_{i+1}``
    would describe a single block and is rejected.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((int(u), int(v)) for u, v in self.blocks)
        if not blocks:
            raise ValueError("BlockSet needs at least one block")
        for u, v in blocks:
            if not u < v:
                raise ValueError(f"empty block [{u}, {v})")
        for (_, v1), (u2, _) in zip(blocks, blocks[1:]):
            if not v1 < u2:
                raise ValueError("blocks must be sorted, disjoint and non-abutting")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_lengths(cls, lengths: Sequence[int], gaps: Sequence[int], start: int = 0) -> "BlockSet":
        """Blocks of the given lengths separated by the given gaps (len(gaps) == len(lengths) - 1)."""
        if len(gaps) != len(lengths) - 1:
            raise ValueError("need one gap between each pair of blocks")
        blocks, u = [], int(start)
        for i, n in enumerate(lengths):
            blocks.append((u, u + int(n)))
            if i < len(gaps):
                u += int(n) + int(gaps[i])
        return cls(tuple(blocks))

    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        return sum(v - u for u, v in self.blocks)

    @property
    def u(self) -> tuple:
        return tuple(b[0] for b in self.blocks)

    @property
    def v(self) -> tuple:
        return tuple(b[1] for b in self.blocks)

    def sites(self) -> np.ndarray:
        return np.concatenate([np.arange(u, v) for u, v in self.blocks])

    def shifted(self, k: int) -> "BlockSet":
        return BlockSet(tuple((u + k, v + k) for u, v in self.blocks))

    def scaled(self, factor: int) -> "BlockSet":
        return BlockSet(tuple((u * factor, v * factor) for u, v in self.blocks))

    def single(self, i: int) -> "BlockSet":
        return BlockSet((self.blocks[i],))

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def interval(u: int, v: int) -> BlockSet:
    return BlockSet(((u, v),))


@dataclass(frozen=True)
class ModeSet:
    """Occupied momenta ``K`` of a chain of even length ``N``.

    Members live in ``{-N/2, ..., N/2 - 1}``; other integers are reduced mod N.
    """

    N: int
    K: frozenset

    def __post_init__(self):
        N = int(self.N)
        if N <= 0 or N % 2:
            raise ValueError("chain length N must be a positive even integer")
        reduced = [((int(k) + N // 2) % N) - N // 2 for k in self.K]
        if len(set(reduced)) != len(reduced):
            raise ValueError("duplicate modes in K")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "K", frozenset(reduced))


def builtin_modes(state, N: int) -> ModeSet:
    """Finite-chain momentum sets whose thermodynamic densities are states 0-3.

    States 1 and 3 need ``N`` divisible by 4.
    """
    key = str(state)
    if key in ("1", "3") and N % 4:
        raise ValueError("states 1 and 3 need N divisible by 4")
    if key == "0":
        K = ()
    elif key == "1":
        K = range(-N // 4 + 1, N // 4 + 1)
    elif key == "2":
        K = range(-N // 2 + 2, N // 2 + 1, 2)
    elif key == "3":
        K = range(-N // 4 + 2, N // 4 + 1, 2)
    else:
        raise ValueError(f"no finite mode set for state {state!r}")
    return ModeSet(N, frozenset(K))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Dense Hermitian matrix indexed by the sites of a BlockSet."""

    entries: np.ndarray
    sites: np.ndarray
    provenance: Union[Symbol, ModeSet] = field(repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)
        self.sites.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def occupation(self) -> bool:
        """True when the spectrum must lie in [-1, 1]."""
        prov = self.provenance
        return isinstance(prov, ModeSet) or prov.kind is SymbolKind.OCCUPATION

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        M = self.entries
        return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def _from_differences(sites: np.ndarray, coeff) -> np.ndarray:
    diff = sites[:, None] - sites[None, :]
    uniq, inv = np.unique(diff, return_inverse=True)
    vals = coeff(uniq)
    M = vals[inv].reshape(diff.shape)
    # exact Hermiticity
    return 0.5 * (M + M.conj().T)


def _geometric_mode_sum(K: Iterable[int], N: int, d: np.ndarray) -> np.ndarray:
    """sum_{k in K} exp(2 pi i k d / N) for each integer d, via arithmetic runs of K."""
    ks = sorted(K)
    out = np.zeros(d.shape, dtype=complex)
    i = 0
    while i < len(ks):
        # maximal arithmetic progression starting at ks[i]
        if i + 1 < len(ks):
            step = ks[i + 1] - ks[i]
            j = i + 1
            while j + 1 < len(ks) and ks[j + 1] - ks[j] == step:
                j += 1
        else:
            step, j = 1, i
        k0, n = ks[i], j - i + 1
        # reduce phases mod N so the d*k products stay exact integers
        phase0 = np.mod(d * k0, N) * (2 * math.pi / N)
        ratio_idx = np.mod(d * step, N)
        trivial = ratio_idx == 0
        res = np.empty(d.shape, dtype=complex)
        res[trivial] = n * np.exp(1j * phase0[trivial])
        r = ratio_idx[~trivial] * (2 * math.pi / N)
        num = 1.0 - np.exp(1j * np.mod(ratio_idx[~trivial] * n, N) * (2 * math.pi / N))
        res[~trivial] = np.exp(1j * phase0[~trivial]) * num / (1.0 - np.exp(1j * r))
        out += res
        i = j + 1
    return out


def build_finite(modes: ModeSet, X: BlockSet) -> CorrelationMatrix:
    """V_X for the Slater state with occupied momenta ``modes.K`` on a periodic chain.

    Entry (n, m) is (1/N)(sum_{k in K} - sum_{k not in K}) exp(i theta_k (n - m)).
    """
    sites = X.sites()
    N = modes.N
    if sites.max() - sites.min() + 1 > N:
        raise ValueError(f"subsystem spans {sites.max() - sites.min() + 1} sites, chain has {N}")

    def coeff(d):
        d = d.astype(np.int64)
        occupied = _geometric_mode_sum(modes.K, N, d)
        total = np.where(np.mod(d, N) == 0, float(N), 0.0)
        return (2.0 * occupied - total) / N

    return CorrelationMatrix(_from_differences(sites, coeff), sites, modes)


def build_thermodynamic(s: Symbol, X: BlockSet) -> CorrelationMatrix:
    """Infinite-chain V_X: entry (n, m) is the Fourier coefficient of ``s`` at n - m."""
    sites = X.sites()
    M = _from_differences(sites, lambda d: fourier_coefficients(s, d))
    return CorrelationMatrix(M, sites, s)


def toeplitz_submatrix(s: Symbol, K: BlockSet) -> CorrelationMatrix:
    """Principal sub-matrix T_K of the Toeplitz matrix with symbol ``s``."""
    if K.size == 0:
        raise ValueError("empty index set")
    return build_thermodynamic(s, K)


def finite_vs_thermo_gap(modes: ModeSet, s: Symbol, X: BlockSet) -> float:
    """Largest entrywise difference between the finite-N and infinite-chain matrices."""
    A = build_finite(modes, X).entries
    B = build_thermodynamic(s, X).entries
    return float(np.max(np.abs(A - B)))


def dump_matrix(M: CorrelationMatrix | np.ndarray, path) -> None:
    """Write ``FBM1`` + uint64 dim + row-major (re, im) float64 pairs, little endian."""
    A = np.asarray(getattr(M, "entries", M), dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    with open(path, "wb") as fh:
        fh.write(FBM_MAGIC)
        fh.write(struct.pack("<Q", A.shape[0]))
        fh.write(np.ascontiguousarray(A).astype("<c16").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != FBM_MAGIC:
            raise ValueError("not an FBM1 file")
        (dim,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(16 * dim * dim), dtype="<c16")
    if data.size != dim * dim:
        raise ValueError("truncated FBM1 file")
    return data.reshape(dim, dim).astype(np.complex128)
