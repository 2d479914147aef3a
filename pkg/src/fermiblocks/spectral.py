"""Spectra of correlation matrices, Renyi entropies and log-determinants.

Entropies are in nats.  The Renyi index is a positive float, or the
:data:`VN` sentinel for the von Neumann limit alpha -> 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg
from scipy.special import entr

from .corrmat import CorrelationMatrix, HERMITIAN_TOL

__all__ = [
    "VonNeumann",
    "VN",
    "as_alpha",
    "alpha_label",
    "Spectrum",
    "SpectrumError",
    "eigenvalues",
    "eigen_residuals",
    "entropy_from_spectrum",
    "renyi_entropy",
    "renyi_terms",
    "log_abs_det",
]

CLAMP_TOL = 1e-10
SINGULAR_TOL = 1e-300
REAL_PATH_TOL = 1e-15


class VonNeumann:
    """The alpha -> 1 limit of the Renyi index."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VN"

    def __reduce__(self):
        return (VonNeumann, ())


VN = VonNeumann()
RenyiIndex = Union[float, VonNeumann]


def as_alpha(a) -> RenyiIndex:
    """Normalise a Renyi index: ``1``, ``"vn"`` and ``"1"`` map to :data:`VN`."""
    if a is VN:
        return VN
    if isinstance(a, str):
        if a.strip().lower() in ("vn", "1", "von_neumann", "vonneumann"):
            return VN
        a = float(a)
    a = float(a)
    if not a > 0 or not math.isfinite(a):
        raise ValueError(f"Renyi index must be a positive finite number, got {a}")
    if a == 1.0:
        return VN
    return a


def alpha_label(a: RenyiIndex) -> str:
    return "VN" if a is VN else format(float(a), "g")


class SpectrumError(ValueError):
    """Non-Hermitian input or eigenvalues outside the allowed range."""


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    clamp: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.values.size)


def _as_array(M) -> np.ndarray:
    return np.asarray(getattr(M, "entries", M))


def _hermitian_solve_input(A: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(A):
        scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
        if np.max(np.abs(A.imag), initial=0.0) <= REAL_PATH_TOL * scale:
            return np.ascontiguousarray(A.real)
    return A


def eigenvalues(M, occupation: bool | None = None) -> Spectrum:
    """Full ascending spectrum of a Hermitian matrix (LAPACK divide and conquer).

    For occupation-density matrices the values are clamped onto [-1, 1];
    excursions beyond ``CLAMP_TOL`` raise :class:`SpectrumError`.
    """
    A = _as_array(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpectrumError("need a square matrix")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A - A.conj().T), initial=0.0) > HERMITIAN_TOL * scale * 10:
        raise SpectrumError("matrix is not Hermitian")
    if occupation is None:
        occupation = bool(getattr(M, "occupation", False))
    try:
        vals = scipy.linalg.eigvalsh(_hermitian_solve_input(A), check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SpectrumError(f"eigensolver failed: {exc}") from exc
    clamp = 0.0
    if occupation and vals.size:
        excess = max(float(vals[-1]) - 1.0, -1.0 - float(vals[0]), 0.0)
        if excess > CLAMP_TOL:
            raise SpectrumError(f"eigenvalue outside [-1, 1] by {excess:.3e}")
        clamp = excess
        vals = np.clip(vals, -1.0, 1.0)
    return Spectrum(vals, clamp)


def eigen_residuals(M, count: int = 5, seed: int = 0) -> np.ndarray:
    """||M x - v x|| for ``count`` randomly chosen eigenpairs (diagnostic)."""
    A = _as_array(M)
    w, V = np.linalg.eigh(A)
    rng = np.random.default_rng(seed)
    idx = rng.choice(w.size, size=min(count, w.size), replace=False)
    return np.array([np.linalg.norm(A @ V[:, i] - w[i] * V[:, i]) for i in idx])


def entropy_from_spectrum(sp, a: RenyiIndex) -> float:
    """Sum over eigenvalues of the single-mode Renyi (or von Neumann) entropy."""
    v = np.asarray(getattr(sp, "values", sp), dtype=float)
    a = as_alpha(a)
    p = np.clip(0.5 * (1.0 + v), 0.0, 1.0)
    q = np.clip(0.5 * (1.0 - v), 0.0, 1.0)
    if a is VN:
        return float(math.fsum(entr(p) + entr(q)))
    return float(math.fsum(renyi_terms(p, q, a)))


def renyi_terms(p: np.ndarray, q: np.ndarray, a: float) -> np.ndarray:
    """log(p^a + q^a) / (1 - a) elementwise, accurate as a -> 1.

    Written as log1p of p (p^(a-1) - 1) + q (q^(a-1) - 1) + (p + q - 1) so that
    nothing cancels when a is within rounding of 1.
    """
    def part(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, x * np.expm1((a - 1.0) * np.log(np.where(x > 0, x, 1.0))), 0.0)

    return np.log1p(part(p) + part(q) + ((p + q) - 1.0)) / (1.0 - a)


def renyi_entropy(M: CorrelationMatrix, a: RenyiIndex) -> float:
    return entropy_from_spectrum(eigenvalues(M), a)


def log_abs_det(M, method: str = "eigh") -> float:
    """log|det M|, accumulated in log space.

    ``method="eigh"`` sums log|v| over the Hermitian spectrum; ``"lu"`` uses a
    pivoted LU factorisation as an independent route.  An exactly singular
    matrix (some |v| below 1e-300) gives ``-inf``.
    """
    A = _as_array(M)
    if method == "eigh":
        vals = np.abs(eigenvalues(A, occupation=False).values)
        if vals.size and vals.min() < SINGULAR_TOL:
            return -math.inf
        return float(math.fsum(np.log(vals)))
    if method == "lu":
        with warnings.catch_warnings():
            # an exactly singular factor is reported through the -inf return value
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, _ = scipy.linalg.lu_factor(A, check_finite=True)
        diag = np.abs(np.diag(lu))
        if diag.min() < SINGULAR_TOL:
            return -math.inf
        return float(math.fsum(np.log(diag)))
    raise ValueError(f"unknown method {method!r}")
