"""Complex log-Gamma (Lanczos) and the Gamma-ratio phase used by the constant term."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["loggamma", "log_gamma_ratio"]

# Lanczos coefficients, g = 7, n = 9 (relative accuracy ~1e-15 for Re z >= 1/2).
_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def loggamma(z):
    """log Gamma(z) on the continuous branch, for Re z >= 1/2 (vectorised)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.real < 0.5):
        raise ValueError("loggamma implemented for Re z >= 1/2 only")
    zm = z - 1.0
    acc = np.full(zm.shape, _COEF[0], dtype=complex)
    for k, c in enumerate(_COEF[1:], start=1):
        acc = acc + c / (zm + k)
    t = zm + _G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma_ratio(w):
    """Imaginary part of log[Gamma(1/2 - i w) / Gamma(1/2 + i w)], i.e. -2 Im log Gamma(1/2 + i w).

    The ratio has unit modulus for real ``w`` so its logarithm is purely
    imaginary; only the imaginary part is returned.
    """
    w = np.asarray(w, dtype=float)
    out = -2.0 * loggamma(0.5 + 1j * w).imag
    return out if out.ndim else float(out)
