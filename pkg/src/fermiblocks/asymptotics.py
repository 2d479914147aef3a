"""Large-block expansion coefficients ``A L + B log L + C`` from Fisher-Hartwig data.

A weight function ``f`` turns the spectrum into the quantity of interest:
the Renyi weight for entropies, the binary entropy for von Neumann, and
``log`` for Toeplitz log-determinants.  The symbol enters only through
``A`` (an average of ``f(g)``) and through its jumps ``(theta_r, t_{r-1}, t_r)``,
which the log and constant coefficients integrate over with
double-exponential quadrature.

Jump ``r`` of a :class:`~fermiblocks.symbol.Symbol` sits at ``theta_r`` and
goes from ``t_{r-1} = t_left`` to ``t_r = t_right``; integrals over
``[t_{r-1}, t_r]`` keep their orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .quadrature import QuadratureError, tanh_sinh_split
from .spectral import VN, as_alpha, renyi_terms
from .specfun import log_gamma_ratio
from .symbol import Constant, Discontinuity, Symbol

__all__ = [
    "WeightFunction",
    "RenyiWeight",
    "VonNeumannWeight",
    "LogDetWeight",
    "weight_for",
    "AsymptoticCoefficients",
    "coeff_A",
    "omega",
    "coeff_J",
    "coeff_B",
    "coeff_I",
    "coeff_C",
    "coefficients",
    "closed_form_B_state3",
    "closed_form_B_state1",
    "single_interval_expansion",
]

TWO_PI = 2.0 * math.pi
TOL_J = 1e-10
TOL_I = 1e-9
TOL_A = 1e-10
LOGDET_MIN = 1e-6


class WeightFunction:
    """f(1, lambda) and its derivative in lambda."""

    label = ""

    def f(self, lam):
        raise NotImplementedError

    def df(self, lam):
        raise NotImplementedError

    def check_range(self, lo: float, hi: float) -> None:
        if lo < -1.0 or hi > 1.0:
            raise ValueError(f"{self.label} weight needs symbol values in [-1, 1]")

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class RenyiWeight(WeightFunction):
    def __init__(self, alpha: float):
        alpha = as_alpha(alpha)
        if alpha is VN:
            raise ValueError("use VonNeumannWeight for alpha = 1")
        self.alpha = alpha
        self.label = f"renyi_{alpha:g}"

    def f(self, lam):
        a = self.alpha
        lam = np.asarray(lam, dtype=float)
        return renyi_terms(0.5 * (1.0 + lam), 0.5 * (1.0 - lam), a)

    def df(self, lam):
        a = self.alpha
        lam = np.asarray(lam, dtype=float)
        p, q = 0.5 * (1.0 + lam), 0.5 * (1.0 - lam)
        return 0.5 * a / (1.0 - a) * (p ** (a - 1.0) - q ** (a - 1.0)) / (p ** a + q ** a)

    def __eq__(self, other):
        return isinstance(other, RenyiWeight) and other.alpha == self.alpha

    def __hash__(self):
        return hash(("renyi", self.alpha))


class VonNeumannWeight(WeightFunction):
    label = "vn"

    def f(self, lam):
        lam = np.asarray(lam, dtype=float)
        p, q = 0.5 * (1.0 + lam), 0.5 * (1.0 - lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.where(p > 0, p * np.log(p), 0.0) - np.where(q > 0, q * np.log(q), 0.0)
        return out

    def df(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 0.5 * (np.log1p(-lam) - np.log1p(lam))

    def __eq__(self, other):
        return isinstance(other, VonNeumannWeight)

    def __hash__(self):
        return hash("vn")


class LogDetWeight(WeightFunction):
    """f(lambda) = log lambda, for log-determinants of positive symbols."""

    label = "logdet"

    def f(self, lam):
        return np.log(np.asarray(lam, dtype=float))

    def df(self, lam):
        return 1.0 / np.asarray(lam, dtype=float)

    def check_range(self, lo: float, hi: float) -> None:
        if lo < LOGDET_MIN:
            raise ValueError("log-determinant weight needs symbol values >= 1e-6")

    def __eq__(self, other):
        return isinstance(other, LogDetWeight)

    def __hash__(self):
        return hash("logdet")


def weight_for(alpha) -> WeightFunction:
    """Weight for a Renyi index; ``"logdet"`` selects the log-determinant weight."""
    if isinstance(alpha, WeightFunction):
        return alpha
    if isinstance(alpha, str) and alpha.lower() in ("logdet", "log_det", "det"):
        return LogDetWeight()
    a = as_alpha(alpha)
    return VonNeumannWeight() if a is VN else RenyiWeight(a)


@dataclass(frozen=True)
class AsymptoticCoefficients:
    A: float
    B: float
    C: float
    J: np.ndarray
    I: np.ndarray
    quadrature_error: float
    jumps: tuple = ()


def coeff_A(s: Symbol, w: WeightFunction) -> float:
    """(1/2pi) int f(g(theta)) dtheta: exact on constant pieces, quadrature otherwise."""
    w.check_range(*s.value_range())
    total = 0.0
    for p in s.pieces:
        if isinstance(p.value, Constant):
            total += (p.hi - p.lo) * float(w.f(p.value.value))
        else:
            val, err = integrate.quad(lambda t: float(w.f(p.value(t))), p.lo, p.hi,
                                      epsabs=TOL_A, epsrel=0.0, limit=200)
            if err > TOL_A:
                raise QuadratureError(f"coeff_A quadrature error {err:.2e}")
            total += val
    return total / TWO_PI


def omega(jump: Discontinuity | tuple, lam):
    """(1/2pi) log|(lambda - t_r) / (lambda - t_{r-1})| for jump ``(theta, t_{r-1}, t_r)``."""
    _, t_prev, t_r = jump
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == t_prev) or np.any(lam == t_r):
        raise ValueError("omega is singular at the jump values")
    out = (np.log(np.abs(lam - t_r)) - np.log(np.abs(lam - t_prev))) / TWO_PI
    return out if out.ndim else float(out)


def _omega_unchecked(jump, lam):
    _, t_prev, t_r = jump
    return (np.log(np.abs(lam - t_r)) - np.log(np.abs(lam - t_prev))) / TWO_PI


def _jumps(s: Symbol):
    return s.discontinuities()


def _breaks(jumps) -> list:
    return sorted({t for j in jumps for t in (j.t_left, j.t_right)})


def coeff_J(s: Symbol, w: WeightFunction, r: int, r2: int, *, with_error: bool = False):
    """(1/2pi) int_{t_{r-1}}^{t_r} f'(lambda) omega_{r2}(lambda) dlambda (jump indices from 0)."""
    jumps = _jumps(s)
    if not jumps:
        raise ValueError("symbol has no discontinuities")
    jr, jq = jumps[r], jumps[r2]
    if abs(jq.t_right - jq.t_left) <= 0.0:
        return (0.0, 0.0) if with_error else 0.0
    res = tanh_sinh_split(lambda x: w.df(x) * _omega_unchecked(jq, x),
                          jr.t_left, jr.t_right, _breaks(jumps), tol=TOL_J * TWO_PI)
    val, err = res.value / TWO_PI, res.error / TWO_PI
    return (val, err) if with_error else val


def coeff_B(s: Symbol, w: WeightFunction) -> float:
    """2 sum_r J(r, r)."""
    return 2.0 * sum(coeff_J(s, w, r, r) for r in range(len(_jumps(s))))


def coeff_I(s: Symbol, w: WeightFunction, r: int, *, with_error: bool = False):
    """(1/2pi i) int_{t_{r-1}}^{t_r} f' log[Gamma(1/2 - i omega_r) / Gamma(1/2 + i omega_r)] dlambda."""
    jumps = _jumps(s)
    jr = jumps[r]

    def integrand(x):
        return w.df(x) * log_gamma_ratio(_omega_unchecked(jr, x))

    res = tanh_sinh_split(integrand, jr.t_left, jr.t_right, _breaks(jumps), tol=TOL_I * TWO_PI)
    val, err = res.value / TWO_PI, res.error / TWO_PI
    return (val, err) if with_error else val


def _pair_log(jumps, r, r2) -> float:
    x = 2.0 - 2.0 * math.cos(jumps[r].theta - jumps[r2].theta)
    if x <= 0.0:
        raise ValueError("coincident discontinuity angles")
    return math.log(x)


def coeff_C(s: Symbol, w: WeightFunction) -> float:
    """sum_r I(r) - sum_{r != r'} log(2 - 2 cos(theta_r - theta_r')) J(r, r').

    Only jump data enters; for symbols with smooth pieces the Szego-type
    contribution of the smooth part is not included.
    """
    return coefficients(s, w).C


@lru_cache(maxsize=256)
def coefficients(s: Symbol, w: WeightFunction) -> AsymptoticCoefficients:
    """All expansion coefficients with their intermediates (cached per symbol and weight)."""
    w = weight_for(w)
    A = coeff_A(s, w)
    jumps = _jumps(s)
    R = len(jumps)
    J = np.zeros((R, R))
    I = np.zeros(R)
    err = 0.0
    for r in range(R):
        for r2 in range(R):
            J[r, r2], e = coeff_J(s, w, r, r2, with_error=True)
            err = max(err, e)
        I[r], e = coeff_I(s, w, r, with_error=True)
        err = max(err, e)
    B = 2.0 * float(np.trace(J))
    C = float(math.fsum(I))
    for r in range(R):
        for r2 in range(R):
            if r != r2:
                C -= _pair_log(jumps, r, r2) * J[r, r2]
    J.setflags(write=False)
    I.setflags(write=False)
    return AsymptoticCoefficients(A, B, C, J, I, err, jumps)


def closed_form_B_state1(a) -> float:
    """(alpha + 1) / (6 alpha)."""
    a = as_alpha(a)
    a = 1.0 if a is VN else a
    return (a + 1.0) / (6.0 * a)


def closed_form_B_state3(a) -> float:
    """Log coefficient of state 3 for integer alpha >= 2, or von Neumann."""
    a = as_alpha(a)
    if a is VN:
        return 0.125 - 0.5 * (math.log(2.0) / math.pi) ** 2
    if a != int(a) or a < 2:
        raise ValueError("closed form needs integer alpha >= 2 or von Neumann")
    n = int(a)
    total = sum(math.log(math.sin((2 * l - 1) * math.pi / (2 * n))) ** 2 for l in range(1, n + 1))
    return (n + 1) / (24.0 * n) - total / (2.0 * math.pi ** 2 * (n - 1))


def single_interval_expansion(s: Symbol, w, L: int) -> float:
    """A L + B log L + C."""
    if L < 1:
        raise ValueError("block length must be positive")
    c = coefficients(s, weight_for(w))
    return c.A * L + c.B * math.log(L) + c.C
