"""Piecewise symbols g(theta) on the circle and their Fourier coefficients.

A symbol is a list of pieces on half-open angular intervals ``(lo, hi]`` that
tile ``(-pi, pi]``.  Each piece is either a constant, a tagged affine
trigonometric function (closed-form coefficients), or an arbitrary callable
(coefficients by adaptive quadrature).

The Fourier coefficient convention is

    c_d = (1/2pi) int_{-pi}^{pi} g(theta) exp(i d theta) dtheta,

which is the (n, m) entry of the Toeplitz matrix generated by ``g`` for
``d = n - m``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import integrate

from .quadrature import QuadratureError

__all__ = [
    "SymbolKind",
    "Constant",
    "Smooth",
    "Piece",
    "Symbol",
    "Discontinuity",
    "QuadratureError",
    "make_piecewise_constant",
    "builtin_state",
    "fourier_coefficient",
    "fourier_coefficients",
    "symbol_from_json",
    "symbol_to_json",
    "BUILTIN_STATES",
]

TWO_PI = 2.0 * math.pi
JUMP_TOL = 1e-12
PARTITION_TOL = 1e-14
QUAD_TOL = 1e-13


class SymbolKind(enum.Enum):
    OCCUPATION = "OccupationDensity"
    GENERIC = "GenericReal"


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, theta):
        return np.full_like(np.asarray(theta, dtype=float), self.value)


# Tagged smooth functions and their parameter counts; Fourier coefficients are closed form.
_SMOOTH_TAGS = {
    # a + b sin(theta)
    "affine_sin": 2,
    # a + b cos(theta)
    "affine_cos": 2,
}


@dataclass(frozen=True)
class Smooth:
    """A smooth piece: a tagged affine trig form or a user callable.

    ``fn`` is one of ``"affine_sin"`` (params ``a, b`` for a + b sin),
    ``"affine_cos"`` (a + b cos) or ``"callable"`` with ``func`` set.
    """

    fn: str
    params: tuple = ()
    func: Callable | None = None

    def __post_init__(self):
        if self.fn == "callable":
            if self.func is None:
                raise ValueError("callable piece needs func")
        elif self.fn in _SMOOTH_TAGS:
            if len(self.params) != _SMOOTH_TAGS[self.fn]:
                raise ValueError(f"{self.fn} takes {_SMOOTH_TAGS[self.fn]} params")
        else:
            raise ValueError(f"unknown smooth function tag {self.fn!r}")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.fn == "affine_sin":
            a, b = self.params
            return a + b * np.sin(theta)
        if self.fn == "affine_cos":
            a, b = self.params
            return a + b * np.cos(theta)
        return np.vectorize(self.func, otypes=[float])(theta)

    @property
    def closed_form(self) -> bool:
        return self.fn != "callable"


PieceValue = Union[Constant, Smooth]


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    value: PieceValue


class Discontinuity(NamedTuple):
    """A jump of the symbol at ``theta``: value ``t_left`` just below, ``t_right`` just above."""

    theta: float
    t_left: float
    t_right: float


_S = math.sqrt(0.5)
# exp(i m pi / 4) for m = 0..7, exact where the value is exact
_EIGHTH_ROOTS = np.array([1, _S + _S * 1j, 1j, -_S + _S * 1j, -1, -_S - _S * 1j, -1j, _S - _S * 1j])


def _phase(k: np.ndarray, x: float) -> np.ndarray:
    """exp(i k x) for integer k; exact table lookup when x is a multiple of pi/4.

    Breakpoints at 0, +-pi/2 and +-pi are the common case, and evaluating
    e.g. sin(k pi) in floating point would leave ~1e-16 garbage in entries
    that vanish identically.
    """
    m = x * 4.0 / math.pi
    mi = round(m)
    if abs(m - mi) <= 1e-15 * max(1.0, abs(m)):
        return _EIGHTH_ROOTS[(k.astype(np.int64) * int(mi)) % 8]
    return np.exp(1j * k * x)


def _exp_integral(k: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """int_lo^hi exp(i k theta) dtheta for an integer array k."""
    k = np.asarray(k, dtype=float)
    out = np.empty(k.shape, dtype=complex)
    zero = k == 0
    out[zero] = hi - lo
    kk = k[~zero]
    out[~zero] = (_phase(kk, hi) - _phase(kk, lo)) / (1j * kk)
    return out


def _piece_coefficients(piece: Piece, d: np.ndarray) -> np.ndarray:
    """(1/2pi) int over one piece of g exp(i d theta), vectorised over integer d."""
    lo, hi, val = piece.lo, piece.hi, piece.value
    if isinstance(val, Constant):
        return val.value * _exp_integral(d, lo, hi) / TWO_PI
    if val.fn == "affine_sin":
        a, b = val.params
        # sin = (e^{i theta} - e^{-i theta}) / 2i
        res = a * _exp_integral(d, lo, hi)
        res += b * (_exp_integral(d + 1, lo, hi) - _exp_integral(d - 1, lo, hi)) / 2j
        return res / TWO_PI
    if val.fn == "affine_cos":
        a, b = val.params
        res = a * _exp_integral(d, lo, hi)
        res += b * (_exp_integral(d + 1, lo, hi) + _exp_integral(d - 1, lo, hi)) / 2.0
        return res / TWO_PI
    return np.array([_quad_coefficient(val, lo, hi, int(di)) for di in d.ravel()],
                    dtype=complex).reshape(d.shape)


def _quad_coefficient(val: Smooth, lo: float, hi: float, d: int) -> complex:
    f = lambda t: float(val(t))
    limit = max(200, 4 * abs(d))
    opts = dict(limit=limit, epsabs=QUAD_TOL, epsrel=0.0, full_output=1)
    if d == 0:
        re, err_re, *_ = integrate.quad(f, lo, hi, **opts)
        im, err_im = 0.0, 0.0
    else:
        re, err_re, *_ = integrate.quad(f, lo, hi, weight="cos", wvar=d, **opts)
        im, err_im, *_ = integrate.quad(f, lo, hi, weight="sin", wvar=d, **opts)
    err = math.hypot(err_re, err_im) / TWO_PI
    if not err <= QUAD_TOL * 10:
        raise QuadratureError(f"Fourier coefficient d={d}: achieved error {err:.3e}")
    return complex(re, im) / TWO_PI


@dataclass(frozen=True)
class Symbol:
    """Piecewise function on ``(-pi, pi]``.

    Invariants (checked on construction): the pieces tile the circle without
    gaps or overlaps, and occupation-density symbols take values in [-1, 1].
    """

    pieces: tuple
    kind: SymbolKind = SymbolKind.OCCUPATION
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise ValueError("symbol needs at least one piece")
        if abs(self.pieces[0].lo + math.pi) > PARTITION_TOL:
            raise ValueError("first piece must start at -pi")
        if abs(self.pieces[-1].hi - math.pi) > PARTITION_TOL:
            raise ValueError("last piece must end at pi")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if abs(a.hi - b.lo) > PARTITION_TOL:
                raise ValueError(f"pieces do not abut at {a.hi} / {b.lo}")
        for p in self.pieces:
            if not p.hi > p.lo:
                raise ValueError(f"empty or reversed piece ({p.lo}, {p.hi}]")
        if self.kind is SymbolKind.OCCUPATION:
            lo, hi = self.value_range()
            if lo < -1.0 - JUMP_TOL or hi > 1.0 + JUMP_TOL:
                raise ValueError("occupation density must lie in [-1, 1]")

    def __call__(self, theta):
        """Evaluate g on angles, reduced to (-pi, pi]."""
        theta = np.asarray(theta, dtype=float)
        t = math.pi - np.mod(math.pi - theta, TWO_PI)
        out = np.empty_like(t)
        for i, p in enumerate(self.pieces):
            mask = (t > p.lo) & (t <= p.hi) if i else (t <= p.hi)
            out[mask] = p.value(t[mask])
        return out

    def value_range(self, samples: int = 257) -> tuple[float, float]:
        lo, hi = math.inf, -math.inf
        for p in self.pieces:
            if isinstance(p.value, Constant):
                vals = np.array([p.value.value])
            else:
                vals = p.value(np.linspace(p.lo, p.hi, samples))
            lo, hi = min(lo, vals.min()), max(hi, vals.max())
        return float(lo), float(hi)

    @property
    def is_piecewise_constant(self) -> bool:
        return all(isinstance(p.value, Constant) for p in self.pieces)

    def _limits(self, piece: Piece) -> tuple[float, float]:
        return float(piece.value(piece.lo)), float(piece.value(piece.hi))

    def discontinuities(self) -> tuple[Discontinuity, ...]:
        """Jumps in cyclic order, including the wrap point pi == -pi."""
        out = []
        n = len(self.pieces)
        for i in range(n):
            left = self._limits(self.pieces[i])[1]
            right = self._limits(self.pieces[(i + 1) % n])[0]
            if abs(left - right) > JUMP_TOL:
                theta = self.pieces[i].hi if i < n - 1 else math.pi
                out.append(Discontinuity(theta, left, right))
        out.sort(key=lambda j: j.theta)
        return tuple(out)

    def shifted(self, phi: float) -> "Symbol":
        """The rotated symbol theta -> g(theta + phi), for piecewise-constant symbols."""
        if not self.is_piecewise_constant:
            raise ValueError("rotation is only supported for piecewise-constant symbols")
        breaks, values = [], []
        for p in self.pieces:
            breaks.append(p.hi - phi)
            values.append(p.value.value)
        # Re-cut the rotated breaks onto (-pi, pi].
        b = np.array(breaks)
        b = math.pi - np.mod(math.pi - b, TWO_PI)
        order = np.argsort(b)
        b, v = list(b[order]), [values[i] for i in order]
        # the piece ending at the largest break continues through pi into the first one
        if abs(b[-1] - math.pi) > PARTITION_TOL:
            b.append(math.pi)
            v.append(v[0])
        return make_piecewise_constant(b, v, self.kind)


def make_piecewise_constant(breaks: Sequence[float], values: Sequence[float],
                            kind: SymbolKind = SymbolKind.OCCUPATION,
                            name: str = "") -> Symbol:
    """Step function equal to ``values[r]`` on ``(breaks[r-1], breaks[r]]``.

    The first piece starts at -pi and the last break must be pi.

    >>> s = make_piecewise_constant([-math.pi / 2, math.pi / 2, math.pi], [-1, 1, -1])
    >>> len(s.discontinuities())
    2
    """
    breaks = [float(b) for b in breaks]
    values = [float(v) for v in values]
    if len(breaks) != len(values):
        raise ValueError("need one value per break")
    if not breaks:
        raise ValueError("need at least one break")
    if any(not math.isfinite(v) for v in values):
        raise ValueError("values must be finite")
    if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
        raise ValueError("breaks must be strictly increasing")
    if breaks[0] <= -math.pi or abs(breaks[-1] - math.pi) > PARTITION_TOL:
        raise ValueError("breaks must lie in (-pi, pi] and end at pi")
    if kind is SymbolKind.OCCUPATION and any(abs(v) > 1.0 for v in values):
        raise ValueError("occupation density values must lie in [-1, 1]")
    los = [-math.pi] + breaks[:-1]
    breaks[-1] = math.pi
    pieces = tuple(Piece(lo, hi, Constant(v)) for lo, hi, v in zip(los, breaks, values))
    return Symbol(pieces, kind, name)


def _detv_symbol() -> Symbol:
    pieces = (
        Piece(-math.pi, 0.0, Smooth("affine_sin", (0.75, 0.25))),
        Piece(0.0, math.pi, Smooth("affine_cos", (0.75, 0.25))),
    )
    return Symbol(pieces, SymbolKind.GENERIC, "detV")


def builtin_state(state) -> Symbol:
    """Symbols of the reference states 0-3 and the smooth determinant test symbol.

    ``state`` is 0, 1, 2, 3 (or their string forms) or ``"detV"``, the symbol
    (3 + sin)/4 on (-pi, 0] and (3 + cos)/4 on (0, pi].
    """
    key = str(state)
    half = math.pi / 2
    if key == "0":
        return make_piecewise_constant([math.pi], [-1.0], name="state0")
    if key == "1":
        return make_piecewise_constant([-half, half, math.pi], [-1.0, 1.0, -1.0], name="state1")
    if key == "2":
        return make_piecewise_constant([math.pi], [0.0], name="state2")
    if key == "3":
        return make_piecewise_constant([-half, half, math.pi], [-1.0, 0.0, -1.0], name="state3")
    if key.lower() == "detv":
        return _detv_symbol()
    raise ValueError(f"unknown builtin state {state!r}")


BUILTIN_STATES = ("0", "1", "2", "3", "detV")


def fourier_coefficients(s: Symbol, d) -> np.ndarray:
    """Vectorised :func:`fourier_coefficient` over an integer array ``d``."""
    d = np.asarray(d)
    if d.size and not np.issubdtype(d.dtype, np.integer):
        if not np.all(d == np.round(d)):
            raise ValueError("Fourier index must be integer")
        d = d.astype(np.int64)
    out = np.zeros(d.shape, dtype=complex)
    for p in s.pieces:
        out += _piece_coefficients(p, d)
    return out


def fourier_coefficient(s: Symbol, d: int) -> complex:
    """(1/2pi) int g(theta) exp(i d theta) dtheta."""
    return complex(fourier_coefficients(s, np.array([int(d)]))[0])


def symbol_to_json(s: Symbol) -> str:
    pieces = []
    for p in s.pieces:
        if isinstance(p.value, Constant):
            pieces.append({"lo": p.lo, "hi": p.hi, "const": p.value.value})
        elif p.value.closed_form:
            pieces.append({"lo": p.lo, "hi": p.hi, "fn": p.value.fn,
                           "params": list(p.value.params)})
        else:
            raise ValueError("callable pieces cannot be serialised")
    doc = {"kind": s.kind.value, "pieces": pieces}
    if s.name:
        doc["name"] = s.name
    return json.dumps(doc)


def symbol_from_json(doc) -> Symbol:
    """Build a symbol from a JSON string or an already-parsed dict."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    kind = SymbolKind(doc.get("kind", SymbolKind.OCCUPATION.value))
    pieces = []
    for item in doc["pieces"]:
        lo, hi = float(item["lo"]), float(item["hi"])
        if "const" in item:
            val = Constant(float(item["const"]))
        else:
            val = Smooth(item["fn"], tuple(float(x) for x in item.get("params", ())))
        pieces.append(Piece(lo, hi, val))
    return Symbol(tuple(pieces), kind, doc.get("name", ""))
