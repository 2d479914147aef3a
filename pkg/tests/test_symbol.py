import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fermiblocks.symbol import (
    Constant,
    Piece,
    Smooth,
    Symbol,
    SymbolKind,
    builtin_state,
    fourier_coefficient,
    fourier_coefficients,
    make_piecewise_constant,
    symbol_from_json,
    symbol_to_json,
)

PI = math.pi


def quad_coefficient(s, d):
    """Oracle: brute adaptive quadrature of g(theta) e^{i d theta}, split at piece edges."""
    pts = sorted({p.lo for p in s.pieces} | {p.hi for p in s.pieces})
    warnings.simplefilter("ignore", integrate.IntegrationWarning)
    re = im = 0.0
    for a, b in zip(pts, pts[1:]):
        mid = 0.5 * (a + b)
        piece = next(p for p in s.pieces if p.lo <= mid <= p.hi)
        re += integrate.quad(lambda t: float(piece.value(t)) * math.cos(d * t), a, b,
                             epsabs=1e-14, limit=400)[0]
        im += integrate.quad(lambda t: float(piece.value(t)) * math.sin(d * t), a, b,
                             epsabs=1e-14, limit=400)[0]
    return complex(re, im) / (2 * PI)


def test_state0_symbol():
    s = make_piecewise_constant([PI], [-1])
    assert s.discontinuities() == ()
    assert fourier_coefficient(s, 0) == pytest.approx(-1)
    assert abs(fourier_coefficient(s, 5)) < 1e-15
    assert builtin_state(0) == make_piecewise_constant([PI], [-1.0], name="state0")


def test_state1_discontinuities():
    s = make_piecewise_constant([-PI / 2, PI / 2, PI], [-1, 1, -1])
    jumps = s.discontinuities()
    assert len(jumps) == 2
    assert [j.theta for j in jumps] == pytest.approx([-PI / 2, PI / 2])
    assert (jumps[0].t_left, jumps[0].t_right) == (-1.0, 1.0)
    assert (jumps[1].t_left, jumps[1].t_right) == (1.0, -1.0)


def test_state3_discontinuities():
    s = make_piecewise_constant([-PI / 2, PI / 2, PI], [-1, 0, -1])
    assert [(j.t_left, j.t_right) for j in s.discontinuities()] == [(-1.0, 0.0), (0.0, -1.0)]


def test_state2_is_zero():
    s = builtin_state(2)
    assert s.discontinuities() == ()
    d = np.arange(-10, 11)
    assert np.max(np.abs(fourier_coefficients(s, d))) == 0.0


def test_detv_discontinuities():
    s = builtin_state("detV")
    assert s.kind is SymbolKind.GENERIC
    jumps = s.discontinuities()
    assert [j.theta for j in jumps] == pytest.approx([0.0, PI])
    assert (jumps[0].t_left, jumps[0].t_right) == pytest.approx((0.75, 1.0))
    assert (jumps[1].t_left, jumps[1].t_right) == pytest.approx((0.5, 0.75))


def test_state3_coefficients():
    s = builtin_state(3)
    assert fourier_coefficient(s, 1) == pytest.approx(1 / PI, abs=1e-15)
    assert fourier_coefficient(s, 0) == pytest.approx(-0.5, abs=1e-15)
    for d in range(-6, 7):
        assert fourier_coefficient(s, d) == pytest.approx(quad_coefficient(s, d), abs=1e-12)


def test_detv_coefficients_match_closed_form():
    s = builtin_state("detV")
    assert fourier_coefficient(s, 0).real == pytest.approx(0.75 - 1 / (4 * PI), abs=1e-15)
    assert round(fourier_coefficient(s, 0).real, 6) == 0.670423
    for d in range(-41, 42):
        c = fourier_coefficient(s, d)
        if abs(d) == 1:
            # direct integral: only the sin/cos parts survive, giving (1 +- i)/16
            assert c == pytest.approx((1 + 1j * d) / 16, abs=1e-15)
        elif d % 2:
            assert abs(c) < 1e-15
        else:
            ref = (d * 1j + 1) / (4 * PI * (d * d - 1)) + (0.75 if d == 0 else 0.0)
            assert c == pytest.approx(ref, abs=1e-15)


def test_detv_against_quadrature():
    s = builtin_state("detV")
    for d in (0, 1, 2, 3, 8, -8, 15):
        assert fourier_coefficient(s, d) == pytest.approx(quad_coefficient(s, d), abs=1e-12)


@given(st.integers(-5000, 5000), st.sampled_from(["1", "3", "detV"]))
def test_hermitian_coefficients(d, state):
    s = builtin_state(state)
    assert fourier_coefficient(s, -d) == pytest.approx(fourier_coefficient(s, d).conjugate(), abs=1e-15)


def test_callable_piece_agrees_with_closed_form():
    closed = builtin_state(3)
    pieces = tuple(Piece(p.lo, p.hi, Smooth("callable", func=(lambda v: (lambda t: v))(p.value.value)))
                   for p in closed.pieces)
    quad = Symbol(pieces)
    for d in (0, 1, 2, 5, -7):
        assert fourier_coefficient(quad, d) == pytest.approx(fourier_coefficient(closed, d), abs=1e-12)


def test_partition_widths():
    for state in ("0", "1", "2", "3", "detV"):
        s = builtin_state(state)
        assert abs(sum(p.hi - p.lo for p in s.pieces) - 2 * PI) < 1e-14


@pytest.mark.parametrize("state", ["1", "3"])
def test_parseval_truncation(state):
    s = builtin_state(state)
    d = np.arange(-512, 513)
    partial = float(np.sum(np.abs(fourier_coefficients(s, d)) ** 2))
    full = sum((p.hi - p.lo) * p.value.value ** 2 for p in s.pieces) / (2 * PI)
    assert partial <= full + 1e-12
    assert full - partial < 1e-3


def test_construction_errors():
    with pytest.raises(ValueError):
        make_piecewise_constant([0.5, 0.1, PI], [0, 0, 0])
    with pytest.raises(ValueError):
        make_piecewise_constant([0.0, PI], [0.0, 1.5])
    make_piecewise_constant([0.0, PI], [0.0, 1.5], kind=SymbolKind.GENERIC)
    with pytest.raises(ValueError):
        make_piecewise_constant([0.0, 2.0], [0.0, 0.5])
    with pytest.raises(ValueError):
        Symbol((Piece(-PI, 0.0, Constant(0.0)), Piece(0.1, PI, Constant(0.0))))
    with pytest.raises(ValueError):
        builtin_state(7)


def test_equal_adjacent_values_are_not_jumps():
    s = make_piecewise_constant([-1.0, 1.0, PI], [0.5, 0.5, -0.5])
    jumps = s.discontinuities()
    assert [j.theta for j in jumps] == pytest.approx([1.0, PI])


def test_evaluation_wraps_angles():
    s = builtin_state(1)
    assert s(np.array([0.0, PI / 2, PI / 2 + 1e-9, PI, -PI, 3 * PI])).tolist() == [1, 1, -1, -1, -1, -1]


def test_json_round_trip():
    for state in ("1", "3", "detV"):
        s = builtin_state(state)
        back = symbol_from_json(symbol_to_json(s))
        assert back == s
    doc = json.loads(symbol_to_json(builtin_state("detV")))
    assert doc["pieces"][0] == {"lo": -PI, "hi": 0.0, "fn": "affine_sin", "params": [0.75, 0.25]}
    assert doc["kind"] == "GenericReal"


def test_rotation_keeps_jump_values():
    s = builtin_state(3)
    r = s.shifted(0.3)
    assert sorted((j.t_left, j.t_right) for j in r.discontinuities()) == \
        sorted((j.t_left, j.t_right) for j in s.discontinuities())
    assert [j.theta for j in r.discontinuities()] == pytest.approx([-PI / 2 - 0.3, PI / 2 - 0.3])
    theta = np.linspace(-3, 3, 101)
    assert np.array_equal(r(theta), s(theta + 0.3))
