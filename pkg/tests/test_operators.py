"""Difference-quotient operators against hand-computed values and identities."""

import math

import pytest
from hypothesis import given, strategies as st

from hahnvar import (
    DegenerateDenominator,
    GridFunction,
    HahnParams,
    InsufficientDepth,
    Lattice,
    LatticePoint,
    OMEGA0_POINT,
    Origin,
    forward_h_difference,
    grid_derivative_at_fixed,
    hahn_derivative,
    hahn_derivative_n,
    iterated_quotient,
    jackson_q_derivative,
    norm_r_inf,
    q_bracket,
)
from hahnvar.demos import ystar

P = HahnParams(0.5, 0.5)


def test_square_at_two_exact():
    # sigma(2) = 1.5, so (1.5^2 - 2^2)/(1.5 - 2) = 3.5 with no rounding
    assert hahn_derivative(P, lambda t: t * t, 2.0) == 3.5


def test_at_fixed_point_uses_classical_limit():
    assert hahn_derivative(P, lambda t: t * t, P.omega0) == pytest.approx(2.0, abs=1e-9)


def test_piecewise_minimizer_quotients():
    # frozen from the sieve candidate: jump values drive the quotients
    assert hahn_derivative(P, ystar, -1.0) == 1.0
    assert hahn_derivative(P, ystar, 0.0) == -3.0
    assert hahn_derivative(P, ystar, 0.5) == -1.0


@given(
    q=st.floats(0.2, 0.9),
    omega=st.floats(0.1, 1.5),
    t=st.floats(-3.0, 3.0),
    a=st.floats(-2.0, 2.0),
    b=st.floats(-2.0, 2.0),
)
def test_linearity(q, omega, t, a, b):
    p = HahnParams(q, omega)
    f = lambda s: s * s - 1.0
    g = lambda s: 0.5 * s + 2.0
    combo = hahn_derivative(p, lambda s: a * f(s) + b * g(s), t)
    parts = a * hahn_derivative(p, f, t) + b * hahn_derivative(p, g, t)
    assert combo == pytest.approx(parts, rel=1e-9, abs=1e-9)


def test_product_rule():
    f = lambda t: 0.3 * t**3 - 0.5 * t + 0.7
    g = lambda t: 0.2 * t**2 + 1.5
    for t in (-1.0, 0.3, 2.0):
        st_ = P.sigma(t)
        lhs = hahn_derivative(P, lambda s: f(s) * g(s), t)
        rhs = hahn_derivative(P, f, t) * g(t) + f(st_) * hahn_derivative(P, g, t)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_quotient_rule():
    f = lambda t: 0.3 * t**3 - 0.5 * t + 0.7
    g = lambda t: 0.2 * t**2 + 1.5  # never zero
    for t in (-1.0, 0.3, 2.0):
        st_ = P.sigma(t)
        lhs = hahn_derivative(P, lambda s: f(s) / g(s), t)
        num = hahn_derivative(P, f, t) * g(t) - f(t) * hahn_derivative(P, g, t)
        assert lhs == pytest.approx(num / (g(t) * g(st_)), abs=1e-10)


def test_shift_identity():
    f = lambda t: math.sin(t) + 0.2 * t
    for t in (-2.0, 0.0, 1.7):
        shifted = f(t) + P.denominator(t) * hahn_derivative(P, f, t)
        assert shifted == pytest.approx(f(P.sigma(t)), abs=1e-12)


def test_chain_with_sigma():
    # composing with sigma commutes up to one factor of q
    f = lambda t: t**3 - 2.0 * t
    for t in (-1.5, 0.25, 2.0):
        lhs = hahn_derivative(P, lambda s: f(P.sigma(s)), t)
        rhs = P.q * hahn_derivative(P, f, P.sigma(t))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_second_derivative_of_square_is_constant():
    # D[t^2] = (q+1)t + omega, so the second derivative is q + 1 everywhere
    for t in (-1.0, 0.0, 2.0):
        assert hahn_derivative_n(P, lambda s: s * s, 2, t) == pytest.approx(1.5, abs=1e-10)


def test_third_derivative_of_cube_is_q_factorial():
    want = q_bracket(1, 0.5) * q_bracket(2, 0.5) * q_bracket(3, 0.5) * 1.0
    got = hahn_derivative_n(P, lambda s: s**3, 3, 2.0)
    assert got == pytest.approx(want, abs=1e-9)
    assert want == 2.625


def test_order_zero_returns_value():
    assert hahn_derivative_n(P, lambda t: t + 3.0, 0, 2.0) == 5.0


def test_order_validation():
    with pytest.raises(ValueError):
        hahn_derivative_n(P, lambda t: t, -1, 0.0)


def test_grid_matches_callable():
    lat = Lattice(P, -1.0, 2.0, depth=12)
    g = GridFunction.sample(lat, lambda t: t**3)
    for n in range(4):
        for origin in (Origin.A, Origin.B):
            pt = LatticePoint(origin, n)
            want = hahn_derivative_n(P, lambda t: t**3, 2, lat.realize(pt))
            assert hahn_derivative_n(P, g, 2, pt) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_grid_argument_type_mismatch():
    lat = Lattice(P, -1.0, 2.0, depth=4)
    g = GridFunction.sample(lat, lambda t: t)
    with pytest.raises(TypeError):
        hahn_derivative_n(P, g, 1, 0.5)
    with pytest.raises(TypeError):
        hahn_derivative_n(P, lambda t: t, 1, LatticePoint(Origin.A, 0))


def test_grid_runs_out_of_depth():
    lat = Lattice(P, -1.0, 2.0, depth=4)
    g = GridFunction.sample(lat, lambda t: t)
    with pytest.raises(InsufficientDepth):
        hahn_derivative_n(P, g, 2, LatticePoint(Origin.A, 3))


def test_grid_derivative_at_fixed_point():
    lat = Lattice(P, -1.0, 2.0, depth=24)
    g = GridFunction.sample(lat, lambda t: t * t)
    got = hahn_derivative_n(P, g, 1, OMEGA0_POINT)
    assert got == pytest.approx(2.0 * P.omega0, abs=1e-9)
    assert got == grid_derivative_at_fixed(g, 1)


def test_iterated_quotient_degenerate():
    with pytest.raises(DegenerateDenominator):
        iterated_quotient([1.0, 1.0], [2.0, 3.0])


def test_norm_counts_all_orders():
    # sup|t| = 2 at b, sup|Dt| = 1, so the order-1 norm is 3
    lat = Lattice(P, -1.0, 2.0, depth=8)
    g = GridFunction.sample(lat, lambda t: t)
    assert norm_r_inf(g, 1) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(InsufficientDepth):
        norm_r_inf(GridFunction.sample(Lattice(P, -1.0, 2.0, depth=1), lambda t: t), 2)


def test_forward_h_difference():
    assert forward_h_difference(0.25, lambda t: t * t, 1.0) == 2.25
    with pytest.raises(ValueError):
        forward_h_difference(0.0, lambda t: t, 1.0)


def test_jackson_q_derivative():
    # ((q t)^3 - t^3)/((q - 1) t) at q = 1/2, t = 2 is exactly 7
    assert jackson_q_derivative(0.5, lambda t: t**3, 2.0) == 7.0
    assert jackson_q_derivative(0.5, lambda t: t**3, 0.0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        jackson_q_derivative(1.5, lambda t: t, 1.0)
