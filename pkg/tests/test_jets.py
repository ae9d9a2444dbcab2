"""Jet arithmetic against finite-difference oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcklab.fields import (
    PointMap,
    compose_field,
    constant,
    coordinate,
)
from lcklab.jets import JetOrderError

DIM = 4


def poly_field(coeffs):
    """c0 + sum c1_i x_i + c2 * exp(0.3 x0) * sin(x1 + 0.5 x2) + c3 x3^3."""
    c0, c1, c2, c3 = coeffs
    xs = [coordinate(i, DIM) for i in range(DIM)]
    f = constant(c0, DIM)
    for i, x in enumerate(xs):
        f = f + (c1 * (i + 1) / 4.0) * x
    f = f + c2 * (0.3 * xs[0]).exp() * (xs[1] + 0.5 * xs[2]).sin()
    f = f + c3 * xs[3] ** 3 + (xs[0] * xs[1]) * (c1 * 0.25)
    return f


def fd_gradient(f, p, h=1e-5):
    out = np.zeros(DIM)
    for i in range(DIM):
        pp, pm = p.copy(), p.copy()
        pp[i] += h
        pm[i] -= h
        out[i] = (f.values(pp)[0] - f.values(pm)[0]) / (2 * h)
    return out


def fd_hessian(f, p, h=1e-4):
    out = np.zeros((DIM, DIM))
    for i in range(DIM):
        for j in range(DIM):
            pij = []
            for si in (1, -1):
                for sj in (1, -1):
                    q = p.copy()
                    q[i] += si * h
                    q[j] += sj * h
                    pij.append(si * sj * f.values(q)[0])
            out[i, j] = sum(pij) / (4 * h * h)
    return out


coeff = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


@settings(max_examples=20, deadline=None)
@given(st.tuples(coeff, coeff, coeff, coeff))
def test_gradient_and_hessian_match_finite_differences(coeffs):
    f = poly_field(coeffs)
    p = np.array([0.4, -0.3, 0.7, 0.2])
    jet = f.jet(p, 2)
    assert np.allclose(jet.g[0], fd_gradient(f, p), atol=5e-8)
    assert np.allclose(jet.h[0], fd_hessian(f, p), atol=5e-5)


@settings(max_examples=20, deadline=None)
@given(st.tuples(coeff, coeff, coeff, coeff))
def test_second_derivatives_are_symmetric(coeffs):
    f = poly_field(coeffs)
    pts = np.random.default_rng(0).uniform(-1, 1, (10, DIM))
    h = f.jet(pts, 2).h
    assert np.abs(h - h.transpose(0, 2, 1)).max() < 1e-10


def test_third_order_tensor_symmetry_and_values():
    f = poly_field((0.3, 0.9, 1.1, 0.7))
    pts = np.array([[0.2, 0.5, -0.4, 0.3]])
    t = f.jet(pts, 3).t
    for perm in [(0, 2, 1, 3), (0, 3, 2, 1), (0, 1, 3, 2)]:
        assert np.abs(t - t.transpose(perm)).max() < 1e-10
    # d^3/dx3^3 of c3 x3^3 = 6 c3 (+0 from the rest)
    assert abs(t[0, 3, 3, 3] - 6 * 0.7) < 1e-10


def test_partial_field_matches_gradient_column():
    f = poly_field((0.1, 0.5, -0.8, 0.4))
    pts = np.random.default_rng(1).uniform(-1, 1, (8, DIM))
    for i in range(DIM):
        assert np.allclose(f.partial(i).values(pts), f.jet(pts, 1).g[:, i])


def test_derivative_depth_is_capped():
    f = poly_field((0.1, 0.5, -0.8, 0.4))
    g = f.partial(0).partial(1).partial(2).partial(3)
    with pytest.raises(JetOrderError):
        g.values(np.zeros(DIM))


def test_quotient_and_chain_functions():
    x, y = coordinate(0, DIM), coordinate(1, DIM)
    f = (x**2 + y**2 + 1.0).log() / (x.cos() + 2.0)
    p = np.array([0.3, -0.6, 0.0, 0.0])
    assert np.allclose(f.jet(p, 1).g[0], fd_gradient(f, p), atol=1e-8)
    assert np.allclose(f.jet(p, 2).h[0], fd_hessian(f, p), atol=1e-4)


def test_composition_chain_rule():
    # f o phi with a nonlinear map, checked against finite differences
    x = [coordinate(i, DIM) for i in range(DIM)]
    phi = PointMap([x[0] * x[1], x[1] + x[2] ** 2, x[2].sin(), x[3] * 0.5 + x[0]])
    f = poly_field((0.2, 0.8, 0.6, -0.5))
    g = compose_field(f, phi)
    p = np.array([0.4, 0.2, -0.3, 0.6])
    direct = f.values(phi(p))
    assert np.allclose(g.values(p), direct)
    assert np.allclose(g.jet(p, 1).g[0], fd_gradient(g, p), atol=5e-8)
    assert np.allclose(g.jet(p, 2).h[0], fd_hessian(g, p), atol=5e-5)


def test_complex_fields_and_real_projections():
    from lcklab.fields import complex_coordinate

    z = complex_coordinate(0, DIM)
    f = (z ** 3).real_part()
    p = np.array([0.5, 0.4, 0.0, 0.0])
    z0 = 0.5 + 0.4j
    assert abs(f.values(p)[0] - (z0 ** 3).real) < 1e-14
    # holomorphic: dRe(z^3)/dx = Re(3z^2), dRe(z^3)/dy = Re(3i z^2)
    g = f.jet(p, 1).g[0]
    assert abs(g[0] - (3 * z0 ** 2).real) < 1e-12
    assert abs(g[1] - (3 * z0 ** 2 * 1j).real) < 1e-12
