import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from specframe import _accel
from specframe.errors import InvalidArgument
from specframe.signals import (
    CompactPiecewisePoly,
    apply_dyadic,
    bspline,
    fourier_eval,
    gram_matrix,
    haar_wavelet,
    indicator,
    inner_product,
    linear_combination,
    refinement_combination,
    restrict,
    translate,
    zero,
)


def quad_fourier(f, y):
    re = sum(quad(lambda x: f(x) * np.cos(2 * np.pi * x * y), a, b, limit=200)[0] for a, b in zip(f.breaks[:-1], f.breaks[1:]))
    im = sum(quad(lambda x: -f(x) * np.sin(2 * np.pi * x * y), a, b, limit=200)[0] for a, b in zip(f.breaks[:-1], f.breaks[1:]))
    return re + 1j * im


def quad_inner(f, g):
    pts = sorted(set(f.breaks) | set(g.breaks))
    return sum(quad(lambda x: f(x) * g(x), a, b)[0] for a, b in zip(pts[:-1], pts[1:]))


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_bspline_fourier_matches_quadrature(order):
    f = bspline(order)
    for y in (0.0, 0.3, -1.7, 5.25, 40.1):
        assert abs(fourier_eval(f, y) - quad_fourier(f, y)) < 1e-10


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_bspline_fourier_closed_form(order):
    y = np.linspace(-7.3, 7.3, 41)
    ref = (np.sinc(y) * np.exp(-1j * np.pi * y)) ** order
    assert np.max(np.abs(fourier_eval(bspline(order), y) - ref)) < 1e-13


def test_bspline_partition_of_unity():
    f = linear_combination([translate(bspline(3), k) for k in range(-3, 6)], [1.0] * 9)
    x = np.linspace(0.0, 3.0, 97)
    assert np.allclose(f(x), 1.0, atol=1e-14)


def test_bspline_norms():
    assert bspline(1).norm2() == pytest.approx(1.0)
    assert bspline(2).norm2() == pytest.approx(2 / 3, abs=1e-15)
    assert bspline(3).norm2() == pytest.approx(11 / 20, abs=1e-15)


def test_zero_function():
    z = zero()
    assert z.is_zero() and z.norm() == 0.0
    assert fourier_eval(z, 0.3) == 0
    assert inner_product(z, bspline(2)) == 0.0


def test_invalid_breakpoints():
    with pytest.raises(ValueError):
        CompactPiecewisePoly([0, 0, 1], [[1], [1]])
    with pytest.raises(ValueError):
        CompactPiecewisePoly([0, 1, 2], [[1]])


def test_apply_dyadic_definition():
    f = bspline(2)
    g = apply_dyadic(f, 2, 3)
    x = np.linspace(0.5, 1.5, 33)
    assert np.allclose(g(x), 2.0 * f(4 * x - 3), atol=1e-14)
    assert g.norm2() == pytest.approx(f.norm2(), rel=1e-14)


def test_restrict_matches_pointwise():
    f = bspline(3)
    r = restrict(f, 0.7, 2.25)
    x = np.linspace(0.7, 2.24, 50)
    assert np.allclose(r(x), f(x), atol=1e-15)
    assert r.support == (0.7, 2.25)


def test_refinement_combination_reproduces_hat():
    hat = bspline(2)
    rebuilt = refinement_combination(hat, [0.25, 0.5, 0.25], 0, "unit")
    assert (rebuilt - hat).norm() < 1e-15
    paper = refinement_combination(hat, [np.sqrt(2) / 4, np.sqrt(2) / 2, np.sqrt(2) / 4], 0, "paper")
    assert (paper - hat).norm() < 1e-15


def test_gram_against_quadrature():
    fs = [bspline(2), translate(bspline(3), -1), haar_wavelet()]
    gs = [apply_dyadic(bspline(2), 1, 1), indicator(0.25, 1.75, 2.0)]
    G = gram_matrix(fs, gs)
    ref = np.array([[quad_inner(f, g) for g in gs] for f in fs])
    assert np.max(np.abs(G - ref)) < 1e-12


def test_gram_zero_function_rows():
    G = gram_matrix([zero(), bspline(1)], [bspline(1), zero()])
    assert G.tolist() == [[0.0, 0.0], [1.0, 0.0]]


@pytest.mark.parametrize("flag", [True, False])
def test_kernels_agree_across_paths(flag):
    fs = [bspline(4), haar_wavelet()]
    y = np.linspace(-30, 30, 201)
    prev = _accel.use_numba(flag)
    try:
        F = np.array([fourier_eval(f, y) for f in fs])
        G = gram_matrix(fs, fs)
    finally:
        _accel.use_numba(prev)
    _accel.use_numba(not flag)
    try:
        F2 = np.array([fourier_eval(f, y) for f in fs])
        G2 = gram_matrix(fs, fs)
    finally:
        _accel.use_numba(prev)
    assert np.max(np.abs(F - F2)) < 1e-13
    assert np.max(np.abs(G - G2)) < 1e-14


coef = st.floats(-3, 3, allow_nan=False)


@given(coef, coef, st.integers(-3, 3), st.integers(-2, 2))
def test_inner_product_bilinear(a, b, k, j):
    f, g, h = bspline(2), apply_dyadic(bspline(3), j, k), haar_wavelet()
    lhs = inner_product(linear_combination([f, g], [a, b]), h)
    rhs = a * inner_product(f, h) + b * inner_product(g, h)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(a) + abs(b)) * 2 ** (abs(j) / 2)


@given(st.integers(-4, 4), st.integers(-8, 8), st.floats(-5, 5, allow_nan=False))
def test_dyadic_atom_fourier_scaling(j, k, y):
    f = bspline(2)
    lhs = fourier_eval(apply_dyadic(f, j, k), y)
    rhs = 2 ** (-j / 2) * np.exp(-2j * np.pi * k * y / 2 ** j) * fourier_eval(f, y / 2 ** j)
    assert abs(lhs - rhs) < 1e-12


@given(st.integers(-3, 3), st.integers(-6, 6))
def test_dyadic_atoms_keep_norm(j, k):
    f = bspline(3)
    assert apply_dyadic(f, j, k).norm2() == pytest.approx(f.norm2(), rel=1e-13)
