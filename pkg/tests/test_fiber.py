import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specframe.fiber import (
    bracket,
    bracket_exact,
    export_fibers_csv,
    fiber_samples,
    fiber_vector,
    support_sigma,
    tail_bound,
    uniform_grid,
)
from specframe.signals import apply_dyadic, bspline, haar_wavelet, translate, zero


def long_bracket(f, g, theta, K=4000):
    k = np.arange(-K, K + 1)
    y = theta[:, None] + k[None, :]
    return np.sum(f.fourier(y) * np.conj(g.fourier(y)), axis=1)


def test_fiber_entries_are_conjugated_samples():
    f = bspline(2)
    v = fiber_vector(f, 0.3, K=4)
    assert v[2] == pytest.approx(np.conj(f.fourier(np.array([2.3])))[0])
    assert list(v.ks) == list(range(-4, 5))


def test_fiber_theta_reduced_mod_one():
    f = bspline(3)
    a = fiber_samples(f, np.array([0.25]), 8)
    b = fiber_samples(f, np.array([3.25]), 8)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_tail_bound_covers_truncated_energy(order):
    f = bspline(order)
    for K in (8, 32, 64):
        th = uniform_grid(64)
        trunc = np.sum(np.abs(fiber_samples(f, th, K)) ** 2, axis=1).mean()
        deficit = f.norm2() - trunc
        assert -1e-12 <= deficit <= tail_bound(f, K) + 1e-12


def test_tail_bound_decreases():
    f = bspline(2)
    tails = [tail_bound(f, K) for K in (4, 8, 16, 32, 64)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    assert tail_bound(zero(), 8) == 0.0


@pytest.mark.parametrize("order", [2, 3])
def test_bracket_exact_matches_long_sum(order):
    phi = bspline(order)
    th = uniform_grid(32)
    assert np.max(np.abs(bracket_exact(phi, phi)(th) - long_bracket(phi, phi, th))) < 1e-9


def test_bracket_bspline2_closed_form():
    th = uniform_grid(64)
    ref = (2 + np.cos(2 * np.pi * th)) / 3
    assert np.max(np.abs(bracket_exact(bspline(2), bspline(2))(th) - ref)) < 1e-15


def test_bracket_truncated_within_tail():
    phi = bspline(2)
    th = uniform_grid(128)
    b = bracket(phi, phi, th, K=16)
    exact = bracket_exact(phi, phi)(th)
    assert np.all(np.abs(b.value - exact) <= b.tail + 1e-13)


def test_bracket_orthogonality_haar_scaling():
    th = uniform_grid(64)
    v = bracket_exact(haar_wavelet(), bspline(1))(th)
    assert np.max(np.abs(v)) < 1e-15


@given(st.integers(-5, 5), st.floats(0, 1, exclude_max=True))
def test_bracket_shift_is_modulation(k, theta):
    f, g = bspline(2), bspline(3)
    th = np.array([theta])
    lhs = bracket_exact(translate(f, k), g)(th)
    rhs = np.exp(-2j * np.pi * k * theta) * bracket_exact(f, g)(th)
    assert abs(lhs[0] - rhs[0]) < 1e-13


@given(st.floats(0, 1, exclude_max=True))
def test_bracket_hermitian(theta):
    f, g = bspline(3), apply_dyadic(bspline(2), 1, 1)
    th = np.array([theta])
    assert abs(bracket_exact(f, g)(th)[0] - np.conj(bracket_exact(g, f)(th)[0])) < 1e-14


def test_support_sigma():
    grid = uniform_grid(256)
    assert support_sigma(bspline(2), grid).all()
    # bspline(1) dilated by 2 has bracket vanishing at theta = 1/2
    s = support_sigma(apply_dyadic(bspline(1), -1, 0), grid)
    assert s.count == 255 and not s.indicator[128]


def test_export_fibers_csv(tmp_path):
    path = tmp_path / "fib.csv"
    export_fibers_csv(bspline(2), uniform_grid(4), 2, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["theta", "k", "re", "im"]
    assert len(rows) == 1 + 4 * 5
    th, k, re, im = rows[1 + 5 + 3]
    val = np.conj(bspline(2).fourier(np.array([float(th) + int(k)])))[0]
    assert complex(float(re), float(im)) == pytest.approx(val)
