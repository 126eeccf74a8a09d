import numpy as np
import pytest

from specframe.errors import DegenerateSupportError
from specframe.fiber import uniform_grid
from specframe.shift_invariant import (
    extract_mask,
    half_dilate,
    membership_v0,
    mra_density_check,
    project_v0,
    refinability_check,
)
from specframe.signals import apply_dyadic, bspline, haar_wavelet, indicator, linear_combination, translate, zero

GRID = uniform_grid(256)


@pytest.mark.parametrize(
    "order,taps",
    [
        (1, [1, 1]),
        (2, [1, 2, 1]),
        (3, [1, 3, 3, 1]),
        (4, [1, 4, 6, 4, 1]),
    ],
)
def test_bspline_masks(order, taps):
    # paper-convention masks sqrt(2) 2^-order binomial(order, k)
    m = extract_mask(half_dilate(bspline(order)), bspline(order), GRID)
    assert m.exact is not None
    ref = np.sqrt(2) * np.array(taps) / 2 ** order
    assert m.exact.kmin == 0
    assert np.max(np.abs(m.exact.coeffs - ref)) < 1e-12
    assert m.fit_residual < 1e-10


def test_project_indicator_on_haar_scaling():
    # chi_[0,1/2) projects to 1/2 chi_[0,1)
    H = project_v0(indicator(0.0, 0.5), bspline(1), GRID)
    assert np.max(np.abs(H.samples - 0.5)) < 1e-14


def test_membership():
    ok, r = membership_v0(linear_combination([bspline(2), translate(bspline(2), 3)], [1.0, -2.0]), bspline(2), GRID)
    assert ok and r < 1e-12
    ok, r = membership_v0(bspline(1), bspline(2), GRID)
    assert not ok and r > 0.5


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_bsplines_refinable(order):
    ok, r = refinability_check(bspline(order), GRID)
    assert ok and r < 1e-12


def test_non_refinable_counterexample():
    f = linear_combination([bspline(2), bspline(3)], [1.0, 0.1])
    ok, r = refinability_check(f, GRID)
    assert not ok
    assert r > 1e-3
    ok_t, r_t = refinability_check(f, GRID, method="truncated")
    assert not ok_t and r_t == pytest.approx(r, rel=1e-2)


def test_zero_phi_raises():
    with pytest.raises(DegenerateSupportError):
        refinability_check(zero(), GRID)


def test_project_degenerate_raises():
    with pytest.raises(DegenerateSupportError):
        project_v0(bspline(1), zero(), GRID)


def test_mra_checks():
    rep = mra_density_check(bspline(4), GRID)
    assert rep.nested and rep.density and rep.union_cover
    rep = mra_density_check(haar_wavelet(), GRID)
    assert not rep.origin_nonzero and not rep.density


def test_half_dilate():
    f = bspline(2)
    assert (half_dilate(f) - apply_dyadic(f, -1, 0)).norm() == 0.0


def test_mask_symbol_matches_fourier_relation():
    # (D^-1 phi)^(y) = H(y) phihat(y) under convention="paper"
    phi = bspline(3)
    H = extract_mask(half_dilate(phi), phi, GRID)
    y = np.array([0.1, 0.37, 1.8, -2.2])
    lhs = half_dilate(phi).fourier(y)
    rhs = H.at(y % 1.0) * phi.fourier(y)
    assert np.max(np.abs(lhs - rhs)) < 1e-13
