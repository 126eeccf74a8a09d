import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import FRAMELET_TAPS, R2, framelet_family, haar_family
from specframe.errors import InvalidArgument
from specframe.extension import (
    MaskFamily,
    ThetaSymbol,
    dual_oep_verify,
    dual_pair_identity_check,
    level_expansion,
    oep_verify,
    uep_matrix,
    uep_verify,
)
from specframe.fiber import support_sigma, uniform_grid
from specframe.frames import random_probes
from specframe.signals import apply_dyadic, bspline, haar_wavelet


def test_haar_uep(haar_fam):
    rep = uep_verify(haar_fam)
    assert rep.verdict
    assert rep.max_residual_identity < 1e-12 and rep.max_residual_offdiag < 1e-12
    assert rep.convention == "unit"


def test_framelet_uep(framelet_fam):
    rep = uep_verify(framelet_fam)
    assert rep.verdict and max(rep.max_residual_identity, rep.max_residual_offdiag) < 1e-12


def test_refinement_only_fails():
    fam = MaskFamily.from_taps([0.5, 0.5], [], uniform_grid(1024))
    rep = uep_verify(fam)
    assert not rep.verdict
    assert rep.max_residual_identity == pytest.approx(1.0)


def test_paper_convention_evaluated_verbatim():
    rep = uep_verify(haar_family(normalization="paper"))
    assert not rep.verdict and rep.convention == "paper"


def test_masks_from_functions_match_taps(haar_fam):
    fam = MaskFamily.from_functions(bspline(1), [haar_wavelet()], uniform_grid(1024))
    for a, b in zip(fam.symbols, haar_fam.symbols):
        assert np.max(np.abs(a.samples - b.samples)) < 1e-14


def test_framelet_generators_synthesized(framelet_fam):
    p1, p2 = framelet_fam.psis
    assert p1.support == (0.0, 2.0) and p2.support == (0.0, 2.0)
    # both wavelets have vanishing mean; psi2 has two vanishing moments
    assert abs(p1.fourier(np.array([0.0]))[0]) < 1e-15
    assert abs(p2.fourier(np.array([0.0]))[0]) < 1e-15


def test_uep_matrix_columns_swap(framelet_fam):
    g = framelet_fam.grid
    n = g.size
    for i in (0, 3, 100, 511):
        a = uep_matrix(framelet_fam, g[i])
        b = uep_matrix(framelet_fam, g[(i + n // 2) % n])
        assert np.array_equal(a[:, 0], b[:, 1]) and np.array_equal(a[:, 1], b[:, 0])


@pytest.mark.parametrize("make", [haar_family, framelet_family])
def test_oep_theta_one_bitwise(make):
    fam = make()
    u = uep_verify(fam)
    o = oep_verify(fam, ThetaSymbol.constant(1.0, fam.grid))
    assert o.verdict == u.verdict
    assert np.array_equal(o.arrays["diagonal"], u.arrays["diagonal"])
    assert np.array_equal(o.arrays["offdiag"], u.arrays["offdiag"])
    assert o.max_residual_identity == u.max_residual_identity


def test_oep_theta_zero_fails_limit(haar_fam):
    rep = oep_verify(haar_fam, ThetaSymbol.constant(0.0, haar_fam.grid))
    assert not rep.verdict
    assert not rep.conditions["a_limit"]["pass"]


def test_oep_bracket_form_cross_check(framelet_fam):
    rep = oep_verify(framelet_fam, ThetaSymbol.constant(1.0, framelet_fam.grid))
    bf = rep.conditions["bracket_form"]
    assert bf["identity"] < 1e-12 and bf["offdiag"] < 1e-12


def test_oep_grid_mismatch(haar_fam):
    with pytest.raises(InvalidArgument):
        oep_verify(haar_fam, ThetaSymbol.constant(1.0, uniform_grid(512)))


def test_dual_oep_haar_paper():
    fam = haar_family(normalization="paper")
    rep = dual_oep_verify(fam, fam, ThetaSymbol.constant(1.0, fam.grid))
    assert rep.verdict and rep.max_residual_identity < 1e-12


def test_dual_oep_rhs_factor():
    fam = haar_family()
    th = ThetaSymbol.constant(1.0, fam.grid)
    assert not dual_oep_verify(fam, fam, th).verdict
    assert dual_oep_verify(fam, fam, th, rhs_factor=1.0).verdict


def test_dual_oep_theta_from_masks():
    fam = haar_family(normalization="paper")
    rep = dual_oep_verify(fam, fam, phi_masks=[fam.refinement], dual_phi_masks=[fam.refinement], rhs_factor=2.0)
    # Theta = |H0|^2 is not 1, so the identities should not hold
    assert not rep.verdict


def _perturbed_dual(fam, eps):
    ws = [w.scaled(1.0 + eps) for w in fam.wavelets]
    return fam.with_wavelets(ws)


@given(st.floats(-0.3, 0.3, allow_nan=False))
def test_dual_oep_swap_symmetry(eps):
    fam = framelet_family(256).to("paper")
    dual = _perturbed_dual(fam, eps)
    th = ThetaSymbol.constant(1.0, fam.grid)
    a = dual_oep_verify(fam, dual, th)
    b = dual_oep_verify(dual, fam, th)
    assert np.max(np.abs(a.arrays["oep1"] - np.conj(b.arrays["oep1"]))) < 1e-12


def test_dual_oep_sigma_restriction():
    fam = haar_family(256, "paper")
    sig = support_sigma(bspline(1), fam.grid)
    rep = dual_oep_verify(fam, fam, ThetaSymbol.constant(1.0, fam.grid), sigma=sig, sigma_dual=sig)
    assert rep.verdict and rep.restricted_to_sigma


def test_level_expansion_haar_projection():
    f = bspline(2)
    p = level_expansion(f, [bspline(1)], [bspline(1)], 2)
    # piecewise averages on quarter cells
    x = np.array([0.125, 0.375, 1.125])
    assert np.allclose(p(x), [0.125, 0.375, 0.875], atol=1e-15)


def test_dual_pair_haar():
    tests = random_probes((-2.0, 2.0), 16, seed=0)
    rep = dual_pair_identity_check([bspline(1)], [haar_wavelet()], [bspline(1)], [haar_wavelet()], tests)
    assert rep.verdict and rep.telescoping_residual < 1e-10
    assert rep.monotone


def test_dual_pair_completeness_rate():
    f = bspline(2)
    rep = dual_pair_identity_check([bspline(1)], [haar_wavelet()], [bspline(1)], [haar_wavelet()], [f])
    assert np.allclose(rep.completeness_probe, [2.0 ** -(J + 1) for J in (0, 2, 4, 6)], rtol=1e-12)


def test_dual_pair_broken_dual_detected():
    tests = random_probes((-2.0, 2.0), 4, seed=1)
    rep = dual_pair_identity_check(
        [bspline(1)], [haar_wavelet()], [bspline(1)], [apply_dyadic(haar_wavelet(), 0, 1)], tests
    )
    assert not rep.verdict


def test_dual_pair_length_mismatch():
    with pytest.raises(InvalidArgument):
        dual_pair_identity_check([bspline(1)], [haar_wavelet()], [], [haar_wavelet()], [])
