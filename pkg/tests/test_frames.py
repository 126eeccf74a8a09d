import csv
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import framelet_family
from specframe.errors import InvalidArgument, NumericWarning
from specframe.frames import (
    CoefficientArray,
    WaveletSystemSpec,
    analysis,
    compressed_operator,
    frame_apply,
    frame_bounds,
    quasi_affine,
    random_probes,
    reconstruct,
    synthesis,
)
from specframe.signals import apply_dyadic, bspline, haar_wavelet, inner_product, linear_combination, translate, zero

HAAR8 = WaveletSystemSpec((haar_wavelet(),), 8)
HAAR6 = WaveletSystemSpec((haar_wavelet(),), 6)


def haar_span_function(spec, seed=0, scales=(-2, 4)):
    at = spec.atoms
    idx = [i for i in range(len(at)) if scales[0] <= at.scale[i] <= scales[1] and at.funcs[i].support[0] >= -1 and at.funcs[i].support[1] <= 1]
    rng = np.random.default_rng(seed)
    return linear_combination([at.funcs[i] for i in idx], rng.standard_normal(len(idx)))


def test_atoms_meet_window():
    at = HAAR6.atoms
    lo, hi = HAAR6.window
    for f in at.funcs:
        a, b = f.support
        assert a < hi and b > lo
    assert np.all(at.weight == 1.0)


def test_window_shift_ranges_are_complete():
    # every atom at scale 2 with nonzero overlap with the window is present
    at = HAAR6.atoms
    ks = sorted(at.shift[at.scale == 2])
    assert ks == list(range(-8, 8))


def test_analysis_of_haar_wavelet():
    c = analysis(haar_wavelet(), HAAR6)
    at = HAAR6.atoms
    hit = np.flatnonzero(np.abs(c.values) > 1e-15)
    assert len(hit) == 1 and at.scale[hit[0]] == 0 and at.shift[hit[0]] == 0
    assert c.values[hit[0]] == pytest.approx(1.0, abs=1e-15)


def test_analysis_zero():
    c = analysis(zero(), HAAR6)
    assert not np.any(c.values) and c.norm2 == 0.0


def test_analysis_outside_window():
    with pytest.raises(InvalidArgument):
        analysis(translate(bspline(2), 1.5), HAAR6)


def test_parseval_bspline2_haar_j6():
    spec = WaveletSystemSpec((haar_wavelet(),), 6, (-4.0, 4.0))
    n2 = analysis(bspline(2), spec).norm2
    assert 0.6 <= n2 <= 2 / 3


def test_parseval_monotone_in_j():
    vals = [analysis(bspline(2), WaveletSystemSpec((haar_wavelet(),), J, (-4.0, 4.0))).norm2 for J in (0, 2, 4, 6)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2 / 3


def test_synthesis_unit_coefficient():
    at = HAAR6.atoms
    v = np.zeros(len(at))
    v[17] = 1.0
    g = synthesis(CoefficientArray(HAAR6, v))
    assert (g - at.funcs[17]).norm() == 0.0
    assert synthesis(CoefficientArray(HAAR6, np.zeros(len(at)))).is_zero()


def test_synthesis_index_mismatch():
    with pytest.raises(InvalidArgument):
        synthesis(CoefficientArray(HAAR6, np.zeros(3)))
    with pytest.raises(InvalidArgument):
        synthesis(analysis(haar_wavelet(), HAAR6), HAAR8)


def test_haar_span_roundtrip():
    f = haar_span_function(HAAR8)
    g = synthesis(analysis(f, HAAR8))
    assert (g - f).norm() / f.norm() < 1e-13


def test_frame_apply_haar_wavelet():
    assert (frame_apply(haar_wavelet(), HAAR6) - haar_wavelet()).norm() < 1e-15


def test_frame_apply_duplication_exact():
    f = random_probes(HAAR6.window, 1, seed=4)[0]
    one = frame_apply(f, HAAR6)
    two = frame_apply(f, HAAR6.duplicate())
    assert np.array_equal(two.breaks, one.breaks)
    assert np.array_equal(two.coeffs, 2 * one.coeffs)


@pytest.mark.parametrize("c", [2.0, 0.5, -1.0])
def test_frame_apply_scaling_exact(c):
    f = random_probes(HAAR6.window, 1, seed=5)[0]
    one = frame_apply(f, HAAR6)
    sc = frame_apply(f, HAAR6.scaled(c))
    assert np.array_equal(sc.coeffs, c * c * one.coeffs)


def test_empty_system_is_zero_operator():
    spec = WaveletSystemSpec((), 4)
    f = random_probes(spec.window, 1)[0]
    assert frame_apply(f, spec).is_zero()
    assert tuple(frame_bounds(spec)) == (0.0, 0.0)
    assert not np.any(compressed_operator(spec, random_probes(spec.window, 4)))


@pytest.fixture(scope="module")
def haar_bounds():
    return frame_bounds(HAAR8)


def test_haar_bounds(haar_bounds):
    A, B = haar_bounds
    assert 0.95 <= A <= B <= 1.05
    assert haar_bounds.converged
    assert abs(A - haar_bounds.reference[0]) < 1e-8 and abs(B - haar_bounds.reference[1]) < 1e-8


def test_bounds_duplication_exact(haar_bounds):
    d = frame_bounds(HAAR8.duplicate())
    assert d.A == 2 * haar_bounds.A and d.B == 2 * haar_bounds.B


@pytest.mark.parametrize("c", [2.0, 0.5])
def test_bounds_scaling_exact(c):
    one = frame_bounds(HAAR6)
    sc = frame_bounds(HAAR6.scaled(c))
    assert sc.A == c * c * one.A and sc.B == c * c * one.B


def test_framelet_bounds():
    fam = framelet_family(256)
    spec = WaveletSystemSpec(fam.psis, 8)
    A, B = frame_bounds(spec)
    assert 0.9 <= A <= B <= 1.1


def test_bounds_report_metadata(haar_bounds):
    d = haar_bounds.as_dict()
    assert d["probes"]["count"] == 32 and d["probes"]["window"] == [-2.0, 2.0]


def test_cg_budget_warning(monkeypatch):
    import specframe.frames as fr

    monkeypatch.setattr(fr, "cg", lambda A, b, **kw: (np.zeros_like(b), 7))
    with pytest.warns(NumericWarning, match="did not converge"):
        rep = frame_bounds(HAAR6)
    assert not rep.converged and np.isnan(rep.A) and rep.warnings


def test_positivity_and_symmetry():
    probes = random_probes(HAAR6.window, 100, seed=11)
    S = [frame_apply(f, HAAR6) for f in probes[:20]]
    for f, Sf in zip(probes, S):
        assert inner_product(Sf, f) >= -1e-14
    for i in range(0, 20, 2):
        a = inner_product(S[i], probes[i + 1])
        b = inner_product(S[i + 1], probes[i])
        assert abs(a - b) < 1e-10
    for f in probes[20:]:
        assert analysis(f, HAAR6).norm2 >= 0.0


def test_dilation_commutation():
    # S D f = D S f when f's coefficients vanish on the outer two scales
    spec = WaveletSystemSpec((haar_wavelet(),), 6, (-4.0, 4.0))
    at = spec.atoms
    idx = [i for i in range(len(at)) if -3 <= at.scale[i] <= 3 and -1 <= at.funcs[i].support[0] and at.funcs[i].support[1] <= 1]
    f = linear_combination([at.funcs[i] for i in idx], np.random.default_rng(2).standard_normal(len(idx)))
    c = analysis(f, spec)
    assert np.max(np.abs(c.values[np.abs(at.scale) >= 5])) < 1e-15
    lhs = frame_apply(apply_dyadic(f, 1, 0), spec)
    rhs = apply_dyadic(frame_apply(f, spec), 1, 0)
    assert (lhs - rhs).norm() / f.norm() < 1e-12


def test_quasi_affine_atoms():
    spec = quasi_affine(WaveletSystemSpec((haar_wavelet(),), 1, (0.0, 4.0)))
    at = spec.atoms
    neg = at.scale == -1
    assert sorted(at.shift[neg]) == [-1.0, 0.0, 1.0, 2.0, 3.0]
    assert np.allclose(at.weight[neg], 2 ** -0.5)
    for f, a in zip(np.array(at.funcs, dtype=object)[neg], at.shift[neg]):
        assert f.support == (a, a + 2.0)
    pos = ~neg
    aff = WaveletSystemSpec((haar_wavelet(),), 1, (0.0, 4.0)).atoms
    assert np.array_equal(at.shift[pos], aff.shift[aff.scale >= 0])


def test_quasi_affine_j0_unchanged():
    spec = WaveletSystemSpec((haar_wavelet(),), 0)
    q = quasi_affine(spec)
    assert np.array_equal(q.atoms.shift, spec.atoms.shift)
    assert np.array_equal(q.atoms.weight, spec.atoms.weight)


def test_quasi_affine_twice_raises():
    with pytest.raises(InvalidArgument):
        quasi_affine(quasi_affine(HAAR6))


def test_quasi_affine_commutes_with_translation():
    q = quasi_affine(HAAR6)
    for f in random_probes(q.window, 4, seed=9):
        lhs = frame_apply(translate(f, 1.0), q)
        rhs = translate(frame_apply(f, q), 1.0)
        assert (lhs - rhs).norm() / f.norm() < 1e-12


def test_reconstruct_haar_in_span():
    f = haar_span_function(HAAR8)
    res = reconstruct(f, HAAR8)
    assert res.relative_error < 1e-10 and res.method == "canonical-dual"
    assert reconstruct(f, HAAR8, B=1.0).relative_error < 1e-10


def test_reconstruct_zero():
    g, err = reconstruct(zero(), HAAR6)
    assert err == 0.0 and g.is_zero()


def test_reconstruct_framelet_dual_route():
    fam = framelet_family(256)
    spec = WaveletSystemSpec(fam.psis, 6)
    at = spec.atoms
    idx = [i for i in range(len(at)) if 0 <= at.scale[i] <= 2 and -1 <= at.funcs[i].support[0] and at.funcs[i].support[1] <= 1]
    f = linear_combination([at.funcs[i] for i in idx], np.random.default_rng(0).standard_normal(len(idx)))
    assert reconstruct(f, spec).relative_error < 1e-8


def test_reconstruct_bad_bound():
    with pytest.raises(InvalidArgument):
        reconstruct(haar_wavelet(), HAAR6, B=0.0)


def test_coefficients_csv(tmp_path):
    c = analysis(haar_wavelet(), HAAR6)
    p = tmp_path / "c.csv"
    c.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["psi", "j", "k", "re", "im"]
    assert len(rows) == 1 + len(HAAR6.atoms)
    hit = [r for r in rows[1:] if float(r[3]) != 0.0]
    assert hit == [["0", "0", "0.0", "1.0", "0.0"]]


def test_random_probes_in_central_half():
    for f in random_probes((-2.0, 2.0), 32, seed=1):
        a, b = f.support
        assert -1.0 <= a and b <= 1.0 and f.degree <= 2


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        WaveletSystemSpec((haar_wavelet(),), -1)
    with pytest.raises(InvalidArgument):
        WaveletSystemSpec((haar_wavelet(),), 2, (1.0, 1.0))
    with pytest.raises(InvalidArgument):
        WaveletSystemSpec((haar_wavelet(),), 2, flavor="other")


@given(st.integers(0, 2 ** 31 - 1))
def test_frame_operator_positive_on_random_probes(seed):
    f = random_probes(HAAR6.window, 1, seed=seed)[0]
    assert inner_product(frame_apply(f, HAAR6), f) >= 0.0
