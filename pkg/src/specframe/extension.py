"""Unitary and oblique extension principles, and dual-pair identities.

All mask identities are evaluated in the theta variable on a uniform
grid of even size, where ``omega**2`` is ``theta -> 2 theta`` and
``-omega`` is ``theta -> theta + 1/2``; both are exact index maps on the
grid, so no interpolation enters any residual.

Two mask normalizations coexist:

``"paper"``
    masks of ``D^{-1} phi`` and ``D^{-1} psi`` relative to ``phi``, so the
    Haar refinement mask is ``sqrt(2) (1 + e)/2``;
``"unit"``
    filter-bank masks, ``paper / sqrt(2)``.

UEP and the second OEP are stated for unit masks (the Haar system then
passes with residual zero); the dual-pair OEP carries the factor 2 that
belongs to paper masks. Every report records which one was used.
"""
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fiber as fib
from .errors import InvalidArgument, NumericWarning
from .shift_invariant import PeriodicSymbol, extract_mask, half_dilate
from .signals import (
    apply_dyadic,
    gram_matrix,
    linear_combination,
    refinement_combination,
)
from .trig import TrigPolynomial

SQRT2 = np.sqrt(2.0)
CONVENTIONS = ("unit", "paper")


def _check_convention(name):
    if name not in CONVENTIONS:
        raise InvalidArgument(f"convention must be one of {CONVENTIONS}, got {name!r}")
    return name


def _as_trig(desc):
    if isinstance(desc, TrigPolynomial):
        return desc
    if isinstance(desc, dict):
        return TrigPolynomial(desc["taps"], desc.get("offset", 0))
    return TrigPolynomial(desc, 0)


@dataclass(frozen=True)
class MaskFamily:
    """Refinement mask and wavelet masks on one grid.

    ``phi`` and ``psis`` are the generating functions when known; they
    are only used by the bracket-form cross-checks.
    """

    refinement: PeriodicSymbol
    wavelets: tuple = ()
    normalization: str = "unit"
    phi: Optional[object] = None
    psis: tuple = ()

    def __post_init__(self):
        _check_convention(self.normalization)
        object.__setattr__(self, "wavelets", tuple(self.wavelets))
        object.__setattr__(self, "psis", tuple(self.psis))
        for w in self.wavelets:
            if w.grid.shape != self.refinement.grid.shape or np.any(w.grid != self.refinement.grid):
                raise InvalidArgument("all masks of a family must share one grid")

    @property
    def grid(self):
        return self.refinement.grid

    @property
    def symbols(self):
        return (self.refinement,) + self.wavelets

    @classmethod
    def from_taps(cls, refinement, wavelets, grid, normalization="unit", phi=None):
        """Build from filter taps.

        Each mask is a TrigPolynomial, a tap list (offset 0) or a dict
        ``{"taps": [...], "offset": k}``; taps are in ``normalization``.
        """
        _check_convention(normalization)
        grid = np.asarray(grid, dtype=np.float64)
        m0 = PeriodicSymbol.from_trig(_as_trig(refinement), grid)
        ws = [PeriodicSymbol.from_trig(_as_trig(w), grid) for w in wavelets]
        fam = cls(m0, ws, normalization, phi)
        if phi is not None:
            object.__setattr__(fam, "psis", tuple(fam._synthesize_wavelets()))
        return fam

    @classmethod
    def from_functions(cls, phi, psis, grid, K=fib.DEFAULT_K, normalization="unit"):
        """Extract masks of ``D^{-1} phi`` and ``D^{-1} psi`` relative to ``phi``."""
        _check_convention(normalization)
        grid = np.asarray(grid, dtype=np.float64)
        m0 = extract_mask(half_dilate(phi), phi, grid, K)
        ws = [extract_mask(half_dilate(p), phi, grid, K) for p in psis]
        fam = cls(m0, ws, "paper", phi, psis)
        return fam.to(normalization)

    def to(self, normalization):
        _check_convention(normalization)
        if normalization == self.normalization:
            return self
        c = 1.0 / SQRT2 if normalization == "unit" else SQRT2
        return MaskFamily(
            self.refinement.scaled(c),
            [w.scaled(c) for w in self.wavelets],
            normalization,
            self.phi,
            self.psis,
        )

    def _synthesize_wavelets(self):
        out = []
        for w in self.wavelets:
            if w.exact is None or np.any(w.exact.coeffs.imag != 0.0):
                return []
            out.append(
                refinement_combination(
                    self.phi, w.exact.coeffs.real, w.exact.kmin, self.normalization
                )
            )
        return out

    def with_wavelets(self, wavelets):
        return MaskFamily(self.refinement, wavelets, self.normalization, self.phi, ())


@dataclass(frozen=True)
class ThetaSymbol:
    """Multiplier of the oblique extension principle, sampled on the grid."""

    symbol: PeriodicSymbol
    label: str = ""

    @classmethod
    def constant(cls, value, grid):
        grid = np.asarray(grid, dtype=np.float64)
        return cls(PeriodicSymbol.from_trig(TrigPolynomial.constant(value), grid), f"constant {value}")

    @classmethod
    def from_trig(cls, poly, grid, label="trigonometric polynomial"):
        return cls(PeriodicSymbol.from_trig(_as_trig(poly), np.asarray(grid, dtype=np.float64)), label)

    @classmethod
    def from_masks(cls, masks, dual_masks):
        """``Theta = sum_i conj(H^{phi^i}) * Htilde^{phi~^i}`` in the theta variable."""
        if len(masks) != len(dual_masks) or not masks:
            raise InvalidArgument("need matching, nonempty lists of masks")
        grid = masks[0].grid
        samples = sum(np.conj(a.samples) * b.samples for a, b in zip(masks, dual_masks))
        exact = None
        if all(m.exact is not None for m in list(masks) + list(dual_masks)):
            exact = masks[0].exact.conj_symbol() * dual_masks[0].exact
            for a, b in zip(masks[1:], dual_masks[1:]):
                exact = exact + a.exact.conj_symbol() * b.exact
        return cls(PeriodicSymbol(grid, samples, exact), "from refinable masks")

    @property
    def grid(self):
        return self.symbol.grid

    @property
    def samples(self):
        return self.symbol.samples

    def at(self, theta):
        return self.symbol.at(theta)

    def doubled(self):
        """Samples of ``Theta(2 theta)`` (the ``omega**2`` argument)."""
        n = self.grid.size
        return self.samples[(2 * np.arange(n)) % n]

    def half_shifted(self):
        return np.roll(self.samples, -(self.grid.size // 2))

    def limit_probe(self, depth=20, nstart=64):
        """Values ``Theta(theta0 / 2**j)``, ``j = 1..depth``, for ``nstart`` starts.

        Starts are spread over ``[-1/2, 1/2)`` so that ``theta0 / 2**j``
        approaches 0 (``omega -> 1``) from both sides.
        """
        starts = (np.arange(nstart) + 0.5) / nstart - 0.5
        js = np.arange(1, depth + 1)
        pts = starts[None, :] / (2.0 ** js)[:, None]
        return js, starts, self.at(pts)


@dataclass(frozen=True)
class VerificationReport:
    verdict: bool
    max_residual_identity: float
    max_residual_offdiag: float
    grid_size: int
    restricted_to_sigma: bool
    convention: str
    tolerance: float
    conditions: dict = field(default_factory=dict)
    warnings: tuple = ()
    arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def as_dict(self):
        out = {
            "verdict": bool(self.verdict),
            "max_residual_identity": float(self.max_residual_identity),
            "max_residual_offdiag": float(self.max_residual_offdiag),
            "grid_size": int(self.grid_size),
            "restricted_to_sigma": bool(self.restricted_to_sigma),
            "convention": self.convention,
            "tolerance": float(self.tolerance),
            "conditions": self.conditions,
            "warnings": list(self.warnings),
        }
        return out


def uep_matrix(family, theta):
    """Rows ``(m(theta), m(theta + 1/2))`` for the refinement mask then each wavelet."""
    theta = float(theta)
    th = np.array([theta, (theta + 0.5) % 1.0])
    return np.array([s.at(th) for s in family.symbols])


def _grid_and_support(family, sigma):
    grid = family.grid
    n = grid.size
    if n % 2:
        raise InvalidArgument("grid size must be even so that theta + 1/2 is a grid point")
    if sigma is None:
        return grid, np.ones(n, bool), False
    if sigma.indicator.shape != grid.shape or np.any(sigma.grid != grid):
        raise InvalidArgument("spectral support grid does not match the mask grid")
    return grid, sigma.indicator, True


def _identity_residuals(th2, th, th_half, rows, rows_half, on, on_half):
    """Entries of ``H* diag(Theta(2.), 1, ..) H - diag(Theta, Theta(.+1/2))``.

    Shared by UEP (Theta = 1 as an array of ones) and the second OEP, so
    that the two agree bitwise when Theta is identically one.
    """
    r0, rw = rows[0], rows[1:]
    h0, hw = rows_half[0], rows_half[1:]
    d0 = th2 * np.abs(r0) ** 2 + np.sum(np.abs(rw) ** 2, axis=0) - th
    d1 = th2 * np.abs(h0) ** 2 + np.sum(np.abs(hw) ** 2, axis=0) - th_half
    off = th2 * np.conj(r0) * h0 + np.sum(np.conj(rw) * hw, axis=0)
    diag = np.maximum(np.where(on, np.abs(d0), 0.0), np.where(on_half, np.abs(d1), 0.0))
    offd = np.where(on & on_half, np.abs(off), 0.0)
    return diag, offd, off


def _rows(family):
    rows = np.array([s.samples for s in family.symbols])
    half = np.roll(rows, -(family.grid.size // 2), axis=1)
    return rows, half


def uep_verify(family, grid=None, sigma=None, tol=1e-12):
    """Check ``H*(theta) H(theta) = Id`` on the marked grid points."""
    if grid is not None and (np.shape(grid) != family.grid.shape or np.any(grid != family.grid)):
        raise InvalidArgument("grid does not match the mask grid")
    g, on, restricted = _grid_and_support(family, sigma)
    ones = np.ones(g.size)
    rows, half = _rows(family)
    on_half = np.roll(on, -(g.size // 2))
    diag, offd, _ = _identity_residuals(ones, ones, ones, rows, half, on, on_half)
    rd, ro = float(diag.max()), float(offd.max())
    return VerificationReport(
        verdict=rd <= tol and ro <= tol,
        max_residual_identity=rd,
        max_residual_offdiag=ro,
        grid_size=g.size,
        restricted_to_sigma=restricted,
        convention=family.normalization,
        tolerance=tol,
        arrays={"diagonal": diag, "offdiag": offd},
    )


def _bracket_form(family, theta, phi):
    """Residuals of the bracket-side identities, unit-normalized.

    With ``b_l = <(D^{-1} g_l)_*, phi_*>`` and ``G = ||phi_*||**2``:
    ``Theta(2.) |b_0|**2 + sum |b_l|**2 = Theta G**2`` and
    ``Theta(2.) b_0 conj(b_0(.+1/2)) + sum b_l conj(b_l(.+1/2)) = 0``.
    """
    psis = family.psis
    if len(psis) != len(family.wavelets):
        return None
    grid = family.grid
    gain = 1.0 / SQRT2 if family.normalization == "unit" else 1.0
    funcs = [half_dilate(phi)] + [half_dilate(p) for p in psis]
    b = np.array([fib.bracket_exact(phi, f)(grid) for f in funcs]) * gain
    G = fib.bracket_exact(phi, phi)(grid).real
    bh = np.roll(b, -(grid.size // 2), axis=1)
    th2, th = theta.doubled(), theta.samples
    lhs1 = th2 * np.abs(b[0]) ** 2 + np.sum(np.abs(b[1:]) ** 2, axis=0)
    r1 = np.abs(lhs1 - th * G ** 2)
    r2 = np.abs(th2 * b[0] * np.conj(bh[0]) + np.sum(b[1:] * np.conj(bh[1:]), axis=0))
    return {"identity": float(r1.max()), "offdiag": float(r2.max())}


def oep_verify(family, theta, phi=None, grid=None, K=fib.DEFAULT_K, tol=1e-12, sigma=None, depth=20):
    """Second-version OEP: conditions (a) limit, (b) identities, (c) integrability.

    ``phi`` defaults to ``family.phi``; it is needed for (c) and for the
    bracket-form cross-check.
    """
    if grid is not None and (np.shape(grid) != family.grid.shape or np.any(grid != family.grid)):
        raise InvalidArgument("grid does not match the mask grid")
    if theta.grid.shape != family.grid.shape or np.any(theta.grid != family.grid):
        raise InvalidArgument("Theta grid does not match the mask grid")
    if not np.all(np.isfinite(theta.samples)):
        raise InvalidArgument("Theta is not finite on the grid")
    phi = phi if phi is not None else family.phi
    g, on, restricted = _grid_and_support(family, sigma)
    rows, half = _rows(family)
    on_half = np.roll(on, -(g.size // 2))
    diag, offd, _ = _identity_residuals(
        theta.doubled(), theta.samples, theta.half_shifted(), rows, half, on, on_half
    )
    rd, ro = float(diag.max()), float(offd.max())

    js, _, probe = theta.limit_probe(depth)
    dev = np.max(np.abs(probe - 1.0), axis=1)
    cond_a = bool(dev[-1] < max(tol, 1e-10))

    integral = None
    cond_c = True
    if phi is not None:
        G = fib.bracket_exact(phi, phi)(g).real
        integral = complex(np.mean(theta.samples * G))
        cond_c = bool(np.isfinite(integral))
    cross = _bracket_form(family, theta, phi) if phi is not None else None

    conditions = {
        "a_limit": {
            "pass": cond_a,
            "depth": int(depth),
            "max_deviation_by_j": [float(d) for d in dev],
        },
        "b_identities": {"pass": rd <= tol and ro <= tol},
        "c_integrability": {
            "pass": cond_c,
            "integral": None if integral is None else [integral.real, integral.imag],
        },
        "bracket_form": cross,
        "theta": theta.label,
    }
    return VerificationReport(
        verdict=rd <= tol and ro <= tol and cond_a and cond_c,
        max_residual_identity=rd,
        max_residual_offdiag=ro,
        grid_size=g.size,
        restricted_to_sigma=restricted,
        convention=family.normalization,
        tolerance=tol,
        conditions=conditions,
        arrays={"diagonal": diag, "offdiag": offd},
    )


def _bounded_probe(pairs, grid, ceiling):
    worst = 0.0
    for f, ft in pairs:
        prod = np.sqrt(
            np.abs(fib.bracket_exact(f, f)(grid).real) * np.abs(fib.bracket_exact(ft, ft)(grid).real)
        )
        worst = max(worst, float(np.max(prod)) if np.all(np.isfinite(prod)) else np.inf)
    return worst, worst <= ceiling


def dual_oep_verify(
    family,
    dual_family,
    theta=None,
    sigma=None,
    sigma_dual=None,
    tol=1e-12,
    rhs_factor=2.0,
    phi_masks=None,
    dual_phi_masks=None,
    bounded_pairs=(),
    ceiling=1e8,
):
    """Dual-pair OEP identities.

    ``Theta(2.) conj(H0) Ht0 + sum conj(Hl) Htl = rhs_factor * Theta`` on
    sigma(phi) and sigma(phi~), and the same sum with the dual masks at
    ``theta + 1/2`` equal to zero. ``rhs_factor`` is 2 for paper masks;
    set 1 to test the unit-normalized reading. When ``theta`` is None it
    is assembled from ``phi_masks`` / ``dual_phi_masks``.

    ``bounded_pairs`` lists ``(f, f~)`` function pairs whose fiber-norm
    products must stay below ``ceiling``; a failure is reported with a
    :class:`NumericWarning` rather than an exception.
    """
    if len(family.wavelets) != len(dual_family.wavelets):
        raise InvalidArgument("family and dual family need the same number of wavelets")
    grid = family.grid
    if dual_family.grid.shape != grid.shape or np.any(dual_family.grid != grid):
        raise InvalidArgument("family and dual family must share a grid")
    if theta is None:
        if not phi_masks:
            raise InvalidArgument("need Theta or the masks of Phi and its dual")
        theta = ThetaSymbol.from_masks(phi_masks, dual_phi_masks)
    if not np.all(np.isfinite(theta.samples)):
        raise InvalidArgument("Theta is not finite on the grid")
    _, on, r1 = _grid_and_support(family, sigma)
    _, on_t, r2 = _grid_and_support(dual_family, sigma_dual)
    n2 = grid.size // 2

    rows, _ = _rows(family)
    drows, dhalf = _rows(dual_family)
    th2 = theta.doubled()
    eq1 = th2 * np.conj(rows[0]) * drows[0] + np.sum(np.conj(rows[1:]) * drows[1:], axis=0) - rhs_factor * theta.samples
    eq2 = th2 * np.conj(rows[0]) * dhalf[0] + np.sum(np.conj(rows[1:]) * dhalf[1:], axis=0)
    m1 = on & on_t
    m2 = on & np.roll(on_t, -n2)
    res1 = float(np.max(np.where(m1, np.abs(eq1), 0.0)))
    res2 = float(np.max(np.where(m2, np.abs(eq2), 0.0)))

    warns = []
    bounded = None
    if bounded_pairs:
        worst, ok = _bounded_probe(bounded_pairs, grid, ceiling)
        bounded = {"pass": ok, "max_product": worst, "ceiling": ceiling}
        if not ok:
            msg = f"unbounded bracket: fiber-norm product {worst:.3e} exceeds {ceiling:.3e}"
            warnings.warn(msg, NumericWarning, stacklevel=2)
            warns.append(msg)

    return VerificationReport(
        verdict=res1 <= tol and res2 <= tol,
        max_residual_identity=res1,
        max_residual_offdiag=res2,
        grid_size=grid.size,
        restricted_to_sigma=r1 or r2,
        convention=family.normalization,
        tolerance=tol,
        conditions={"rhs_factor": float(rhs_factor), "boundedness": bounded, "theta": theta.label},
        warnings=tuple(warns),
        arrays={"oep1": np.where(m1, eq1, 0.0), "oep2": np.where(m2, eq2, 0.0)},
    )


# ----------------------------------------------------------------------
# dual pairs of nonhomogeneous systems
# ----------------------------------------------------------------------

def _shift_range(f, g, j):
    """Shifts ``k`` for which ``D^j T^k g`` can meet the support of ``f``."""
    fa, fb = f.support
    ga, gb = g.support
    s = 2.0 ** j
    return np.arange(int(np.floor(s * fa - gb)), int(np.ceil(s * fb - ga)) + 1)


def level_expansion(f, gens, duals, j):
    """``sum_i sum_k <f, D^j T^k dual_i> D^j T^k gen_i`` (finite, exact)."""
    if f.is_zero():
        return f
    funcs, weights = [], []
    for g, gt in zip(gens, duals):
        if g.is_zero() or gt.is_zero():
            continue
        ks = _shift_range(f, gt, j)
        atoms_t = [apply_dyadic(gt, j, int(k)) for k in ks]
        coef = gram_matrix([f], atoms_t)[0]
        for k, c in zip(ks, coef):
            if c != 0.0:
                funcs.append(apply_dyadic(g, j, int(k)))
                weights.append(c)
    return linear_combination(funcs, weights)


@dataclass(frozen=True)
class DualPairReport:
    telescoping_residual: float
    per_function: tuple
    completeness_levels: tuple
    completeness_probe: tuple
    monotone: bool
    J: int
    tolerance: float

    @property
    def verdict(self):
        return self.telescoping_residual <= self.tolerance

    def as_dict(self):
        return {
            "verdict": bool(self.verdict),
            "telescoping_residual": float(self.telescoping_residual),
            "per_function": [float(x) for x in self.per_function],
            "completeness_levels": [int(x) for x in self.completeness_levels],
            "completeness_probe": [float(x) for x in self.completeness_probe],
            "completeness_monotone": bool(self.monotone),
            "J": int(self.J),
            "tolerance": float(self.tolerance),
        }


def dual_pair_identity_check(
    Phi, Psi, Phi_t, Psi_t, tests, J=0, levels=(0, 2, 4, 6), tol=1e-10, probe=None
):
    """Telescoping identity at level ``J`` and the completeness probe.

    The telescoping residual is the largest
    ``||P_J f + Q_J f - P_{J+1} f|| / ||f||`` over ``tests``. The
    completeness probe ``||P_J f - f|| / ||f||`` is reported for each of
    ``levels`` on ``probe`` (default: the first test function).
    """
    if len(Phi) != len(Phi_t) or len(Psi) != len(Psi_t):
        raise InvalidArgument("generator lists and dual lists differ in length")
    per = []
    for f in tests:
        nf = f.norm()
        if nf == 0.0:
            per.append(0.0)
            continue
        lhs = level_expansion(f, Phi, Phi_t, J) + level_expansion(f, Psi, Psi_t, J)
        rhs = level_expansion(f, Phi, Phi_t, J + 1)
        per.append((lhs - rhs).norm() / nf)
    probe = probe if probe is not None else (tests[0] if tests else None)
    comp = []
    if probe is not None:
        npr = probe.norm()
        for lev in levels:
            if npr == 0.0:
                comp.append(0.0)
            else:
                comp.append((level_expansion(probe, Phi, Phi_t, lev) - probe).norm() / npr)
    monotone = all(b < a for a, b in zip(comp, comp[1:]))
    return DualPairReport(
        telescoping_residual=max(per) if per else 0.0,
        per_function=tuple(per),
        completeness_levels=tuple(levels),
        completeness_probe=tuple(comp),
        monotone=monotone,
        J=J,
        tolerance=tol,
    )
