"""Principal shift-invariant spaces V0 = span{T^k phi}.

Projection symbols, membership tests, refinement and wavelet masks, and
the MRA nesting/density report. Symbols are sampled on a uniform theta
grid; when the samples are reproduced by a trigonometric polynomial of
the admissible degree to 1e-10 the exact form is kept as well.

Brackets default to their exact correlation form (``method="exact"``),
which for compactly supported functions is a finite trigonometric
polynomial. ``method="truncated"`` uses the truncated fiber sums instead.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fiber as fib
from .errors import DegenerateSupportError, InvalidArgument
from .signals import apply_dyadic
from .trig import TrigPolynomial

BRACKET_FLOOR = 1e-12
EXACT_FIT_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicSymbol:
    """1-periodic symbol sampled on ``grid``.

    ``on_support`` marks grid points of sigma(phi); samples are zero
    elsewhere. ``exact`` is the trigonometric polynomial form when known.
    """

    grid: np.ndarray
    samples: np.ndarray
    exact: Optional[TrigPolynomial] = None
    on_support: Optional[np.ndarray] = None
    fit_residual: float = field(default=float("nan"))

    def __post_init__(self):
        if self.on_support is None:
            object.__setattr__(self, "on_support", np.ones(self.grid.shape, bool))

    @classmethod
    def from_trig(cls, poly, grid):
        grid = np.asarray(grid, dtype=np.float64)
        return cls(grid, poly(grid), poly, None, 0.0)

    def at(self, theta):
        """Evaluate off the grid (exact form, else trigonometric interpolation)."""
        theta = np.asarray(theta, dtype=np.float64)
        if self.exact is not None:
            return self.exact(theta)
        n = self.grid.size
        c = np.fft.fft(self.samples) / n  # samples = sum_k c_k exp(+2 pi i k theta)
        k = np.fft.fftfreq(n, 1.0 / n)
        ph = np.multiply.outer(theta - np.floor(theta), k)
        return np.exp(2j * np.pi * ph) @ c

    def star(self):
        """Samples of the circle-side symbol, ``H_*(omega) = conj(H(theta))``."""
        return np.conj(self.samples)

    def shifted_half(self):
        """Samples at ``theta + 1/2`` (grid size must be even)."""
        return np.roll(self.samples, -(self.grid.size // 2))

    def scaled(self, c):
        exact = self.exact * c if self.exact is not None else None
        return PeriodicSymbol(self.grid, self.samples * c, exact, self.on_support, self.fit_residual)


def _brackets(f, phi, grid, K, method):
    if method == "exact":
        return fib.bracket_exact(f, phi)(grid), fib.bracket_exact(phi, phi)(grid).real
    if method == "truncated":
        return fib.bracket(f, phi, grid, K).value, fib.bracket(phi, phi, grid, K).value.real
    raise InvalidArgument(f"unknown bracket method {method!r}")


def _fit_range(f, phi):
    fa, fb = f.support
    pa, pb = phi.support
    return int(np.floor(fa - pb)), int(np.ceil(fb - pa))


def project_v0(f, phi, grid, K=fib.DEFAULT_K, sigma=None, method="exact"):
    """Symbol ``H^f = [fhat, phihat] / [phihat, phihat]`` of the projection onto V0.

    Zero off sigma(phi). Raises :class:`DegenerateSupportError` when the
    bracket of ``phi`` vanishes on the whole grid or on a point marked by
    a supplied ``sigma``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    num, den = _brackets(f, phi, grid, K, method)
    top = den.max() if den.size else 0.0
    if top <= 0.0:
        raise DegenerateSupportError("bracket of phi vanishes on the grid; sigma(phi) is empty")
    on = den > BRACKET_FLOOR * top
    if sigma is not None:
        if sigma.indicator.shape != grid.shape:
            raise InvalidArgument("sigma grid does not match")
        bad = sigma.indicator & ~on
        if bad.any():
            raise DegenerateSupportError(
                f"bracket below floor on {int(bad.sum())} points marked in sigma(phi)"
            )
    H = np.zeros(grid.shape, np.complex128)
    H[on] = num[on] / den[on]

    exact, resid = None, float("nan")
    if f.npieces and phi.npieces:
        kmin, kmax = _fit_range(f, phi)
        if kmax - kmin + 1 < grid.size:
            poly, resid = TrigPolynomial.fit(grid[on], H[on], kmin, kmax)
            if resid < EXACT_FIT_TOL:
                exact = poly.trimmed(1e-14)
    elif f.npieces == 0:
        exact, resid = TrigPolynomial([0.0], 0), 0.0
    return PeriodicSymbol(grid, H, exact, on, resid)


def membership_v0(f, phi, grid, K=fib.DEFAULT_K, tol=1e-8, method="exact"):
    """Is ``f`` in V0? Returns ``(verdict, residual)``.

    The residual is the largest relative fiber distance
    ``|| f_*(theta) - H_*(theta) phi_*(theta) || / max(1, ||f_*(theta)||)``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if f.is_zero():
        return True, 0.0
    H = project_v0(f, phi, grid, K, method=method)
    ff = fib.fiber_samples(f, grid, K)
    pf = fib.fiber_samples(phi, grid, K)
    diff = ff - H.star()[:, None] * pf
    num = np.sqrt(np.sum(np.abs(diff) ** 2, axis=1))
    den = np.maximum(1.0, np.sqrt(np.sum(np.abs(ff) ** 2, axis=1)))
    resid = float(np.max(num / den))
    return resid <= tol, resid


def extract_mask(g, phi, grid, K=fib.DEFAULT_K, method="exact"):
    """Mask of ``g`` relative to ``phi``: ``ghat = H phihat`` on sigma(phi).

    Pass ``g = D^{-1} phi`` for the refinement mask and ``g = D^{-1} psi``
    for wavelet masks (see :func:`half_dilate`). Masks come out in the
    ``D^{-1}`` normalization, i.e. sqrt(2) times the filter-bank masks.
    """
    return project_v0(g, phi, grid, K, method=method)


def half_dilate(f):
    """``D^{-1} f = 2**(-1/2) f(x / 2)``."""
    return apply_dyadic(f, -1, 0)


def refinability_check(phi, grid, K=fib.DEFAULT_K, tol=1e-8, method="exact"):
    """``D^{-1} phi in V0``; returns ``(verdict, residual)``."""
    if phi.is_zero():
        raise DegenerateSupportError("phi is zero; sigma(phi) is empty")
    return membership_v0(half_dilate(phi), phi, grid, K, tol, method)


@dataclass(frozen=True)
class MRAReport:
    nested: bool
    density: bool
    origin_nonzero: bool
    union_cover: bool
    refinement_residual: float
    delta: float
    window: float

    def as_dict(self):
        return dict(self.__dict__)


def mra_density_check(phi, grid, K=fib.DEFAULT_K, delta=1.0 / 64, window=64.0, scales=20, tol=1e-8):
    """Nesting (refinability) and density of the ladder ``V_j = D^j V0``.

    ``origin_nonzero`` samples ``phihat`` on ``(-delta, delta)`` at the grid
    spacing; it is the sufficient density condition and sets ``density``.
    ``union_cover`` is the weaker test that every sampled frequency in
    ``[-window, window]`` lies in some ``2^j supp phihat``, ``|j| <= scales``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    try:
        nested, resid = refinability_check(phi, grid, K, tol)
    except DegenerateSupportError:
        nested, resid = False, float("inf")
    h = 1.0 / grid.size
    m = int(np.ceil(delta / h))
    near = np.arange(-m + 1, m) * h
    vals = np.abs(phi.fourier(near))
    floor = 1e-12 * max(1.0, float(vals.max()) if vals.size else 0.0)
    origin_nonzero = bool(np.all(vals > floor))

    ys = np.arange(-window, window + h / 2, h * 16)
    covered = np.zeros(ys.shape, bool)
    for j in range(-scales, scales + 1):
        covered |= np.abs(phi.fourier(ys * 2.0 ** (-j))) > floor
    return MRAReport(
        nested=bool(nested),
        density=origin_nonzero,
        origin_nonzero=origin_nonzero,
        union_cover=bool(covered.all()),
        refinement_residual=float(resid),
        delta=float(delta),
        window=float(window),
    )
