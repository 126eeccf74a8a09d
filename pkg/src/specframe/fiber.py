"""Periodized Fourier transform, bracket products and spectral support.

The fiber of ``f`` at ``theta in [0, 1)`` is the sequence
``v_k = conj(fhat(theta + k))``; fibers are truncated to ``|k| <= K`` and
carry a certified bound on the omitted energy, derived from the jumps of
the derivatives of ``f`` (see :meth:`CompactPiecewisePoly.jumps`).

The bracket keeps the unconjugated orientation
``[fhat, ghat](theta) = sum_k fhat(theta+k) conj(ghat(theta+k))``, which is
the l2 inner product of the fibers of ``g`` and ``f`` in that order.
"""
import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .trig import TrigPolynomial

DEFAULT_K = 64
DEFAULT_GRID = 1024


def uniform_grid(n=DEFAULT_GRID):
    """``theta_i = i / n`` with ``n`` a power of two."""
    n = int(n)
    if n < 2 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= 2, got {n}")
    return np.arange(n) / n


def tail_bound(f, K):
    """Upper bound on ``sum_{|k|>K} |fhat(theta+k)|**2`` for theta in [0, 1)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    a = f.jumps() / (2 * np.pi) ** (np.arange(f.degree + 1) + 1)
    if not np.any(a):
        return 0.0
    r = np.arange(a.size)
    g_at_k = float((a / K ** (r + 1)).sum())
    expo = r[:, None] + r[None, :] + 1
    integral = float((np.outer(a, a) * K ** (-expo.astype(float)) / expo).sum())
    # both sides of the fiber, first omitted point plus integral comparison
    return 2.0 * (g_at_k ** 2 + integral)


@dataclass(frozen=True)
class FiberVector:
    """Truncated fiber ``conj(fhat(theta + k))`` for ``|k| <= K``."""

    theta: float
    K: int
    entries: np.ndarray
    tail_bound: float

    @property
    def ks(self):
        return np.arange(-self.K, self.K + 1)

    def norm2(self):
        return float(np.sum(np.abs(self.entries) ** 2))

    def __getitem__(self, k):
        return self.entries[k + self.K]


def _reduce(theta):
    theta = np.asarray(theta, dtype=np.float64)
    return theta - np.floor(theta)


def fiber_samples(f, theta, K=DEFAULT_K):
    """Fibers at every ``theta`` as an array of shape ``theta.shape + (2K+1,)``."""
    theta = _reduce(theta)
    ks = np.arange(-K, K + 1)
    y = theta[..., None] + ks
    return np.conj(f.fourier(y))


def fiber_vector(f, theta, K=DEFAULT_K):
    if K < 1:
        raise ValueError("K must be >= 1")
    th = float(_reduce(theta))
    return FiberVector(th, int(K), fiber_samples(f, np.array(th), K), tail_bound(f, K))


class Bracket(NamedTuple):
    value: np.ndarray
    tail: float


def bracket(f, g, theta, K=DEFAULT_K):
    """Truncated ``[fhat, ghat](theta)`` with a bound on the omitted terms.

    ``theta`` may be scalar or an array; values are complex.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    fv = fiber_samples(f, theta, K)
    gv = fv if g is f else fiber_samples(g, theta, K)
    # fibers hold conjugates: fhat * conj(ghat) = conj(fv) * gv
    value = np.sum(np.conj(fv) * gv, axis=-1)
    tail = float(np.sqrt(tail_bound(f, K) * tail_bound(g, K)))
    if np.ndim(theta) == 0:
        value = complex(value)
    return Bracket(value, tail)


def bracket_exact(f, g):
    """``[fhat, ghat]`` as a trigonometric polynomial.

    Its coefficients are the correlations ``<f, T^n g>``, finitely many
    for compactly supported inputs.
    """
    if f.npieces == 0 or g.npieces == 0:
        return TrigPolynomial([0.0], 0)
    fa, fb = f.support
    ga, gb = g.support
    nlo = int(np.floor(fa - gb))
    nhi = int(np.ceil(fb - ga))
    ns = np.arange(nlo, nhi + 1)
    gl, gw, gc = g.pieces()
    P = g.npieces
    fam = (
        (gl[None, :] + ns[:, None]).ravel(),
        np.tile(gw, ns.size),
        np.tile(gc, (ns.size, 1)),
        np.arange(0, P * ns.size + 1, P),
    )
    fl, fw, fc = f.pieces()
    corr = kernels.piecewise_gram((fl, fw, fc, np.array([0, f.npieces])), fam)[0]
    return TrigPolynomial(corr, nlo).trimmed()


@dataclass(frozen=True)
class SpectralSupport:
    """Grid-sampled ``sigma(phi)``: where the bracket of ``phi`` is nonzero."""

    grid: np.ndarray
    indicator: np.ndarray
    threshold: float
    values: np.ndarray

    @property
    def count(self):
        return int(self.indicator.sum())

    def all(self):
        return bool(self.indicator.all())


def support_sigma(phi, grid, K=DEFAULT_K, threshold=1e-12):
    """Mark grid points with ``[phihat, phihat] > threshold * max``."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty grid")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    vals = np.real(bracket(phi, phi, grid, K).value)
    top = vals.max() if vals.size else 0.0
    if top <= 0.0:
        ind = np.zeros(grid.shape, bool)
    else:
        ind = vals > threshold * top
    return SpectralSupport(grid, ind, float(threshold), vals)


def export_fibers_csv(f, grid, K, path):
    """Write ``theta, k, re, im`` rows of the truncated fibers."""
    fib = fiber_samples(f, np.asarray(grid), K)
    ks = np.arange(-K, K + 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "k", "re", "im"])
        for th, row in zip(grid, fib):
            for k, v in zip(ks, row):
                w.writerow([repr(float(th)), int(k), repr(float(v.real)), repr(float(v.imag))])
