"""Compactly supported piecewise polynomials on the real line.

Functions are stored piece by piece in local coordinates: on
``[breaks[p], breaks[p+1])`` the value is ``sum_n coeffs[p, n] * t**n``
with ``t = x - breaks[p]``. Breakpoints produced by dyadic dilations and
integer shifts are dyadic rationals and therefore exact in binary
floating point; B-spline coefficients are built from exact fractions.

Operators follow the usual wavelet conventions::

    (T f)(x) = f(x - 1)        (D f)(x) = sqrt(2) f(2x)
    apply_dyadic(f, j, k) = D^j T^k f = 2**(j/2) f(2**j x - k)
    fourier(f)(y) = int f(x) exp(-2 pi i x y) dx
"""
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from . import kernels

__all__ = [
    "CompactPiecewisePoly",
    "DyadicAtom",
    "bspline",
    "haar_wavelet",
    "indicator",
    "zero",
    "fourier_eval",
    "inner_product",
    "gram_matrix",
    "apply_dyadic",
    "restrict",
    "translate",
    "linear_combination",
    "refinement_combination",
]


def _taylor_shift(coeffs, delta):
    """Re-expand local polynomials about ``t = delta``.

    ``coeffs`` has shape (..., D) and ``delta`` broadcasts against the
    leading axes.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)[..., None]
    deg = coeffs.shape[-1]
    out = np.zeros(np.broadcast_shapes(coeffs.shape, delta.shape))
    for m in range(deg):
        acc = np.zeros(out.shape[:-1])
        for n in range(deg - 1, m - 1, -1):
            acc = acc * delta[..., 0] + comb(n, m) * coeffs[..., n]
        out[..., m] = acc
    return out


class CompactPiecewisePoly:
    """Real piecewise polynomial with compact support.

    Parameters
    ----------
    breaks : sequence of real, increasing, length ``P + 1``
    coeffs : array_like, shape ``(P, D)``, local monomial coefficients

    The zero function has no pieces and support ``(0.0, 0.0)``.
    """

    __slots__ = ("breaks", "coeffs")

    def __init__(self, breaks, coeffs):
        breaks = np.array([float(b) for b in breaks], dtype=np.float64)
        coeffs = np.array(coeffs, dtype=np.float64)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if breaks.size == 0:
            breaks = np.zeros(0)
            coeffs = np.zeros((0, max(coeffs.shape[-1], 1)))
        else:
            if coeffs.shape[0] != breaks.size - 1:
                raise ValueError(
                    f"{breaks.size} breakpoints need {breaks.size - 1} pieces, got {coeffs.shape[0]}"
                )
            if not np.all(np.diff(breaks) > 0):
                raise ValueError("breakpoints must be strictly increasing")
            if not np.all(np.isfinite(coeffs)):
                raise ValueError("coefficients must be finite")
        breaks.setflags(write=False)
        coeffs.setflags(write=False)
        self.breaks = breaks
        self.coeffs = coeffs

    # -- structure -----------------------------------------------------

    @property
    def npieces(self):
        return self.coeffs.shape[0]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def support(self):
        if self.npieces == 0:
            return (0.0, 0.0)
        return (float(self.breaks[0]), float(self.breaks[-1]))

    @property
    def left(self):
        return self.breaks[:-1]

    @property
    def width(self):
        return np.diff(self.breaks)

    def is_zero(self):
        return self.npieces == 0 or not np.any(self.coeffs)

    def pieces(self):
        """(left, width, coeffs) arrays as consumed by :mod:`specframe.kernels`."""
        return self.left, self.width, self.coeffs

    def with_degree(self, deg):
        """Same function with the coefficient array padded to ``deg``."""
        if deg < self.degree:
            raise ValueError("cannot lower the degree")
        pad = np.zeros((self.npieces, deg + 1))
        pad[:, : self.degree + 1] = self.coeffs
        return CompactPiecewisePoly(self.breaks, pad)

    def trimmed(self):
        """Drop identically-zero pieces at both ends."""
        nz = np.flatnonzero(np.any(self.coeffs != 0.0, axis=1))
        if nz.size == 0:
            return zero()
        lo, hi = nz[0], nz[-1]
        return CompactPiecewisePoly(self.breaks[lo:hi + 2], self.coeffs[lo:hi + 1])

    # -- evaluation ----------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape)
        if self.npieces == 0:
            return out
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.npieces)
        p = idx[inside]
        t = x[inside] - self.breaks[p]
        v = np.zeros(t.shape)
        for n in range(self.degree, -1, -1):
            v = v * t + self.coeffs[p, n]
        out[inside] = v
        return out

    def fourier(self, y):
        """Fourier transform at the frequencies ``y`` (any shape)."""
        y = np.asarray(y, dtype=np.float64)
        vals = kernels.piecewise_fourier(self.left, self.width, self.coeffs, y)
        return vals.reshape(y.shape)

    def norm2(self):
        """Squared L2 norm from closed-form piece integrals."""
        if self.npieces == 0:
            return 0.0
        deg = self.degree + 1
        n = np.arange(deg)
        expo = n[:, None] + n[None, :] + 1
        w = self.width[:, None, None]
        terms = self.coeffs[:, :, None] * self.coeffs[:, None, :] * w ** expo / expo
        return float(terms.sum())

    def norm(self):
        return float(np.sqrt(self.norm2()))

    def integral(self):
        w = self.width[:, None]
        n = np.arange(self.degree + 1)
        return float((self.coeffs * w ** (n + 1) / (n + 1)).sum())

    def jumps(self):
        """Total absolute jump of each derivative order over all breakpoints.

        Entry ``r`` is ``sum_b |f^(r)(b+) - f^(r)(b-)|`` including the two
        support endpoints. These constants bound the Fourier decay::

            |f^(y)| <= sum_r jumps[r] / (2 pi |y|)**(r + 1)
        """
        deg = self.degree + 1
        out = np.zeros(deg)
        if self.npieces == 0:
            return out
        w = self.width
        for r in range(deg):
            # r-th derivative at left end and right end of each piece
            fact = np.array([factorial(n) / factorial(n - r) if n >= r else 0.0 for n in range(deg)])
            left_vals = self.coeffs[:, r] * factorial(r)
            powers = np.array([[wi ** (n - r) if n >= r else 0.0 for n in range(deg)] for wi in w])
            right_vals = (self.coeffs * fact * powers).sum(axis=1)
            starts = np.concatenate((left_vals, [0.0]))
            ends = np.concatenate(([0.0], right_vals))
            out[r] = np.abs(starts - ends).sum()
        return out

    # -- arithmetic ----------------------------------------------------

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return CompactPiecewisePoly(self.breaks, self.coeffs * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other):
        if not isinstance(other, CompactPiecewisePoly):
            return NotImplemented
        return linear_combination([self, other], [1.0, 1.0])

    def __sub__(self, other):
        if not isinstance(other, CompactPiecewisePoly):
            return NotImplemented
        return linear_combination([self, other], [1.0, -1.0])

    def __repr__(self):
        a, b = self.support
        return f"CompactPiecewisePoly(support=[{a:g}, {b:g}], pieces={self.npieces}, degree={self.degree})"

    # -- serialization -------------------------------------------------

    def to_dict(self):
        return {
            "type": "pieces",
            "breaks": [float(b) for b in self.breaks],
            "coeffs": [[float(c) for c in row] for row in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["breaks"], d["coeffs"])


def zero():
    return CompactPiecewisePoly([], np.zeros((0, 1)))


def indicator(a, b, height=1.0):
    """``height`` times the characteristic function of ``[a, b)``."""
    return CompactPiecewisePoly([a, b], [[height]])


def haar_wavelet():
    """chi_[0,1/2) - chi_[1/2,1)."""
    return CompactPiecewisePoly([0.0, 0.5, 1.0], [[1.0], [-1.0]])


def bspline(order):
    """Cardinal B-spline of the given order, supported on ``[0, order]``.

    Order 1 is the indicator of ``[0, 1)``, order 2 the hat function.
    The Fourier transform equals ``exp(-pi i y order) sinc(y)**order``.
    """
    if int(order) != order or order < 1:
        raise ValueError(f"B-spline order must be a positive integer, got {order!r}")
    m = int(order)
    coeffs = np.zeros((m, m))
    # B_m(x) = 1/(m-1)! sum_k (-1)^k C(m,k) (x-k)_+^(m-1); expand on [r, r+1) in t = x - r
    for r in range(m):
        row = [Fraction(0)] * m
        for k in range(r + 1):
            a = Fraction((-1) ** k * comb(m, k), factorial(m - 1))
            shift = r - k  # (t + shift)^(m-1)
            for n in range(m):
                row[n] += a * comb(m - 1, n) * Fraction(shift) ** (m - 1 - n)
        coeffs[r] = [float(c) for c in row]
    return CompactPiecewisePoly(range(m + 1), coeffs)


def fourier_eval(f, theta):
    """``int f(x) exp(-2 pi i x theta) dx``; scalar in, complex out."""
    vals = f.fourier(np.atleast_1d(theta))
    if np.ndim(theta) == 0:
        return complex(vals[0])
    return vals


def inner_product(f, g):
    """Exact ``<f, g>`` (real-valued functions, so the result is real)."""
    if f.npieces == 0 or g.npieces == 0:
        return 0.0
    fl, fw, fc = f.pieces()
    gl, gw, gc = g.pieces()
    gram = kernels.piecewise_gram(
        (fl, fw, fc, np.array([0, f.npieces])),
        (gl, gw, gc, np.array([0, g.npieces])),
    )
    return float(gram[0, 0])


def pack(funcs, degree=None):
    """Concatenate the pieces of ``funcs`` into one kernel-ready family."""
    deg = max([f.degree for f in funcs if f.npieces] + [0]) if degree is None else degree
    ls, ws, cs, off = [], [], [], [0]
    for f in funcs:
        if f.npieces:
            l, w, c = f.with_degree(deg).pieces()
            ls.append(l)
            ws.append(w)
            cs.append(c)
        off.append(off[-1] + f.npieces)
    if not ls:
        return np.zeros(0), np.zeros(0), np.zeros((0, deg + 1)), np.array(off)
    return np.concatenate(ls), np.concatenate(ws), np.vstack(cs), np.array(off)


def gram_matrix(fs, gs):
    """Exact ``<fs[a], gs[b]>`` for two lists of functions."""
    out = np.zeros((len(fs), len(gs)))
    fi = [a for a, f in enumerate(fs) if f.npieces]
    gi = [b for b, g in enumerate(gs) if g.npieces]
    if fi and gi:
        # empty families would index past the packed arrays in the kernel
        out[np.ix_(fi, gi)] = kernels.piecewise_gram(
            pack([fs[a] for a in fi]), pack([gs[b] for b in gi])
        )
    return out


def apply_dyadic(f, j, k):
    """``2**(j/2) f(2**j x - k)``; ``k`` may be any dyadic real."""
    if f.npieces == 0:
        return f
    scale = 2.0 ** j
    breaks = (f.breaks + k) / scale
    n = np.arange(f.degree + 1)
    coeffs = f.coeffs * (2.0 ** (j / 2.0)) * scale ** n
    return CompactPiecewisePoly(breaks, coeffs)


def restrict(f, lo, hi):
    """``f`` times the indicator of ``[lo, hi)``."""
    if f.npieces == 0 or hi <= lo:
        return zero()
    a, b = f.support
    lo, hi = max(lo, a), min(hi, b)
    if hi <= lo:
        return zero()
    inner = f.breaks[(f.breaks > lo) & (f.breaks < hi)]
    breaks = np.concatenate(([lo], inner, [hi]))
    p = np.searchsorted(f.breaks, breaks[:-1], side="right") - 1
    coeffs = _taylor_shift(f.coeffs[p], breaks[:-1] - f.breaks[p])
    return CompactPiecewisePoly(breaks, coeffs).trimmed()


def translate(f, a):
    """``f(x - a)``."""
    if f.npieces == 0:
        return f
    return CompactPiecewisePoly(f.breaks + a, f.coeffs)


def linear_combination(funcs, weights):
    """``sum_i weights[i] * funcs[i]`` as one piecewise polynomial."""
    live = [(f, float(w)) for f, w in zip(funcs, weights) if f.npieces and w != 0.0]
    if not live:
        return zero()
    deg = max(f.degree for f, _ in live)
    breaks = np.unique(np.concatenate([f.breaks for f, _ in live]))
    out = np.zeros((breaks.size - 1, deg + 1))
    for f, w in live:
        lo = np.searchsorted(breaks, f.breaks[0])
        hi = np.searchsorted(breaks, f.breaks[-1])
        seg = breaks[lo:hi]
        p = np.searchsorted(f.breaks, seg, side="right") - 1
        local = np.zeros((seg.size, deg + 1))
        local[:, : f.degree + 1] = f.coeffs[p]
        out[lo:hi] += w * _taylor_shift(local, seg - f.breaks[p])
    return CompactPiecewisePoly(breaks, out).trimmed()


def refinement_combination(phi, taps, offset=0, convention="unit"):
    """Function whose half-dilate is ``sum_k h_k T^k phi``.

    With ``convention="unit"`` the taps are filter-bank masks ``m_k`` and
    ``h_k = sqrt(2) m_k``, so the result is ``2 sum_k m_k phi(2x - k)``.
    With ``convention="paper"`` the taps are ``h_k`` directly.
    """
    gain = np.sqrt(2.0) if convention == "unit" else 1.0
    if convention not in ("unit", "paper"):
        raise ValueError(f"unknown convention {convention!r}")
    funcs, weights = [], []
    for i, t in enumerate(taps):
        if t != 0.0:
            funcs.append(apply_dyadic(phi, 1, offset + i))
            weights.append(gain * t)
    return linear_combination(funcs, weights)


@dataclass(frozen=True)
class DyadicAtom:
    """``weight * D^scale T^shift base``.

    ``shift`` is normally an integer; quasi-affine atoms carry dyadic
    fractional shifts ``2**scale * a``.
    """

    base: CompactPiecewisePoly
    scale: int
    shift: float
    weight: float = 1.0

    def function(self):
        return apply_dyadic(self.base, self.scale, self.shift) * self.weight

    def support(self):
        a, b = self.base.support
        s = 2.0 ** self.scale
        return ((a + self.shift) / s, (b + self.shift) / s)

    def norm(self):
        return abs(self.weight) * self.base.norm()
