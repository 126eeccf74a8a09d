"""Finite trigonometric polynomials ``sum_k c_k exp(-2 pi i k theta)``."""
import numpy as np


class TrigPolynomial:
    """1-periodic trigonometric polynomial with coefficients on ``[kmin, kmax]``.

    The sign convention matches filter taps: a filter ``h`` with taps
    starting at ``offset`` has symbol ``sum_k h[k] exp(-2 pi i (offset + k) theta)``.
    """

    __slots__ = ("kmin", "coeffs")

    def __init__(self, coeffs, kmin=0):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128)).copy()
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.kmin = int(kmin)

    @classmethod
    def constant(cls, value):
        return cls([value], 0)

    @property
    def kmax(self):
        return self.kmin + self.coeffs.size - 1

    @property
    def ks(self):
        return np.arange(self.kmin, self.kmax + 1)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        # reduce k*theta mod 1 before the exponential to keep phases accurate
        ph = np.multiply.outer(theta, self.ks)
        ph -= np.floor(ph)
        return np.exp(-2j * np.pi * ph) @ self.coeffs

    def conj_symbol(self):
        """Polynomial whose value is ``conj(self(theta))``."""
        return TrigPolynomial(self.coeffs[::-1].conj(), -self.kmax)

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return TrigPolynomial(np.convolve(self.coeffs, other.coeffs), self.kmin + other.kmin)
        return TrigPolynomial(self.coeffs * other, self.kmin)

    __rmul__ = __mul__

    def __add__(self, other):
        lo = min(self.kmin, other.kmin)
        hi = max(self.kmax, other.kmax)
        out = np.zeros(hi - lo + 1, np.complex128)
        out[self.kmin - lo:self.kmax - lo + 1] += self.coeffs
        out[other.kmin - lo:other.kmax - lo + 1] += other.coeffs
        return TrigPolynomial(out, lo)

    def trimmed(self, tol=0.0):
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        if nz.size == 0:
            return TrigPolynomial([0.0], 0)
        return TrigPolynomial(self.coeffs[nz[0]:nz[-1] + 1], self.kmin + nz[0])

    def to_rows(self):
        """Rows ``(k, re, im)`` for config and report files."""
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.ks, self.coeffs)]

    @classmethod
    def from_rows(cls, rows):
        rows = sorted(rows, key=lambda r: r[0])
        kmin, kmax = int(rows[0][0]), int(rows[-1][0])
        coeffs = np.zeros(kmax - kmin + 1, np.complex128)
        for r in rows:
            coeffs[int(r[0]) - kmin] += complex(r[1], r[2] if len(r) > 2 else 0.0)
        return cls(coeffs, kmin)

    @classmethod
    def fit(cls, theta, samples, kmin, kmax):
        """Least-squares fit on grid samples; returns (poly, max residual)."""
        ks = np.arange(kmin, kmax + 1)
        ph = np.multiply.outer(np.asarray(theta, dtype=np.float64), ks)
        ph -= np.floor(ph)
        basis = np.exp(-2j * np.pi * ph)
        coeffs, *_ = np.linalg.lstsq(basis, samples, rcond=None)
        poly = cls(coeffs, kmin)
        resid = float(np.max(np.abs(basis @ coeffs - samples))) if len(samples) else 0.0
        return poly, resid

    def __repr__(self):
        return f"TrigPolynomial(kmin={self.kmin}, coeffs={np.round(self.coeffs, 12).tolist()})"
