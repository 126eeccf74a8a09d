"""Dilation-domain model of wavelet frame operators.

Two orthonormal bases of L2(R) are used:

* ``L_i^(n)(x) = exp(2 pi i i x)`` on ``[n, n+1)`` (translation adapted);
* ``K_{s,l}^(m) = D^m K_{s,l}^(0)``, where ``K_{+,l}^(0) = exp(2 pi i l x)``
  on ``[1, 2)`` and ``K_{-,l}^(0)`` is the same on ``[-2, -1)``
  (dilation adapted).

``alpha[i, n, a, m] = <L_i^(n), K_a^(m)>`` with ``a`` the flattened
``(s, l)`` index, ``+`` block first. Every entry is an elementary
integral of an exponential over an interval intersection.

The fiber matrix of a wavelet frame operator is assembled in factored
form: ``w(a, k, j) = sum_{i,n} alpha[i, n+j, a, k] psihat[i, n]`` is the
truncated ``<T^j psi, K_a^(k)>`` and

    C[sigma][b, a] = sum_{psi,k,j} conj(w(a, k, j)) w(b, k + sigma, j)
    S(omega)[b, a] = sum_sigma omega**sigma C[sigma][b, a]

which regroups the four-index sum term by term
(:func:`specframe.kernels.literal_fiber_coefficients` evaluates the
unfactored form for cross-checking). Row index ``b`` is the output
``(s', l')``, column ``a`` the input ``(s, l)``; ``C[sigma][b, a]`` equals
``<S K_a^(0), K_b^(sigma)>``.
"""
import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgument
from .signals import CompactPiecewisePoly, restrict

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OnbConfig:
    """Symmetric truncation ranges ``|i| <= I``, ``|n| <= N``, ``|l| <= Jb``,
    ``|m| <= M``, ``|sigma| <= sigma_window``."""

    I: int = 8
    N: int = 8
    Jb: int = 8
    M: int = 8
    sigma_window: int = 8

    def __post_init__(self):
        for name in ("I", "N", "Jb", "M", "sigma_window"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidArgument(f"OnbConfig.{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def radius(cls, r):
        return cls(r, r, r, r, r)

    @property
    def i_range(self):
        return np.arange(-self.I, self.I + 1)

    @property
    def n_range(self):
        return np.arange(-self.N, self.N + 1)

    @property
    def l_range(self):
        return np.arange(-self.Jb, self.Jb + 1)

    @property
    def m_range(self):
        return np.arange(-self.M, self.M + 1)

    @property
    def sigma_range(self):
        return np.arange(-self.sigma_window, self.sigma_window + 1)

    @property
    def n_components(self):
        return 2 * (2 * self.Jb + 1)

    def labels(self):
        """``(s, l)`` for every flattened component index."""
        return [(s, int(l)) for s in (1, -1) for l in self.l_range]

    def component(self, s, l):
        if s not in (1, -1) or abs(l) > self.Jb:
            raise InvalidArgument(f"component (s={s}, l={l}) outside the configured range")
        return (0 if s == 1 else 2 * self.Jb + 1) + l + self.Jb

    def as_dict(self):
        return {"I": self.I, "N": self.N, "Jb": self.Jb, "M": self.M, "sigma_window": self.sigma_window}


# ----------------------------------------------------------------------
# exponential atoms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExpAtom:
    """``amp * exp(2 pi i freq x)`` on ``[lo, hi)``."""

    freq: float
    lo: float
    hi: float
    amp: float = 1.0

    def norm2(self):
        return self.amp ** 2 * (self.hi - self.lo)


def l_atom(i, n):
    return ExpAtom(float(i), float(n), float(n + 1), 1.0)


def k_interval(s, m):
    lo, hi = (1.0, 2.0) if s == 1 else (-2.0, -1.0)
    return lo * 2.0 ** (-m), hi * 2.0 ** (-m)


def k_atom(s, l, m):
    lo, hi = k_interval(s, m)
    return ExpAtom(float(l) * 2.0 ** m, lo, hi, 2.0 ** (m / 2.0))


def _osc_integral(nu, lo, hi):
    """``int_lo^hi exp(2 pi i nu x) dx`` (zero for empty intervals).

    Written as ``e(nu lo) e(nu h / 2) h sinc(nu h)`` so that small ``nu h``
    suffers no cancellation; phases are reduced mod 1 first, which is
    exact for the dyadic arguments used here.
    """
    nu, lo, hi = np.broadcast_arrays(*(np.asarray(v, np.float64) for v in (nu, lo, hi)))
    h = np.maximum(hi - lo, 0.0)
    p0 = np.mod(nu * lo, 1.0)
    p1 = np.mod(nu * h * 0.5, 1.0)
    return np.exp(TWO_PI * 1j * (p0 + p1)) * h * np.sinc(nu * h)


def atom_gram(left, right):
    """``<left[a], right[b]>`` for two lists of :class:`ExpAtom`."""
    fa = np.array([a.freq for a in left])[:, None]
    fb = np.array([b.freq for b in right])[None, :]
    lo = np.maximum(np.array([a.lo for a in left])[:, None], np.array([b.lo for b in right])[None, :])
    hi = np.minimum(np.array([a.hi for a in left])[:, None], np.array([b.hi for b in right])[None, :])
    amp = np.array([a.amp for a in left])[:, None] * np.array([b.amp for b in right])[None, :]
    return amp * _osc_integral(fa - fb, lo, hi)


# ----------------------------------------------------------------------
# alpha tensor
# ----------------------------------------------------------------------

def _alpha_entries(cfg):
    i = cfg.i_range[:, None, None, None].astype(float)
    n = cfg.n_range[None, :, None, None].astype(float)
    l = cfg.l_range[None, None, :, None].astype(float)
    m = cfg.m_range[None, None, None, :].astype(float)
    scale = 2.0 ** m
    blocks = []
    for s in (1, -1):
        klo, khi = (1.0 / scale, 2.0 / scale) if s == 1 else (-2.0 / scale, -1.0 / scale)
        lo = np.maximum(n, klo)
        hi = np.minimum(n + 1.0, khi)
        blocks.append(np.sqrt(scale) * _osc_integral(i - l * scale, lo, hi))
    return np.concatenate(blocks, axis=2)


@dataclass(frozen=True)
class AlphaTensor:
    """``entries[i, n, a, m] = <L_i^(n), K_a^(m)>`` over an :class:`OnbConfig`."""

    config: OnbConfig
    entries: np.ndarray = field(repr=False)

    def __getitem__(self, idx):
        return self.entries[idx]

    def value(self, i, n, s, l, m):
        c = self.config
        if abs(i) > c.I or abs(n) > c.N or abs(m) > c.M:
            raise InvalidArgument("index outside the configured range")
        return complex(self.entries[i + c.I, n + c.N, c.component(s, l), m + c.M])

    def row_energy(self):
        """``sum_{a,m} |alpha[i, n, a, m]|**2`` for every ``(i, n)``."""
        return np.sum(np.abs(self.entries) ** 2, axis=(2, 3))

    def row_tail(self):
        """Certified bound on ``1 - row_energy`` for every ``(i, n)``.

        Energy of ``L_i^(n)`` outside the annuli ``|m| <= M`` plus, on each
        annulus piece ``Q``, the Parseval tail over ``|l| > Jb`` from
        ``|<L chi_Q, K_l^(m)>| <= 2**(m/2) / (pi |i - l 2**m|)``.
        """
        c = self.config
        out = np.zeros((2 * c.I + 1, 2 * c.N + 1))
        lo_cov = 2.0 ** (-c.M)
        hi_cov = 2.0 ** (c.M + 1)
        for jn, n in enumerate(c.n_range):
            a, b = float(n), float(n + 1)
            # uncovered part: |x| < 2^-M or |x| >= 2^(M+1)
            gap = max(0.0, min(b, lo_cov) - max(a, -lo_cov))
            gap += max(0.0, b - max(a, hi_cov)) + max(0.0, min(b, -hi_cov) - a)
            for ji, i in enumerate(c.i_range):
                t = gap
                for m in c.m_range:
                    for s in (1, -1):
                        klo, khi = k_interval(s, m)
                        q = max(0.0, min(b, khi) - max(a, klo))
                        if q == 0.0:
                            continue
                        slack = c.Jb - abs(i) / 2.0 ** m
                        bound = 2.0 / (np.pi ** 2 * 2.0 ** m * slack) if slack > 0 else np.inf
                        t += min(q, bound)
                out[ji, jn] = t
        return out

    def gram_l(self):
        c = self.config
        atoms = [l_atom(i, n) for i in c.i_range for n in c.n_range]
        return atom_gram(atoms, atoms)

    def gram_k(self):
        c = self.config
        atoms = [k_atom(s, l, m) for (s, l) in c.labels() for m in c.m_range]
        return atom_gram(atoms, atoms)


@lru_cache(maxsize=8)
def alpha_tensor(config):
    ent = _alpha_entries(config)
    ent.setflags(write=False)
    return AlphaTensor(config, ent)


def alpha(i, n, s, j, m, config):
    """Single entry ``<L_i^(n), K_{s,j}^(m)>``."""
    return alpha_tensor(config).value(i, n, s, j, m)


# ----------------------------------------------------------------------
# G transform
# ----------------------------------------------------------------------

def _gl_integral(f, nu, lo, hi, nodes=24):
    """Gauss-Legendre ``int_lo^hi f(x) exp(2 pi i nu x) dx`` in panels of ~1/4 cycle."""
    if hi <= lo:
        return 0j
    panels = max(1, int(np.ceil(4.0 * abs(nu) * (hi - lo))))
    xq, wq = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    c = 0.5 * (edges[1:] + edges[:-1])[:, None]
    h = 0.5 * (edges[1:] - edges[:-1])[:, None]
    x = c + h * xq[None, :]
    return complex(np.sum(h * wq * f(x) * np.exp(TWO_PI * 1j * nu * x)))


def k_coefficients(f, config):
    """``coef[a, m] = <f, K_a^(m)>`` and the Bessel deficit ``||f||^2 - sum |coef|^2``.

    ``f`` is a :class:`CompactPiecewisePoly` (closed-form Fourier
    transform of the restriction to each annulus) or an :class:`ExpAtom`
    (Gauss-Legendre quadrature, independent of the alpha closed form).
    """
    c = config
    coef = np.zeros((c.n_components, 2 * c.M + 1), np.complex128)
    nl = 2 * c.Jb + 1
    for si, s in enumerate((1, -1)):
        for jm, m in enumerate(c.m_range):
            lo, hi = k_interval(s, m)
            freqs = c.l_range * 2.0 ** m
            amp = 2.0 ** (m / 2.0)
            if isinstance(f, CompactPiecewisePoly):
                r = restrict(f, lo, hi)
                if r.npieces:
                    coef[si * nl:(si + 1) * nl, jm] = amp * r.fourier(freqs)
            elif isinstance(f, ExpAtom):
                a, b = max(lo, f.lo), min(hi, f.hi)
                for jl, y in enumerate(freqs):
                    g = lambda x: np.full(x.shape, f.amp)
                    coef[si * nl + jl, jm] = amp * _gl_integral(g, f.freq - y, a, b)
            else:
                raise InvalidArgument(f"g_transform needs a piecewise polynomial or ExpAtom, got {type(f)!r}")
    norm2 = f.norm2()
    tail = max(0.0, norm2 - float(np.sum(np.abs(coef) ** 2)))
    return coef, tail


class GFiber(NamedTuple):
    values: np.ndarray
    tail: float


def g_transform(f, omega, config):
    """``f~_{s,l}(omega) = sum_m omega**m <f, K_{s,l}^(m)>`` on the truncated ranges.

    ``omega`` may be a scalar or an array of unit complex numbers; values
    have shape ``omega.shape + (n_components,)``.
    """
    coef, tail = k_coefficients(f, config)
    omega = np.asarray(omega, np.complex128)
    powers = omega[..., None] ** config.m_range
    return GFiber(powers @ coef.T, tail)


# ----------------------------------------------------------------------
# fiber matrices
# ----------------------------------------------------------------------

def psi_coefficients(psi, config):
    """``psihat[i, n] = <psi, L_i^(n)>`` and the Bessel deficit."""
    c = config
    out = np.zeros((2 * c.I + 1, 2 * c.N + 1), np.complex128)
    for jn, n in enumerate(c.n_range):
        r = restrict(psi, float(n), float(n + 1))
        if r.npieces:
            out[:, jn] = r.fourier(c.i_range.astype(float))
    tail = max(0.0, psi.norm2() - float(np.sum(np.abs(out) ** 2)))
    return out, tail


def shifted_coefficients(alpha_t, psihat):
    """``w[a, k, j] = sum_{i,n} alpha[i, n+j, a, k] psihat[i, n]``, all shifts ``j``."""
    A = alpha_t.entries
    nn = A.shape[1]
    w = np.zeros((A.shape[2], A.shape[3], 2 * nn - 1), np.complex128)
    for jj in range(-(nn - 1), nn):
        lo, hi = max(0, -jj), min(nn, nn - jj)
        w[:, :, jj + nn - 1] = np.einsum("inak,in->ak", A[:, lo + jj:hi + jj], psihat[:, lo:hi])
    return w


def correlate_shifts(w, nsig):
    """``C[sigma][b, a] = sum_{k,j} conj(w[a, k, j]) w[b, k + sigma, j]``."""
    na, nm, _ = w.shape
    out = np.zeros((2 * nsig + 1, na, na), np.complex128)
    for si, sig in enumerate(range(-nsig, nsig + 1)):
        klo, khi = max(0, -sig), min(nm, nm - sig)
        if khi <= klo:
            continue
        left = w[:, klo:khi].reshape(na, -1)
        right = w[:, klo + sig:khi + sig].reshape(na, -1)
        out[si] = right @ left.conj().T
    return out


def _dirichlet(delta, j0, j1):
    """``sum_{j=j0}^{j1} exp(2 pi i j delta)`` (empty when ``j1 < j0``)."""
    count = j1 - j0 + 1
    if count <= 0:
        return np.zeros(np.shape(delta), np.complex128)
    delta = np.asarray(delta, np.float64)
    frac = np.mod(delta, 1.0)
    whole = frac == 0.0
    safe = np.where(whole, 0.5, frac)
    num = np.exp(TWO_PI * 1j * np.mod(count * safe, 1.0)) - 1.0
    den = np.exp(TWO_PI * 1j * safe) - 1.0
    val = np.exp(TWO_PI * 1j * np.mod(j0 * safe, 1.0)) * num / den
    return np.where(whole, complex(count), val)


def _resummed_coefficients(psi, config):
    """Fiber coefficients with the (i, n) sums done exactly.

    ``sum_{i,n} alpha[i, n+j, a, k] psihat[i, n] = <T^j psi, K_a^(k)>`` by
    Parseval in the L basis, so ``w`` is evaluated in closed form and only
    ``l``, ``k`` and ``sigma`` stay truncated. Shifts with ``T^j psi`` inside
    an annulus are summed as a Dirichlet kernel; the few straddling shifts
    are kept explicitly for the ``sigma != 0`` couplings.
    """
    c = config
    nl = 2 * c.Jb + 1
    A = c.n_components
    W = c.sigma_window
    out = np.zeros((2 * W + 1, A, A), np.complex128)
    p, q = psi.support
    edges = {}  # (k, j) -> w[A]
    for k in c.m_range:
        amp = 2.0 ** (k / 2.0)
        y = c.l_range * 2.0 ** k
        ph = psi.fourier(y)
        for si, s in enumerate((1, -1)):
            lo, hi = k_interval(s, k)
            sl = slice(si * nl, (si + 1) * nl)
            # interior shifts: p + j >= lo and q + j <= hi
            j0, j1 = int(np.ceil(lo - p)), int(np.floor(hi - q))
            if j1 >= j0:
                # [b, a] entry sums exp(2 pi i j (y_a - y_b))
                G = _dirichlet(y[None, :] - y[:, None], j0, j1)
                out[W, sl, sl] += amp ** 2 * np.outer(ph, np.conj(ph)) * G
            # straddling shifts
            jlo, jhi = int(np.floor(lo - q)) + 1, int(np.ceil(hi - p)) - 1
            for j in range(jlo, jhi + 1):
                if j0 <= j <= j1:
                    continue
                r = restrict(psi, lo - j, hi - j)
                if r.npieces == 0:
                    continue
                vec = edges.setdefault((int(k), j), np.zeros(A, np.complex128))
                phase = np.exp(-TWO_PI * 1j * np.mod(j * y, 1.0))
                vec[sl] += amp * phase * r.fourier(y)
    by_j = {}
    for (k, j), vec in edges.items():
        by_j.setdefault(j, {})[k] = vec
    for j, rows in by_j.items():
        for k, wa in rows.items():
            for si, sig in enumerate(range(-W, W + 1)):
                wb = rows.get(k + sig)
                if wb is not None:
                    out[si] += np.outer(wb, np.conj(wa))
    return out


@dataclass(frozen=True)
class FiberMatrix:
    """Fourier coefficients ``coeffs[sigma + W, b, a]`` of ``S(omega)``."""

    config: OnbConfig
    coeffs: np.ndarray = field(repr=False)
    psi_tails: tuple = ()
    warnings: tuple = ()
    method: str = "alpha"

    @property
    def sigma_range(self):
        return self.config.sigma_range

    def at(self, omega):
        """``S(omega)``; for an array of ``omega`` the result has a leading axis."""
        omega = np.asarray(omega, np.complex128)
        powers = omega[..., None] ** self.sigma_range
        return np.tensordot(powers, self.coeffs, axes=(-1, 0))

    def hermitian_defect(self):
        """``max |C[sigma] - C[-sigma]^H|`` (zero iff ``S(omega)`` is Hermitian on the circle)."""
        flipped = np.conj(np.transpose(self.coeffs[::-1], (0, 2, 1)))
        return float(np.max(np.abs(self.coeffs - flipped))) if self.coeffs.size else 0.0

    def entry(self, s, l, s2, l2):
        """Coefficient table over sigma for output ``(s2, l2)`` and input ``(s, l)``."""
        c = self.config
        return self.coeffs[:, c.component(s2, l2), c.component(s, l)]

    def to_csv(self, path):
        labels = self.config.labels()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["s", "l", "s_out", "l_out", "sigma", "re", "im"])
            for si, sig in enumerate(self.sigma_range):
                for b, (s2, l2) in enumerate(labels):
                    for a, (s, l) in enumerate(labels):
                        v = self.coeffs[si, b, a]
                        if v != 0:
                            wr.writerow([s, l, s2, l2, int(sig), repr(float(v.real)), repr(float(v.imag))])


METHODS = ("alpha", "resummed")


def fiber_matrix(Psi, config, tail_tol=1e-2, method="alpha"):
    """Fiber matrix coefficients of the wavelet frame operator of ``Psi``.

    ``method="alpha"`` truncates every index of the alpha contraction per
    ``config``; ``"resummed"`` evaluates the (i, n) sums exactly.
    Generator contributions are accumulated one generator at a time, so
    duplicating a generator doubles the result exactly. A Bessel deficit
    of ``psihat`` above ``tail_tol`` attaches an accuracy warning.
    """
    if method not in METHODS:
        raise InvalidArgument(f"method must be one of {METHODS}, got {method!r}")
    W = config.sigma_window
    total = np.zeros((2 * W + 1, config.n_components, config.n_components), np.complex128)
    tails, warns = [], []
    at = alpha_tensor(config) if method == "alpha" else None
    for idx, psi in enumerate(Psi):
        if psi.is_zero():
            tails.append(0.0)
            continue
        if method == "resummed":
            total = total + _resummed_coefficients(psi, config)
            continue
        ph, tail = psi_coefficients(psi, config)
        tails.append(tail)
        if tail > tail_tol:
            warns.append(f"generator {idx}: truncated L-expansion misses {tail:.3e} of its energy")
        total = total + correlate_shifts(shifted_coefficients(at, ph), W)
    return FiberMatrix(config, total, tuple(tails), tuple(warns), method)


def omega_grid(n=64):
    return np.exp(TWO_PI * 1j * np.arange(n) / n)


def tight_residual(Psi, B, omegas=None, config=None, fm=None, method="alpha"):
    """``max |S(omega) - B Id|`` over the omega grid and all entries."""
    config = fm.config if fm is not None else (config if config is not None else OnbConfig())
    fm = fm if fm is not None else fiber_matrix(Psi, config, method=method)
    omegas = omega_grid() if omegas is None else np.asarray(omegas)
    S = fm.at(omegas)
    eye = np.eye(config.n_components)
    return float(np.max(np.abs(S - B * eye)))


def sigma_residuals(fm, B):
    """Coefficient-wise form: ``|C[0] - B Id|`` and ``max_{sigma != 0} |C[sigma]|``."""
    W = fm.config.sigma_window
    d0 = float(np.max(np.abs(fm.coeffs[W] - B * np.eye(fm.coeffs.shape[1]))))
    rest = np.delete(fm.coeffs, W, axis=0)
    return d0, float(np.max(np.abs(rest))) if rest.size else 0.0


def resolved_block(config, radius=None):
    """Component indices with ``|l| <= radius`` (default ``Jb // 2``)."""
    radius = config.Jb // 2 if radius is None else radius
    return np.array([k for k, (_, l) in enumerate(config.labels()) if abs(l) <= radius])


class FiberBounds(NamedTuple):
    upper: float
    lower: float


def fiber_frame_bounds(Psi, omegas=None, config=None, fm=None, radius=None, method="alpha"):
    """``(alpha_hat, beta_hat)``: largest singular value of ``S(omega)`` and
    smallest singular value of its well-resolved sub-block, over the grid."""
    config = fm.config if fm is not None else (config if config is not None else OnbConfig())
    if not Psi and fm is None:
        return FiberBounds(0.0, 0.0)
    fm = fm if fm is not None else fiber_matrix(Psi, config, method=method)
    omegas = omega_grid() if omegas is None else np.asarray(omegas)
    blk = resolved_block(config, radius)
    upper, lower = 0.0, np.inf
    for S in fm.at(omegas):
        upper = max(upper, float(np.linalg.svd(S, compute_uv=False)[0]))
        lower = min(lower, float(np.linalg.svd(S[np.ix_(blk, blk)], compute_uv=False)[-1]))
    return FiberBounds(upper, lower)
