"""Hot inner loops, each in a numba and a pure-numpy flavour.

Public entry points dispatch on :func:`specframe._accel.numba_enabled`:

* :func:`piecewise_fourier` -- closed-form Fourier transform of a
  piecewise polynomial at many frequencies.
* :func:`piecewise_gram` -- exact L2 inner products between two families
  of real piecewise polynomials.
* :func:`literal_fiber_coefficients` -- the unfactored four-index
  contraction that defines the Fourier coefficients of a dilation fiber.

Piecewise polynomials are passed flattened: ``left``/``width`` per piece,
``coeffs[p, n]`` the coefficient of ``(x - left[p])**n`` and, for
families, ``offsets`` delimiting the pieces of each member.
"""
import numpy as np

from ._accel import njit, numba_enabled

TWO_PI = 2.0 * np.pi

# |2*pi*y*width| below this switches the moment integrals to their power
# series; upward recursion loses ~n digits near zero.
SERIES_CUT = 1.0
N_SERIES = 30


# ----------------------------------------------------------------------
# Fourier transform of piecewise polynomials
# ----------------------------------------------------------------------

@njit
def _moments_nb(lam, w, ndeg, out):
    z = lam * w
    if abs(z) < SERIES_CUT:
        for n in range(ndeg):
            s = 0j
            term = 1.0 + 0j
            for m in range(N_SERIES):
                s += term / (n + m + 1)
                term *= -1j * z / (m + 1)
            out[n] = s * w ** (n + 1)
    else:
        e = np.exp(-1j * z)
        il = 1j * lam
        out[0] = (1.0 - e) / il
        wn = 1.0
        for n in range(1, ndeg):
            wn *= w
            out[n] = (n * out[n - 1] - wn * e) / il


@njit
def _piecewise_fourier_nb(left, width, coeffs, y):
    npc, ndeg = coeffs.shape
    out = np.zeros(y.size, np.complex128)
    mom = np.empty(ndeg, np.complex128)
    for iy in range(y.size):
        lam = TWO_PI * y[iy]
        acc = 0j
        for p in range(npc):
            _moments_nb(lam, width[p], ndeg, mom)
            v = 0j
            for n in range(ndeg):
                v += coeffs[p, n] * mom[n]
            ph = y[iy] * left[p]
            ph -= np.floor(ph)
            acc += v * np.exp(-1j * TWO_PI * ph)
        out[iy] = acc
    return out


def _moments_np(lam, w, ndeg):
    """Moments int_0^w t^n exp(-i lam t) dt, broadcast over lam and w."""
    lam, w = np.broadcast_arrays(lam, w)
    z = lam * w
    small = np.abs(z) < SERIES_CUT
    out = np.empty(z.shape + (ndeg,), np.complex128)

    # power series branch
    m = np.arange(N_SERIES)
    zs = np.where(small, z, 0.0)
    fact = np.cumprod(np.concatenate(([1.0], 1.0 / np.arange(1, N_SERIES))))
    powers = (-1j * zs[..., None]) ** m * fact
    ws = np.where(small, w, 0.0)
    for n in range(ndeg):
        out[..., n] = (powers / (n + m + 1)).sum(-1) * ws ** (n + 1)

    # upward recursion branch
    lam_safe = np.where(small, 1.0, lam)
    zz = lam_safe * w
    e = np.exp(-1j * zz)
    il = 1j * lam_safe
    rec = np.empty_like(out)
    rec[..., 0] = (1.0 - e) / il
    wn = np.ones_like(w)
    for n in range(1, ndeg):
        wn = wn * w
        rec[..., n] = (n * rec[..., n - 1] - wn * e) / il
    return np.where(small[..., None], out, rec)


def _piecewise_fourier_np(left, width, coeffs, y):
    lam = TWO_PI * y[:, None]
    mom = _moments_np(lam, width[None, :], coeffs.shape[1])
    v = np.einsum("ypn,pn->yp", mom, coeffs)
    ph = y[:, None] * left[None, :]
    ph -= np.floor(ph)
    return (v * np.exp(-1j * TWO_PI * ph)).sum(axis=1)


def piecewise_fourier(left, width, coeffs, y):
    """int f(x) exp(-2 pi i x y) dx for every entry of ``y``."""
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    left = np.ascontiguousarray(left, dtype=np.float64)
    width = np.ascontiguousarray(width, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if left.size == 0:
        return np.zeros(y.size, np.complex128)
    if numba_enabled():
        return _piecewise_fourier_nb(left, width, coeffs, y)
    return _piecewise_fourier_np(left, width, coeffs, y)


# ----------------------------------------------------------------------
# Exact inner products of piecewise polynomials
# ----------------------------------------------------------------------

def gauss_nodes(total_degree):
    """Gauss-Legendre rule exact for polynomials of ``total_degree``."""
    nq = total_degree // 2 + 1
    return np.polynomial.legendre.leggauss(nq)


@njit
def _gram_nb(fl, fw, fc, foff, gl, gw, gc, goff, xq, wq):
    nf = foff.size - 1
    ng = goff.size - 1
    df = fc.shape[1]
    dg = gc.shape[1]
    out = np.zeros((nf, ng))
    for a in range(nf):
        if foff[a + 1] == foff[a]:
            continue
        fa0 = fl[foff[a]]
        fa1 = fl[foff[a + 1] - 1] + fw[foff[a + 1] - 1]
        for b in range(ng):
            if goff[b + 1] == goff[b]:
                continue
            gb0 = gl[goff[b]]
            gb1 = gl[goff[b + 1] - 1] + gw[goff[b + 1] - 1]
            if gb0 >= fa1 or gb1 <= fa0:
                continue
            s = 0.0
            for p in range(foff[a], foff[a + 1]):
                p0 = fl[p]
                p1 = p0 + fw[p]
                for q in range(goff[b], goff[b + 1]):
                    q0 = gl[q]
                    q1 = q0 + gw[q]
                    lo = max(p0, q0)
                    hi = min(p1, q1)
                    if hi <= lo:
                        continue
                    h = 0.5 * (hi - lo)
                    c = 0.5 * (hi + lo)
                    for r in range(xq.size):
                        x = c + h * xq[r]
                        t = x - p0
                        vf = 0.0
                        for n in range(df - 1, -1, -1):
                            vf = vf * t + fc[p, n]
                        t = x - q0
                        vg = 0.0
                        for n in range(dg - 1, -1, -1):
                            vg = vg * t + gc[q, n]
                        s += wq[r] * h * vf * vg
            out[a, b] = s
    return out


def _horner(coeffs, t):
    v = np.zeros_like(t)
    for n in range(coeffs.shape[-1] - 1, -1, -1):
        v = v * t + coeffs[..., n]
    return v


def _gram_np(fl, fw, fc, foff, gl, gw, gc, goff, xq, wq):
    nf = foff.size - 1
    ng = goff.size - 1
    out = np.zeros((nf, ng))
    gowner = np.repeat(np.arange(ng), np.diff(goff))
    g0, g1 = gl, gl + gw
    for a in range(nf):
        sl = slice(foff[a], foff[a + 1])
        p0 = fl[sl][:, None]
        p1 = (fl[sl] + fw[sl])[:, None]
        lo = np.maximum(p0, g0[None, :])
        hi = np.minimum(p1, g1[None, :])
        ip, iq = np.nonzero(hi > lo)
        if ip.size == 0:
            continue
        lo, hi = lo[ip, iq], hi[ip, iq]
        h = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo)[:, None] + h[:, None] * xq[None, :]
        pf = ip + foff[a]
        vf = _horner(fc[pf][:, None, :], x - fl[pf][:, None])
        vg = _horner(gc[iq][:, None, :], x - gl[iq][:, None])
        contrib = (vf * vg) @ wq * h
        out[a] = np.bincount(gowner[iq], weights=contrib, minlength=ng)
    return out


def piecewise_gram(f_pieces, g_pieces):
    """Matrix of inner products <f_a, g_b> between two piece families.

    Each argument is a tuple ``(left, width, coeffs, offsets)``. The
    quadrature is Gauss-Legendre of sufficient order on every overlap, so
    the result is exact up to rounding.
    """
    fl, fw, fc, foff = f_pieces
    gl, gw, gc, goff = g_pieces
    xq, wq = gauss_nodes(fc.shape[1] - 1 + gc.shape[1] - 1)
    args = (
        np.ascontiguousarray(fl, np.float64), np.ascontiguousarray(fw, np.float64),
        np.ascontiguousarray(fc, np.float64), np.ascontiguousarray(foff, np.int64),
        np.ascontiguousarray(gl, np.float64), np.ascontiguousarray(gw, np.float64),
        np.ascontiguousarray(gc, np.float64), np.ascontiguousarray(goff, np.int64),
        xq, wq,
    )
    if numba_enabled():
        return _gram_nb(*args)
    return _gram_np(*args)


# ----------------------------------------------------------------------
# Literal fiber coefficients: sum over (i, n, i', n') of
#   (sum_{k,j} conj(alpha[i, n+j, a, k]) alpha[i', n'+j, b, k+sigma])
#   * (sum_psi conj(psihat[i, n]) psihat[i', n'])
# ----------------------------------------------------------------------

@njit
def _literal_nb(alpha, pairs, pvals, nsig):
    ni, nn, na, nm = alpha.shape
    out = np.zeros((2 * nsig + 1, na, na), np.complex128)
    for z in range(pairs.shape[0]):
        i, n, i2, n2 = pairs[z, 0], pairs[z, 1], pairs[z, 2], pairs[z, 3]
        pv = pvals[z]
        jlo = max(-n, -n2)
        jhi = min(nn - 1 - n, nn - 1 - n2)
        for si in range(2 * nsig + 1):
            sig = si - nsig
            klo = max(0, -sig)
            khi = min(nm - 1, nm - 1 - sig)
            for a in range(na):
                for b in range(na):
                    acc = 0j
                    for k in range(klo, khi + 1):
                        for j in range(jlo, jhi + 1):
                            acc += np.conj(alpha[i, n + j, a, k]) * alpha[i2, n2 + j, b, k + sig]
                    out[si, b, a] += acc * pv
    return out


def _literal_np(alpha, pairs, pvals, nsig):
    ni, nn, na, nm = alpha.shape
    out = np.zeros((2 * nsig + 1, na, na), np.complex128)
    for (i, n, i2, n2), pv in zip(pairs, pvals):
        jlo = max(-n, -n2)
        jhi = min(nn - 1 - n, nn - 1 - n2)
        left = alpha[i, n + jlo:n + jhi + 1]      # (j, a, k)
        right = alpha[i2, n2 + jlo:n2 + jhi + 1]  # (j, b, k)
        for si in range(2 * nsig + 1):
            sig = si - nsig
            klo = max(0, -sig)
            khi = min(nm - 1, nm - 1 - sig)
            if khi < klo:
                continue
            lk = left[:, :, klo:khi + 1]
            rk = right[:, :, klo + sig:khi + sig + 1]
            out[si] += np.einsum("jak,jbk->ba", lk.conj(), rk) * pv
    return out


def literal_fiber_coefficients(alpha, psihat, nsig, cutoff=0.0):
    """Fourier coefficients of the fiber matrix by the unfactored sum.

    ``alpha`` has axes (i, n, a, m) with ``a`` the flattened (s, l) index;
    ``psihat`` has axes (psi, i, n). Returns an array indexed
    ``[sigma + nsig, b, a]``. Generator products with modulus not above
    ``cutoff`` are skipped (exact zeros by default).
    """
    alpha = np.ascontiguousarray(alpha, np.complex128)
    psihat = np.asarray(psihat, np.complex128)
    ni, nn = alpha.shape[:2]
    flat = psihat.reshape(psihat.shape[0], -1)
    pmat = flat.conj().T @ flat  # [(i,n), (i',n')]
    idx = np.argwhere(np.abs(pmat) > cutoff)
    if idx.size == 0:
        return np.zeros((2 * nsig + 1, alpha.shape[2], alpha.shape[2]), np.complex128)
    i, n = np.divmod(idx[:, 0], nn)
    i2, n2 = np.divmod(idx[:, 1], nn)
    pairs = np.ascontiguousarray(np.stack([i, n, i2, n2], axis=1), np.int64)
    pvals = np.ascontiguousarray(pmat[idx[:, 0], idx[:, 1]])
    if numba_enabled():
        return _literal_nb(alpha, pairs, pvals, nsig)
    return _literal_np(alpha, pairs, pvals, nsig)
