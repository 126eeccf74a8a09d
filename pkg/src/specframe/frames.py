"""Desk-scale analysis, synthesis and frame operators of wavelet systems.

A system is the finite set of atoms ``D^j T^k psi`` (``|j| <= J``) whose
supports meet an open spatial window; atoms outside have exactly zero
inner product with any function supported in the window, so the
truncated frame operator is exact on such functions. Every inner product
is an exact piecewise-polynomial integral.

Sums over generators are accumulated generator by generator. Repeating a
generator therefore doubles the frame operator bit for bit, and scaling
generators by a power of two scales it exactly.
"""
import csv
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import cg

from .errors import InvalidArgument, NumericWarning
from .signals import apply_dyadic, bspline, gram_matrix, linear_combination

FLAVORS = ("affine", "quasi-affine")


@dataclass(frozen=True)
class AtomTable:
    gen: np.ndarray
    scale: np.ndarray
    shift: np.ndarray
    weight: np.ndarray
    funcs: tuple = field(repr=False)

    def __len__(self):
        return len(self.funcs)

    def of_generator(self, g):
        return np.flatnonzero(self.gen == g)


@dataclass(frozen=True)
class WaveletSystemSpec:
    """Generators, scale range ``[-J, J]`` and the open spatial window.

    ``flavor="quasi-affine"`` replaces every negative scale ``j`` by the
    atoms ``2**(j/2) T^a D^j psi`` for all integers ``a``; ``shift`` then
    records the translation ``a`` instead of the inner shift.
    """

    generators: tuple
    J: int
    window: tuple = (-2.0, 2.0)
    flavor: str = "affine"

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))
        if self.flavor not in FLAVORS:
            raise InvalidArgument(f"flavor must be one of {FLAVORS}")
        if int(self.J) != self.J or self.J < 0:
            raise InvalidArgument("J must be a nonnegative integer")
        if not self.window[0] < self.window[1]:
            raise InvalidArgument("window must satisfy lo < hi")

    @cached_property
    def atoms(self):
        lo, hi = self.window
        gen, scale, shift, weight, funcs = [], [], [], [], []
        for g, psi in enumerate(self.generators):
            if psi.is_zero():
                continue
            p, q = psi.support
            for j in range(-self.J, self.J + 1):
                s = 2.0 ** j
                if self.flavor == "quasi-affine" and j < 0:
                    # 2^(j/2) T^a D^j psi, support a + 2^-j [p, q]
                    a0 = int(np.floor(lo - q / s)) + 1
                    a1 = int(np.ceil(hi - p / s)) - 1
                    for a in range(a0, a1 + 1):
                        gen.append(g)
                        scale.append(j)
                        shift.append(float(a))
                        weight.append(2.0 ** (j / 2.0))
                        funcs.append(apply_dyadic(psi, j, s * a))
                    continue
                k0 = int(np.floor(s * lo - q)) + 1
                k1 = int(np.ceil(s * hi - p)) - 1
                for k in range(k0, k1 + 1):
                    gen.append(g)
                    scale.append(j)
                    shift.append(float(k))
                    weight.append(1.0)
                    funcs.append(apply_dyadic(psi, j, k))
        return AtomTable(
            np.array(gen, int), np.array(scale, int), np.array(shift), np.array(weight), tuple(funcs)
        )

    def duplicate(self):
        return replace(self, generators=self.generators + self.generators)

    def scaled(self, c):
        return replace(self, generators=tuple(c * g for g in self.generators))

    def describe(self):
        return {
            "generators": len(self.generators),
            "J": int(self.J),
            "window": list(self.window),
            "flavor": self.flavor,
            "atoms": len(self.atoms),
        }


@dataclass(frozen=True)
class CoefficientArray:
    """``values[x] = <f, atom_x>`` in the atom order of ``spec``."""

    spec: WaveletSystemSpec
    values: np.ndarray

    @property
    def norm2(self):
        return float(np.sum(np.abs(self.values) ** 2))

    def to_csv(self, path):
        at = self.spec.atoms
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["psi", "j", "k", "re", "im"])
            for g, j, k, v in zip(at.gen, at.scale, at.shift, self.values):
                w.writerow([int(g), int(j), repr(float(k)), repr(float(np.real(v))), repr(float(np.imag(v)))])


def _check_inside(f, spec):
    if f.is_zero():
        return
    a, b = f.support
    lo, hi = spec.window
    if a < lo or b > hi:
        raise InvalidArgument(f"function support [{a}, {b}] leaves the window [{lo}, {hi}]")


def _weighted_gram(funcs_left, spec, idx):
    at = spec.atoms
    return gram_matrix(funcs_left, [at.funcs[x] for x in idx]) * at.weight[idx]


def analysis(f, spec):
    """Coefficients ``<f, x>`` over the truncated system."""
    _check_inside(f, spec)
    at = spec.atoms
    vals = np.zeros(len(at))
    if not f.is_zero() and len(at):
        vals = gram_matrix([f], list(at.funcs))[0] * at.weight
    return CoefficientArray(spec, vals)


def _synth_block(values, spec, idx):
    at = spec.atoms
    live = [x for x in idx if values[x] != 0.0]
    return linear_combination([at.funcs[x] for x in live], [values[x] * at.weight[x] for x in live])


def synthesis(coeffs, spec=None):
    """``sum_x c_x x``, accumulated per generator."""
    spec = coeffs.spec if spec is None else spec
    if spec != coeffs.spec or len(coeffs.values) != len(spec.atoms):
        raise InvalidArgument("coefficient array is indexed by a different system")
    parts = [_synth_block(coeffs.values, spec, spec.atoms.of_generator(g)) for g in range(len(spec.generators))]
    return linear_combination(parts, [1.0] * len(parts))


def frame_apply(f, spec):
    """``S f = T T* f`` on the truncated system."""
    return synthesis(analysis(f, spec), spec)


def random_probes(window, count=32, seed=0, max_order=3, spacing=0.0625):
    """Random splines of order ``<= max_order`` with knots on ``spacing``,
    supported in the central half of ``window``."""
    lo, hi = window
    c, r = 0.5 * (lo + hi), 0.25 * (hi - lo)
    rng = np.random.default_rng(seed)
    scale = int(round(-np.log2(spacing)))
    out = []
    for _ in range(count):
        m = int(rng.integers(1, max_order + 1))
        k0 = int(np.ceil((c - r) / spacing))
        k1 = int(np.floor((c + r) / spacing)) - m
        ks = np.arange(k0, k1 + 1)
        w = rng.standard_normal(ks.size)
        out.append(linear_combination([apply_dyadic(bspline(m), scale, int(k)) for k in ks], w))
    return out


@dataclass(frozen=True)
class FrameBoundsReport:
    A: float
    B: float
    power_iterations: int
    inverse_iterations: int
    converged: bool
    rayleigh_upper: tuple
    rayleigh_lower: tuple
    probes: dict
    warnings: tuple = ()
    reference: tuple = (float("nan"), float("nan"))  # dense eigenvalues on the span

    def __iter__(self):
        return iter((self.A, self.B))

    def as_dict(self):
        return {
            "A": float(self.A),
            "B": float(self.B),
            "power_iterations": int(self.power_iterations),
            "inverse_iterations": int(self.inverse_iterations),
            "converged": bool(self.converged),
            "rayleigh_upper_tail": [float(x) for x in self.rayleigh_upper[-5:]],
            "rayleigh_lower_tail": [float(x) for x in self.rayleigh_lower[-5:]],
            "probes": self.probes,
            "warnings": list(self.warnings),
            "reference_eigenvalues": [float(x) for x in self.reference],
        }


def compressed_operator(spec, probes):
    """``S`` on span(probes) in an orthonormal basis of that span.

    ``M = sum_g C_g^T C_g`` with ``C_g[x, p] = <p, x>`` over the atoms of
    generator ``g``, and ``Shat = W^T M W`` where the columns of ``W`` span
    the probes orthonormally (dependent probes are dropped).
    """
    for p in probes:
        _check_inside(p, spec)
    n = len(probes)
    M = np.zeros((n, n))
    for g in range(len(spec.generators)):
        idx = spec.atoms.of_generator(g)
        if idx.size == 0:
            continue
        C = _weighted_gram(list(probes), spec, idx)  # [probe, atom]
        M = M + C @ C.T
    G = gram_matrix(list(probes), list(probes))
    lam, U = eigh(G)
    keep = lam > 1e-12 * max(lam.max(), 1e-300)
    W = U[:, keep] / np.sqrt(lam[keep])
    S = W.T @ M @ W
    return 0.5 * (S + S.T)


def _matrix_power2(S, m):
    P = S
    for _ in range(m):
        P = P @ P
        P = 0.5 * (P + P.T)
        P = P / np.max(np.abs(P))  # only directions matter
    return P


def frame_bounds(spec, probes=None, iterations=500, tol=1e-10, seed=0, accelerate=10, cond_cap=1e6):
    """Upper bound by power iteration, lower bound by inverse iteration with CG.

    Bounds are Rayleigh quotients of ``S`` on the probe span, so they are
    probe-dependent estimates of the global frame bounds. Both iterations
    run on ``S**q`` (``q = 2**accelerate`` by repeated squaring; smaller for
    the inverse side when the condition estimate would pass ``cond_cap``),
    which separates the clustered spectrum of a near-tight frame.
    """
    if probes is None:
        probes = random_probes(spec.window, seed=seed)
    S = compressed_operator(spec, probes)
    n = S.shape[0]
    meta = {"count": n, "seed": seed, "window": list(spec.window)}
    if n == 0 or not np.any(S):
        return FrameBoundsReport(0.0, 0.0, 0, 0, True, (), (), meta, (), (0.0, 0.0))
    ref = np.linalg.eigvalsh(S)

    P = _matrix_power2(S, accelerate)
    v = np.ones(n) / np.sqrt(n)
    up = []
    lam = 0.0
    up_ok = False
    for power_its in range(1, iterations + 1):
        w = P @ v
        v = w / np.linalg.norm(w)
        lam_new = float(v @ (S @ v))
        up.append(lam_new)
        if abs(lam_new - lam) <= tol * abs(lam_new):
            lam, up_ok = lam_new, True
            break
        lam = lam_new
    B = lam

    warns = []
    low = []
    cap = 10 * n

    def solve(M, rhs):
        x, info = cg(M, rhs, rtol=tol, atol=0.0, maxiter=cap)
        if info != 0:
            msg = f"CG did not converge within {cap} iterations; last Rayleigh quotients {low[-3:]}"
            warnings.warn(msg, NumericWarning, stacklevel=3)
            warns.append(msg)
            return None
        return x

    v = np.ones(n) / np.sqrt(n)
    mu = np.inf
    low_ok = False
    # a few plain steps give the condition estimate that picks the power
    for _ in range(10):
        x = solve(S, v)
        if x is None:
            break
        v = x / np.linalg.norm(x)
        mu = float(v @ (S @ v))
        low.append(mu)
    m = 0
    if not warns and mu > 0:
        cond = B / mu
        # the plain estimate overshoots the smallest eigenvalue, hence the margin
        while m < accelerate and cond ** (8 * 2 ** (m + 1)) <= cond_cap:
            m += 1
    Q = _matrix_power2(S, m)
    inv_its = 0
    if not warns:
        for inv_its in range(1, iterations + 1):
            x = solve(Q, v)
            if x is None:
                break
            v = x / np.linalg.norm(x)
            mu_new = float(v @ (S @ v))
            low.append(mu_new)
            if abs(mu_new - mu) <= tol * abs(mu_new):
                mu, low_ok = mu_new, True
                break
            mu = mu_new
    A = mu if np.isfinite(mu) and not warns else float("nan")
    if not up_ok:
        warns.append(f"power iteration stopped at {iterations} steps")
    return FrameBoundsReport(
        A, B, power_its, inv_its, bool(up_ok and low_ok), tuple(up), tuple(low), meta, tuple(warns),
        (float(ref[0]), float(ref[-1])),
    )


@dataclass(frozen=True)
class ReconstructionResult:
    function: object
    relative_error: float
    method: str
    iterations: int = 0

    def __iter__(self):
        return iter((self.function, self.relative_error))


def reconstruct(f, spec, tol=1e-10, B=None):
    """Perfect reconstruction on the truncated system.

    With ``B`` given the system is treated as tight and ``(1/B) S f`` is
    returned. Otherwise the canonical dual expansion is used: solve
    ``G d = T* f`` by CG on the atom Gram matrix, then synthesize ``T d``
    (this is ``S S^-1 f`` restricted to the atom span).
    """
    _check_inside(f, spec)
    nf = f.norm()
    if B is not None:
        if B <= 0:
            raise InvalidArgument("tight bound must be positive")
        out = (1.0 / B) * frame_apply(f, spec)
        method, its = "tight", 0
    else:
        at = spec.atoms
        c = analysis(f, spec).values
        live = np.flatnonzero(
            np.any(_weighted_gram([f], spec, np.arange(len(at))) != 0.0, axis=0)
        ) if nf else np.zeros(0, int)
        # atoms meeting no support of f still couple through G; keep all
        G = gram_matrix(list(at.funcs), list(at.funcs)) * np.outer(at.weight, at.weight)
        counter = {"n": 0}

        def _count(_):
            counter["n"] += 1

        d, info = cg(G, c, rtol=tol, atol=0.0, maxiter=10 * len(at), callback=_count)
        if info != 0:
            warnings.warn(f"CG did not converge within {10 * len(at)} iterations", NumericWarning, stacklevel=2)
        out = synthesis(CoefficientArray(spec, d), spec)
        method, its = "canonical-dual", counter["n"]
        del live
    err = 0.0 if nf == 0.0 else (out - f).norm() / nf
    return ReconstructionResult(out, float(err), method, its)


def quasi_affine(spec):
    """Quasi-affine counterpart: nonnegative scales unchanged, negative
    scales replaced by weighted integer translates."""
    if spec.flavor != "affine":
        raise InvalidArgument("system is already quasi-affine")
    return replace(spec, flavor="quasi-affine")
