"""Numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Each case runs once to warm the JIT cache, then ``repeat`` times per path;
the best wall time is reported along with the max difference of outputs.
"""
import argparse
import time

import numpy as np

from specframe import _accel
from specframe.dilation import OnbConfig, alpha_tensor, psi_coefficients
from specframe.fiber import fiber_samples, uniform_grid
from specframe.kernels import literal_fiber_coefficients
from specframe.signals import bspline, gram_matrix, haar_wavelet
from specframe.frames import WaveletSystemSpec, random_probes


def _fourier():
    f = bspline(4)
    grid = uniform_grid(1024)
    return lambda: fiber_samples(f, grid, 64)


def _gram():
    spec = WaveletSystemSpec((haar_wavelet(),), 8)
    atoms = list(spec.atoms.funcs)
    probes = random_probes(spec.window)
    return lambda: gram_matrix(probes, atoms)


def _literal():
    cfg = OnbConfig.radius(8)
    at = alpha_tensor(cfg)
    ph, _ = psi_coefficients(haar_wavelet(), cfg)
    return lambda: literal_fiber_coefficients(at.entries, ph[None], cfg.sigma_window)


CASES = {
    "fourier transform, 1024 x 129 samples": _fourier,
    "piecewise gram, 32 probes x 2060 atoms": _gram,
    "literal fiber sum, radius 8": _literal,
}


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"numba available: {_accel.HAVE_NUMBA}")
    print(f"{'case':42s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, make in CASES.items():
        fn = make()
        prev = _accel.use_numba(True)
        try:
            t_nb, out_nb = best_of(fn, args.repeat)
            _accel.use_numba(False)
            t_np, out_np = best_of(fn, args.repeat)
        finally:
            _accel.use_numba(prev)
        diff = float(np.max(np.abs(np.asarray(out_nb) - np.asarray(out_np))))
        print(f"{name:42s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
