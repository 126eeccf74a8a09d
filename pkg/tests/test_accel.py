import os
import subprocess
import sys

from specframe import _accel
from specframe.signals import bspline, gram_matrix


def _flag_state(value):
    env = dict(os.environ, SPECFRAME_DISABLE_NUMBA=value)
    code = "from specframe import _accel; print(_accel.numba_enabled())"
    return subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env).stdout.strip()


def test_env_flag_disables_numba():
    assert _flag_state("1") == "False"
    assert _flag_state("0") == ("True" if _accel.HAVE_NUMBA else "False")


def test_use_numba_returns_previous():
    prev = _accel.use_numba(False)
    try:
        assert not _accel.numba_enabled()
        G = gram_matrix([bspline(2)], [bspline(2)])
        assert abs(G[0, 0] - 2 / 3) < 1e-15
    finally:
        _accel.use_numba(prev)
    assert _accel.numba_enabled() == prev


def test_numpy_path_in_fresh_process():
    env = dict(os.environ, SPECFRAME_DISABLE_NUMBA="1")
    code = (
        "from specframe.signals import bspline, gram_matrix;"
        "print(repr(float(gram_matrix([bspline(3)], [bspline(3)])[0, 0])))"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env).stdout
    assert abs(float(out) - 11 / 20) < 1e-15
