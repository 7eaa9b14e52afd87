import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdrelay import _backend
from fdrelay._backend import compiled_kernels as ck, python_kernels as pk

pytestmark = pytest.mark.skipif(ck is None, reason="compiled extension not built")

gains = st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 50.0)), min_size=1, max_size=8)


def _same(a, b):
    return np.array_equal(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


@given(gains, st.floats(1e-3, 100.0))
def test_waterfill_identical(g, budget):
    pa, ta = pk.waterfill(g, budget)
    pb, tb = ck.waterfill(g, budget)
    assert _same(pa, pb) and ta == tb
    assert pk.sum_rate(g, pa) == ck.sum_rate(g, pb)


@given(gains, gains, st.floats(0.1, 20.0), st.floats(0.0, 40.0))
def test_worst_case_identical(s1, gr, p, t):
    n = len(s1)
    gr = (gr + [0.0] * n)[:n]
    a = pk.worst_case(s1, gr, p, t, 1e-6, 500)
    b = ck.worst_case(s1, gr, p, t, 1e-6, 500)
    assert _same(a[0], b[0]) and _same(a[2], b[2])
    assert a[1] == b[1] and a[3] == b[3] and a[4] == b[4] and a[5] == b[5]


@given(gains, gains, st.floats(0.1, 20.0), st.floats(0.1, 20.0), st.floats(0.0, 40.0),
       st.integers(1, 8), st.sampled_from([0, 1]))
def test_robust_identical(s1, s2, ps, pr, t, ncp, rule):
    a = pk.robust(s1, s2, ps, pr, t, ncp, 0.95, 1e-4, 1e-6, 200, 500, rule)
    b = ck.robust(s1, s2, ps, pr, t, ncp, 0.95, 1e-4, 1e-6, 200, 500, rule)
    assert a[0] == b[0]
    for x, y in zip(a[1:7], b[1:7]):
        assert _same(x, y)
    assert a[7] == b[7] and a[8] == b[8]


def test_default_backend_is_compiled():
    assert _backend.BACKEND == "cython"


def test_environment_forces_python_fallback():
    env = dict(os.environ, FDRELAY_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import fdrelay; print(fdrelay.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
