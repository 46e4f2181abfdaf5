import os
import random
import subprocess
import sys
from array import array

from artifact import _attractor_py, kernels
from artifact.games import _csr
from strategies import random_arena


def _kernel_args(a, rng):
    n = len(a)
    active = bytearray(rng.random() < 0.8 for _ in range(n))
    target = bytearray(rng.random() < 0.3 for _ in range(n))
    return (a.succ_ptr, a.succ_idx, a.pred_ptr, a.pred_idx, a.owner, active, target, rng.randrange(2))


def test_backends_agree():
    if kernels.BACKEND != "cython":
        import pytest

        pytest.skip("compiled kernel not built")
    from artifact import _attractor

    rng = random.Random(3)
    for _ in range(300):
        args = _kernel_args(random_arena(rng, max_vertices=12), rng)
        attr_c, strat_c = _attractor.attractor(*args)
        attr_p, strat_p = _attractor_py.attractor(*args)
        assert bytes(attr_c) == bytes(attr_p)
        assert list(strat_c) == list(strat_p)


def test_pure_fallback_selected_by_env():
    env = dict(os.environ, HOCPDA_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from artifact.kernels import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_csr_layout():
    ptr, idx = _csr([[1, 2], [], [0]])
    assert ptr == array("i", [0, 2, 2, 3])
    assert idx == array("i", [1, 2, 0])
