"""The jitted kernels and the pure-Python fallback must produce identical
results; the fallback is selected by MPSOCSIM_NO_NUMBA=1 at import time, so
the comparison runs in a subprocess.
"""

import os
import subprocess
import sys

import pytest

import mpsocsim
from mpsocsim.benchmarks import matmul_run, nbody_run
from mpsocsim.config import Arrangement, preset

SNIPPET = """
import sys
from mpsocsim.benchmarks import matmul_run, nbody_run
from mpsocsim.config import Arrangement, preset
import mpsocsim
assert mpsocsim.USING_NUMBA == (sys.argv[1] == "jit")
r1 = matmul_run(preset("BASE32"), 16, 16, 8, Arrangement(1, 2), seed=3)
r2 = nbody_run(preset("NOC_SW_C"), 24, 2, Arrangement(4, 2), seed=4)
sys.stdout.buffer.write(r1.stats.fingerprint() + b"#" + r2.stats.fingerprint())
"""


def _run(no_numba: bool) -> bytes:
    env = dict(os.environ)
    env["MPSOCSIM_NO_NUMBA"] = "1" if no_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", SNIPPET, "nojit" if no_numba else "jit"],
        capture_output=True, env=env, check=True)
    return out.stdout


@pytest.mark.skipif(not mpsocsim.USING_NUMBA, reason="already on the fallback path")
def test_fallback_matches_jit():
    assert _run(no_numba=True) == _run(no_numba=False)


def test_in_process_small_runs():
    r = matmul_run(preset("BASE32"), 12, 8, 8, Arrangement(1, 3), seed=1)
    assert r.cycles > 0
    r = nbody_run(preset("BASE32"), 16, 1, Arrangement(1, 2), seed=1)
    assert r.cycles > 0
