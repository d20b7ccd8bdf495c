import json
import os
import subprocess
import sys

import numpy as np

from swarmlab import backend
from swarmlab._accel import HAVE_NUMBA, USE_NUMBA

SCRIPT = """
import json
from swarmlab import backend
from swarmlab.benchmarks import BENCH_SETUPS, ObjectiveId, single_objective
from swarmlab.core import make_rng
from swarmlab.pso import PsoConfig, pso_run
s = BENCH_SETUPS[ObjectiveId.RASTRIGIN]
f = single_objective(ObjectiveId.RASTRIGIN, 30)
r = pso_run(f, s.space(), PsoConfig.clubs_based(10, w=1.4), 4000, make_rng(3))
print(json.dumps({"backend": backend(), "best": list(r.stats.best)}))
"""


def _run(flag):
    env = dict(os.environ)
    env.pop("SWARMLAB_NO_NUMBA", None)
    if flag:
        env["SWARMLAB_NO_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_backend_reports_selection():
    assert backend() == ("numba" if USE_NUMBA else "numpy")
    assert HAVE_NUMBA


def test_env_flag_switches_backend_and_keeps_results():
    fast = _run(None)
    slow = _run("1")
    assert fast["backend"] == "numba"
    assert slow["backend"] == "numpy"
    np.testing.assert_allclose(fast["best"], slow["best"], rtol=1e-9)
