"""Compare the numba kernels against their numpy twins.

Kernel timings call both twins directly in one process. End-to-end timings
launch a fresh interpreter per backend, with SWARMLAB_NO_NUMBA set for the
numpy run, so the whole import-time selection is exercised.

    python3 benchmarks/bench_kernels.py [--repeats 7] [--skip-e2e]
"""
import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from swarmlab import moea, pso
from swarmlab.benchmarks import _KERNELS, ObjectiveId
from swarmlab.motor import model as mdl
from swarmlab.motor.params import MotorParams, SupplyWaveform
from swarmlab.motor.sim import simulate_states


def timed(fn, repeats: int, warmup: int = 2) -> tuple[float, float]:
    for _ in range(warmup):  # first call compiles
        fn()
    xs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        xs.append(time.perf_counter() - t0)
    return statistics.mean(xs), statistics.stdev(xs) if len(xs) > 1 else 0.0


def kernel_cases():
    rng = np.random.default_rng(0)
    X = rng.uniform(-5, 5, (20, 30))
    big = rng.uniform(-5, 5, (2000, 30))
    fast, slow = _KERNELS[ObjectiveId.RASTRIGIN]
    yield "rastrigin 20x30", lambda: fast(X), lambda: slow(X)
    yield "rastrigin 2000x30", lambda: fast(big), lambda: slow(big)

    F = rng.random((200, 3))
    yield "domination matrix 200x3", lambda: moea._domination_matrix_nb(F), lambda: moea._domination_matrix_np(F)

    A = rng.random((20, 20)) < 0.3
    A |= A.T
    np.fill_diagonal(A, True)
    pf = rng.random(20)
    yield "guides 20", lambda: pso._guides_nb(A, pf), lambda: pso._guides_np(A, pf)

    V, P = rng.random((2, 20, 30))
    g = pso._guides_np(A, pf)
    U = rng.random((20, 30, 3))
    vmax = np.full(30, 5.12)
    lo, hi = np.full(30, -5.12), np.full(30, 5.12)

    def move(k):
        return lambda: k(X.copy(), V.copy(), P, g, U, 1.2, True, 0.729, 2.05, 2.05, vmax, True)

    yield "particle move 20x30", move(pso._move_nb), move(pso._move_np)

    M0 = rng.random((20, 100)) < 0.1
    u = rng.random((20, 2))

    def clubs(k):
        return lambda: k(M0.copy(), pf, u, 5, 33, 10, True)

    yield "clubs update 20x100", clubs(pso._clubs_update_nb), clubs(pso._clubs_update_py)

    p, s = MotorParams.true(), SupplyWaveform()
    yield ("motor start-up 0.2 s",
           lambda: simulate_states(p, s, 0.2, 200, mdl.FLUX, backend="numba"),
           lambda: simulate_states(p, s, 0.2, 200, mdl.FLUX, backend="numpy"))


E2E = [
    ("C-PSO rastrigin, 20,000 evals",
     "from swarmlab.benchmarks import *; from swarmlab.core import make_rng; from swarmlab.pso import *\n"
     "s = BENCH_SETUPS[ObjectiveId.RASTRIGIN]\n"
     "pso_run(single_objective(ObjectiveId.RASTRIGIN, 30), s.space(), PsoConfig.clubs_based(10), 20000, make_rng(1))"),
    ("NSGA-II DTLZ2, 5,000 evals",
     "from swarmlab.benchmarks import *; from swarmlab.core import make_rng; from swarmlab.moea import *\n"
     "nsga2_run(dtlz_objective(ObjectiveId.DTLZ2, 3), 12, MoeaConfig(ploidy=1), 5000, make_rng(1), oid=ObjectiveId.DTLZ2)"),
]


def e2e(code: str, numba: bool, repeats: int) -> tuple[float, float]:
    env = dict(os.environ)
    env.pop("SWARMLAB_NO_NUMBA", None)
    if not numba:
        env["SWARMLAB_NO_NUMBA"] = "1"
    # the child times itself so interpreter start-up and imports are excluded;
    # one untimed call first keeps compilation out of the numbers
    wrapped = ("import time\n" + code + "\nt0 = time.perf_counter()\n"
               + code.splitlines()[-1] + "\nprint(time.perf_counter() - t0)")
    xs = []
    for _ in range(repeats):
        out = subprocess.run([sys.executable, "-c", wrapped], env=env, capture_output=True, text=True, check=True)
        xs.append(float(out.stdout.strip().splitlines()[-1]))
    return statistics.mean(xs), statistics.stdev(xs) if len(xs) > 1 else 0.0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)

    row = "{:<28} {:>12} {:>12} {:>12} {:>12} {:>8}"
    print(row.format("kernel", "numba mean", "numba std", "numpy mean", "numpy std", "speedup"))
    for name, fast, slow in kernel_cases():
        fm, fs = timed(fast, args.repeats)
        sm, ss = timed(slow, args.repeats)
        print(row.format(name, f"{fm * 1e6:.1f}us", f"{fs * 1e6:.1f}us", f"{sm * 1e6:.1f}us",
                         f"{ss * 1e6:.1f}us", f"{sm / fm:.1f}x"))
    if not args.skip_e2e:
        print()
        print(row.format("end to end", "numba mean", "numba std", "numpy mean", "numpy std", "speedup"))
        reps = max(2, args.repeats // 3)
        for name, code in E2E:
            fm, fs = e2e(code, True, reps)
            sm, ss = e2e(code, False, reps)
            print(row.format(name, f"{fm:.3f}s", f"{fs:.3f}s", f"{sm:.3f}s", f"{ss:.3f}s", f"{sm / fm:.1f}x"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
