"""Time the compiled kernels against the pure-Python fallback.

Each backend runs in its own interpreter (the choice is fixed at import), on
three workloads: one storage simulation (adaptive integrator), a 241-point
weak-probe susceptibility sweep (one bordered solve per point), and the raw
bordered solve on a 9x9 Liouvillian.

    python3 benchmarks/bench_backends.py [--repeat N]
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from nhrouter import _backend
from nhrouter.calibration import load_default
from nhrouter.core import LindbladTerm, build_liouvillian, transition
from nhrouter.model import Direction, susceptibility
from nhrouter.zeeman import ZeemanScheme
from nhrouter.storage import PulseSequence, simulate_storage

repeat = int(sys.argv[1])
p = load_default().routing_params()
seq = PulseSequence.from_ns()

def best(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

scheme = ZeemanScheme()

def sweep():
    for d in np.linspace(-3, 3, 241):
        for direction in Direction:
            susceptibility(direction, scheme, p.at_two_photon_detuning(d))

h = np.diag([0.0, 0.1, 0.3]).astype(complex)
h[0, 2] = h[2, 0] = 0.005
h[1, 2] = h[2, 1] = 0.5
l0 = build_liouvillian(h, [LindbladTerm(transition(3, 0, 2), 0.5), LindbladTerm(transition(3, 1, 2), 0.5)]).matrix
rhs = np.zeros(9, dtype=complex)

def solves():
    for _ in range(2000):
        _backend.bordered_solve(l0, rhs, 1.0)

print(json.dumps({
    "backend": _backend.BACKEND,
    "storage_forward_s": best(lambda: simulate_storage(Direction.FORWARD, seq, p)),
    "susceptibility_sweep_s": best(sweep),
    "bordered_solve_x2000_s": best(solves),
}))
"""


def run(backend, repeat):
    env = dict(os.environ, NHROUTER_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = run("compiled", args.repeat)
    fallback = run("python", args.repeat)
    if compiled["backend"] != "compiled":
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'workload':<26}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for key in ("storage_forward_s", "susceptibility_sweep_s", "bordered_solve_x2000_s"):
        a, b = compiled[key], fallback[key]
        print(f"{key:<26}{a:>12.4f}{b:>12.4f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
