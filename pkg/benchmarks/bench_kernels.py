"""Time the hot kernels under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py

Each backend runs in its own interpreter because the choice is fixed at import.
"""
import json
import os
import subprocess
import sys

WORKER = r"""
import json, time
import numpy as np
from priorfree import _accel

rng = np.random.default_rng(0)
rows = rng.integers(0, 2, (20000, 16))
view = rng.integers(0, 2, 16)
counts = _accel.pair_counts(rows, view, 2, 2)
center = np.full(4, 0.25)
codes = np.arange(2 ** 16)
swaps = [int(rng.integers(0, 4096 - k)) for k in range(4095)]

cases = {
    "pair_counts": lambda: _accel.pair_counts(rows, view, 2, 2),
    "l1_rows": lambda: _accel.l1_rows(counts, 16, center),
    "decode": lambda: _accel.decode(codes, 2, 16),
    "multiset_permutations": lambda: _accel.multiset_permutations([6, 6]),
    "apply_swaps": lambda: _accel.apply_swaps(np.arange(4096), swaps),
}
out = {}
for name, fn in cases.items():
    fn()  # warm-up, includes jit compilation
    reps, start = 0, time.perf_counter()
    while time.perf_counter() - start < 0.5:
        fn()
        reps += 1
    out[name] = (time.perf_counter() - start) / reps
print(json.dumps({"backend": _accel.BACKEND, "seconds": out}))
"""


def run(no_numba: bool) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["PRIORFREE_NO_NUMBA"] = "1"
    else:
        env.pop("PRIORFREE_NO_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", WORKER], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    fast, slow = run(False), run(True)
    print(f"{'kernel':<24}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name, t in fast["seconds"].items():
        s = slow["seconds"][name]
        print(f"{name:<24}{t * 1e3:>10.3f}ms{s * 1e3:>10.3f}ms{s / t:>9.1f}x")


if __name__ == "__main__":
    main()
