"""Compare the compiled and pure-Python series kernels.

Usage: python benchmarks/bench_kernels.py [--repeat 3]

Times the raw truncated product at a few sizes, then one end-to-end Siegel
expansion per backend (in a subprocess, since the backend is chosen at import).
"""

import argparse
import os
import random
import subprocess
import sys
import time

from siegelnb import _pykernels
from siegelnb.coeffring import field

try:
    from siegelnb import _ckernels
except ImportError:
    _ckernels = None

E2E = (
    "import time;"
    "from siegelnb.siegel import expansion_from_representative;"
    "t=time.perf_counter();"
    "[expansion_from_representative(N, 1, 1, H) for N, H in ((3, 240), (5, 200), (7, 140))];"
    "print(time.perf_counter()-t)"
)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def random_buffer(rng, n, phi, bits):
    return [rng.randint(-(1 << bits), 1 << bits) for _ in range(n * phi)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    rng = random.Random(0)
    print(f"{'case':<28}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for m, n, bits in ((4, 200, 20), (7, 200, 20), (12, 120, 20), (5, 150, 100)):
        f = field(m)
        a = random_buffer(rng, n, f.phi, bits)
        b = random_buffer(rng, n, f.phi, bits)
        py = best_of(lambda: _pykernels.mul_trunc(a, n, b, n, n, f.phi, f.red), args.repeat)
        cy = best_of(lambda: _ckernels.mul_trunc(a, n, b, n, n, f.phi, f.red), args.repeat)
        label = f"mul_trunc N={m} n={n} {bits}b"
        print(f"{label:<28}{py:>12.4f}{cy:>12.4f}{py / cy:>10.1f}")
    results = {}
    for backend, flag in (("python", "1"), ("cython", "")):
        env = dict(os.environ, SIEGELNB_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True,
                             check=True)
        results[backend] = float(out.stdout)
    label = "siegel expansions (3)"
    print(f"{label:<28}{results['python']:>12.4f}{results['cython']:>12.4f}"
          f"{results['python'] / results['cython']:>10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
