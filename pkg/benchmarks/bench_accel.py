"""Compare the numba kernels with the numpy fallbacks.

    python3 benchmarks/bench_accel.py

The first numba call includes JIT compilation (or a cache load), so it is
timed separately and left out of the per-call figures.  The end-to-end rows
run the kernel on the golden corpus in a fresh interpreter with and without
JLOGIC_NO_NUMBA=1.
"""

import os
import subprocess
import sys
import time

import numpy as np

from jlogic import _accel
from jlogic.kernel import compile_propositional
from jlogic.syntax import Implies, Or, And, Not, Atom

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def taut_program(n):
    # (a0 | ... | a{n-1}) | (~a0 & ... & ~a{n-1}) is valid, so every row is scanned
    atoms = [Atom(f"A{i}", ()) for i in range(n)]
    big_or = atoms[0]
    big_and = Not(atoms[0])
    for a in atoms[1:]:
        big_or = Or(big_or, a)
        big_and = And(big_and, Not(a))
    prog = []
    compile_propositional(Implies(Not(big_or), big_and), {}, prog)
    return prog


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def micro():
    print(f"numba available: {_accel.USE_NUMBA}")
    if _accel.USE_NUMBA:
        t0 = time.perf_counter()
        _accel.first_falsifying(taut_program(2), 2, use_numba=True)
        _accel.transitive_closure(np.eye(2, dtype=bool), use_numba=True)
        print(f"first numba call (compile or cache load): {time.perf_counter() - t0:.3f}s")
    print(f"{'kernel':<22}{'size':>6}{'numpy ms':>12}{'numba ms':>12}")
    for n in (4, 8, 12, 16):
        prog = taut_program(n)
        reps = 200 if n < 12 else 20
        py = timeit(lambda: _accel.first_falsifying(prog, n, use_numba=False), reps)
        nb = timeit(lambda: _accel.first_falsifying(prog, n, use_numba=True), reps) if _accel.USE_NUMBA else float("nan")
        print(f"{'truth table':<22}{n:>6}{py * 1e3:>12.3f}{nb * 1e3:>12.3f}")
    rng = np.random.default_rng(0)
    for n in (4, 16, 64, 256):
        m = rng.random((n, n)) < 2.0 / n
        reps = 500 if n <= 16 else 20
        py = timeit(lambda: _accel.transitive_closure(m, use_numba=False), reps)
        nb = timeit(lambda: _accel.transitive_closure(m, use_numba=True), reps) if _accel.USE_NUMBA else float("nan")
        print(f"{'warshall closure':<22}{n:>6}{py * 1e3:>12.3f}{nb * 1e3:>12.3f}")


_E2E = """
import glob, time
from jlogic.textio import parse_derivation
from jlogic.kernel import check
ds = [parse_derivation(open(p).read(), base_dir='corpus') for p in sorted(glob.glob('corpus/*.jd'))]
check(ds[0])
t0 = time.perf_counter()
for _ in range(3):
    for d in ds:
        assert check(d).accepted
print(f"{(time.perf_counter() - t0) / 3:.3f}")
"""


def end_to_end():
    print("golden corpus check, seconds per pass:")
    for label, env in (("numba", {}), ("numpy", {"JLOGIC_NO_NUMBA": "1"})):
        out = subprocess.run([sys.executable, "-c", _E2E], cwd=ROOT, capture_output=True, text=True,
                             env={**os.environ, **env}, check=True)
        print(f"  {label:<6}{out.stdout.strip()}")


if __name__ == "__main__":
    micro()
    end_to_end()
