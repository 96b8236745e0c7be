"""Compiled core vs pure-Python fallback on the hot numerical kernels.

    python benchmarks/bench_core.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from mopens.numerics import _pycore

try:
    from mopens.numerics import _core
except ImportError:  # extension not built
    _core = None


def _random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def cases(rng):
    x = np.linspace(-15.0, 15.0, 4000)
    yield "airy_array 4000 pts", lambda k: k.airy_array(x)
    for n in (20, 50, 100, 200):
        m = _random_hermitian(n, rng)
        yield f"hermitian_eigenvalues n={n}", lambda k, m=m: k.hermitian_eigenvalues(m)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':32s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}  max |diff|")
    for name, fn in cases(rng):
        t_py = min(timeit.repeat(lambda: fn(_pycore), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:32s} {t_py:12.3f} {'n/a':>14s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        a, b = fn(_pycore), fn(_core)
        diff = max(float(np.max(np.abs(np.asarray(u) - np.asarray(v)))) for u, v in
                   zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        print(f"{name:32s} {t_py:12.3f} {t_c:14.3f} {t_py / t_c:8.1f}  {diff:.1e}")


if __name__ == "__main__":
    main()
