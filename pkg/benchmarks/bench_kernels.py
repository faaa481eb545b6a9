"""Compare the numba kernels with their pure-numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both paths are called directly, so the QCPRIVACY_DISABLE_NUMBA flag does not
matter here.  Each row checks that the two results agree before timing.
"""
import argparse
import time

import numpy as np

from qcprivacy import _kernels as k
from qcprivacy.pir_classical import cube_scheme, two_server_xor_scheme


def _masks(scheme):
    table = scheme.query_table()
    return np.vectorize(scheme.answer_mask, otypes=[np.int64])(np.arange(scheme.servers)[None, None, :], table)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    yield "dot_table(10)", lambda: k._dot_table_numba(10), lambda: k._dot_table_numpy(10)
    yield "count_table(7)", lambda: k._count_table_numba(7), lambda: k._count_table_numpy(7)
    yield "case_table(8)", lambda: k._case_table_numba(8), lambda: k._case_table_numpy(8)
    for scheme in (two_server_xor_scheme(10), cube_scheme(16, 2)):
        m = _masks(scheme)
        yield (
            f"pir failures {scheme.name} n={scheme.n}",
            lambda m=m, n=scheme.n: k._xor_parity_failures_numba(m, n),
            lambda m=m, n=scheme.n: k._xor_parity_failures_numpy(m, n),
        )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':36s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fast, slow in cases():
        a, b = fast(), slow()  # also triggers compilation
        if not np.array_equal(np.asarray(a), np.asarray(b)):
            raise SystemExit(f"{name}: backends disagree")
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:36s} {tf:10.5f} {ts:10.5f} {ts / tf:8.1f}x")


if __name__ == "__main__":
    main()
