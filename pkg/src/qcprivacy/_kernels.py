"""Hot integer kernels, compiled with numba when available.

Every kernel has a pure-numpy twin. The numba path is used unless numba is
missing or ``QCPRIVACY_DISABLE_NUMBA`` is set to a truthy value; both paths
are importable directly (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _env_disabled() -> bool:
    return os.environ.get("QCPRIVACY_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- parity


@njit(cache=True)
def _parity64(v):
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


def _parity_numpy(a):
    return (np.bitwise_count(np.asarray(a, dtype=np.uint64)) & 1).astype(np.int64)


@njit(cache=True)
def _dot_table_numba(nbits):
    size = 1 << nbits
    out = np.empty((size, size), dtype=np.int8)
    for r in range(size):
        for x in range(size):
            out[r, x] = _parity64(r & x)
    return out


def _dot_table_numpy(nbits):
    v = np.arange(1 << nbits, dtype=np.int64)
    return _parity_numpy(v[:, None] & v[None, :]).astype(np.int8)


# ---------------------------------------------------- inner-product counts


@njit(cache=True)
def _count_table_numba(n):
    # c[r, r', i, j] = #{x : r.x = i, r'.x = j}, by enumerating x
    size = 1 << n
    c = np.zeros((size, size, 2, 2), dtype=np.int64)
    for r in range(size):
        for rp in range(size):
            for x in range(size):
                c[r, rp, _parity64(r & x), _parity64(rp & x)] += 1
    return c


def _count_table_numpy(n):
    t = _dot_table_numpy(n).astype(np.int64)
    ind = [1 - t, t]
    size = 1 << n
    c = np.empty((size, size, 2, 2), dtype=np.int64)
    for i in range(2):
        for j in range(2):
            c[:, :, i, j] = ind[i] @ ind[j].T
    return c


@njit(cache=True)
def _case_table_numba(n):
    size = 1 << n
    full = 1 << n
    c = np.zeros((size, size, 2, 2), dtype=np.int64)
    for r in range(size):
        for rp in range(size):
            for i in range(2):
                for j in range(2):
                    if r == 0 and rp == 0 and i == 0 and j == 0:
                        v = full
                    elif (r == rp and i != j) or (r == 0 and i == 1) or (rp == 0 and j == 1):
                        v = 0
                    elif (r == rp and r != 0 and i == j) or (r == 0 and rp != 0 and i == 0) or (
                        rp == 0 and r != 0 and j == 0
                    ):
                        v = full // 2
                    else:
                        v = full // 4
                    c[r, rp, i, j] = v
    return c


def _case_table_numpy(n):
    size = 1 << n
    full = 1 << n
    r = np.arange(size)[:, None, None, None]
    rp = np.arange(size)[None, :, None, None]
    i = np.arange(2)[None, None, :, None]
    j = np.arange(2)[None, None, None, :]
    shape = (size, size, 2, 2)
    top = np.broadcast_to((r == 0) & (rp == 0) & (i == 0) & (j == 0), shape)
    zero = np.broadcast_to(((r == rp) & (i != j)) | ((r == 0) & (i == 1)) | ((rp == 0) & (j == 1)), shape)
    half = np.broadcast_to(
        ((r == rp) & (r != 0) & (i == j)) | ((r == 0) & (rp != 0) & (i == 0)) | ((rp == 0) & (r != 0) & (j == 0)),
        shape,
    )
    # n = 1 gives full // 4 == 0, which is never selected by the case table
    c = np.full(shape, full // 4, dtype=np.int64)
    c[half] = full // 2
    c[zero] = 0
    c[top] = full
    return c


# ------------------------------------------------------ PIR exhaustive check


@njit(cache=True)
def _xor_parity_failures_numba(masks, n):
    # masks[i, r, s]: database mask queried from server s; reconstruction is
    # the XOR of all server parities and must equal bit i (MSB = index 0).
    nidx, nrand, nserv = masks.shape
    fails = 0
    for x in range(1 << n):
        for i in range(nidx):
            want = (x >> (n - 1 - i)) & 1
            for r in range(nrand):
                acc = 0
                for s in range(nserv):
                    acc ^= _parity64(x & masks[i, r, s])
                if acc != want:
                    fails += 1
    return fails


def _xor_parity_failures_numpy(masks, n, chunk=1 << 14):
    nidx, nrand, nserv = masks.shape
    fails = 0
    for start in range(0, 1 << n, chunk):
        xs = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        for i in range(nidx):
            want = (xs >> (n - 1 - i)) & 1
            acc = np.zeros((nrand, xs.size), dtype=np.int64)
            for s in range(nserv):
                acc ^= _parity_numpy(masks[i, :, s][:, None] & xs[None, :])
            fails += int(np.count_nonzero(acc != want[None, :]))
    return fails


# -------------------------------------------------------------- dispatch


def _pick(numba_fn, numpy_fn):
    return numba_fn if USE_NUMBA else numpy_fn


def dot_table(nbits: int) -> np.ndarray:
    """Return T[r, x] = parity(r AND x) for all nbits-bit integers."""
    return _pick(_dot_table_numba, _dot_table_numpy)(nbits)


def count_table(n: int) -> np.ndarray:
    return _pick(_count_table_numba, _count_table_numpy)(n)


def case_table(n: int) -> np.ndarray:
    return _pick(_case_table_numba, _case_table_numpy)(n)


def xor_parity_failures(masks: np.ndarray, n: int) -> int:
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    return int(_pick(_xor_parity_failures_numba, _xor_parity_failures_numpy)(masks, n))


def parity(a):
    """Parity of the set bits of each (non-negative) integer."""
    return _parity_numpy(a)
