"""Two-round multi-server classical PIR schemes and their exhaustive verification.

Indices are 0-based internally (index j stands for database position j+1).
A database is an n-bit integer whose most significant bit is position 1;
subsets of positions are encoded the same way.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels

BUDGET = 1 << 24


class BudgetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ClassicalPirScheme:
    name: str
    servers: int
    n: int
    randomness: int
    query_bits: int
    answer_bits: int
    query: Callable[[int, int, int], int]  # (r, i, server) -> query
    answer: Callable[[int, int, int], int]  # (server, query, x) -> answer
    reconstruct: Callable[[int, int, tuple], int]  # (i, r, answers) -> bit
    answer_mask: Callable[[int, int], int] | None = None  # parity answers: database mask
    xor_reconstruct: bool = False
    params: dict = field(default_factory=dict)

    def queries(self, r: int, i: int) -> tuple[int, ...]:
        return tuple(self.query(r, i, s) for s in range(self.servers))

    def query_table(self) -> np.ndarray:
        """Q[i, r, s]."""
        t = np.empty((self.n, self.randomness, self.servers), dtype=np.int64)
        for i in range(self.n):
            for r in range(self.randomness):
                t[i, r] = self.queries(r, i)
        return t

    def communication(self) -> int:
        return self.servers * (self.query_bits + self.answer_bits)

    def descriptor(self) -> dict:
        return {
            "scheme": self.name,
            "servers": self.servers,
            "n": self.n,
            "randomness": self.randomness,
            "query_bits": self.query_bits,
            "answer_bits": self.answer_bits,
            **self.params,
        }


def bit(x: int, i: int, n: int) -> int:
    """Database bit at 0-based position i."""
    return (x >> (n - 1 - i)) & 1


def _xor_all(answers) -> int:
    acc = 0
    for a in answers:
        acc ^= a
    return acc


def _parity_answer(s, q, x):
    return int(_kernels.parity(q & x))


def two_server_xor_scheme(n: int) -> ClassicalPirScheme:
    """Server 0 gets chi(S), server 1 gets chi(S xor {i}); both answer parities."""
    if n < 1:
        raise ValueError("n must be positive")

    def query(r, i, s):
        return r if s == 0 else r ^ (1 << (n - 1 - i))

    return ClassicalPirScheme(
        name="two-server",
        servers=2,
        n=n,
        randomness=1 << n,
        query_bits=n,
        answer_bits=1,
        query=query,
        answer=_parity_answer,
        reconstruct=lambda i, r, answers: _xor_all(answers),
        answer_mask=lambda s, q: q,
        xor_reconstruct=True,
    )


def cube_side(n: int, d: int) -> int:
    if d < 1 or n < 1:
        raise ValueError("n and d must be positive")
    m = round(n ** (1.0 / d))
    for c in (m - 1, m, m + 1):
        if c >= 1 and c**d == n:
            return c
    raise ValueError(f"n={n} is not a perfect power m^{d}")


@functools.lru_cache(maxsize=None)
def _subcube_masks(m: int, d: int) -> np.ndarray:
    """mask[q] for every packed query q = (T_1 .. T_d), T_1 most significant."""
    n = m**d
    cell_bits = np.array([1 << (n - 1 - p) for p in range(n)], dtype=np.int64)
    # membership of position p in T_j: coordinate a_j = (p // m^(d-j)) % m
    pos = np.arange(n)
    coords = [(pos // m ** (d - 1 - j)) % m for j in range(d)]
    nq = 1 << (d * m)
    q = np.arange(nq, dtype=np.int64)
    inside = np.ones((nq, n), dtype=bool)
    for j in range(d):
        chunk = (q >> ((d - 1 - j) * m)) & ((1 << m) - 1)
        inside &= ((chunk[:, None] >> (m - 1 - coords[j][None, :])) & 1).astype(bool)
    return (inside * cell_bits[None, :]).sum(axis=1).astype(np.int64)


def cube_scheme(n: int, d: int) -> ClassicalPirScheme:
    """2^d servers; server eps toggles i_j in S_j whenever eps_j = 1."""
    m = cube_side(n, d)
    masks = _subcube_masks(m, d)

    def coords(i):
        return [(i // m ** (d - 1 - j)) % m for j in range(d)]

    def query(r, i, s):
        c = coords(i)
        q = 0
        for j in range(d):
            chunk = (r >> ((d - 1 - j) * m)) & ((1 << m) - 1)
            if (s >> (d - 1 - j)) & 1:
                chunk ^= 1 << (m - 1 - c[j])
            q = (q << m) | chunk
        return q

    return ClassicalPirScheme(
        name="cube",
        servers=1 << d,
        n=n,
        randomness=1 << (d * m),
        query_bits=d * m,
        answer_bits=1,
        query=query,
        answer=lambda s, q, x: int(_kernels.parity(int(masks[q]) & x)),
        reconstruct=lambda i, r, answers: _xor_all(answers),
        answer_mask=lambda s, q: int(masks[q]),
        xor_reconstruct=True,
        params={"d": d, "side": m},
    )


def clear_index_scheme(n: int) -> ClassicalPirScheme:
    """Broken on purpose: a single server is told i and answers x_i."""
    w = max(1, (n - 1).bit_length())
    return ClassicalPirScheme(
        name="clear-index",
        servers=1,
        n=n,
        randomness=1,
        query_bits=w,
        answer_bits=1,
        query=lambda r, i, s: i,
        answer=lambda s, q, x: bit(x, q, n),
        reconstruct=lambda i, r, answers: answers[0],
    )


# ------------------------------------------------------------ verification


@dataclass
class SchemeVerdict:
    scheme: dict
    correct: bool
    failures: int
    cases: int
    tv_distance: list  # per server, max over index pairs
    communication: int

    @property
    def private(self) -> bool:
        return all(t == 0 for t in self.tv_distance)

    @property
    def accepted(self) -> bool:
        return self.correct and self.private

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "correct": self.correct,
            "failures": self.failures,
            "cases": self.cases,
            "tv_distance": self.tv_distance,
            "private": self.private,
            "communication": self.communication,
        }


def query_tv_distances(scheme: ClassicalPirScheme, table: np.ndarray | None = None) -> list:
    """Per server, the largest total-variation distance between query laws of two indices.

    Computed from exact integer histograms, so 0 means identical distributions.
    """
    table = scheme.query_table() if table is None else table
    out = []
    for s in range(scheme.servers):
        hist = np.stack([np.bincount(table[i, :, s], minlength=1 << scheme.query_bits) for i in range(scheme.n)])
        worst = 0
        for a, b in itertools.combinations(range(scheme.n), 2):
            worst = max(worst, int(np.abs(hist[a] - hist[b]).sum()))
        out.append(worst / (2.0 * scheme.randomness))
    return out


def _failures_generic(scheme: ClassicalPirScheme, databases) -> int:
    fails = 0
    for x in databases:
        for i in range(scheme.n):
            want = bit(x, i, scheme.n)
            for r in range(scheme.randomness):
                qs = scheme.queries(r, i)
                answers = tuple(scheme.answer(s, q, x) for s, q in enumerate(qs))
                if scheme.reconstruct(i, r, answers) != want:
                    fails += 1
    return fails


def _failures_fast(scheme: ClassicalPirScheme, table: np.ndarray, databases) -> int:
    masks = np.vectorize(lambda s, q: scheme.answer_mask(s, q), otypes=[np.int64])(
        np.arange(scheme.servers)[None, None, :], table
    )
    if databases is None:
        return _kernels.xor_parity_failures(masks, scheme.n)
    fails = 0
    for x in databases:
        want = (x >> (scheme.n - 1 - np.arange(scheme.n))) & 1
        acc = np.bitwise_xor.reduce(_kernels.parity(masks & x), axis=2)
        fails += int(np.count_nonzero(acc != want[:, None]))
    return fails


def verify_scheme(scheme: ClassicalPirScheme, databases=None, generic: bool = False) -> SchemeVerdict:
    """Exhaustive correctness over (x, i, r) and exact query-law independence of i.

    ``databases`` restricts x to an explicit list (no budget check then);
    ``generic`` forces the plain Python route even when a parity fast path exists.
    """
    if databases is None and scheme.randomness * (1 << scheme.n) > BUDGET:
        raise BudgetError(f"R * 2^n = {scheme.randomness * (1 << scheme.n)} exceeds the budget {BUDGET}")
    table = scheme.query_table()
    if scheme.answer_mask is not None and scheme.xor_reconstruct and not generic:
        fails = _failures_fast(scheme, table, databases)
    else:
        fails = _failures_generic(scheme, range(1 << scheme.n) if databases is None else databases)
    ndb = (1 << scheme.n) if databases is None else len(list(databases))
    return SchemeVerdict(
        scheme=scheme.descriptor(),
        correct=fails == 0,
        failures=fails,
        cases=ndb * scheme.n * scheme.randomness,
        tv_distance=query_tv_distances(scheme, table),
        communication=scheme.communication(),
    )
