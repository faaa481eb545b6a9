"""Classical transcripts: direct and round-by-round privacy, IdMinimum.

A classical protocol is a list of deterministic message functions; round k
(1-based) is sent by party 0 when k is odd.  An optional public coin is
drawn uniformly before round 1 and recorded as message 0.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

CHAIN_TOL = 1e-9
HALT = "-"


@dataclass(frozen=True, eq=False)
class ClassicalProtocol:
    name: str
    input_sizes: tuple[int, int]
    rounds: tuple[Callable[[int, tuple], object], ...]
    coins: int = 1

    def transcript(self, x: int, y: int, coin: int = 0) -> tuple:
        msgs = [coin]
        for k, fn in enumerate(self.rounds, start=1):
            own = x if k % 2 == 1 else y
            msgs.append(fn(own, tuple(msgs)))
        return tuple(msgs)


def _entropy(joint: dict, cols: Sequence[int]) -> float:
    marg = defaultdict(float)
    for outcome, p in joint.items():
        marg[tuple(outcome[c] for c in cols)] += p
    return -sum(p * math.log2(p) for p in marg.values() if p > 0)


def cmi(joint: dict, a: Sequence[int], b: Sequence[int], c: Sequence[int] = ()) -> float:
    """I(A:B|C) for a joint distribution keyed by outcome tuples."""
    a, b, c = list(a), list(b), list(c)
    return _entropy(joint, a + c) + _entropy(joint, b + c) - _entropy(joint, c) - _entropy(joint, a + b + c)


def uniform(protocol: ClassicalProtocol) -> np.ndarray:
    nx, ny = protocol.input_sizes
    return np.full((nx, ny), 1.0 / (nx * ny))


def joint_distribution(protocol: ClassicalProtocol, mu=None, alice_substitute=None) -> dict:
    """p(x, y, m_0, ..., m_K).

    ``alice_substitute`` optionally maps Alice's real input to a distribution
    ``{x': p}`` over the input she actually runs the protocol with.
    """
    mu = uniform(protocol) if mu is None else np.asarray(mu, dtype=float)
    joint = defaultdict(float)
    for x, y in zip(*np.nonzero(mu > 0)):
        x, y = int(x), int(y)
        subs = {x: 1.0} if alice_substitute is None else alice_substitute(x)
        for xe, pe in subs.items():
            for coin in range(protocol.coins):
                t = protocol.transcript(xe, y, coin)
                joint[(x, y) + t] += mu[x, y] * pe / protocol.coins
    return dict(joint)


@dataclass
class TranscriptPrivacy:
    alice_direct: float
    bob_direct: float
    alice_rounds: dict
    bob_rounds: dict

    @property
    def alice_sum(self) -> float:
        return sum(self.alice_rounds.values())

    @property
    def bob_sum(self) -> float:
        return sum(self.bob_rounds.values())


def classical_transcript_privacy(protocol: ClassicalProtocol, mu=None, alice_substitute=None) -> TranscriptPrivacy:
    """I(Pi:X|Y) and I(Pi:Y|X), directly and as round-by-round sums.

    Raises AssertionError if the two routes disagree by more than 1e-9.
    """
    joint = joint_distribution(protocol, mu, alice_substitute)
    K = len(protocol.rounds)
    X, Y = 0, 1
    msgs = list(range(2, 3 + K))  # column 2 is the public coin
    a_direct = cmi(joint, msgs, [X], [Y])
    b_direct = cmi(joint, msgs, [Y], [X])
    a_rounds, b_rounds = {}, {}
    for k in range(1, K + 1):
        col, prev = 2 + k, list(range(2, 2 + k))
        if k % 2 == 1:
            a_rounds[k] = cmi(joint, [col], [X], [Y] + prev)
        else:
            b_rounds[k] = cmi(joint, [col], [Y], [X] + prev)
    res = TranscriptPrivacy(a_direct, b_direct, a_rounds, b_rounds)
    if abs(res.alice_sum - a_direct) > CHAIN_TOL or abs(res.bob_sum - b_direct) > CHAIN_TOL:
        raise AssertionError(
            f"{protocol.name}: chain rule mismatch ({a_direct} vs {res.alice_sum}, {b_direct} vs {res.bob_sum})"
        )
    return res


def output_leakage(protocol: ClassicalProtocol, f: Callable[[int, int], object], mu=None) -> tuple[float, float]:
    """(I(F:X|Y), I(F:Y|X)) for the function value F = f(X, Y)."""
    joint = defaultdict(float)
    for (x, y, *_), p in joint_distribution(protocol, mu).items():
        joint[(x, y, f(x, y))] += p
    return cmi(joint, [2], [0], [1]), cmi(joint, [2], [1], [0])


def leakage_beyond_output(
    protocol: ClassicalProtocol, f: Callable[[int, int], object], mu=None, alice_substitute=None
) -> tuple[float, float]:
    """(I(Pi:X|Y,F), I(Pi:Y|X,F)) with F the function of the real inputs."""
    joint = defaultdict(float)
    for outcome, p in joint_distribution(protocol, mu, alice_substitute).items():
        x, y = outcome[:2]
        joint[outcome + (f(x, y),)] += p
    K = len(protocol.rounds)
    msgs = list(range(2, 3 + K))
    F = 3 + K
    return cmi(joint, msgs, [0], [1, F]), cmi(joint, msgs, [1], [0, F])


# -------------------------------------------------------------- IdMinimum


def idminimum(x: int, y: int) -> tuple:
    """Who holds the minimum (Alice on ties) and its value; inputs are 0-based."""
    return ("A", x) if x <= y else ("B", y)


def idminimum_protocol(size: int) -> ClassicalProtocol:
    """Ascending-halt protocol: for v = 1..size, Alice then Bob say whether their input is v."""
    if size < 1:
        raise ValueError("domain size must be positive")

    def halted(prefix):
        return any(m == 1 for m in prefix[1:])

    def say(v):
        return lambda own, prefix: HALT if halted(prefix) else int(own == v)

    rounds = []
    for v in range(size):
        rounds += [say(v), say(v)]
    return ClassicalProtocol(f"idminimum-{size}", (size, size), tuple(rounds))


def uniform_substitute(size: int):
    """Alice ignores her input and runs on a uniformly random one."""
    dist = {v: 1.0 / size for v in range(size)}
    return lambda x: dist


# ------------------------------------------------------- random protocols


def random_classical_protocol(rng: np.random.Generator, max_rounds: int = 3, max_bits: int = 3) -> ClassicalProtocol:
    """Deterministic protocol with random lookup-table messages."""
    nx = 1 << int(rng.integers(1, max_bits + 1))
    ny = 1 << int(rng.integers(1, max_bits + 1))
    K = int(rng.integers(1, max_rounds + 1))
    coins = int(rng.integers(1, 3))
    alphabets = [int(rng.integers(2, 4)) for _ in range(K)]
    rounds = []
    for k in range(1, K + 1):
        own_size = nx if k % 2 == 1 else ny
        prefixes = itertools.product(range(coins), *[range(a) for a in alphabets[: k - 1]])
        table = {}
        for prefix in prefixes:
            for v in range(own_size):
                table[(v, prefix)] = int(rng.integers(0, alphabets[k - 1]))
        rounds.append(lambda own, prefix, table=table: table[(own, prefix)])
    return ClassicalProtocol("random", (nx, ny), tuple(rounds), coins)


def random_distribution(rng: np.random.Generator, shape) -> np.ndarray:
    w = rng.random(shape) * (rng.random(shape) > 0.2)
    if w.sum() == 0:
        w[0, 0] = 1.0
    return w / w.sum()
