"""One-server quantum PIR compiled from a multi-server classical scheme.

The user prepares a uniform superposition over the scheme's randomness r of
all queries (plus a copy of them), then ships query register i together with
an empty answer register to the single server, which XORs in the answer and
sends both back.  The server keeps nothing between rounds.
"""
from __future__ import annotations

import itertools

import numpy as np

from .gates import Permutation, Prepare
from .linalg import MAX_QUBITS, WidthCapError, partial_trace, trace_distance
from .pir_classical import ClassicalPirScheme, bit
from .privacy import ordering_check, privacy_loss
from .protocol import P0, P1, Protocol, Round, branches, execute, input_distribution

USER, SERVER = P0, P1


def qpir_width(scheme: ClassicalPirScheme, copy: bool = True) -> int:
    return (2 if copy else 1) * scheme.servers * scheme.query_bits + scheme.servers * scheme.answer_bits


def qpir_communication(scheme: ClassicalPirScheme) -> int:
    return 2 * scheme.servers * (scheme.query_bits + scheme.answer_bits)


def _names(scheme):
    ell = scheme.servers
    return [f"Q{s + 1}" for s in range(ell)], [f"Ans{s + 1}" for s in range(ell)]


def _pack(values, width):
    out = 0
    for v in values:
        out = (out << width) | v
    return out


def _unpack(value, width, count):
    return tuple((value >> (width * (count - 1 - s))) & ((1 << width) - 1) for s in range(count))


def _preparation(scheme: ClassicalPirScheme, i: int, copy: bool, sabotage: bool) -> Prepare:
    qs, _ = _names(scheme)
    ell, mq = scheme.servers, scheme.query_bits
    regs = (("Q",) if copy else ()) + tuple(qs)
    dim = 1 << (len(regs) * mq if not copy else 2 * ell * mq)
    vec = np.zeros(dim, dtype=np.complex128)
    seen = set()
    rbits = max(1, (scheme.randomness - 1).bit_length())
    for r in range(scheme.randomness):
        tup = scheme.queries(r, i)
        if tup in seen:
            raise ValueError(f"{scheme.name}: query tuples are not injective in r; the copy register cannot recover r")
        seen.add(tup)
        packed = _pack(tup, mq)
        idx = (packed << (ell * mq)) | packed if copy else packed
        # the deliberately broken variant skews branch weights by one bit of r chosen by i
        vec[idx] = 1.0 + (r >> (i % rbits) & 1 if sabotage else 0)
    vec /= np.linalg.norm(vec)
    return Prepare(regs, vec)


def _answer_gate(scheme: ClassicalPirScheme, s: int, x: int) -> Permutation:
    qs, ans = _names(scheme)
    mq, ma = scheme.query_bits, scheme.answer_bits
    idx = np.arange(1 << (mq + ma))
    q, a = idx >> ma, idx & ((1 << ma) - 1)
    out = np.array([scheme.answer(s, int(qq), x) for qq in range(1 << mq)], dtype=np.int64)
    return Permutation((qs[s], ans[s]), (q << ma) | (a ^ out[q]))


def build_qpir(scheme: ClassicalPirScheme, copy: bool = True, sabotage: bool = False) -> Protocol:
    """Compile ``scheme``; ``copy=False, sabotage=True`` builds the leaky variant used as a detector check."""
    width = qpir_width(scheme, copy)
    if width > MAX_QUBITS:
        raise WidthCapError(f"compiled protocol needs {width} qubits, cap is {MAX_QUBITS}")
    ell, mq, ma = scheme.servers, scheme.query_bits, scheme.answer_bits
    qs, ans = _names(scheme)
    registers = ((("Q", ell * mq, USER),) if copy else ()) + tuple((q, mq, USER) for q in qs) + tuple(
        (a, ma, USER) for a in ans
    )
    preps = [_preparation(scheme, i, copy, sabotage) for i in range(scheme.n)]
    inverse = [{scheme.queries(r, i): r for r in range(scheme.randomness)} for i in range(scheme.n)]

    rounds = []
    for s in range(ell):
        rounds.append(
            Round(
                USER,
                (qs[s], ans[s]),
                (lambda i: (preps[i],)) if s == 0 else None,
                f"user sends query {s + 1}" + (" after preparing the query superposition" if s == 0 else ""),
            )
        )
        rounds.append(Round(SERVER, (qs[s], ans[s]), lambda x, s=s: (_answer_gate(scheme, s, x),), f"server answers query {s + 1}"))

    def decode(state, i, x):
        out = {}
        for vals, p in branches(state):
            tup = tuple(vals[q] for q in qs)
            if copy and _unpack(vals["Q"], mq, ell) != tup:
                raise AssertionError("query copy and query registers disagree")
            r = inverse[i].get(tup)
            if r is None:
                raise AssertionError("measured queries match no randomness value")
            b = scheme.reconstruct(i, r, tuple(vals[a] for a in ans))
            out[b] = out.get(b, 0.0) + p
        return out

    return Protocol(
        name=f"qpir-{scheme.name}",
        registers=registers,
        rounds=tuple(rounds),
        input_sizes=(scheme.n, 1 << scheme.n),
        input_names=("I", "D"),
        party_names=("User", "Server"),
        decoder=decode,
        params={"scheme": scheme.descriptor(), "copy": copy, "sabotage": sabotage},
    )


# ---------------------------------------------------------------- checks


def _server_views(protocol: Protocol, x: int):
    """For each round the server receives: (round, held registers, reduced state per index)."""
    n = protocol.input_sizes[0]
    runs = [execute(protocol, i, x) for i in range(n)]
    for k in range(1, protocol.num_rounds + 1):
        if protocol.rounds[k - 1].sender != USER:
            continue
        held = protocol.held_by(SERVER, k)
        yield k, held, [partial_trace(run[k], held) for run in runs]


def server_view_independence(protocol: Protocol, x: int) -> float:
    """Largest trace distance, over rounds and index pairs, between the server's views."""
    worst = 0.0
    for _, _, views in _server_views(protocol, x):
        for a, b in itertools.combinations(views, 2):
            worst = max(worst, trace_distance(a, b))
    return worst


def server_view_matches_classical(scheme: ClassicalPirScheme, protocol: Protocol, x: int) -> float:
    """Max entrywise gap between each server view and diag(query law) x |0><0| on the answer."""
    table = scheme.query_table()
    mq, ma = scheme.query_bits, scheme.answer_bits
    worst = 0.0
    for k, held, views in _server_views(protocol, x):
        s = (k - 1) // 2
        for i, rho in enumerate(views):
            law = np.bincount(table[i, :, s], minlength=1 << mq) / scheme.randomness
            expected = np.zeros((1 << (mq + ma), 1 << (mq + ma)))
            expected[np.arange(1 << mq) << ma, np.arange(1 << mq) << ma] = law
            worst = max(worst, float(np.abs(rho.matrix - expected).max()))
    return worst


def server_keeps_nothing(protocol: Protocol) -> bool:
    return all(
        not protocol.held_by(SERVER, k)
        for k in range(protocol.num_rounds + 1)
        if k == 0 or protocol.rounds[k - 1].sender == SERVER
    )


def decode_all(scheme: ClassicalPirScheme, protocol: Protocol) -> int:
    """Number of (x, i) where some branch fails to reconstruct x_i."""
    fails = 0
    for x in range(1 << scheme.n):
        for i in range(scheme.n):
            states = execute(protocol, i, x)
            dist = protocol.decoder(states[-1], i, x)
            if abs(dist.get(bit(x, i, scheme.n), 0.0) - 1.0) > 1e-9:
                fails += 1
    return fails


def qpir_privacy_report(scheme: ClassicalPirScheme, mu=None, ordering: bool | None = None) -> dict:
    """L_U, L_S and, when the width allows, the SIC/QIC ordering on both sides."""
    protocol = build_qpir(scheme)
    mu = input_distribution(protocol, mu)
    lu = privacy_loss(protocol, mu, "A")
    ls = privacy_loss(protocol, mu, "B")
    bound = qpir_communication(scheme)
    out = {
        "protocol": protocol.descriptor(),
        "L_U": lu.to_dict(),
        "L_S": ls.to_dict(),
        "communication": bound,
        "checks": {
            "L_U_zero": abs(lu.total) <= 1e-10,
            "L_S_within_communication": ls.total <= bound + 1e-9,
        },
    }
    wx, wy = protocol.input_widths
    fits = protocol.width + 2 * max(wx, wy) <= MAX_QUBITS
    if ordering is None:
        ordering = fits
    if ordering:
        verdict = ordering_check(protocol, mu)
        out["ordering"] = {
            "holds": verdict.holds,
            "strategy_holds": verdict.strategy_holds,
            "values": verdict.values,
            "failures": verdict.failures,
        }
        out["checks"]["ordering"] = verdict.holds
    else:
        out["ordering"] = None
    return out
