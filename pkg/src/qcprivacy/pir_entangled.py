"""PIR with prior entanglement on a database of n = 2^l bits.

Server and user share maximally correlated pairs (R_k, R'_k) of 2^(l-k)
qubits each.  In iteration k the server folds the inner products of R_k with
the two halves of the previous level into (Q0, Q1), the user flips the phase
of Q_{i_k}, and both sides Hadamard their half of pair k.  The server finally
sends R_l and the user XORs slices of her measured R' registers.

Bit strings are Python strings of '0'/'1'; the database and R contents are
integers read most-significant-bit first.  The index i is 0-based here, its
binary digits i_1..i_l (most significant first) choose halves.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .gates import Permutation, hadamard, pauli_z
from .linalg import PureState, fidelity, partial_trace, trace_distance
from .privacy import ordering_check, privacy_loss
from .protocol import P0, P1, Protocol, Round, apply_gates, branches, execute, input_distribution

USER, SERVER = P0, P1
MAX_ELL = 3
MAX_ELL_ENSEMBLE = 2


# ---------------------------------------------------------------- slicing


def slice(z: str, path) -> str:  # noqa: A001 - the natural name for the operation
    """z[j_1..j_k]: repeatedly keep the first (0) or second (1) half."""
    s = len(z).bit_length() - 1
    if len(z) == 0 or 1 << s != len(z):
        raise ValueError(f"length {len(z)} is not a power of two")
    path = list(path)
    if len(path) > s:
        raise ValueError(f"path of length {len(path)} is too long for a string of length {len(z)}")
    for j in path:
        if j not in (0, 1):
            raise ValueError("path entries must be 0 or 1")
        half = len(z) // 2
        z = z[:half] if j == 0 else z[half:]
    return z


def to_bits(value: int, length: int) -> str:
    return format(value, f"0{length}b") if length else ""


def index_bits(i: int, ell: int) -> tuple[int, ...]:
    return tuple((i >> (ell - 1 - k)) & 1 for k in range(ell))


def _width(ell: int, k: int) -> int:
    return 1 << (ell - k)


def _halves(value: int, width: int) -> tuple[int, int]:
    half = width // 2
    return value >> half, value & ((1 << half) - 1)


def _dot(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


# ------------------------------------------------------------ unitaries


def _check_ell(ell: int, hi: int = MAX_ELL) -> None:
    if not isinstance(ell, (int, np.integer)) or not 1 <= ell <= hi:
        raise ValueError(f"l must be an integer in 1..{hi}, got {ell!r}")


def register_names(ell: int):
    return [f"R{k}" for k in range(1, ell + 1)], [f"R'{k}" for k in range(1, ell + 1)]


@functools.lru_cache(maxsize=None)
def v_gate(ell: int, k: int, x: int | None = None) -> Permutation:
    """V_k as a permutation; V_1 is controlled by the database x."""
    rs, _ = register_names(ell)
    wz = _width(ell, k)
    if k == 1:
        y0, y1 = _halves(x, 2 * wz)
        dz = 1 << wz
        idx = np.arange(dz * 4)
        z, a, b = idx >> 2, (idx >> 1) & 1, idx & 1
        par = np.array([[_dot(zz, y0), _dot(zz, y1)] for zz in range(dz)], dtype=np.int64)
        images = (z << 2) | ((a ^ par[z, 0]) << 1) | (b ^ par[z, 1])
        return Permutation((rs[0], "Q0", "Q1"), images)
    wy = 2 * wz
    idx = np.arange(1 << (wy + wz + 2))
    y, z = idx >> (wz + 2), (idx >> 2) & ((1 << wz) - 1)
    a, b = (idx >> 1) & 1, idx & 1
    y0, y1 = y >> wz, y & ((1 << wz) - 1)
    pa = np.array([_dot(int(u), int(v)) for u, v in zip(z, y0)], dtype=np.int64)
    pb = np.array([_dot(int(u), int(v)) for u, v in zip(z, y1)], dtype=np.int64)
    images = (y << (wz + 2)) | (z << 2) | ((a ^ pa) << 1) | (b ^ pb)
    return Permutation((rs[k - 2], rs[k - 1], "Q0", "Q1"), images)


@functools.lru_cache(maxsize=None)
def _h(name: str, width: int):
    return hadamard(name, width)


@functools.lru_cache(maxsize=None)
def _z(name: str):
    return pauli_z(name)


def _server_finish(ell: int, k: int, x: int) -> list:
    rs, _ = register_names(ell)
    return [v_gate(ell, k, x if k == 1 else None), _h(rs[k - 1], _width(ell, k))]


def _user_finish(ell: int, k: int) -> list:
    _, rps = register_names(ell)
    return [_h(rps[k - 1], _width(ell, k))]


def _initial_state(ell: int) -> np.ndarray:
    v = np.ones(1, dtype=np.complex128)
    for k in range(1, ell + 1):
        d = 1 << _width(ell, k)
        phi = np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)
        v = np.kron(v, phi)
    q = np.zeros(4, dtype=np.complex128)
    q[0] = 1.0
    return np.kron(v, q)


# ------------------------------------------------------------ protocol


def ppir_decode(a: str, bs, i_bits) -> int:
    """XOR of a^l, b^l and the slices b^k[i_{k+1}..i_l] for k < l."""
    ell = len(bs)
    if len(a) != 1:
        raise ValueError("a^l must be a single bit")
    if len(i_bits) != ell:
        raise ValueError("index has the wrong number of bits")
    acc = int(a)
    for k, b in enumerate(bs, start=1):
        if len(b) != _width(ell, k):
            raise ValueError(f"b^{k} must have length {_width(ell, k)}, got {len(b)}")
        acc ^= int(slice(b, i_bits[k:]))
    return acc


def build_ppir(ell: int, user_z=None) -> Protocol:
    """``user_z(i, k)`` overrides which of Q0/Q1 the user flips (detector checks only)."""
    _check_ell(ell)
    rs, rps = register_names(ell)
    registers = []
    for k in range(1, ell + 1):
        registers += [(rs[k - 1], _width(ell, k), SERVER), (rps[k - 1], _width(ell, k), USER)]
    registers += [("Q0", 1, SERVER), ("Q1", 1, SERVER)]
    choose = user_z or (lambda i, k: index_bits(i, ell)[k - 1])

    rounds = [Round(USER, (), None, "empty: the server speaks first")]
    for k in range(1, ell + 1):

        def server(x, k=k):
            return (_server_finish(ell, k - 1, x) if k > 1 else []) + [v_gate(ell, k, x if k == 1 else None)]

        def user(i, k=k):
            return (_user_finish(ell, k - 1) if k > 1 else []) + [_z(f"Q{choose(i, k)}")]

        rounds.append(Round(SERVER, ("Q0", "Q1"), server, f"server applies V_{k} and sends Q0 Q1"))
        rounds.append(Round(USER, ("Q0", "Q1"), user, f"user flips the phase of Q_i{k} and returns Q0 Q1"))
    rounds.append(Round(SERVER, (rs[-1],), lambda x: _server_finish(ell, ell, x), f"server uncomputes and sends {rs[-1]}"))

    def decode(state, i, x):
        v = apply_gates(state.vector, state.layout, _user_finish(ell, ell))
        bits = index_bits(i, ell)
        out = {}
        for vals, p in branches(PureState(v, state.layout)):
            a = to_bits(vals[rs[-1]], 1)
            bs = [to_bits(vals[r], _width(ell, k)) for k, r in enumerate(rps, start=1)]
            b = ppir_decode(a, bs, bits)
            out[b] = out.get(b, 0.0) + p
        return out

    return Protocol(
        name="ppir",
        registers=tuple(registers),
        rounds=tuple(rounds),
        input_sizes=(1 << ell, 1 << (1 << ell)),
        input_names=("I", "D"),
        party_names=("User", "Server"),
        initial_state=lambda: _initial_state(ell),
        decoder=decode,
        params={"ell": ell, "n": 1 << ell},
        notes=("shared entangled pairs are part of the initial workspaces",),
    )


def database_bit(x: int, i: int, ell: int) -> int:
    n = 1 << ell
    return (x >> (n - 1 - i)) & 1


# --------------------------------------------------------------- checks


def lemma_state(ell: int, x: int, i: int, k: int) -> np.ndarray:
    """The closed-form global state at the end of iteration k."""
    _check_ell(ell)
    if not 1 <= k <= ell:
        raise ValueError(f"k must lie in 1..{ell}")
    p = build_ppir(ell)
    layout = p.layout
    rs, rps = register_names(ell)
    bits = index_bits(i, ell)
    n = 1 << ell
    v = np.zeros(layout.dim, dtype=np.complex128)
    ys = [range(1 << _width(ell, j)) for j in range(1, k + 1)]
    rest = [range(1 << _width(ell, j)) for j in range(k + 1, ell + 1)]
    for chosen in itertools.product(*ys):
        vals = {"Q0": 0, "Q1": 0}
        prev, prev_w = x, n
        for j, y in enumerate(chosen, start=1):
            h0, h1 = _halves(prev, prev_w)
            vals[rs[j - 1]] = y
            vals[rps[j - 1]] = (h1 if bits[j - 1] else h0) ^ y
            prev, prev_w = y, _width(ell, j)
        for zs in itertools.product(*rest):
            for j, z in enumerate(zs, start=k + 1):
                vals[rs[j - 1]] = vals[rps[j - 1]] = z
            v[layout.basis_index(vals)] += 1.0
    return v / np.linalg.norm(v)


def lemma_state_check(ell: int, x: int, i: int, k: int) -> float:
    """Fidelity between the simulated state after iteration k and its closed form."""
    p = build_ppir(ell)
    state = execute(p, i, x, upto=2 * k + 1)[-1]
    v = apply_gates(state.vector, p.layout, _server_finish(ell, k, x) + _user_finish(ell, k))
    return fidelity(PureState(v, p.layout), PureState(lemma_state(ell, x, i, k), p.layout))


def _mixture_form(ell: int, x: int, k: int, held) -> np.ndarray:
    """Server view after the user's k-th reply: dephased over y^1..y^(k-1), z, and the untouched pairs."""
    p = build_ppir(ell)
    sub = p.layout.sub(held)
    rs, _ = register_names(ell)
    n = 1 << ell
    diag = np.zeros(sub.dim)
    ranges = [range(1 << _width(ell, j)) for j in range(1, ell + 1)]
    for contents in itertools.product(*ranges):
        prev, prev_w = (x, n) if k == 1 else (contents[k - 2], _width(ell, k - 1))
        h0, h1 = _halves(prev, prev_w)
        z = contents[k - 1]
        vals = {r: c for r, c in zip(rs, contents)}
        vals["Q0"], vals["Q1"] = _dot(z, h0), _dot(z, h1)
        diag[sub.basis_index(vals)] += 1.0
    return np.diag(diag / diag.sum())


def ppir_user_privacy(ell: int, x: int, user_z=None) -> dict:
    """Per iteration k: max trace distance over index pairs of the server's view, and its gap to the mixture form."""
    p = build_ppir(ell, user_z)
    runs = [execute(p, i, x) for i in range(1 << ell)]
    out = {}
    for k in range(1, ell + 1):
        rnd = 2 * k + 1
        held = p.held_by(SERVER, rnd)
        views = [partial_trace(run[rnd], held) for run in runs]
        dist = max((trace_distance(a, b) for a, b in itertools.combinations(views, 2)), default=0.0)
        mix = _mixture_form(ell, x, k, held)
        gap = max(float(np.abs(v.matrix - mix).max()) for v in views)
        out[k] = {"round": rnd, "registers": list(held), "distance": dist, "mixture_gap": gap}
    return out


def ppir_privacy_report(ell: int, mu=None, ordering: bool | None = None) -> dict:
    _check_ell(ell, MAX_ELL_ENSEMBLE)
    p = build_ppir(ell)
    mu = input_distribution(p, mu)
    lu = privacy_loss(p, mu, "A")
    ls = privacy_loss(p, mu, "B")
    bound = 2 * ell + 1
    out = {
        "protocol": p.descriptor(),
        "L_U": lu.to_dict(),
        "L_S": ls.to_dict(),
        "received_by_user": bound,
        "checks": {"L_U_zero": abs(lu.total) <= 1e-10, "L_S_within_received": ls.total <= bound + 1e-9},
        "notes": [
            "the reference register purifies the inputs only; the shared pairs stay in the workspaces, "
            "which extends the quantum information cost beyond protocols without prior entanglement"
        ],
    }
    if ordering is None:
        ordering = ell == 1
    if ordering:
        verdict = ordering_check(p, mu)
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
