"""Round-structured two-party quantum protocols.

A protocol declares qubit registers with an initial owner (party 0 starts,
party 1 answers), an input-independent initial state, and a list of rounds.
In round ``k`` the sender applies gates chosen by its classical input and
then hands the round's message registers to the other party.  Honest runs
are pure; every analysis mode is assembled from the per-input runs because
the sender's input-controlled unitaries are block diagonal in the input
basis.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gates import Gate
from .linalg import MAX_QUBITS, CqState, PureState, RegisterLayout, WidthCapError, _split

P0, P1 = 0, 1
OUTPUT_TOL = 1e-9
HONESTY_TOL = 1e-9
# name of the reference register that purifies the inputs
PURIFIER = "Env"


class OwnershipError(ValueError):
    """A party touched or sent a register it does not hold."""


@dataclass(frozen=True, eq=False)
class Round:
    sender: int
    message: tuple[str, ...] = ()
    action: Callable[[int], Sequence[Gate]] | None = None
    label: str = ""


@dataclass(frozen=True, eq=False)
class Protocol:
    """A two-party protocol description.

    ``registers`` holds ``(name, width, initial_owner)``.  ``decoder`` maps
    ``(final_state, x, y)`` to a distribution over outputs.
    """

    name: str
    registers: tuple[tuple[str, int, int], ...]
    rounds: tuple[Round, ...]
    input_sizes: tuple[int, int]
    input_names: tuple[str, str] = ("X", "Y")
    party_names: tuple[str, str] = ("Alice", "Bob")
    initial_state: Callable[[], np.ndarray] | None = None
    decoder: Callable[[PureState, int, int], dict] | None = None
    params: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple((str(n), int(w), int(o)) for n, w, o in self.registers))
        if any(n == PURIFIER or n.startswith(PURIFIER + ".") for n, _, _ in self.registers):
            raise ValueError(f"register names starting with {PURIFIER!r} are reserved for the purifying reference")
        object.__setattr__(self, "rounds", tuple(self.rounds))
        self.layout  # validates names and the width cap
        clash = set(self.input_names) & set(self.layout.names)
        if clash:
            raise ValueError(f"input names {sorted(clash)} collide with register names")
        owners = {n: o for n, _, o in self.registers}
        schedule = [dict(owners)]
        for k, rnd in enumerate(self.rounds, start=1):
            if rnd.sender not in (P0, P1):
                raise ValueError(f"round {k} has invalid sender {rnd.sender}")
            for reg in rnd.message:
                if owners.get(reg) != rnd.sender:
                    raise OwnershipError(f"round {k}: party {rnd.sender} sends {reg!r} it does not hold")
                owners[reg] = 1 - rnd.sender
            schedule.append(dict(owners))
        object.__setattr__(self, "_schedule", tuple(schedule))

    @functools.cached_property
    def layout(self) -> RegisterLayout:
        return RegisterLayout(tuple((n, w) for n, w, _ in self.registers))

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def input_widths(self) -> tuple[int, int]:
        return tuple(max(0, math.ceil(math.log2(s))) for s in self.input_sizes)

    def owners(self, k: int) -> dict:
        """Register owners after round ``k`` (``k = 0``: initial)."""
        return dict(self._schedule[k])

    def held_by(self, party: int, k: int) -> tuple[str, ...]:
        own = self._schedule[k]
        return tuple(n for n in self.layout.names if own[n] == party)

    def message(self, k: int) -> tuple[str, ...]:
        return self.rounds[k - 1].message

    def communication(self) -> int:
        """Total qubits sent over all rounds."""
        return sum(self.layout.width_of(r) for rnd in self.rounds for r in rnd.message)

    def descriptor(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "parties": list(self.party_names),
            "inputs": {self.input_names[0]: self.input_sizes[0], self.input_names[1]: self.input_sizes[1]},
            "registers": [[n, w, self.party_names[o]] for n, w, o in self.registers],
            "rounds": [
                {"sender": self.party_names[r.sender], "message": list(r.message), "label": r.label}
                for r in self.rounds
            ],
            "width": self.width,
            "communication_qubits": self.communication(),
        }


@dataclass(frozen=True)
class Snapshot:
    round: int
    sender: int | None
    state: PureState
    owners: dict


@dataclass(frozen=True)
class Execution:
    final: PureState
    output: object
    probability: float
    snapshots: tuple[Snapshot, ...]


# -------------------------------------------------------------- execution


def initial_vector(protocol: Protocol) -> np.ndarray:
    if protocol.initial_state is None:
        v = np.zeros(protocol.layout.dim, dtype=np.complex128)
        v[0] = 1.0
        return v
    v = np.asarray(protocol.initial_state(), dtype=np.complex128).reshape(-1)
    if v.size != protocol.layout.dim:
        raise ValueError("initial state does not match the register layout")
    return v


def apply_gates(vector: np.ndarray, layout: RegisterLayout, gates: Sequence[Gate], allowed=None) -> np.ndarray:
    for g in gates:
        if allowed is not None and not set(g.registers) <= set(allowed):
            raise OwnershipError(f"gate on {g.registers} touches registers outside {sorted(allowed)}")
        if not getattr(g, "_checked", False):
            g.check(layout)
            object.__setattr__(g, "_checked", True)
        vector = g.apply(vector, layout)
    return vector


def _check_inputs(protocol: Protocol, x: int, y: int) -> None:
    nx, ny = protocol.input_sizes
    if not (0 <= x < nx and 0 <= y < ny):
        raise ValueError(f"inputs ({x}, {y}) outside alphabets of sizes ({nx}, {ny})")


def execute(protocol: Protocol, x: int, y: int, upto: int | None = None) -> list[PureState]:
    """States after rounds 0..upto for classical inputs (x, y)."""
    _check_inputs(protocol, x, y)
    upto = protocol.num_rounds if upto is None else upto
    if not 0 <= upto <= protocol.num_rounds:
        raise ValueError(f"round {upto} outside 0..{protocol.num_rounds}")
    layout = protocol.layout
    v = initial_vector(protocol)
    states = [PureState(v, layout)]
    inputs = (x, y)
    for k in range(1, upto + 1):
        rnd = protocol.rounds[k - 1]
        if rnd.action is not None:
            held = protocol.held_by(rnd.sender, k - 1)
            v = apply_gates(v, layout, rnd.action(inputs[rnd.sender]), allowed=held)
        states.append(PureState(v, layout))
    return states


def run_honest(protocol: Protocol, x: int, y: int) -> Execution:
    states = execute(protocol, x, y)
    snaps = tuple(
        Snapshot(k, None if k == 0 else protocol.rounds[k - 1].sender, s, protocol.owners(k))
        for k, s in enumerate(states)
    )
    output, prob = None, 1.0
    if protocol.decoder is not None:
        dist = protocol.decoder(states[-1], x, y)
        output, prob = max(dist.items(), key=lambda kv: kv[1])
        if prob < 1 - OUTPUT_TOL:
            raise RuntimeError(f"{protocol.name}: output is not deterministic (best probability {prob!r})")
    return Execution(states[-1], output, float(prob), snaps)


def measure_distribution(state: PureState, registers: Sequence[str]) -> dict:
    """Computational-basis outcome distribution of ``registers``."""
    layout = state.layout
    regs = [n for n in layout.names if n in set(registers)]
    probs = (np.abs(_split(state.vector, layout, regs)) ** 2).sum(axis=1)
    sub = layout.sub(regs)
    out = {}
    for idx in np.flatnonzero(probs > 1e-15):
        vals = sub.split_index(int(idx))
        out[tuple(vals[n] for n in regs)] = float(probs[idx])
    return out


def branches(state: PureState, tol: float = 1e-15):
    """Yield (register contents, probability) for every basis branch."""
    probs = np.abs(state.vector) ** 2
    for idx in np.flatnonzero(probs > tol):
        yield state.layout.split_index(int(idx)), float(probs[idx])


# ---------------------------------------------------------- analysis modes


@dataclass(frozen=True, eq=False)
class ClassicalInputs:
    mu: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class SuperposedB:
    """Party 1 runs on a superposition of its inputs, measured after ``measure_round``."""

    mu: np.ndarray | None = None
    measure_round: int | None = None


@dataclass(frozen=True, eq=False)
class SuperposedA:
    mu: np.ndarray | None = None
    measure_round: int | None = None


@dataclass(frozen=True, eq=False)
class Purified:
    mu: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class PurifiedTraced:
    """The purified state with one party's input register traced out.

    Tracing X (``drop=0``) turns the x half of the purifier into a classical
    label ``Env.x``; the y half stays quantum as ``Env.y``.  Every quantity on
    the side whose input was dropped is unchanged, at a fraction of the width.
    """

    mu: np.ndarray | None = None
    drop: int = 0


def input_distribution(protocol: Protocol, mu=None) -> np.ndarray:
    nx, ny = protocol.input_sizes
    if mu is None:
        return np.full((nx, ny), 1.0 / (nx * ny))
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (nx, ny):
        raise ValueError(f"distribution has shape {mu.shape}, expected {(nx, ny)}")
    if mu.min() < 0 or abs(mu.sum() - 1) > 1e-10:
        raise ValueError("distribution must be non-negative and sum to 1")
    return mu


def is_product(mu: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.abs(mu - np.outer(mu.sum(1), mu.sum(0))).max() <= tol)


@functools.lru_cache(maxsize=2)
def _states_at(protocol: Protocol, k: int, support: tuple) -> dict:
    return {(x, y): execute(protocol, x, y, upto=k)[-1] for x, y in support}


def _support(mu: np.ndarray) -> tuple:
    return tuple((int(x), int(y)) for x, y in zip(*np.nonzero(mu > 0)))


def round_state(protocol: Protocol, mode, k: int) -> CqState:
    """Joint state after round ``k`` under an analysis mode."""
    if not 0 <= k <= protocol.num_rounds:
        raise ValueError(f"round {k} outside 0..{protocol.num_rounds}")
    mu = input_distribution(protocol, mode.mu)
    xname, yname = protocol.input_names
    wx, wy = protocol.input_widths
    base = protocol.layout
    d = base.dim

    if isinstance(mode, (SuperposedA, SuperposedB)):
        if not is_product(mu):
            raise ValueError("superposed modes need a product input distribution")
        if mode.measure_round is not None and k > mode.measure_round:
            return round_state(protocol, ClassicalInputs(mu), k)
        states = _states_at(protocol, k, _support(mu))
        mx, my = mu.sum(1), mu.sum(0)
        if isinstance(mode, SuperposedB):
            qname, qw, qmarg, lname, lw, lmarg = yname, wy, my, xname, wx, mx
        else:
            qname, qw, qmarg, lname, lw, lmarg = xname, wx, mx, yname, wy, my
        layout = RegisterLayout(((qname, qw),) + base.registers)
        members = []
        for lab in np.flatnonzero(lmarg > 0):
            arr = np.zeros((1 << qw, d), dtype=np.complex128)
            for q in np.flatnonzero(qmarg > 0):
                key = (lab, q) if isinstance(mode, SuperposedB) else (q, lab)
                arr[q] = math.sqrt(qmarg[q]) * states[(int(key[0]), int(key[1]))].vector
            members.append(((int(lab),), float(lmarg[lab]), PureState(arr.reshape(-1), layout)))
        return CqState(RegisterLayout(((lname, lw),)), tuple(members))

    states = _states_at(protocol, k, _support(mu))
    if isinstance(mode, ClassicalInputs):
        members = tuple(((x, y), float(mu[x, y]), s) for (x, y), s in states.items())
        return CqState(RegisterLayout(((xname, wx), (yname, wy))), members)

    if isinstance(mode, Purified):
        total = protocol.width + 2 * (wx + wy)
        if total > MAX_QUBITS:
            raise WidthCapError(f"purified state needs {total} qubits, cap is {MAX_QUBITS}")
        layout = RegisterLayout(((PURIFIER, wx + wy), (xname, wx), (yname, wy)) + base.registers)
        arr = np.zeros((1 << (wx + wy), 1 << wx, 1 << wy, d), dtype=np.complex128)
        for (x, y), s in states.items():
            arr[(x << wy) | y, x, y] = math.sqrt(mu[x, y]) * s.vector
        return CqState(RegisterLayout(), (((), 1.0, PureState(arr.reshape(-1), layout)),))

    if isinstance(mode, PurifiedTraced):
        keep_w = wy if mode.drop == 0 else wx
        total = protocol.width + 2 * keep_w
        if total > MAX_QUBITS:
            raise WidthCapError(f"purified state needs {total} qubits, cap is {MAX_QUBITS}")
        lab_name, q_name = (PURIFIER + ".x", PURIFIER + ".y") if mode.drop == 0 else (PURIFIER + ".y", PURIFIER + ".x")
        kept_input = yname if mode.drop == 0 else xname
        joint = mu if mode.drop == 0 else mu.T
        layout = RegisterLayout(((q_name, keep_w), (kept_input, keep_w)) + base.registers)
        members = []
        for lab in np.flatnonzero(joint.sum(1) > 0):
            plab = float(joint[lab].sum())
            arr = np.zeros((1 << keep_w, 1 << keep_w, d), dtype=np.complex128)
            for q in np.flatnonzero(joint[lab] > 0):
                key = (int(lab), int(q)) if mode.drop == 0 else (int(q), int(lab))
                arr[q, q] = math.sqrt(joint[lab, q] / plab) * states[key].vector
            members.append(((int(lab),), plab, PureState(arr.reshape(-1), layout)))
        return CqState(RegisterLayout(((lab_name, wx if mode.drop == 0 else wy),)), tuple(members))

    raise TypeError(f"unknown analysis mode {mode!r}")


# ------------------------------------------------------ honesty checking


def _gram_small(m: np.ndarray) -> np.ndarray:
    return m.conj().T @ m if m.shape[0] > m.shape[1] else m @ m.conj().T


def _reduced_distance(p: PureState, q: PureState, keep) -> float:
    """Frobenius distance between the reductions of two pure states on ``keep``."""
    a = _split(p.vector, p.layout, keep)
    b = _split(q.vector, q.layout, keep)
    if a.shape[0] <= a.shape[1]:
        diff = a @ a.conj().T - b @ b.conj().T
        return float(np.linalg.norm(diff))
    aa, bb, ab = a.conj().T @ a, b.conj().T @ b, a.conj().T @ b
    sq = np.vdot(aa, aa).real + np.vdot(bb, bb).real - 2 * np.vdot(ab, ab).real
    return float(math.sqrt(max(sq, 0.0)))


def _spectrum(state: PureState, keep) -> np.ndarray:
    m = _split(state.vector, state.layout, keep)
    lam = np.linalg.eigvalsh(_gram_small(m))
    return np.sort(lam)[::-1]


def reduced_purity(state: PureState, keep) -> float:
    g = _gram_small(_split(state.vector, state.layout, keep))
    return float(np.vdot(g, g).real)


@dataclass(frozen=True)
class HonestyVerdict:
    accepted: bool
    failing_round: int | None
    failing_inputs: tuple | None
    rounds: tuple[dict, ...]


def verify_honest_execution(protocol: Protocol, deviated: Protocol, mu=None, tol: float = HONESTY_TOL) -> HonestyVerdict:
    """Compare a (possibly deviating) execution against the prescribed one.

    At every round the receiver's registers, message included, must carry
    the prescribed reduced state; the sender's side only has to agree up to a
    local operation, certified by equal reduced spectra.
    """
    if protocol.layout != deviated.layout or protocol.input_sizes != deviated.input_sizes:
        raise ValueError("protocols do not share register declarations")
    if protocol.num_rounds != deviated.num_rounds or any(
        protocol.owners(k) != deviated.owners(k) for k in range(protocol.num_rounds + 1)
    ):
        raise ValueError("protocols do not share the round and ownership structure")
    mu = input_distribution(protocol, mu)
    K = protocol.num_rounds
    rows = [
        {"round": k, "receiver_deviation": 0.0, "sender_spectrum_deviation": 0.0,
         "prescribed_purity": None, "observed_purity": None}
        for k in range(1, K + 1)
    ]
    failing = None
    for x, y in _support(mu):
        good = execute(protocol, x, y)
        bad = execute(deviated, x, y)
        for k in range(1, K + 1):
            sender = protocol.rounds[k - 1].sender
            recv_regs = protocol.held_by(1 - sender, k)
            send_regs = protocol.held_by(sender, k)
            r_dev = _reduced_distance(good[k], bad[k], recv_regs)
            s_good, s_bad = _spectrum(good[k], send_regs), _spectrum(bad[k], send_regs)
            size = max(s_good.size, s_bad.size)
            s_dev = float(np.abs(np.pad(s_good, (0, size - s_good.size)) - np.pad(s_bad, (0, size - s_bad.size))).max())
            row = rows[k - 1]
            if r_dev > row["receiver_deviation"] or row["prescribed_purity"] is None:
                row["prescribed_purity"] = reduced_purity(good[k], recv_regs)
                row["observed_purity"] = reduced_purity(bad[k], recv_regs)
            row["receiver_deviation"] = max(row["receiver_deviation"], r_dev)
            row["sender_spectrum_deviation"] = max(row["sender_spectrum_deviation"], s_dev)
            if (r_dev > tol or s_dev > tol) and (failing is None or k < failing[0]):
                failing = (k, (x, y))
    if failing is None:
        return HonestyVerdict(True, None, None, tuple(rows))
    return HonestyVerdict(False, failing[0], failing[1], tuple(rows))
