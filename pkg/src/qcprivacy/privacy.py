"""Round-by-round privacy measures: privacy loss, superposed and quantum information cost.

Odd rounds carry party 0's messages and count towards side ``"A"``; even
rounds carry party 1's and count towards side ``"B"``.  The conditioning
workspace is whatever the receiver holds right after the message arrives,
minus the message itself.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .linalg import conditional_mutual_information
from .protocol import (
    PURIFIER,
    ClassicalInputs,
    Protocol,
    Purified,
    PurifiedTraced,
    SuperposedA,
    SuperposedB,
    input_distribution,
    is_product,
    round_state,
)

TERM_TOL = 1e-9
ORDER_SLACK = 1e-9

QUANTITIES = ("L", "SIC", "QIC")


@dataclass
class PrivacyReport:
    protocol: str
    quantity: str
    side: str
    party: str
    mode: dict
    terms: dict
    total: float
    tolerance: float = TERM_TOL
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if abs(self.total - sum(self.terms.values())) > TERM_TOL:
            raise AssertionError("report total disagrees with its terms")
        bad = {k: v for k, v in self.terms.items() if v < -TERM_TOL}
        if bad:
            raise AssertionError(f"negative information terms {bad}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["terms"] = {str(k): v for k, v in self.terms.items()}
        return d


def _side_rounds(protocol: Protocol, side: str) -> list[int]:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', not {side!r}")
    parity = 1 if side == "A" else 0
    rounds = [k for k in range(1, protocol.num_rounds + 1) if k % 2 == parity]
    sender = 0 if side == "A" else 1
    for k in rounds:
        if protocol.rounds[k - 1].sender != sender:
            raise ValueError(f"{protocol.name}: round {k} is not sent by party {sender}; declare an empty round")
    return rounds


def _term(protocol: Protocol, mode, k: int, side: str, target) -> float:
    msg = set(protocol.message(k))
    if not msg or protocol.layout.sub(msg).width == 0:
        return 0.0
    receiver = 1 if side == "A" else 0
    workspace = set(protocol.held_by(receiver, k)) - msg
    own_input = protocol.input_names[receiver]
    state = round_state(protocol, mode, k)
    target = {target} if isinstance(target, str) else set(target)
    return conditional_mutual_information(state, msg, target, {own_input} | workspace)


def _report(protocol, quantity, side, mode_desc, terms, notes=()):
    party = protocol.party_names[0 if side == "A" else 1]
    return PrivacyReport(
        protocol=protocol.name,
        quantity=quantity,
        side=side,
        party=party,
        mode=mode_desc,
        terms=terms,
        total=float(sum(terms.values())),
        notes=list(notes) + list(protocol.notes),
    )


def privacy_loss(protocol: Protocol, mu=None, side: str = "A") -> PrivacyReport:
    """Information each message carries about the sender's classical input."""
    mu = input_distribution(protocol, mu)
    mode = ClassicalInputs(mu)
    target = protocol.input_names[0 if side == "A" else 1]
    terms = {k: _term(protocol, mode, k, side, target) for k in _side_rounds(protocol, side)}
    return _report(protocol, "L", side, {"mode": "classical-inputs"}, terms)


def superposed_ic(protocol: Protocol, mu=None, side: str = "A", measure_round: int | None = None) -> PrivacyReport:
    """Same round sums with the other party's input held in superposition.

    ``measure_round`` is the round after which the superposed input is
    measured in the computational basis (``None``: never, ``0``: before the
    protocol starts).
    """
    mu = input_distribution(protocol, mu)
    if not is_product(mu):
        raise ValueError("superposed information cost needs a product input distribution")
    mode = SuperposedB(mu, measure_round) if side == "A" else SuperposedA(mu, measure_round)
    target = protocol.input_names[0 if side == "A" else 1]
    terms = {k: _term(protocol, mode, k, side, target) for k in _side_rounds(protocol, side)}
    return _report(protocol, "SIC", side, {"mode": "superposed", "measure_round": measure_round}, terms)


def quantum_ic(protocol: Protocol, mu=None, side: str = "A", full: bool = False) -> PrivacyReport:
    """Information each message carries about the reference register purifying the inputs.

    By default the sender's own input register is traced out first (no term
    on that side involves it); ``full=True`` keeps the whole purification.
    """
    mu = input_distribution(protocol, mu)
    if full:
        mode, target = Purified(mu), PURIFIER
    else:
        mode, target = PurifiedTraced(mu, 0 if side == "A" else 1), (PURIFIER + ".x", PURIFIER + ".y")
    terms = {k: _term(protocol, mode, k, side, target) for k in _side_rounds(protocol, side)}
    notes = []
    if protocol.initial_state is not None:
        notes.append("prior entanglement: the reference register purifies the inputs only; the shared state is part of the workspaces")
    return _report(protocol, "QIC", side, {"mode": "purified"}, terms, notes)


def measurement_rounds(protocol: Protocol) -> list:
    return list(range(protocol.num_rounds + 1)) + [None]


@dataclass
class OrderingVerdict:
    """``holds`` compares L and QIC with SIC at every fixed measurement round;
    ``strategy_holds`` compares them with the best round (the largest SIC)."""

    holds: bool
    values: dict
    failures: list
    strategy_holds: bool = True
    strategy_failures: list = field(default_factory=list)


def ordering_check(protocol: Protocol, mu=None, measure_rounds=None, sides=("A", "B")) -> OrderingVerdict:
    """Check L <= SIC <= QIC on both sides for every SIC measurement round."""
    mu = input_distribution(protocol, mu)
    rounds = measurement_rounds(protocol) if measure_rounds is None else list(measure_rounds)
    values, failures, strategy = {}, [], []
    for side in sides:
        loss = privacy_loss(protocol, mu, side).total
        qic = quantum_ic(protocol, mu, side).total
        sic = {m: superposed_ic(protocol, mu, side, m).total for m in rounds}
        best = max(sic.values())
        values[side] = {"L": loss, "QIC": qic, "SIC": {str(m): v for m, v in sic.items()}, "SIC_best": best}
        for m, s in sic.items():
            if loss > s + ORDER_SLACK:
                failures.append(f"L_{side}={loss:.12g} > SIC_{side}(measure={m})={s:.12g}")
            if s + ORDER_SLACK > qic + 2 * ORDER_SLACK:
                failures.append(f"SIC_{side}(measure={m})={s:.12g} > QIC_{side}={qic:.12g}")
        if loss > best + ORDER_SLACK or best + ORDER_SLACK > qic + 2 * ORDER_SLACK:
            strategy.append(f"{side}: L={loss:.12g}, best SIC={best:.12g}, QIC={qic:.12g}")
    return OrderingVerdict(not failures, values, failures, not strategy, strategy)
