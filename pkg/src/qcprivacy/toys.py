"""Small protocols used to exercise the framework."""
from __future__ import annotations

import math

import numpy as np

from .gates import Prepare, cnot, pauli_x
from .protocol import P0, P1, Protocol, Round

ECHO_VARIANTS = ("honest", "copy", "local")


def echo_protocol(bob: str = "honest") -> Protocol:
    """Alice sends half of (|00> + |11>)/sqrt2 on (Q, R); Bob sends R back.

    ``bob="copy"`` CNOT-copies R into Bob's workspace W before returning it;
    ``bob="local"`` flips W, touching nothing else.
    """
    if bob not in ECHO_VARIANTS:
        raise ValueError(f"unknown echo variant {bob!r}")
    bell = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)
    prep = Prepare(("Q", "R"), bell)
    bob_gates = {"honest": (), "copy": (cnot("R", "W"),), "local": (pauli_x("W"),)}[bob]
    return Protocol(
        name=f"echo-{bob}",
        registers=(("Q", 1, P0), ("R", 1, P0), ("W", 1, P1)),
        rounds=(
            Round(P0, ("R",), lambda x: (prep,), "Alice prepares the pair and sends R"),
            Round(P1, ("R",), lambda y: bob_gates, "Bob returns R"),
        ),
        input_sizes=(1, 1),
        params={"bob": bob},
    )


def fixed_message_protocol(input_bits: int = 1) -> Protocol:
    """Two rounds whose message is always |0>, whatever the inputs."""
    size = 1 << input_bits
    return Protocol(
        name="fixed-message",
        registers=(("M", 1, P0),),
        rounds=(Round(P0, ("M",)), Round(P1, ("M",))),
        input_sizes=(size, size),
        params={"input_bits": input_bits},
    )
