import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcprivacy.gates import Permutation, Prepare, Unitary
from qcprivacy.inner_product import build_ip_protocol, gram_entropy
from qcprivacy.privacy import (
    PrivacyReport,
    measurement_rounds,
    ordering_check,
    privacy_loss,
    quantum_ic,
    superposed_ic,
)
from qcprivacy.protocol import P0, P1, Protocol, Round
from qcprivacy.toys import fixed_message_protocol

FAST = settings(max_examples=15, deadline=None)


def entropy_bits(rho):
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-12]
    return float(-(w * np.log2(w)).sum())


def phi(n, x):
    """|phi_x> = 2^-n/2 sum_r |r>|r.x> on (Q, R), built by hand."""
    v = np.zeros(2 << n)
    for r in range(1 << n):
        v[2 * r + bin(r & x).count("1") % 2] = 1
    return v / math.sqrt(1 << n)


def sic_b_oracle(n):
    """Dense SIC_B with Alice's X superposed and never measured, Y a classical label.

    I(QR : Y | X) = S(XQR) + S(XY) - S(X) - S(XQRY), each per-y state pure.
    """
    size = 1 << n
    psis = []
    for y in range(size):
        psi = np.zeros((size, 2 * size))
        for x in range(size):
            psi[x] = phi(n, x).reshape(size, 2)[np.arange(size) ^ y].reshape(-1) / math.sqrt(size)
        psis.append(psi)
    rho_x = [p @ p.T for p in psis]
    joint = sum(np.outer(p.reshape(-1), p.reshape(-1)) for p in psis) / size
    s_xqr = entropy_bits(joint)
    s_xy = n + np.mean([entropy_bits(r) for r in rho_x])
    s_x = entropy_bits(sum(rho_x) / size)
    return s_xqr + s_xy - s_x - n


# ----------------------------------------------------------- privacy loss


@pytest.mark.parametrize("n", [1, 2, 3])
def test_loss_b_closed_form(n):
    assert abs(privacy_loss(build_ip_protocol(n), None, "B").total - (1 - 2.0**-n)) < 1e-9


def test_loss_a_n1():
    assert abs(privacy_loss(build_ip_protocol(1), None, "A").total - 0.8112781244591328) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_loss_a_matches_gram(n):
    assert abs(privacy_loss(build_ip_protocol(n), None, "A").total - gram_entropy(n)) < 1e-9


def test_fixed_message_leaks_nothing():
    p = fixed_message_protocol(2)
    for side in ("A", "B"):
        assert abs(privacy_loss(p, None, side).total) < 1e-12
        assert abs(quantum_ic(p, None, side).total) < 1e-12


def test_side_validation():
    with pytest.raises(ValueError):
        privacy_loss(build_ip_protocol(1), None, "C")


def test_report_invariants():
    rep = privacy_loss(build_ip_protocol(2), None, "A")
    assert abs(rep.total - sum(rep.terms.values())) < 1e-12
    assert list(rep.terms) == [1]
    d = rep.to_dict()
    assert d["quantity"] == "L" and d["terms"] == {"1": rep.total}
    with pytest.raises(AssertionError):
        PrivacyReport("p", "L", "A", "Alice", {}, {1: -0.1}, -0.1)
    with pytest.raises(AssertionError):
        PrivacyReport("p", "L", "A", "Alice", {}, {1: 0.5}, 0.7)


# --------------------------------------------------------------- SIC, QIC


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sic_measured_at_once_is_loss(n):
    p = build_ip_protocol(n)
    for side in ("A", "B"):
        assert abs(superposed_ic(p, None, side, 0).total - privacy_loss(p, None, side).total) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sic_a_equals_loss_a(n):
    p = build_ip_protocol(n)
    assert abs(superposed_ic(p, None, "A").total - privacy_loss(p, None, "A").total) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sic_b_dense_oracle(n):
    assert abs(superposed_ic(build_ip_protocol(n), None, "B").total - sic_b_oracle(n)) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_qic_a_equals_loss_a(n):
    p = build_ip_protocol(n)
    assert abs(quantum_ic(p, None, "A").total - gram_entropy(n)) < 1e-9


@pytest.mark.parametrize("n", [1, 2])
def test_traced_purification_matches_full(n):
    p = build_ip_protocol(n)
    for side in ("A", "B"):
        assert abs(quantum_ic(p, None, side).total - quantum_ic(p, None, side, full=True).total) < 1e-9


def test_sic_rejects_correlated_inputs():
    with pytest.raises(ValueError):
        superposed_ic(build_ip_protocol(1), np.diag([0.5, 0.5]), "B")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ordering_inner_product(n):
    v = ordering_check(build_ip_protocol(n))
    assert v.holds, v.failures
    assert v.strategy_holds
    assert set(v.values) == {"A", "B"}


def test_measurement_rounds():
    assert measurement_rounds(build_ip_protocol(1)) == [0, 1, 2, None]


# ------------------------------------------ invariance under local unitaries


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def ip_with_workspaces(n, rng=None):
    """Inner product with one-qubit workspaces; optional random local unitaries on each."""
    size = 1 << n
    base = build_ip_protocol(n)
    first = base.rounds[0].action
    second = base.rounds[1].action
    ua = random_unitary(rng, 2) if rng is not None else None
    ub = random_unitary(rng, 2) if rng is not None else None
    # a Bob-side copy of Q's lowest bit into W_B, then an arbitrary unitary there
    copy = Permutation(("Q", "WB"), np.array([(q << 1) | (w ^ (q & 1)) for q in range(size) for w in range(2)]))

    def alice(x):
        return tuple(first(x)) + ((Unitary(("WA",), ua),) if ua is not None else ())

    def bob(y):
        gates = (copy,) + tuple(second(y))
        return gates + ((Unitary(("WB",), ub),) if ub is not None else ())

    return Protocol(
        "ip-workspaces",
        (("Q", n, P0), ("R", 1, P0), ("WA", 1, P0), ("WB", 1, P1)),
        (Round(P0, ("Q", "R"), alice), Round(P1, ("Q", "R"), bob)),
        (size, size),
    )


@FAST
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_loss_invariant_under_local_unitaries(seed, n):
    rng = np.random.default_rng(seed)
    plain = ip_with_workspaces(n)
    rotated = ip_with_workspaces(n, rng)
    for side in ("A", "B"):
        a = privacy_loss(plain, None, side).terms
        b = privacy_loss(rotated, None, side).terms
        assert a.keys() == b.keys()
        for k in a:
            assert abs(a[k] - b[k]) < 1e-9


def test_extra_message_raises_bob_loss():
    # Bob also sends W_B holding the low bit of y: leakage grows, unlike a local rotation
    n = 2
    base = build_ip_protocol(n)
    write = Permutation(("WB",), np.array([1, 0]))
    p = Protocol(
        "ip-leaky",
        (("Q", n, P0), ("R", 1, P0), ("WB", 1, P1)),
        (base.rounds[0], Round(P1, ("Q", "R", "WB"), lambda y: tuple(base.rounds[1].action(y)) + ((write,) if y & 1 else ()))),
        (4, 4),
    )
    assert privacy_loss(p, None, "B").total > privacy_loss(base, None, "B").total + 0.1


def test_prepared_workspace_entanglement_is_local():
    # Alice entangles her own workspace with nothing Bob sees: L_A unchanged
    n = 1
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    base = build_ip_protocol(n)
    p = Protocol(
        "ip-private-pair",
        (("Q", n, P0), ("R", 1, P0), ("WA", 1, P0), ("WA2", 1, P0)),
        (Round(P0, ("Q", "R"), lambda x: (Prepare(("WA", "WA2"), bell),) + tuple(base.rounds[0].action(x))), base.rounds[1]),
        (2, 2),
    )
    assert abs(privacy_loss(p, None, "A").total - privacy_loss(base, None, "A").total) < 1e-12
