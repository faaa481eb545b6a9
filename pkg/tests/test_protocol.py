import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcprivacy.gates import Permutation, Prepare, Unitary, UnitarityError, cnot, hadamard, pauli_x
from qcprivacy.inner_product import analytic_m1, build_ip_protocol
from qcprivacy.linalg import PureState, RegisterLayout, WidthCapError, partial_trace, purity
from qcprivacy.protocol import (
    P0,
    P1,
    ClassicalInputs,
    OwnershipError,
    Protocol,
    Purified,
    PurifiedTraced,
    Round,
    SuperposedB,
    execute,
    round_state,
    run_honest,
    verify_honest_execution,
)
from qcprivacy.toys import echo_protocol, fixed_message_protocol

FAST = settings(max_examples=25, deadline=None)


# ------------------------------------------------------------------ gates


def test_gate_unitarity_checked():
    lay = RegisterLayout.of(("q", 1))
    v = np.array([1, 0], dtype=complex)
    with pytest.raises(UnitarityError):
        Unitary(("q",), np.array([[1, 1], [0, 1]])).check(lay)
    with pytest.raises(UnitarityError):
        Permutation(("q",), np.array([0, 0])).check(lay)
    with pytest.raises(UnitarityError):
        Prepare(("q",), np.array([1.0, 1.0])).check(lay)
    hadamard("q", 1).check(lay)
    assert np.allclose(hadamard("q", 1).apply(v, lay), [1 / math.sqrt(2)] * 2)


def test_gates_act_on_named_registers():
    lay = RegisterLayout.of(("a", 1), ("b", 2), ("c", 1))
    v = PureState.basis(lay, {"a": 1, "b": 2, "c": 0}).vector
    out = cnot("a", "c").apply(v, lay)
    assert lay.split_index(int(np.flatnonzero(out)[0])) == {"a": 1, "b": 2, "c": 1}
    out = pauli_x("a").apply(out, lay)
    assert lay.split_index(int(np.flatnonzero(out)[0])) == {"a": 0, "b": 2, "c": 1}


def test_prepare_requires_zero():
    lay = RegisterLayout.of(("q", 1))
    with pytest.raises(UnitarityError):
        Prepare(("q",), np.array([0, 1.0])).apply(np.array([0, 1.0 + 0j]), lay)


# --------------------------------------------------------------- execution


@pytest.mark.parametrize("n,x,y,out", [(1, 1, 1, 1), (4, 0b1011, 0b1101, 0), (2, 3, 3, 0), (3, 5, 1, 1)])
def test_ip_outputs(n, x, y, out):
    e = run_honest(build_ip_protocol(n), x, y)
    assert e.output == out
    assert e.probability >= 1 - 1e-9


def test_echo_returns_pure_pair():
    e = run_honest(echo_protocol(), 0, 0)
    assert abs(purity(partial_trace(e.final, {"Q", "R"})) - 1) < 1e-10


def test_ownership_violation_at_declaration():
    with pytest.raises(OwnershipError):
        Protocol("bad", (("M", 1, P0),), (Round(P1, ("M",)),), (2, 2))


def test_ownership_violation_at_execution():
    p = Protocol("bad", (("M", 1, P0), ("W", 1, P1)), (Round(P0, ("M",), lambda x: (pauli_x("W"),)),), (2, 2))
    with pytest.raises(OwnershipError):
        execute(p, 0, 0)


def test_reserved_and_clashing_names():
    with pytest.raises(ValueError):
        Protocol("bad", (("Env", 1, P0),), (), (2, 2))
    with pytest.raises(ValueError):
        Protocol("bad", (("Env.x", 1, P0),), (), (2, 2))
    with pytest.raises(ValueError):
        Protocol("bad", (("X", 1, P0),), (), (2, 2))


def test_non_unitary_round_rejected():
    p = Protocol("bad", (("M", 1, P0),), (Round(P0, ("M",), lambda x: (Unitary(("M",), np.diag([1.0, 0.5])),)),), (2, 2))
    with pytest.raises(UnitarityError):
        execute(p, 0, 0)


def test_input_range_checked():
    with pytest.raises(ValueError):
        execute(build_ip_protocol(1), 2, 0)


def test_width_cap_on_declaration():
    with pytest.raises(WidthCapError):
        Protocol("big", (("A", 11, P0), ("B", 10, P1)), (), (2, 2))


@FAST
@given(st.integers(1, 3), st.data())
def test_snapshots_normalized(n, data):
    p = build_ip_protocol(n)
    x = data.draw(st.integers(0, (1 << n) - 1))
    y = data.draw(st.integers(0, (1 << n) - 1))
    for snap in run_honest(p, x, y).snapshots:
        assert abs(np.vdot(snap.state.vector, snap.state.vector) - 1) < 1e-10


# ---------------------------------------------------------- analysis modes


def _rng_mu(seed, shape):
    w = np.random.default_rng(seed).random(shape)
    return w / w.sum()


@FAST
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_classical_marginal_is_mu(seed, k):
    p = build_ip_protocol(2)
    mu = _rng_mu(seed, (4, 4))
    cq = round_state(p, ClassicalInputs(mu), k)
    got = np.zeros((4, 4))
    for (x, y), prob, _ in cq.members:
        got[x, y] = prob
    assert np.array_equal(got, mu)


def test_first_round_marginal_is_m1():
    for n in (1, 2, 3):
        cq = round_state(build_ip_protocol(n), ClassicalInputs(), 1)
        m = partial_trace(cq.assemble(), {"Q", "R"}).matrix
        assert np.abs(m - analytic_m1(n).matrix).max() < 1e-10


@pytest.mark.parametrize("k", [0, 1, 2])
def test_purified_marginal_matches_classical(k):
    p = build_ip_protocol(2)
    mu = _rng_mu(7, (4, 4))
    keep = {"X", "Y", "Q", "R"}
    a = partial_trace(round_state(p, Purified(mu), k).assemble(), keep).matrix
    b = round_state(p, ClassicalInputs(mu), k).assemble().matrix
    assert np.abs(a - b).max() < 1e-10


def test_purified_traced_marginal_matches():
    p = build_ip_protocol(2)
    mu = _rng_mu(3, (4, 4))
    full = round_state(p, Purified(mu), 1).assemble()
    traced = round_state(p, PurifiedTraced(mu), 1).assemble()
    a = partial_trace(full, {"Y", "Q", "R"}).matrix
    b = partial_trace(traced, {"Y", "Q", "R"}).matrix
    assert np.abs(a - b).max() < 1e-10


def test_superposed_needs_product():
    mu = np.diag([0.5, 0.5])
    with pytest.raises(ValueError):
        round_state(build_ip_protocol(1), SuperposedB(mu), 1)


def test_superposed_measured_is_classical():
    p = build_ip_protocol(2)
    a = round_state(p, SuperposedB(None, measure_round=0), 2).assemble().matrix
    b = round_state(p, ClassicalInputs(), 2).assemble().matrix
    assert np.abs(a - b).max() < 1e-12


def test_mode_mismatch():
    with pytest.raises(ValueError):
        round_state(build_ip_protocol(1), ClassicalInputs(np.ones((3, 3)) / 9), 1)
    with pytest.raises(ValueError):
        round_state(build_ip_protocol(1), ClassicalInputs(), 3)


def test_purified_width_cap():
    p = build_ip_protocol(6)
    with pytest.raises(WidthCapError):
        round_state(p, Purified(), 1)


# ---------------------------------------------------------------- honesty


def test_honest_ip_accepted():
    p = build_ip_protocol(2)
    assert verify_honest_execution(p, p).accepted


def test_echo_copy_rejected():
    v = verify_honest_execution(echo_protocol(), echo_protocol("copy"))
    assert not v.accepted
    assert v.failing_round == 2
    last = v.rounds[-1]
    assert abs(last["prescribed_purity"] - 1.0) < 1e-9
    assert abs(last["observed_purity"] - 0.5) < 1e-9


def test_local_workspace_unitary_accepted():
    assert verify_honest_execution(echo_protocol(), echo_protocol("local")).accepted


def test_incompatible_declarations():
    with pytest.raises(ValueError):
        verify_honest_execution(build_ip_protocol(1), build_ip_protocol(2))


def test_fixed_message_protocol_runs():
    e = run_honest(fixed_message_protocol(2), 3, 1)
    assert e.final.vector[0] == 1
