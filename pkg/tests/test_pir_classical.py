import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcprivacy.pir_classical import (
    BudgetError,
    bit,
    clear_index_scheme,
    cube_scheme,
    cube_side,
    query_tv_distances,
    two_server_xor_scheme,
    verify_scheme,
)


def test_bit_order():
    assert [bit(0b1000, i, 4) for i in range(4)] == [1, 0, 0, 0]
    assert bit(0b0001, 3, 4) == 1


@pytest.mark.parametrize("n", range(1, 9))
def test_two_server_exhaustive(n):
    v = verify_scheme(two_server_xor_scheme(n))
    assert v.accepted and v.failures == 0
    assert v.tv_distance == [0.0, 0.0]
    assert v.cases == (1 << n) * n * (1 << n)


@pytest.mark.parametrize("n", [4, 9, 16])
def test_cube_exhaustive(n):
    v = verify_scheme(cube_scheme(n, 2))
    assert v.accepted
    assert v.tv_distance == [0.0] * 4
    assert v.communication == 4 * (2 * cube_side(n, 2) + 1)


def test_cube_three_dimensions():
    v = verify_scheme(cube_scheme(8, 3))
    assert v.accepted and len(v.tv_distance) == 8


@pytest.mark.parametrize("scheme", [two_server_xor_scheme(4), cube_scheme(4, 2)], ids=["two-server", "cube"])
def test_fast_path_matches_generic(scheme):
    fast = verify_scheme(scheme)
    slow = verify_scheme(scheme, generic=True)
    assert fast.failures == slow.failures == 0


def test_explicit_databases():
    s = two_server_xor_scheme(4)
    v = verify_scheme(s, databases=[0, 0b1010, 0b1111])
    assert v.accepted and v.cases == 3 * 4 * 16
    assert verify_scheme(s, databases=[5], generic=True).correct


def test_clear_index_is_rejected():
    v = verify_scheme(clear_index_scheme(4))
    assert v.correct and not v.private and not v.accepted
    assert v.tv_distance == [1.0]


def test_broken_reconstruction_detected():
    s = two_server_xor_scheme(3)
    from dataclasses import replace

    bad = replace(s, reconstruct=lambda i, r, answers: answers[0], xor_reconstruct=False)
    v = verify_scheme(bad)
    assert not v.correct and v.failures > 0


def test_cube_side():
    assert cube_side(16, 2) == 4
    assert cube_side(27, 3) == 3
    with pytest.raises(ValueError, match="perfect power"):
        cube_side(5, 2)


def test_budget():
    with pytest.raises(BudgetError):
        verify_scheme(two_server_xor_scheme(13))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.data())
def test_each_server_query_is_uniform(n, data):
    s = two_server_xor_scheme(n)
    i = data.draw(st.integers(0, n - 1))
    table = s.query_table()
    for srv in range(2):
        counts = np.bincount(table[i, :, srv], minlength=1 << n)
        assert (counts == 1).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**16 - 1), st.integers(0, 15), st.integers(0, 255))
def test_cube_reconstructs(x, i, r):
    s = cube_scheme(16, 2)
    answers = tuple(s.answer(srv, q, x) for srv, q in enumerate(s.queries(r, i)))
    assert s.reconstruct(i, r, answers) == bit(x, i, 16)


def test_tv_distances_shape():
    s = cube_scheme(4, 2)
    assert len(query_tv_distances(s)) == s.servers
    assert s.descriptor()["d"] == 2
