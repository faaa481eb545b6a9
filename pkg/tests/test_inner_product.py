import math

import numpy as np
import pytest

from qcprivacy.inner_product import (
    analytic_m1,
    build_ip_protocol,
    build_ip_tradeoff,
    claimed_values,
    first_message_ensemble,
    gram_entropy,
    gram_spectrum_oracle,
    inner_product,
    m1_constant_row,
    m1_entropy,
    oracle_values,
    theoretical_ip_table,
)
from qcprivacy.linalg import von_neumann_entropy
from qcprivacy.privacy import privacy_loss
from qcprivacy.protocol import execute, run_honest


def test_inner_product_function():
    assert inner_product(0b1011, 0b1101) == 0
    assert inner_product(0b111, 0b101) == 0
    assert inner_product(1, 1) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exhaustive_correctness(n):
    p = build_ip_protocol(n)
    for x in range(1 << n):
        for y in range(1 << n):
            e = run_honest(p, x, y)
            assert e.output == inner_product(x, y) and e.probability > 1 - 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_state_after_bob(n):
    # Bob's shift leaves 2^-n/2 sum_r |r xor y>|r.x> on (Q, R)
    p = build_ip_protocol(n)
    size = 1 << n
    for x in range(size):
        for y in range(size):
            want = np.zeros(2 * size)
            for r in range(size):
                want[2 * (r ^ y) + inner_product(r, x)] = 1 / math.sqrt(size)
            assert np.allclose(execute(p, x, y)[-1].vector, want)


def test_communication():
    assert build_ip_protocol(3).communication() == 8


def test_n_bounds():
    with pytest.raises(ValueError):
        build_ip_protocol(0)
    with pytest.raises(ValueError):
        build_ip_protocol(7)


@pytest.mark.parametrize("n", range(1, 7))
def test_analytic_m1_matches_ensemble(n):
    assert np.abs(analytic_m1(n).matrix - first_message_ensemble(n)).max() < 1e-10
    assert abs(von_neumann_entropy(analytic_m1(n)) - gram_entropy(n)) < 1e-9


def test_m1_n1_entries():
    # |phi_0> = (|00>+|10>)/sqrt2, |phi_1> = (|00>+|11>)/sqrt2, each with weight 1/2
    want = np.zeros((4, 4))
    want[0, 0] = 0.5
    want[0, 2] = want[2, 0] = want[2, 2] = 0.25
    want[0, 3] = want[3, 0] = want[3, 3] = 0.25
    assert np.allclose(analytic_m1(1).matrix, want)


def test_gram_spectrum():
    assert np.allclose(sorted(gram_spectrum_oracle(1)), [0.25, 0.75])
    for n in range(1, 7):
        lam = np.linalg.eigvalsh(first_message_ensemble(n))
        assert np.allclose(np.sort(lam[lam > 1e-12]), np.sort(gram_spectrum_oracle(n)))
    for n in range(1, 17):
        assert abs(gram_spectrum_oracle(n).sum() - 1) < 1e-12


def test_gram_entropy_n1():
    assert abs(gram_entropy(1) - 0.8112781244591328) < 1e-12
    assert abs(m1_entropy(1) - gram_entropy(1)) < 1e-12


def test_m1_entropy_constant():
    row = m1_constant_row(16)
    assert abs(row["delta_vs_n_over_2_plus_one"]) < 1e-3
    assert row["delta_vs_n_over_2_plus_half"] > 0.49


def test_reference_values():
    c = claimed_values(4)
    assert c["L_B"] == 1.0 and c["QIC_B"] == 4 / 2 + 1.5
    o = oracle_values(2)
    assert abs(o["L_B"] - 0.75) < 1e-15
    assert o["L_A"] == o["QIC_A"] == gram_entropy(2)


def test_table_rows():
    rows = theoretical_ip_table(2, {"L_A": 1.5, "L_B": 0.75})
    by = {r["quantity"]: r for r in rows}
    assert by["L_B"]["delta_vs_claimed"] == -0.25
    assert by["SIC_B"]["computed"] is None and by["SIC_B"]["delta_vs_claimed"] is None
    assert theoretical_ip_table(20)[0]["oracle"] is None
    with pytest.raises(ValueError):
        theoretical_ip_table(0)


# --------------------------------------------------------------- tradeoff


@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_tradeoff_correct(t):
    n = 3
    p = build_ip_tradeoff(n, t)
    for x in range(1 << n):
        for y in range(1 << n):
            assert run_honest(p, x, y).output == inner_product(x, y)


@pytest.mark.parametrize("t", [0, 2, 3])
def test_tradeoff_bounds(t):
    n = 3
    p = build_ip_tradeoff(n, t)
    assert privacy_loss(p, None, "A").total <= t / 2 + 1.5 + 1e-9
    assert privacy_loss(p, None, "B").total <= (n - t) / 2 + 2.5 + 1e-9


def test_tradeoff_full_split_matches_plain():
    # t = n: the second half is empty and Alice's loss is that of the plain protocol
    n = 2
    assert abs(privacy_loss(build_ip_tradeoff(n, n), None, "A").total - gram_entropy(n)) < 1e-9


def test_tradeoff_t_range():
    with pytest.raises(ValueError):
        build_ip_tradeoff(3, 4)
