"""Acceptance criteria, shared by ``qcprivacy reproduce`` and the test suite.

Each criterion returns a :class:`CriterionResult` whose ``details`` hold the
numbers that decided it.  Details are deterministic; wall-clock times live in
``elapsed`` and are only serialized on request.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import classical as cl
from .inner_product import (
    analytic_m1,
    build_ip_protocol,
    build_ip_tradeoff,
    first_message_ensemble,
    gram_entropy,
    inner_product,
    m1_constant_row,
    theoretical_ip_table,
)
from .linalg import von_neumann_entropy
from .pir_classical import clear_index_scheme, cube_scheme, two_server_xor_scheme, verify_scheme
from .pir_entangled import (
    build_ppir,
    database_bit,
    lemma_state_check,
    ppir_privacy_report,
    ppir_user_privacy,
)
from .pir_quantum import build_qpir, decode_all, qpir_communication, qpir_privacy_report, server_view_independence
from .privacy import ordering_check, privacy_loss, quantum_ic, superposed_ic
from .protocol import run_honest, verify_honest_execution
from .toys import echo_protocol

TIME_LIMIT_TOTAL = 300.0
TIME_LIMIT_IP = 10.0
SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    section: str
    title: str
    passed: bool
    details: dict
    elapsed: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "number": self.number,
            "section": self.section,
            "title": self.title,
            "passed": self.passed,
            "details": self.details,
            "notes": self.notes,
        }
        if timing:
            d["elapsed_seconds"] = self.elapsed
        return d


def workers() -> int:
    try:
        return max(1, int(os.environ.get("QCPRIVACY_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    if workers() == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers()) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------ criteria


def c1_ip_correctness(ns=(1, 2, 3, 4)) -> CriterionResult:
    start = time.perf_counter()

    def failures(n):
        p = build_ip_protocol(n)
        bad = 0
        for x in range(1 << n):
            for y in range(1 << n):
                e = run_honest(p, x, y)
                bad += e.output != inner_product(x, y) or e.probability < 1 - 1e-9
        return bad

    fails = dict(zip(ns, _pmap(failures, ns)))
    elapsed = time.perf_counter() - start
    details = {"failures": {str(n): f for n, f in fails.items()}, "within_time_limit": elapsed < TIME_LIMIT_IP}
    return CriterionResult(1, "ip", "inner product is computed with certainty", all(f == 0 for f in fails.values()) and elapsed < TIME_LIMIT_IP, details, elapsed)


def c2_first_message(ns=range(1, 7)) -> CriterionResult:
    rows = {}
    for n in ns:
        m = analytic_m1(n)
        dev = float(np.abs(m.matrix - first_message_ensemble(n)).max())
        s = von_neumann_entropy(m)
        rows[str(n)] = {"max_entry_deviation": dev, "entropy": s, "gram_entropy": gram_entropy(n), "entropy_gap": abs(s - gram_entropy(n))}
    ok = all(r["max_entry_deviation"] <= 1e-10 and r["entropy_gap"] <= 1e-9 for r in rows.values())
    return CriterionResult(2, "ip", "closed-form first-message matrix matches the ensemble and the Gram spectrum", ok, rows)


def c3_ip_values(ns=(1, 2, 3, 4)) -> CriterionResult:
    def row(n):
        p = build_ip_protocol(n)
        la = privacy_loss(p, None, "A").total
        lb = privacy_loss(p, None, "B").total
        qa = quantum_ic(p, None, "A").total
        return {
            "L_A": la,
            "oracle_L_A": gram_entropy(n),
            "L_B": lb,
            "oracle_L_B": 1 - 2.0**-n,
            "QIC_A": qa,
            "ok": abs(la - gram_entropy(n)) <= 1e-9 and abs(lb - (1 - 2.0**-n)) <= 1e-9 and abs(qa - la) <= 1e-9,
        }

    rows = dict(zip((str(n) for n in ns), _pmap(row, ns)))
    return CriterionResult(3, "ip", "inner-product privacy values match their closed forms", all(r["ok"] for r in rows.values()), rows)


def _ordering_row(protocol):
    v = ordering_check(protocol)
    return {"holds": v.holds, "failures": v.failures, "strategy_holds": v.strategy_holds, "values": v.values}


def c4_ordering(ip_ns=(1, 2, 3, 4)) -> CriterionResult:
    cases = [(f"inner-product n={n}", lambda n=n: build_ip_protocol(n)) for n in ip_ns]
    cases += [("qpir two-server n=2", lambda: build_qpir(two_server_xor_scheme(2))), ("ppir l=1", lambda: build_ppir(1))]
    rows = dict(zip((c[0] for c in cases), _pmap(lambda c: _ordering_row(c[1]()), cases)))
    notes = []
    if not all(r["holds"] for r in rows.values()):
        notes.append(
            "fixed-round comparison fails where listed; with the measurement round chosen to maximize SIC "
            f"the chain holds: {all(r['strategy_holds'] for r in rows.values())}"
        )
    return CriterionResult(4, "ordering", "L <= SIC <= QIC for every measurement round", all(r["holds"] for r in rows.values()), rows, notes=notes)


def c5_tradeoff(n: int = 4) -> CriterionResult:
    def row(t):
        p = build_ip_tradeoff(n, t)
        bad = sum(run_honest(p, x, y).output != inner_product(x, y) for x in range(1 << n) for y in range(1 << n))
        la = privacy_loss(p, None, "A").total
        lb = privacy_loss(p, None, "B").total
        return {
            "failures": int(bad),
            "L_A": la,
            "bound_A": t / 2 + 1.5,
            "L_B": lb,
            "bound_B": (n - t) / 2 + 2.5,
            "ok": bad == 0 and la <= t / 2 + 1.5 + 1e-9 and lb <= (n - t) / 2 + 2.5 + 1e-9,
        }

    ts = list(range(n + 1))
    rows = dict(zip((str(t) for t in ts), _pmap(row, ts)))
    avg = {"L_A": float(np.mean([r["L_A"] for r in rows.values()])), "L_B": float(np.mean([r["L_B"] for r in rows.values()]))}
    return CriterionResult(5, "ip", "split inner-product protocol is correct and within its leakage bounds", all(r["ok"] for r in rows.values()), {"t": rows, "average_over_t": avg})


def c6_classical_pir() -> CriterionResult:
    schemes = [two_server_xor_scheme(n) for n in range(1, 9)] + [cube_scheme(n, 2) for n in (4, 9, 16)]
    verdicts = [verify_scheme(s) for s in schemes]
    rows = {f"{s.name} n={s.n}": v.to_dict() for s, v in zip(schemes, verdicts)}
    detector = verify_scheme(clear_index_scheme(4))
    ok = all(v.accepted for v in verdicts) and not detector.accepted
    return CriterionResult(6, "pir", "classical schemes are correct and their query laws ignore the index", ok, {"schemes": rows, "clear_index_rejected": not detector.accepted})


def c7_qpir(n: int = 4) -> CriterionResult:
    scheme = two_server_xor_scheme(n)
    p = build_qpir(scheme)
    fails = decode_all(scheme, p)
    dist = max(_pmap(lambda x: server_view_independence(p, x), range(1 << n)))
    rep = qpir_privacy_report(scheme, ordering=False)
    bound = qpir_communication(scheme)
    details = {
        "decode_failures": fails,
        "server_view_distance": dist,
        "L_U": rep["L_U"]["total"],
        "L_S": rep["L_S"]["total"],
        "communication": bound,
        "width": p.width,
    }
    ok = fails == 0 and dist <= 1e-10 and abs(details["L_U"]) <= 1e-10 and details["L_S"] <= bound + 1e-9
    return CriterionResult(7, "pir", "compiled one-server protocol is correct and private for the user", ok, details)


def c8_ppir(samples: int = 64) -> CriterionResult:
    rng = np.random.default_rng(SEED)
    details, ok = {}, True
    for ell in (1, 2):
        p = build_ppir(ell)
        cases = [(x, i) for x in range(1 << (1 << ell)) for i in range(1 << ell)]
        bad = sum(run_honest(p, i, x).output != database_bit(x, i, ell) for x, i in cases)
        fid = min(lemma_state_check(ell, x, i, k) for x, i in cases for k in range(1, ell + 1))
        priv = max(v["distance"] for x in range(1 << (1 << ell)) for v in ppir_user_privacy(ell, x).values())
        rep = ppir_privacy_report(ell, ordering=False)
        row = {
            "cases": len(cases),
            "failures": int(bad),
            "min_lemma_fidelity": fid,
            "server_view_distance": priv,
            "communication": p.communication(),
            "L_U": rep["L_U"]["total"],
            "L_S": rep["L_S"]["total"],
            "L_S_bound": 2 * ell + 1,
        }
        ok &= bad == 0 and fid >= 1 - 1e-10 and priv <= 1e-10 and row["communication"] == 4 * ell + 1
        ok &= abs(row["L_U"]) <= 1e-10 and row["L_S"] <= 2 * ell + 1 + 1e-9
        details[f"l={ell}"] = row
    p = build_ppir(3)
    cases = [(int(rng.integers(256)), int(rng.integers(8))) for _ in range(samples)]
    bad = sum(run_honest(p, i, x).output != database_bit(x, i, 3) for x, i in cases)
    fid = min(lemma_state_check(3, x, i, k) for x, i in cases[:16] for k in (1, 2, 3))
    priv = max(v["distance"] for x, _ in cases[:4] for v in ppir_user_privacy(3, x).values())
    details["l=3"] = {
        "cases": samples,
        "failures": int(bad),
        "min_lemma_fidelity": fid,
        "lemma_cases": 16,
        "server_view_distance": priv,
        "privacy_databases": 4,
        "communication": p.communication(),
    }
    ok &= bad == 0 and fid >= 1 - 1e-10 and priv <= 1e-10 and p.communication() == 13
    return CriterionResult(8, "pir-entangled", "entangled PIR is correct, follows its closed-form states and hides the index", bool(ok), details)


def c9_honesty() -> CriterionResult:
    ip = build_ip_protocol(2)
    honest = echo_protocol("honest")
    v_ip = verify_honest_execution(ip, ip)
    v_echo = verify_honest_execution(honest, honest)
    v_copy = verify_honest_execution(honest, echo_protocol("copy"))
    last = v_copy.rounds[-1]
    details = {
        "inner_product_accepted": v_ip.accepted,
        "echo_accepted": v_echo.accepted,
        "copy_accepted": v_copy.accepted,
        "copy_failing_round": v_copy.failing_round,
        "prescribed_purity": last["prescribed_purity"],
        "observed_purity": last["observed_purity"],
        "local_flip_accepted": verify_honest_execution(honest, echo_protocol("local")).accepted,
    }
    ok = (
        v_ip.accepted
        and v_echo.accepted
        and not v_copy.accepted
        and abs(last["prescribed_purity"] - 1.0) <= 1e-9
        and abs(last["observed_purity"] - 0.5) <= 1e-9
    )
    return CriterionResult(9, "framework", "honesty checker separates honest runs from the copy attack", ok, details)


def c10_chain_rule(count: int = 100, max_domain: int = 16) -> CriterionResult:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(count):
        proto = cl.random_classical_protocol(rng)
        mu = cl.random_distribution(rng, proto.input_sizes)
        r = cl.classical_transcript_privacy(proto, mu)
        worst = max(worst, abs(r.alice_sum - r.alice_direct), abs(r.bob_sum - r.bob_direct))
    idmin = {}
    ok = worst <= 1e-9
    for size in range(1, max_domain + 1):
        proto = cl.idminimum_protocol(size)
        honest = cl.classical_transcript_privacy(proto)
        fa, fb = cl.output_leakage(proto, cl.idminimum)
        beyond_honest = cl.leakage_beyond_output(proto, cl.idminimum)[1]
        beyond_dev = cl.leakage_beyond_output(proto, cl.idminimum, alice_substitute=cl.uniform_substitute(size))[1]
        dev = cl.classical_transcript_privacy(proto, alice_substitute=cl.uniform_substitute(size))
        row = {
            "chain_gap": max(abs(honest.alice_sum - honest.alice_direct), abs(honest.bob_sum - honest.bob_direct)),
            "I_Pi_X_given_Y": honest.alice_direct,
            "I_F_X_given_Y": fa,
            "I_Pi_Y_given_X": honest.bob_direct,
            "I_F_Y_given_X": fb,
            "bob_leak_beyond_output_honest": beyond_honest,
            "bob_leak_beyond_output_random_alice": beyond_dev,
            "I_Pi_Y_given_X_random_alice": dev.bob_direct,
            "deviation_chain_gap": abs(dev.bob_sum - dev.bob_direct),
            "bob_reveals_probability": (size - 1) / (2 * size),
        }
        idmin[str(size)] = row
        ok &= row["chain_gap"] <= 1e-9 and row["deviation_chain_gap"] <= 1e-9
        ok &= abs(row["I_Pi_X_given_Y"] - fa) <= 1e-9 and abs(row["I_Pi_Y_given_X"] - fb) <= 1e-9
        if size >= 2:
            ok &= beyond_honest <= 1e-9 and beyond_dev > beyond_honest + 1e-9
    return CriterionResult(
        10,
        "framework",
        "classical transcript privacy splits round by round; a random-input Alice makes Bob leak",
        bool(ok),
        {"random_protocols": count, "random_worst_gap": worst, "idminimum": idmin},
        notes=["Bob's leakage is measured beyond what the function value already reveals"],
    )


CRITERIA = {
    1: c1_ip_correctness,
    2: c2_first_message,
    3: c3_ip_values,
    4: c4_ordering,
    5: c5_tradeoff,
    6: c6_classical_pir,
    7: c7_qpir,
    8: c8_ppir,
    9: c9_honesty,
    10: c10_chain_rule,
}

SECTIONS = {
    "ip": (1, 2, 3, 5),
    "ordering": (4,),
    "pir": (6, 7),
    "pir-entangled": (8,),
    "framework": (9, 10),
}


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number]()
    res.elapsed = time.perf_counter() - start
    return res


def informational(section: str = "all") -> dict:
    """Rows that are reported but never fail: claimed constants and the first-message entropy question."""
    out = {}
    if section in ("all", "ip"):
        tables = {}
        for n in (1, 2, 3, 4):
            p = build_ip_protocol(n)
            computed = {
                "L_A": privacy_loss(p, None, "A").total,
                "L_B": privacy_loss(p, None, "B").total,
                "SIC_A": superposed_ic(p, None, "A").total,
                "SIC_B": superposed_ic(p, None, "B").total,
                "QIC_A": quantum_ic(p, None, "A").total,
                "QIC_B": quantum_ic(p, None, "B").total,
            }
            tables[str(n)] = theoretical_ip_table(n, computed)
        out["inner_product_table"] = tables
        out["first_message_entropy"] = [m1_constant_row(n) for n in range(1, 17)]
    return out


def run(section: str = "all") -> dict:
    """Run the selected criteria; criterion 11 is the total runtime of a full run."""
    if section != "all" and section not in SECTIONS:
        raise ValueError(f"unknown section {section!r}")
    numbers = sorted(CRITERIA) if section == "all" else list(SECTIONS[section])
    start = time.perf_counter()
    results = [run_criterion(k) for k in numbers]
    info = informational(section)
    total = time.perf_counter() - start
    if section == "all":
        results.append(
            CriterionResult(11, "runtime", "full reproduction finishes within five minutes", total < TIME_LIMIT_TOTAL, {"limit_seconds": TIME_LIMIT_TOTAL}, total)
        )
    return {"results": results, "informational": info, "elapsed": total}


def summary_line(res: CriterionResult) -> str:
    return f"criterion {res.number:2d} [{'PASS' if res.passed else 'FAIL'}] {res.title}"

