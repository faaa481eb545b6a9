"""Command-line driver: ``qcprivacy {ip,pir,pir-entangled,reproduce}``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from . import acceptance
from .inner_product import (
    MAX_N,
    build_ip_protocol,
    gram_entropy,
    m1_constant_row,
    oracle_values,
    theoretical_ip_table,
)
from .linalg import MAX_QUBITS, WidthCapError
from .pir_classical import BudgetError, cube_scheme, cube_side, two_server_xor_scheme, verify_scheme
from .pir_entangled import (
    MAX_ELL,
    MAX_ELL_ENSEMBLE,
    build_ppir,
    database_bit,
    lemma_state_check,
    ppir_privacy_report,
    ppir_user_privacy,
)
from .pir_quantum import (
    build_qpir,
    decode_all,
    qpir_communication,
    qpir_privacy_report,
    qpir_width,
    server_keeps_nothing,
    server_view_independence,
)
from .privacy import measurement_rounds, ordering_check, privacy_loss, quantum_ic, superposed_ic
from .protocol import execute

FORMATS = ("json", "csv", "table")
SECTIONS = ("all",) + tuple(acceptance.SECTIONS)


class UsageError(Exception):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("qcprivacy").joinpath("report.schema.json").read_text())


# ---------------------------------------------------------------- helpers


def _plain(obj):
    """Convert numpy scalars and tuples so the document is pure JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _document(kind: str, argv, body: dict, checks: dict) -> dict:
    doc = {
        "tool": "qcprivacy",
        "version": __version__,
        "command": list(argv),
        "kind": kind,
        **body,
        "checks": checks,
        "passed": all(checks.values()),
    }
    return _plain(doc)


def _reports_in(obj, path=()):
    """Yield (context, report dict) for every privacy report nested in a document."""
    if isinstance(obj, dict):
        if "terms" in obj and "quantity" in obj:
            yield path, obj
            return
        for k, v in obj.items():
            yield from _reports_in(v, path + (str(k),))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _reports_in(v, path + (str(i),))


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["protocol", "context", "quantity", "side", "round", "value"])
    for path, rep in _reports_in(doc):
        ctx = "/".join(path)
        for k, v in rep["terms"].items():
            w.writerow([rep["protocol"], ctx, rep["quantity"], rep["side"], k, repr(float(v))])
        w.writerow([rep["protocol"], ctx, rep["quantity"], rep["side"], "total", repr(float(rep["total"]))])
    for name, ok in doc["checks"].items():
        w.writerow([doc["kind"], "check", name, "", "", "pass" if ok else "fail"])
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _grid(header, rows) -> str:
    cells = [list(map(_fmt, header))] + [list(map(_fmt, r)) for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def to_table(doc: dict) -> str:
    parts = [f"qcprivacy {doc['version']} {doc['kind']}"]
    kind = doc["kind"]
    if kind == "ip":
        for run in doc["runs"]:
            parts.append(f"\nn = {run['n']}")
            parts.append(
                _grid(
                    ["quantity", "computed", "oracle", "claimed constant", "computed - claimed"],
                    [[r["quantity"], r["computed"], r["oracle"], r["claimed"], r["delta_vs_claimed"]] for r in run["reference"]],
                )
            )
    elif kind == "pir":
        c = doc["classical"]
        parts.append(_grid(["scheme", "servers", "n", "correct", "max TV", "bits"], [[c["scheme"]["scheme"], c["scheme"]["servers"], c["scheme"]["n"], c["correct"], max(c["tv_distance"]), c["communication"]]]))
        comm = doc["communication"]
        parts.append(f"\ncommunication: {comm['classical_bits']} classical bits, {comm['quantum_qubits']} qubits once compiled")
        parts += doc.get("notes", [])
        q = doc.get("quantum")
        if q:
            parts.append("")
            parts.append(_grid(["quantity", "value"], [[k, v] for k, v in q["summary"].items()]))
    elif kind == "pir-entangled":
        parts.append(_grid(["quantity", "value"], [[k, v] for k, v in doc["summary"].items()]))
    elif kind == "reproduce":
        parts.append(_grid(["criterion", "result", "description"], [[c["number"], c["passed"], c["title"]] for c in doc["criteria"]]))
        notes = [f"  {c['number']}: {note}" for c in doc["criteria"] for note in c["notes"]]
        if notes:
            parts.append("\nnotes")
            parts += notes
        rows = doc["informational"].get("first_message_entropy")
        if rows:
            parts.append("\nfirst-message entropy against the two candidate constants (informational)")
            parts.append(_grid(["n", "S(M_1)", "- (n/2+1/2)", "- (n/2+1)"], [[r["n"], r["S_M1"], r["delta_vs_n_over_2_plus_half"], r["delta_vs_n_over_2_plus_one"]] for r in rows]))
    parts.append("")
    parts.append(_grid(["check", "result"], [[k, v] for k, v in doc["checks"].items()]))
    parts.append(f"\n{'PASS' if doc['passed'] else 'FAIL'}")
    return "\n".join(parts) + "\n"


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return to_csv(doc)
    return to_table(doc)


# --------------------------------------------------------------- commands


def _measure_rounds(values, protocol):
    if values is None:
        return [None]
    out = []
    for v in values:
        if v in (None, "never"):
            out.append(None)
        elif isinstance(v, int) and 0 <= v <= protocol.num_rounds:
            out.append(v)
        else:
            raise UsageError(f"measurement round {v!r} must be 'never' or an integer in 0..{protocol.num_rounds}")
    return out


def _ip_run(n: int, quantities, measure) -> dict:
    p = build_ip_protocol(n)
    reports, computed = [], {}
    if "L" in quantities:
        for side in "AB":
            r = privacy_loss(p, None, side)
            reports.append(r.to_dict())
            computed[f"L_{side}"] = r.total
    if "SIC" in quantities:
        for side in "AB":
            for m in _measure_rounds(measure, p):
                r = superposed_ic(p, None, side, m)
                reports.append(r.to_dict())
                if m is None:
                    computed[f"SIC_{side}"] = r.total
    if "QIC" in quantities:
        for side in "AB":
            r = quantum_ic(p, None, side)
            reports.append(r.to_dict())
            computed[f"QIC_{side}"] = r.total
    oracle = oracle_values(n)
    checks = {}
    for q in ("L_A", "L_B", "QIC_A"):
        if q in computed:
            checks[f"{q} matches closed form"] = abs(computed[q] - oracle[q]) <= 1e-9
    if "L_A" in computed and "SIC_A" in computed:
        checks["SIC_A equals L_A"] = abs(computed["SIC_A"] - computed["L_A"]) <= 1e-9
    if set(quantities) == {"L", "SIC", "QIC"}:
        verdict = ordering_check(p, None, _measure_rounds(measure, p) if measure else measurement_rounds(p))
        checks["ordering L <= SIC <= QIC"] = verdict.holds
    return {
        "n": n,
        "protocol": p.descriptor(),
        "reports": reports,
        "reference": theoretical_ip_table(n, computed),
        "first_message_entropy": m1_constant_row(n),
        "gram_entropy": gram_entropy(n),
        "checks": checks,
    }


def cmd_ip(args, argv) -> dict:
    ns = [args.n] if args.n is not None else args.config.get("n_values") or [args.config.get("n", 2)]
    for n in ns:
        if not isinstance(n, int) or not 1 <= n <= MAX_N:
            raise UsageError(f"n must be an integer in 1..{MAX_N}: larger inputs exceed the {MAX_QUBITS}-qubit width cap of the analyses")
    quantities = ("L", "SIC", "QIC") if args.quantity == "all" else (args.quantity,)
    measure = args.config.get("measure_rounds")
    runs = acceptance._pmap(lambda n: _ip_run(n, quantities, measure), ns)
    checks = {f"n={r['n']}: {k}": v for r in runs for k, v in r["checks"].items()}
    for r in runs:
        del r["checks"]
    return _document("ip", argv, {"mode": {"quantities": list(quantities), "measure_rounds": measure}, "runs": runs}, checks)


def _scheme(args):
    name = args.scheme or args.config.get("scheme", "two-server")
    n = args.n if args.n is not None else args.config.get("n")
    if n is None:
        raise UsageError("--n is required")
    if not isinstance(n, int) or n < 1:
        raise UsageError("n must be a positive integer")
    if name == "two-server":
        return two_server_xor_scheme(n)
    if name == "cube":
        d = args.d if args.d is not None else args.config.get("d", 2)
        try:
            cube_side(n, d)
        except ValueError as e:
            raise UsageError(str(e)) from None
        return cube_scheme(n, d)
    raise UsageError(f"unknown scheme {name!r}")


def cmd_pir(args, argv) -> dict:
    scheme = _scheme(args)
    try:
        verdict = verify_scheme(scheme)
    except BudgetError as e:
        raise UsageError(str(e)) from None
    checks = {"classical reconstruction": verdict.correct, "classical query laws independent of index": verdict.private}
    body = {
        "classical": verdict.to_dict(),
        "communication": {"classical_bits": scheme.communication(), "quantum_qubits": qpir_communication(scheme)},
    }
    width = qpir_width(scheme)
    if width > MAX_QUBITS or scheme.n > 4:
        body["quantum"] = None
        why = f"it needs {width} qubits, above the {MAX_QUBITS}-qubit limit" if width > MAX_QUBITS else "exhaustive checks stop at n = 4"
        body["notes"] = [f"compiled protocol not simulated: {why}"]
    else:
        p = build_qpir(scheme)
        fails = decode_all(scheme, p)
        dist = max(server_view_independence(p, x) for x in range(1 << scheme.n))
        rep = qpir_privacy_report(scheme)
        summary = {
            "width": p.width,
            "communication_qubits": p.communication(),
            "decode_failures": fails,
            "server_view_distance": dist,
            "L_U": rep["L_U"]["total"],
            "L_S": rep["L_S"]["total"],
        }
        body["quantum"] = {"protocol": p.descriptor(), "summary": summary, "privacy": rep}
        checks.update(
            {
                "every branch decodes x_i": fails == 0,
                "server keeps nothing": server_keeps_nothing(p),
                "server view independent of index": dist <= 1e-10,
                "L_U is zero": rep["checks"]["L_U_zero"],
                "L_S within communication": rep["checks"]["L_S_within_communication"],
            }
        )
    return _document("pir", argv, body, checks)


def _database(text: str, ell: int) -> int:
    n = 1 << ell
    digits = (n + 3) // 4
    t = text[2:] if text.lower().startswith("0x") else text
    if len(t) != digits:
        raise UsageError(f"a database of {n} bits needs exactly {digits} hex digit(s), got {text!r}")
    try:
        x = int(t, 16)
    except ValueError:
        raise UsageError(f"malformed hex database {text!r}") from None
    if x >> n:
        raise UsageError(f"database {text!r} does not fit in {n} bits")
    return x


def cmd_pir_entangled(args, argv) -> dict:
    ell = args.ell if args.ell is not None else args.config.get("ell")
    if not isinstance(ell, int) or not 1 <= ell <= MAX_ELL:
        raise UsageError(f"--ell must be an integer in 1..{MAX_ELL}")
    text = args.database if args.database is not None else args.config.get("database")
    if text is None:
        raise UsageError("--database is required")
    x = _database(str(text), ell)
    index = args.index if args.index is not None else args.config.get("index")
    if not isinstance(index, int) or not 1 <= index <= 1 << ell:
        raise UsageError(f"--index must be an integer in 1..{1 << ell}")
    i = index - 1
    p = build_ppir(ell)
    dist = p.decoder(execute(p, i, x)[-1], i, x)
    bit, prob = max(dist.items(), key=lambda kv: kv[1])
    fids = {str(k): lemma_state_check(ell, x, i, k) for k in range(1, ell + 1)}
    privacy = ppir_user_privacy(ell, x)
    expected = database_bit(x, i, ell)
    summary = {
        "recovered_bit": bit,
        "expected_bit": expected,
        "probability": prob,
        "communication": p.communication(),
        "min_lemma_fidelity": min(fids.values()),
        "max_server_view_distance": max(v["distance"] for v in privacy.values()),
    }
    checks = {
        "recovered bit equals x_i": bit == expected and prob >= 1 - 1e-9,
        "communication is 4l+1": p.communication() == 4 * ell + 1,
        "closed-form states reached": summary["min_lemma_fidelity"] >= 1 - 1e-10,
        "server view independent of index": summary["max_server_view_distance"] <= 1e-10,
        "server view equals the dephased mixture": max(v["mixture_gap"] for v in privacy.values()) <= 1e-9,
    }
    body = {
        "protocol": p.descriptor(),
        "input": {"database_hex": str(text), "database_bits": format(x, f"0{1 << ell}b"), "index": index},
        "summary": summary,
        "lemma_fidelity": fids,
        "user_privacy": {str(k): v for k, v in privacy.items()},
    }
    if ell <= MAX_ELL_ENSEMBLE:
        rep = ppir_privacy_report(ell)
        body["ensemble"] = rep
        checks["L_U is zero"] = rep["checks"]["L_U_zero"]
        checks["L_S within 2l+1"] = rep["checks"]["L_S_within_received"]
        if rep["ordering"] is not None:
            checks["ordering L <= SIC <= QIC"] = rep["ordering"]["holds"]
    else:
        body["ensemble"] = None
    return _document("pir-entangled", argv, body, checks)


def cmd_reproduce(args, argv) -> dict:
    section = args.section
    out = acceptance.run(section)
    criteria = [r.to_dict(args.timing) for r in out["results"]]
    checks = {f"criterion {r.number}": r.passed for r in out["results"]}
    return _document("reproduce", argv, {"section": section, "criteria": criteria, "informational": out["informational"]}, checks)


# ------------------------------------------------------------------ main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--out", metavar="PATH", help="write the document here instead of stdout")
    common.add_argument("--config", metavar="PATH", help="JSON file with defaults and sweep lists")
    common.add_argument("--timing", action="store_true", help="add wall-clock durations (output is then not reproducible byte for byte)")

    parser = _Parser(prog="qcprivacy", description="Privacy measures of two-party quantum protocols.")
    parser.add_argument("--version", action="version", version=f"qcprivacy {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    ip = sub.add_parser("ip", parents=[common], help="inner-product protocol")
    ip.add_argument("--n", type=int)
    ip.add_argument("--quantity", choices=("all", "L", "SIC", "QIC"), default="all")

    pir = sub.add_parser("pir", parents=[common], help="classical PIR scheme and its one-server quantum compilation")
    pir.add_argument("--scheme", choices=("two-server", "cube"))
    pir.add_argument("--n", type=int)
    pir.add_argument("--d", type=int)

    pe = sub.add_parser("pir-entangled", parents=[common], help="PIR with prior entanglement")
    pe.add_argument("--ell", type=int)
    pe.add_argument("--database", help="hex, most significant bit = x_1")
    pe.add_argument("--index", type=int, help="1-based")

    rep = sub.add_parser("reproduce", parents=[common], help="run the acceptance criteria")
    rep.add_argument("section", nargs="?", default="all", choices=SECTIONS)
    return parser


def _config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


COMMANDS = {"ip": cmd_ip, "pir": cmd_pir, "pir-entangled": cmd_pir_entangled, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        args.config = _config(args.config)
        fmt = args.format or args.config.get("format") or ("table" if args.command == "reproduce" else "json")
        if fmt not in FORMATS:
            raise UsageError(f"unknown format {fmt!r}")
        start = time.perf_counter()
        doc = COMMANDS[args.command](args, argv)
        if args.timing:
            doc["duration_seconds"] = time.perf_counter() - start
    except (UsageError, WidthCapError) as e:
        print(f"qcprivacy: error: {e}", file=sys.stderr)
        return 2
    if args.command == "reproduce":
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(render(doc, "json"))
        sys.stdout.write(render(doc, fmt))
        failing = [c["number"] for c in doc["criteria"] if not c["passed"]]
        if failing:
            print("failing criteria: " + ", ".join(map(str, failing)), file=sys.stderr)
    else:
        text = render(doc, fmt)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 0 if doc["passed"] else 1
