import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from qcprivacy import __version__
from qcprivacy.cli import load_schema, main
from qcprivacy.inner_product import gram_entropy

ROOT = Path(__file__).resolve().parents[1]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


@pytest.fixture(scope="module")
def schema():
    return load_schema()


def test_docs_schema_matches_package():
    assert json.loads((ROOT / "docs" / "report.schema.json").read_text()) == load_schema()


def test_schema_is_valid(schema):
    jsonschema.Draft7Validator.check_schema(schema)


# ---------------------------------------------------------------------- ip


def test_ip_n2(capsys, schema):
    code, doc, _ = run_json(capsys, "ip", "--n", "2", "--format", "json")
    assert code == 0
    jsonschema.validate(doc, schema)
    rep = {(r["quantity"], r["side"]): r["total"] for r in doc["runs"][0]["reports"] if r["mode"].get("measure_round", "x") in (None, "x")}
    assert abs(rep[("L", "B")] - 0.75) < 1e-12
    assert doc["version"] == __version__ and doc["command"] == ["ip", "--n", "2", "--format", "json"]


def test_ip_n1_value(capsys):
    _, doc, _ = run_json(capsys, "ip", "--n", "1", "--quantity", "L")
    la = next(r["total"] for r in doc["runs"][0]["reports"] if r["side"] == "A")
    assert abs(la - 0.8112781244591328) < 1e-12


def test_ip_width_cap(capsys):
    code, out, err = run(capsys, "ip", "--n", "9")
    assert code == 2 and out == "" and "width cap" in err


def test_floats_round_trip(capsys):
    _, out, _ = run(capsys, "ip", "--n", "2", "--quantity", "L")
    doc = json.loads(out)
    assert json.dumps(doc, indent=2, sort_keys=True) + "\n" == out
    # shortest round-trip repr: the parsed value is the computed double, bit for bit
    assert doc["runs"][0]["gram_entropy"] == gram_entropy(2)
    assert repr(gram_entropy(2)) in out


def test_output_is_byte_identical(capsys):
    first = run(capsys, "ip", "--n", "2")[1]
    second = run(capsys, "ip", "--n", "2")[1]
    assert first == second


def test_timing_only_on_request(capsys):
    _, doc, _ = run_json(capsys, "ip", "--n", "1", "--quantity", "L", "--timing")
    assert doc["duration_seconds"] >= 0
    _, doc, _ = run_json(capsys, "ip", "--n", "1", "--quantity", "L")
    assert "duration_seconds" not in doc


def test_csv_output(capsys):
    code, out, _ = run(capsys, "ip", "--n", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    totals = {(r["quantity"], r["side"]): float(r["value"]) for r in rows if r["round"] == "total" and r["context"].endswith("0")}
    assert abs(totals[("L", "A")] - 0.8112781244591328) < 1e-12
    assert any(r["context"] == "check" and r["value"] == "pass" for r in rows)


def test_table_output(capsys):
    code, out, _ = run(capsys, "ip", "--n", "1", "--format", "table")
    assert code == 0 and "claimed constant" in out and out.rstrip().endswith("PASS")


def test_config_sweep(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_values": [1, 2], "measure_rounds": [0, "never"]}))
    code, doc, _ = run_json(capsys, "ip", "--config", str(cfg), "--quantity", "SIC")
    assert code == 0 and [r["n"] for r in doc["runs"]] == [1, 2]
    assert len(doc["runs"][0]["reports"]) == 4


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("[1, 2]")
    assert run(capsys, "ip", "--config", str(cfg))[0] == 2
    assert run(capsys, "ip", "--config", str(tmp_path / "missing.json"))[0] == 2
    cfg.write_text(json.dumps({"n": 1, "measure_rounds": [7]}))
    assert run(capsys, "ip", "--config", str(cfg))[0] == 2


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "ip", "--n", "1", "--quantity", "L", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["kind"] == "ip"


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "nope")[0] == 2
    assert run(capsys, "ip", "--n", "x")[0] == 2
    assert run(capsys, "ip", "--format", "xml")[0] == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


# --------------------------------------------------------------------- pir


def test_pir_two_server(capsys, schema):
    code, doc, _ = run_json(capsys, "pir", "--scheme", "two-server", "--n", "3")
    assert code == 0
    jsonschema.validate(doc, schema)
    assert abs(doc["quantum"]["summary"]["L_U"]) <= 1e-10
    assert doc["quantum"]["summary"]["decode_failures"] == 0


def test_pir_cube_accounting(capsys, schema):
    code, doc, _ = run_json(capsys, "pir", "--scheme", "cube", "--n", "4", "--d", "2")
    assert code == 0
    jsonschema.validate(doc, schema)
    assert doc["communication"] == {"classical_bits": 20, "quantum_qubits": 40}
    assert doc["quantum"] is None and "qubits" in doc["notes"][0]


def test_pir_cube_not_square(capsys):
    code, _, err = run(capsys, "pir", "--scheme", "cube", "--n", "5", "--d", "2")
    assert code == 2 and "perfect power" in err


def test_pir_needs_n(capsys):
    assert run(capsys, "pir")[0] == 2


def test_pir_budget(capsys):
    assert run(capsys, "pir", "--n", "14")[0] == 2


# ----------------------------------------------------------- pir-entangled


def test_pir_entangled_worked_example(capsys, schema):
    code, doc, _ = run_json(capsys, "pir-entangled", "--ell", "3", "--database", "A6", "--index", "1")
    assert code == 0
    jsonschema.validate(doc, schema)
    assert doc["summary"]["recovered_bit"] == 1
    assert doc["summary"]["communication"] == 13
    assert doc["input"]["database_bits"] == "10100110"


@pytest.mark.parametrize("db", ["0", "1", "2", "3"])
@pytest.mark.parametrize("index", [1, 2])
def test_pir_entangled_ell1_all(capsys, db, index):
    code, doc, _ = run_json(capsys, "pir-entangled", "--ell", "1", "--database", db, "--index", str(index))
    assert code == 0
    assert doc["summary"]["recovered_bit"] == (int(db) >> (2 - index)) & 1


@pytest.mark.parametrize(
    "args",
    [
        ["--ell", "3", "--database", "ZZ", "--index", "1"],
        ["--ell", "3", "--database", "A", "--index", "1"],
        ["--ell", "1", "--database", "7", "--index", "1"],
        ["--ell", "2", "--database", "A", "--index", "5"],
        ["--ell", "4", "--database", "A", "--index", "1"],
    ],
)
def test_pir_entangled_rejects(capsys, args):
    assert run(capsys, "pir-entangled", *args)[0] == 2


# --------------------------------------------------------------- reproduce


def test_reproduce_section(tmp_path, capsys, schema):
    out = tmp_path / "rep.json"
    code, table, err = run(capsys, "reproduce", "framework", "--out", str(out))
    assert code == 0 and err == ""
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schema)
    assert [c["number"] for c in doc["criteria"]] == [9, 10]
    assert "criterion" in table and table.rstrip().endswith("PASS")


def test_reproduce_failure_exit_code(capsys):
    code, table, err = run(capsys, "reproduce", "ordering")
    assert code == 1
    assert "failing criteria: 4" in err
    assert "notes" in table


def test_console_entry_points():
    for cmd in (["qcprivacy"], [sys.executable, "-m", "qcprivacy"]):
        res = subprocess.run(cmd + ["ip", "--n", "1", "--quantity", "L"], capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert json.loads(res.stdout)["kind"] == "ip"
