import json
from fractions import Fraction
from pathlib import Path

import pytest

from qpnet import report
from qpnet.algebra import eliminate_star, expand
from qpnet.cli import main
from qpnet.inference import conditional, event_qp, parse_query
from qpnet.network import loads_cpt, loads_network
from qpnet.oracle import cpt_probability
from qpnet.samples import two_paths
from qpnet.sat import decide_sat, format_result, parse_dimacs

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
GOLDEN = Path(__file__).parent / "golden" / "cli"


def d(name):
    return str(DATA / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv,golden,code",
    [
        (["infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "B | F"], "infer_b_given_f.txt", 0),
        (["infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "F", "--engine", "oracle"], "infer_f_oracle.txt", 0),
        (["sat", d("fig3.cnf")], "sat_fig3.txt", 10),
        (["sat", d("fig3_plus_s.cnf")], "sat_fig3_plus_s.txt", 20),
        (["sat", "--count", d("fig3.cnf")], "sat_count_fig3.txt", 0),
        (["show", d("fig2r.json"), "F", "--expanded"], "show_f_expanded.txt", 0),
    ],
)
def test_golden_outputs(capsys, argv, golden, code):
    got_code, out, _ = run(capsys, *argv)
    assert got_code == code
    assert out == (GOLDEN / golden).read_text(encoding="utf-8")


def test_show_root(capsys):
    code, out, _ = run(capsys, "show", d("fig2r.json"), "B0")
    assert code == 0
    assert out == "raw 1\ndecomposed 1\n"


def test_infer_symbolic(capsys):
    code, out, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "B | F", "--symbolic")
    assert code == 0
    assert out.splitlines() == ["0.636364", "numerator p[1-(1-rs)(1-tu)]", "denominator 1-(1-prs)(1-tu)", "cancelled q"]


def test_infer_output_is_the_library_rendering(capsys):
    net = loads_network((DATA / "fig2r.json").read_text())
    val = {k: Fraction(1, 2) for k in "pqrstu"}
    res = conditional(net, parse_query("B | F"), val)
    want = report.infer_text(res.value, numerator=res.qps.numerator, denominator=res.qps.denominator, cancelled=res.qps.cancelled)
    _, out, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "B | F", "--symbolic")
    assert out == want + "\n"
    want_json = report.to_json(report.probability_record("B | F", "exact", res.value))
    _, out, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "B | F", "--format", "json")
    assert out == want_json + "\n"
    assert json.loads(out)["exact"] == "7/11"


def test_sat_and_show_outputs_are_the_library_rendering(capsys):
    f = parse_dimacs((DATA / "fig3.cnf").read_text())
    _, out, _ = run(capsys, "sat", d("fig3.cnf"))
    assert out == format_result(f, decide_sat(f)) + "\n"
    raw = event_qp(two_paths(), "F")
    want = report.show_text(raw, eliminate_star(raw), expand(raw))
    _, out, _ = run(capsys, "show", d("fig2r.json"), "F", "--expanded")
    assert out == want + "\n"
    _, out, _ = run(capsys, "show", d("fig2r.json"), "F", "--format", "json")
    assert out == report.to_json(report.show_record("F", raw, eliminate_star(raw))) + "\n"


def test_zero_evidence_exit(capsys):
    code, out, err = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "F | !B0")
    assert code == 5 and out == ""
    assert "zero-probability evidence" in err


def test_unknown_node_exits_1(capsys):
    code, _, err = run(capsys, "show", d("fig2r.json"), "Z")
    assert code == 1 and "Z" in err
    code, _, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "Z")
    assert code == 1


def test_pulse_knobs_rejected_for_other_engines(capsys):
    code, _, err = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "F", "--periods", "100")
    assert code == 2 and "--periods" in err
    code, _, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "F", "--engine", "oracle", "--boost", "p")
    assert code == 2


def test_pulse_engine(capsys):
    code, out, _ = run(
        capsys, "infer", "--net", d("fig2r.json"), "--val", d("half.json"), "--query", "F",
        "--engine", "pulse", "--periods", "5000", "--repeats", "3", "--seed", "1",
    )
    lines = out.splitlines()
    assert code == 0
    assert abs(float(lines[0]) - 11 / 64) < 0.02
    assert lines[1] == "exact 0.171875" and lines[2].startswith("std ")


def test_boost_flag(capsys, tmp_path):
    val = tmp_path / "v.json"
    val.write_text(json.dumps({"p": 0.0001, "q": 0.5, "r": 0.5, "s": 0.5, "t": 0.5, "u": 0.5}))
    code, out, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", str(val), "--query", "B | F", "--boost", "p")
    _, direct, _ = run(capsys, "infer", "--net", d("fig2r.json"), "--val", str(val), "--query", "B | F")
    assert code == 0
    assert out.splitlines()[0] == direct.strip()
    assert out.splitlines()[1].startswith("boost c1=")


def test_validation_failure_exits_3(capsys, tmp_path):
    bad = tmp_path / "cyc.json"
    bad.write_text(json.dumps({"nodes": [
        {"id": "A", "kind": "or", "links": [{"from": "B", "label": "p"}]},
        {"id": "B", "kind": "or", "links": [{"from": "A", "label": "q"}]},
    ]}))
    code, _, err = run(capsys, "show", str(bad), "A")
    assert code == 3 and "cycle" in err


def test_budget_exit_4(capsys):
    code, _, _ = run(capsys, "show", d("fig2r.json"), "F", "--expanded", "--cap", "2")
    assert code == 4


def test_sat_parse_error_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 x 0\n")
    code, _, err = run(capsys, "sat", str(bad))
    assert code == 1 and "line 2" in err
    code, _, _ = run(capsys, "sat", str(tmp_path / "missing.cnf"))
    assert code == 1


def test_convert_then_infer(capsys, tmp_path):
    net_out, val_out = tmp_path / "net.json", tmp_path / "val.json"
    code, out, _ = run(capsys, "convert", d("sprinkler_cpt.json"), "--out-net", str(net_out), "--out-val", str(val_out))
    assert code == 0 and out.startswith("c nodes ")
    cpt = loads_cpt((DATA / "sprinkler_cpt.json").read_text())
    for query, event in [("C", {"C": True}), ("A, !C", {"A": True, "C": False})]:
        code, out, _ = run(capsys, "infer", "--net", str(net_out), "--val", str(val_out), "--query", query, "--format", "json")
        assert Fraction(json.loads(out)["exact"]) == cpt_probability(cpt, event)
    _, out, _ = run(capsys, "infer", "--net", str(net_out), "--val", str(val_out), "--query", "C")
    assert out == "0.484000\n"


def test_convert_deterministic_cpt_has_no_symbols(capsys, tmp_path):
    code, out, _ = run(capsys, "convert", d("or_cpt.json"), "--out-net", str(tmp_path / "n.json"), "--out-val", str(tmp_path / "v.json"))
    assert code == 0
    assert out.splitlines()[1] == "c symbols 0"
    assert json.loads((tmp_path / "v.json").read_text()) == {}
    net = loads_network((tmp_path / "n.json").read_text())
    assert sum(1 for n in net.node_list() if n.kind.value == "and") == 3


def test_convert_bad_table_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes":[{"id":"A","parents":[],"table":[0.1,0.2]}]}')
    code, _, _ = run(capsys, "convert", str(bad), "--out-net", str(tmp_path / "n"), "--out-val", str(tmp_path / "v"))
    assert code == 1


def test_missing_required_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["infer", "--net", d("fig2r.json")])
    assert info.value.code == 2
