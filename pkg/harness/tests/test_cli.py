"""End-to-end runs of the rgmis subcommands through main()."""

import json

import pytest

from main import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ── parser ───────────────────────────────────────────────────────────────────

def test_subcommand_required():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args([])
    assert info.value.code == 2


def test_unknown_format_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["verify", "--graph", "p3", "--format", "xml"])
    assert info.value.code == 2


# ── gen ──────────────────────────────────────────────────────────────────────

def test_gen_path(capsys):
    code, out, _ = run(capsys, "gen", "path", "3")
    assert code == 0
    assert out == "3\n0 1\n1 2\n"


def test_gen_accepts_mini_language(capsys):
    code, out, _ = run(capsys, "gen", "k2,3")
    assert code == 0
    assert out.splitlines()[0] == "5"
    assert len(out.splitlines()) == 1 + 6


def test_gen_er_same_seed_same_file(capsys):
    _, first, _ = run(capsys, "gen", "er", "20", "0.2", "--seed", "7")
    _, second, _ = run(capsys, "gen", "er", "20", "0.2", "--seed", "7")
    assert first == second
    assert first.splitlines()[0] == "20"


def test_gen_rejects_short_cycle(capsys):
    code, out, err = run(capsys, "gen", "cycle", "2")
    assert code == 2
    assert out == ""
    assert "cycle" in err


def test_gen_writes_out_file(capsys, tmp_path):
    target = tmp_path / "k3.txt"
    code, out, _ = run(capsys, "gen", "complete", "3", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text() == "3\n0 1\n0 2\n1 2\n"


# ── verify ───────────────────────────────────────────────────────────────────

def test_verify_p3_exact_table(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "p3", "--format", "table")
    assert code == 0
    assert out.splitlines()[0] == "max_edge_expectation 1/2 bound 1/2 status TIGHT"
    assert "average_calls 2/3 bound 2/3 status TIGHT" in out


def test_verify_k3_exact_is_strict(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "k3", "--format", "table")
    assert code == 0
    assert out.splitlines()[0] == "max_edge_expectation 1/3 bound 1/2 status STRICT"


def test_verify_json_document(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "k2")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "edge_expectations"
    assert doc["mode"] == "exact"
    assert doc["ok"] is True


def test_verify_graph_file(capsys, tmp_path):
    path = tmp_path / "c4.txt"
    path.write_text("# square\n4\n0 1\n1 2\n2 3\n3 0\n")
    code, out, _ = run(capsys, "verify", "--graph-file", str(path), "--format", "table")
    assert code == 0
    assert "status TIGHT" in out.splitlines()[0]


def test_verify_bad_graph_file(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n0 9\n")
    code, _, err = run(capsys, "verify", "--graph-file", str(path))
    assert code == 2
    assert "line 2" in err


def test_verify_k3_audit(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "k3", "--mode", "audit", "--format", "table")
    assert code == 0
    assert out.splitlines()[0].startswith("min_slack 0 bound 0 status STRICT")
    assert "telescope_total 2 bound 3 status STRICT" in out


def test_verify_audit_csv_lists_every_row(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "k2", "--mode", "audit", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("edge_from,edge_to,t,q,d,phi_num,phi_den")
    # states before the end: the empty prefix and two one-vertex prefixes, each with two ordered edges
    assert len(lines) == 1 + 3 * 2


def test_verify_mc_needs_trials(capsys):
    code, _, err = run(capsys, "verify", "--graph", "p3", "--mode", "mc")
    assert code == 2
    assert "trials" in err


def test_verify_mc_is_seeded(capsys):
    args = ("verify", "--graph", "c4", "--mode", "mc", "--trials", "500", "--seed", "3")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert json.loads(first)["seed"] == 3


def test_verify_refuses_above_bound(capsys):
    code, _, err = run(capsys, "verify", "--graph", "k4", "--exhaustive-bound", "3")
    assert code == 3
    assert "exceeds bound 3" in err


def test_verify_rejects_both_graph_sources():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["verify", "--graph", "p3", "--graph-file", "x.txt"])


# ── --config ─────────────────────────────────────────────────────────────────

def test_config_file_with_flag_override(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"graph": "k3", "mode": "exact", "format": "json"}))
    code, out, _ = run(capsys, "verify", "--config", str(config), "--format", "table")
    assert code == 0
    assert out.startswith("max_edge_expectation 1/3")


def test_config_flag_graph_replaces_config_graph(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"graph": "k3", "format": "table"}))
    code, out, _ = run(capsys, "verify", "--config", str(config), "--graph", "p3")
    assert code == 0
    assert out.startswith("max_edge_expectation 1/2")


def test_config_rejects_unknown_keys(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"graph": "p3", "colour": "blue"}))
    code, _, err = run(capsys, "verify", "--config", str(config))
    assert code == 2
    assert "colour" in err


def test_config_must_be_json(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text("graph = p3")
    code, _, _ = run(capsys, "verify", "--config", str(config))
    assert code == 2


# ── consistency ──────────────────────────────────────────────────────────────

def test_consistency_p3(capsys):
    code, out, _ = run(capsys, "consistency", "--graph", "p3", "--trials", "100", "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert (doc["kind"], doc["checked"], doc["ok"]) == ("consistency", 100, True)


def test_consistency_on_er_graph(capsys):
    code, out, _ = run(capsys, "consistency", "--graph", "er(30,0.2,5)", "--trials", "50", "--format", "table")
    assert code == 0
    assert out.splitlines()[0] == "engine_agreement 50 bound 50 status AGREE"


def test_consistency_reports_injected_corruption(capsys):
    code, out, err = run(capsys, "consistency", "--graph", "p3", "--trials", "10", "--inject-corruption")
    assert code == 1
    assert "trial 0" in err
    assert "vertex" in err
    assert "edges 0-1 1-2" in err
    assert json.loads(out)["disagreement"]["trial"] == 0


def test_consistency_trace_out_feeds_report(capsys, tmp_path):
    trace = tmp_path / "trace.txt"
    code, _, _ = run(capsys, "consistency", "--graph", "p3", "--trials", "5", "--trace-out", str(trace))
    assert code == 0
    assert trace.read_text().startswith("# query edges")

    code, out, _ = run(capsys, "report", str(trace))
    assert code == 0
    assert out.splitlines()[0].startswith("total_calls ")
    assert "query_edges " in out


# ── report ───────────────────────────────────────────────────────────────────

@pytest.fixture
def saved_reports(capsys, tmp_path):
    paths = {}
    for name in ("p3", "k3"):
        path = tmp_path / f"{name}.json"
        assert main(["verify", "--graph", name, "--out", str(path)]) == 0
        paths[name] = path
    capsys.readouterr()
    return paths


def test_report_table(capsys, saved_reports):
    code, out, _ = run(capsys, "report", str(saved_reports["p3"]))
    assert code == 0
    assert out.splitlines()[0] == "max_edge_expectation 1/2 bound 1/2 status TIGHT"


def test_report_several_inputs(capsys, saved_reports):
    code, out, _ = run(capsys, "report", str(saved_reports["p3"]), str(saved_reports["k3"]))
    assert code == 0
    assert "max_edge_expectation 1/3 bound 1/2 status STRICT" in out


def test_report_csv(capsys, saved_reports):
    code, out, _ = run(capsys, "report", str(saved_reports["k3"]), "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "edge_from,edge_to,value_num,value_den,mean,stderr"
    assert lines[1].endswith(",1,3,,")
    assert len(lines) == 1 + 6


def test_report_json_array_for_several_inputs(capsys, saved_reports):
    code, out, _ = run(
        capsys, "report", str(saved_reports["p3"]), str(saved_reports["k3"]), "--format", "json"
    )
    assert code == 0
    docs = json.loads(out)
    assert [d["graph"]["name"] for d in docs] == ["path(3)", "complete(3)"]


def test_report_rejects_foreign_json(capsys, tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"kind": "something_else", "value": 1}))
    code, _, err = run(capsys, "report", str(path))
    assert code == 2
    assert "not a harness report" in err


def test_report_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "report", str(tmp_path / "absent.json"))
    assert code == 2
