import json
from pathlib import Path

import pytest

from chorlang import cli
from chorlang import conformance as qc
from chorlang.conformance import Failure, TheoremReport

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def prog(name: str) -> str:
    return str(PROGRAMS / f"{name}.chor")


def call(capsys, *argv: str) -> tuple[int, str, str]:
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_prints_the_inferred_type(capsys) -> None:
    assert call(capsys, "check", prog("relayed_location")) == (0, "int @ B\n", "")
    assert call(capsys, "check", prog("load_balancer"))[:2] == (0, "int @ C\n")


@pytest.mark.parametrize("name", ["escaping_location", "uninformed_worker"])
def test_rejected_programs_exit_with_diagnostics(capsys, name: str) -> None:
    code, out, err = call(capsys, "check", prog(name))
    assert code == 1 and out == "" and "error[T-LetLoc]" in err


def test_syntax_errors_exit_with_diagnostics(capsys, tmp_path) -> None:
    bad = tmp_path / "bad.chor"
    bad.write_text("locations A;\nmain = let A.x : int := A.1 A.x\n")
    code, _, err = call(capsys, "run", str(bad))
    assert code == 1
    assert err.startswith(f"{bad}:2:8: error[unbalanced-let]:")


def test_a_missing_file_is_reported(capsys, tmp_path) -> None:
    code, _, err = call(capsys, "check", str(tmp_path / "absent.chor"))
    assert code == 1 and "absent.chor" in err


def test_project_all_prints_one_program_per_location(capsys) -> None:
    code, out, _ = call(capsys, "project", "--all", prog("remote_sum"))
    assert code == 0
    assert out.splitlines() == ["A |> send (ret (2 + 3)) to B", "B |> recv A"]
    code, out, _ = call(capsys, "project", "--loc", "B", prog("remote_sum"))
    assert out == "B |> recv A\n"


def test_unmergeable_branches_fail_projection(capsys) -> None:
    code, out, _ = call(capsys, "project", "--all", prog("deadlock"))
    assert code == 2
    assert out.splitlines()[1].startswith("B |> undefined:")
    assert call(capsys, "explore", prog("deadlock"))[0] == 2


def test_run_reaches_the_value(capsys, tmp_path) -> None:
    code, out, _ = call(capsys, "run", prog("load_balancer"))
    assert code == 0 and out.splitlines() == ["C.42", "status: value, steps: 7"]
    code, out, _ = call(capsys, "run", "--strategy", "exhaustive", prog("if_sync"))
    assert code == 0 and out.splitlines()[0] == "B.1"


def test_explore_reports_only_finished_terminals(capsys) -> None:
    code, out, _ = call(capsys, "explore", prog("load_balancer"))
    assert code == 0
    header = out.splitlines()[0]
    assert "all-values: 1," in header and "deadlocked: 0," in header and "frontier: 0" in header
    assert out.splitlines()[1] == "all-values: M |> () || A |> () || B |> () || C |> ret 42"


def test_explore_writes_a_graph(capsys, tmp_path) -> None:
    graph = tmp_path / "g.json"
    assert call(capsys, "explore", "--graph", str(graph), prog("remote_sum"))[0] == 0
    doc = json.loads(graph.read_text())
    assert len(doc["states"]) == 3 and len(doc["edges"]) == 2


@pytest.mark.parametrize("command", ["run", "simulate"])
def test_replaying_a_seed_gives_identical_traces(capsys, tmp_path, command: str) -> None:
    extra = ["--strategy", "random"] if command == "run" else []
    paths = [tmp_path / f"{i}.jsonl" for i in range(2)]
    for path in paths:
        code, _, _ = call(capsys, command, *extra, "--seed", "3", "--trace", str(path),
                          prog("load_balancer"))
        assert code == 0
    first, second = (p.read_bytes() for p in paths)
    assert first == second and first
    rows = [json.loads(line) for line in first.decode().splitlines()]
    assert [r["step"] for r in rows] == list(range(1, len(rows) + 1))


def test_the_seed_defaults_to_the_environment(capsys, tmp_path, monkeypatch) -> None:
    monkeypatch.setenv("QC_SEED", "3")
    env = tmp_path / "env.jsonl"
    call(capsys, "simulate", "--trace", str(env), prog("load_balancer"))
    monkeypatch.delenv("QC_SEED")
    explicit = tmp_path / "explicit.jsonl"
    call(capsys, "simulate", "--seed", "3", "--trace", str(explicit), prog("load_balancer"))
    assert env.read_bytes() == explicit.read_bytes()


def test_simulation_stops_at_values(capsys) -> None:
    code, out, _ = call(capsys, "simulate", prog("run_at_worker"))
    assert code == 0 and out.splitlines()[-1].startswith("status: values")


def test_conformance_passes_and_writes_a_report(capsys, tmp_path) -> None:
    report = tmp_path / "r.json"
    code, out, _ = call(capsys, "conformance", "--suite", "progress", "--cases", "10",
                        "--report", str(report))
    assert code == 0 and out
    doc = json.loads(report.read_text())
    assert doc["ok"] and doc["cases"] == 10


def test_conformance_failures_exit_with_three(capsys, monkeypatch) -> None:
    failing = TheoremReport("progress", 1, (Failure(0, "A.1", "stuck"),))
    monkeypatch.setattr(qc, "run_suite", lambda *args, **kw: [failing])
    assert call(capsys, "conformance", "--cases", "1")[0] == 3
