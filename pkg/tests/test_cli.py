import json

import pytest

from rlprover.cli import main
from rlprover.corpus import gen_chain


@pytest.fixture
def corpus(tmp_path):
    d = tmp_path / "problems"
    d.mkdir()
    (d / "minimal.p").write_text(gen_chain(1, 0))
    (d / "chain4.p").write_text(gen_chain(4, 3, seed=2))
    return d


def test_train_writes_model_and_log(corpus, tmp_path, capsys):
    out = tmp_path / "model.json"
    code = main(["train", "--problems", str(corpus), "--episodes", "20", "--step-limit", "100",
                 "--max-clauses", "500", "--seed", "7", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["version"] == 1 and len(doc["weights"]) == 2 and doc["max_clauses"] == 500
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 20
    assert list(json.loads(lines[0])) == ["episode", "problem", "terminal", "steps", "clauses", "buffer_size", "epsilon"]


def test_train_is_reproducible(corpus, tmp_path):
    paths = []
    for k in range(2):
        model, log = tmp_path / f"m{k}.json", tmp_path / f"log{k}.jsonl"
        assert main(["train", "--problems", str(corpus), "--episodes", "15", "--seed", "3",
                     "--out", str(model), "--log", str(log)]) == 0
        paths.append((model.read_bytes(), log.read_bytes()))
    assert paths[0] == paths[1]


def test_train_rejects_empty_directory(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["train", "--problems", str(empty), "--out", str(tmp_path / "m.json")]) != 0
    assert main(["train", "--problems", str(tmp_path / "missing"), "--out", str(tmp_path / "m.json")]) != 0
    assert not (tmp_path / "m.json").exists()


def test_solve_minimal_prints_proof(corpus, capsys):
    assert main(["solve", str(corpus / "minimal.p")]) == 0
    out = capsys.readouterr().out.splitlines()
    cnf = [line for line in out if line.startswith("cnf(")]
    assert cnf == [
        "cnf(chain_1, axiom, p1).",
        "cnf(goal, negated_conjecture, ~p1).",
        "cnf(c2, derived, $false).",
    ]
    assert "% c2: resolution from c1, c0" in out


def test_solve_with_trained_model(corpus, tmp_path, capsys):
    model = tmp_path / "m.json"
    main(["train", "--problems", str(corpus), "--episodes", "10", "--out", str(model), "--log", str(tmp_path / "l")])
    assert main(["solve", str(corpus / "chain4.p"), "--model", str(model)]) == 0


def test_solve_step_limit_and_errors(corpus, tmp_path, capsys):
    assert main(["solve", str(corpus / "chain4.p"), "--step-limit", "1"]) == 1
    assert "step_limit" in capsys.readouterr().out
    assert main(["solve", str(tmp_path / "missing.p")]) == 2
    bad = tmp_path / "bad.p"
    bad.write_text("cnf(a, axiom, p")
    assert main(["solve", str(bad)]) == 2


def test_evaluate_reports_errors_column(corpus, capsys):
    (corpus / "broken.p").write_text("fof(a, axiom, p).")
    assert main(["evaluate", "--problems", str(corpus)]) == 0
    out = capsys.readouterr().out
    assert "model: zero model" in out
    assert "broken" in out and "parse_error" in out
    assert out.strip().endswith("total: 3 problems, 2 solved, 1 errors")


def test_serve_flags_are_exclusive(corpus):
    with pytest.raises(SystemExit) as err:
        main(["serve", "--stdio", "--tcp", "0", "--problems", str(corpus)])
    assert err.value.code == 2


def test_gen_writes_file(tmp_path, capsys):
    assert main(["gen", "--family", "chain", "--n", "3", "--distractors", "2", "--seed", "5",
                 "--out", str(tmp_path / "gen")]) == 0
    path = tmp_path / "gen" / "chain_n3_d2_s5.p"
    assert path.read_text() == gen_chain(3, 2, 5)
