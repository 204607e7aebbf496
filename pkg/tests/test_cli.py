import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from snf import cli
from snf import family as fs
from snf import io as sio

DATA = Path(__file__).parent / "data"

REGENERATE = [
    "generate dictatorship --n 6 --cosets 1,2,3 -o dict6.json",
    "generate noisy --n 7 --line-index 3 --cosets 2,5,7 --delta 0.01 --seed 3 -o noisy7.json",
    "generate random --n 6 --size 360 --seed 1 -o random6.json",
    "recover noisy7.json --seed 5 -o golden_recover_noisy7.json",
    "analyze dict6.json -o golden_analyze_dict6.json",
    "iso t11_n4.json -o golden_iso_t11.json",
    "conjecture --n 3 -o golden_conjecture_n3.csv",
    "sweep sweep6.json --seed 2 -o golden_sweep6.csv",
]


def run(args, tmp_path, monkeypatch):
    monkeypatch.chdir(DATA)
    out = tmp_path / "out"
    code = cli.main(args + ["-o", str(out)])
    return code, (out.read_text() if out.exists() else None)


@pytest.mark.parametrize("line", [c for c in REGENERATE if "golden" in c])
def test_golden_outputs(line, tmp_path, monkeypatch):
    args = line.split()
    golden = args[-1]
    code, text = run(args[:-2], tmp_path, monkeypatch)
    assert code == 0
    assert text == (DATA / golden).read_text()


def test_analyze_dictatorship(tmp_path, monkeypatch):
    code, text = run(["analyze", "dict6.json"], tmp_path, monkeypatch)
    rep = json.loads(text)
    assert code == 0 and rep["epsilon"] == pytest.approx(0.0, abs=1e-12)
    assert rep["identities"]["l2"] < 1e-9
    assert set(rep["meta"]) == {"version", "seed", "config_hash"}


def test_analyze_is_deterministic(tmp_path, monkeypatch):
    _, a = run(["analyze", "random6.json"], tmp_path, monkeypatch)
    _, b = run(["analyze", "random6.json"], tmp_path, monkeypatch)
    assert a == b


def test_analyze_csv(tmp_path, monkeypatch):
    code, text = run(["analyze", "dict6.json", "--format", "csv"], tmp_path, monkeypatch)
    lines = text.splitlines()
    assert code == 0 and lines[0].startswith("# snf ")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 6 and float(rows[0]["c1"]) == pytest.approx(5 / 6)


def test_bad_permutation_exit_code(tmp_path, monkeypatch, capsys):
    code, _ = run(["analyze", "bad_perm.json"], tmp_path, monkeypatch)
    assert code == cli.EXIT_VALIDATION
    assert "not a permutation" in capsys.readouterr().err


@pytest.mark.parametrize("payload,field", [
    ({"explicit": []}, "n"),
    ({"n": 3, "row": 4, "columns": [1]}, "row"),
    ({"n": 3, "row": 1}, "columns"),
    ({"n": 3, "column": 1, "rows": [1, 1]}, "rows"),
    ({"n": 3, "explicit": [[1, 2]]}, "explicit[0]"),
    ({"n": 3}, "explicit"),
])
def test_malformed_files_name_the_field(payload, field, tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(payload))
    assert cli.main(["analyze", str(path)]) == cli.EXIT_VALIDATION
    assert field in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text("{")
    assert cli.main(["analyze", str(path)]) == cli.EXIT_VALIDATION


def test_recover_noisy_matches_truth(tmp_path, monkeypatch):
    code, text = run(["recover", "noisy7.json", "--seed", "5"], tmp_path, monkeypatch)
    G = json.loads(text)["G"]
    assert code == 0
    assert (G["line"], G["index"], G["cosets"]) == ("row", 3, [2, 5, 7])


def test_recover_exact_dictatorship(tmp_path, monkeypatch):
    code, text = run(["recover", "dict6.json"], tmp_path, monkeypatch)
    assert code == 0 and json.loads(text)["symdiff_fraction"] == 0.0


def test_recover_random_exit_3(tmp_path, monkeypatch, capsys):
    code, _ = run(["recover", "random6.json"], tmp_path, monkeypatch)
    assert code == cli.EXIT_PIPELINE
    err = capsys.readouterr().err
    assert "no strong line" in err and "non_large_fraction" in err


def test_iso_t11(tmp_path, monkeypatch):
    code, text = run(["iso", "t11_n4.json", "--stability"], tmp_path, monkeypatch)
    rep = json.loads(text)
    assert code == 0 and rep["slack"] == 0.0 and rep["boundary"] == 18
    assert rep["stability"]["delta0"] == 0.0


def test_conjecture_verdict(tmp_path, monkeypatch):
    code, text = run(["conjecture", "--n", "3", "--format", "json"], tmp_path, monkeypatch)
    rep = json.loads(text)
    assert code == 0 and rep["verdict"] == "no improvement found" and len(rep["rows"]) == 7


def test_conjecture_capacity(tmp_path, monkeypatch):
    code, _ = run(["conjecture", "--n", "6"], tmp_path, monkeypatch)
    assert code == cli.EXIT_CAPACITY


def test_sweep_shape(tmp_path, monkeypatch):
    code, text = run(["sweep", "sweep6.json"], tmp_path, monkeypatch)
    rows = list(csv.DictReader(text.splitlines()[1:]))
    assert code == 0 and len(rows) == 3 * 2
    assert {r["delta"] for r in rows} == {"0.0", "0.01", "0.05"}


def test_sweep_bad_spec(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n": 5, "row": 1, "columns": [1], "deltas": []}))
    assert cli.main(["sweep", str(path)]) == cli.EXIT_VALIDATION
    assert "deltas" in capsys.readouterr().err


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SNF_THREADS", "zero")
    code, _ = run(["conjecture", "--n", "3"], tmp_path, monkeypatch)
    assert code == cli.EXIT_VALIDATION
    monkeypatch.setenv("SNF_THREADS", "2")
    code, _ = run(["conjecture", "--n", "3"], tmp_path, monkeypatch)
    assert code == 0


def test_seed_changes_config_hash(tmp_path, monkeypatch):
    _, a = run(["iso", "t11_n4.json", "--seed", "1"], tmp_path, monkeypatch)
    _, b = run(["iso", "t11_n4.json", "--seed", "2"], tmp_path, monkeypatch)
    ma, mb = json.loads(a)["meta"], json.loads(b)["meta"]
    assert ma["seed"] == 1 and mb["seed"] == 2 and ma["config_hash"] != mb["config_hash"]


def test_family_roundtrip():
    for F in (fs.dictatorship(5, fs.COLUMN, 2, [0, 4]),
              fs.BooleanFamily.symbolic(4, fs.ROW, 1, [2], added=[0], removed=[]),
              fs.BooleanFamily.from_ranks(4, [1, 5, 9])):
        assert sio.family_from_dict(json.loads(sio.dumps(sio.family_to_dict(F)))) == F


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "snf.cli", "conjecture", "--n", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "k,lex_boundary,best_boundary,improved,witness_file"
