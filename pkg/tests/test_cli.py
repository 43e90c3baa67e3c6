import io
import json
import random
import subprocess
import sys

import pytest

from cpsm.cli import run
from cpsm.constraints import MiningConfig, closed_filter
from cpsm.data import load
from cpsm.mining import mine

from conftest import TOY


@pytest.fixture
def toy_path(tmp_path):
    p = tmp_path / "toy.txt"
    p.write_text(TOY)
    return p


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_toy_lines(toy_path):
    code, out, _ = call("--data", toy_path, "--minsup", 2, "--model", "global")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    assert "A C\t2" in lines
    assert all(line.endswith("\t2") for line in lines)


def test_gap_with_global_model(toy_path):
    code, out, err = call("--data", toy_path, "--minsup", 2, "--model", "global", "--maxgap", 1)
    assert code == 1 and out == ""
    assert "--maxgap" in err and "--model global" in err and "decomposed model" in err


def test_witness_with_global_model(toy_path):
    assert call("--data", toy_path, "--witness")[0] == 1


def test_stats(toy_path):
    code, out, _ = call("--data", toy_path, "--stats")
    assert code == 0
    assert out.strip() == "|Σ|=3 |D|=2 ||D||=7 max=4 avg=3.500 density=1.167"


def test_missing_file(tmp_path):
    code, _, err = call("--data", tmp_path / "nope.txt")
    assert code == 2 and "error" in err


def test_bad_spmf(tmp_path):
    p = tmp_path / "bad.spmf"
    p.write_text("1 2 -1 -2\n")
    assert call("--data", p, "--format", "spmf")[0] == 2


def test_bad_minsup(toy_path):
    assert call("--data", toy_path, "--minsup", "lots")[0] == 1


def test_unknown_item(toy_path):
    assert call("--data", toy_path, "--contains", "Z")[0] == 1


def test_json_report(toy_path):
    code, out, _ = call("--data", toy_path, "--minsup", 2, "--model", "decomposed", "--witness", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["solutions"] == 4
    ac = next(p for p in rep["patterns"] if p["pattern"] == ["A", "C"])
    assert ac["support"] == 2 and ac["cover"] == [1, 2]
    assert ac["witnesses"]["1"][:2] == [1, 2]


def test_closed_matches_filter(toy_path):
    _, closed_out, _ = call("--data", toy_path, "--minsup", 1, "--closed")
    db = load(toy_path)
    full = mine(db, MiningConfig(theta=1))
    kept = closed_filter([(p.pattern, p.cover) for p in full.patterns])
    expected = [" ".join(db.decode(p)) + "\t" + str(len(c)) for p, c in kept]
    assert closed_out.splitlines() == expected


def test_percent_minsup(toy_path):
    assert call("--data", toy_path, "--minsup", "50%")[1] == call("--data", toy_path, "--minsup", 1)[1]
    assert call("--data", toy_path, "--minsup", "51%")[1] == call("--data", toy_path, "--minsup", 2)[1]


def test_deterministic(toy_path):
    a = call("--data", toy_path, "--minsup", 1, "--model", "decomposed")
    b = call("--data", toy_path, "--minsup", 1, "--model", "decomposed")
    assert a == b


def test_discriminative_flag(tmp_path, toy_path):
    neg = tmp_path / "neg.txt"
    neg.write_text("B\nB\n")
    code, out, _ = call("--data", toy_path, "--discriminative", f"{neg}:1", "--minsup", 2)
    found = {line.split("\t")[0] for line in out.splitlines()}
    # B covers both positives and both negatives: ratio 1 keeps it, 1.5 drops it
    assert code == 0 and "B" in found
    code, out, _ = call("--data", toy_path, "--discriminative", f"{neg}:1.5", "--minsup", 2)
    assert "B" not in {line.split("\t")[0] for line in out.splitlines()}


def test_discriminative_bad_spec(toy_path):
    assert call("--data", toy_path, "--discriminative", "nocolon")[0] == 1


def test_time_limit(tmp_path):
    rng = random.Random(0)
    p = tmp_path / "big.txt"
    p.write_text("".join(" ".join(f"s{rng.randrange(6)}" for _ in range(12)) + "\n" for _ in range(40)))
    code, _, err = call("--data", p, "--minsup", 1, "--time-limit", 0)
    assert code == 3 and "time limit" in err


def test_module_entry_point(toy_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cpsm", "--data", str(toy_path), "--minsup", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 4
