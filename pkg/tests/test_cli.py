import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from ctkit import __version__
from ctkit.cli import run
from ctkit.structure import Theorem2Report

DATA = Path(__file__).resolve().parent.parent / "data"


def fields(text):
    out = {}
    for line in text.splitlines():
        if ": " in line and not line.startswith("#"):
            k, v = line.split(": ", 1)
            out.setdefault(k, v)
    return out


def mod(name):
    return str(DATA / name)


def test_invariants_examples():
    code, out, _ = run(["invariants", "--module", mod("rg_q8.txt")])
    f = fields(out)
    assert code == 0 and (f["d_R"], f["r_R"], f["d_K"]) == ("8", "1", "8")
    code, out, _ = run(["invariants", "--module", mod("trivial_z2_c2.txt")])
    f = fields(out)
    assert (f["d_R"], f["r_R"], f["d_K"]) == ("1", "1", "0")


def test_table_header_carries_provenance():
    _, out, _ = run(["invariants", "--module", mod("rg_c2.txt"), "--seed", "7"])
    first = out.splitlines()[0]
    assert first.startswith(f"# ctkit {__version__} invariants p=2 e=8 seed=7 input.module=rg_c2.txt sha256:")


def test_parse_error_has_location(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("format: 1\np: 2\ne: x\n")
    code, out, err = run(["invariants", "--module", str(bad)])
    assert code == 1 and out == "" and f"{bad}:3:" in err


def test_cohomology_examples():
    code, out, _ = run(["cohomology", "--module", mod("rg_c2.txt"), "--all-subgroups"])
    assert code == 0 and fields(out)["all_zero"] == "yes"
    code, out, _ = run(["cohomology", "--module", mod("rg_mod_aug2_c2.txt"), "--degrees", "0",
                        "--format", "csv"])
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["subgroup", "degree", "group", "orders"]
    assert rows[1][1:] == ["0", "Z/2", "2"]
    code, _, err = run(["cohomology", "--module", mod("rg_c2.txt"), "--degrees", "3"])
    assert code == 1 and "outside" in err


def test_negative_degree_window():
    code, out, _ = run(["cohomology", "--module", mod("trivial_z2_c2.txt"), "--degrees=-2..-1",
                        "--format", "csv"])
    assert code == 0 and [r[1] for r in csv.reader(io.StringIO(out))][1:] == ["-2", "-1"]


def test_split_examples():
    code, out, _ = run(["split", "--module", mod("f2c2_plus_rg_c2.txt")])
    f = fields(out)
    assert code == 0 and f["verdict"] == "CT" and f["checked"] == "yes"
    code, out, _ = run(["split", "--module", mod("rg_mod_aug2_c3.txt"), "--format", "record"])
    f = fields(out)
    assert f["verdict"] == "not-CT" and f["split"] == "refused" and f["witness_degree"] == "0"


def test_theorem2_record():
    code, out, _ = run(["theorem2", "--module", mod("trivial_z2_c2.txt"), "--format", "record"])
    f = fields(out)
    assert code == 0
    assert f["tool"] == f"ctkit {__version__}" and f["command"] == "theorem2"
    assert (f["r_R(M)"], f["formula"], f["match"], f["corollary"]) == ("2", "2", "yes", "holds")
    code, _, err = run(["theorem2", "--module", mod("rg_c2.txt")])
    assert code == 1


def test_contradiction_exit_code(monkeypatch):
    import ctkit.structure as structure
    monkeypatch.setattr(structure, "verify_theorem2", lambda A, pres=None: Theorem2Report(5, 1, 0, 0))
    code, _, _ = run(["theorem2", "--module", mod("trivial_z2_c2.txt")])
    assert code == 4


def test_tensor_csv():
    code, out, _ = run(["tensor", "--p", "3", "--r", "2", "--s", "2", "--format", "csv"])
    assert code == 0 and out == "p,n,r,s,parts\n3,1,2,2,3+1\n"
    code, out, _ = run(["tensor", "--p", "2", "--n", "2", "--format", "csv"])
    assert len(out.splitlines()) == 17
    assert run(["tensor", "--p", "4"])[0] == 1


def test_zeta_outputs(tmp_path):
    out_path = tmp_path / "z.csv"
    code, out, _ = run(["zeta", "--group", "C2", "--window", "4", "--format", "csv",
                        "--out", str(out_path)])
    assert code == 0 and out == ""
    assert out_path.read_text() == "n,c_n\n0,1\n1,0\n2,1\n3,2\n4,3\n"
    fit = fields((tmp_path / "z.csv.fit").read_text())
    assert fit["fitted"] == "(1 - 2*t + 2*t^2) / (1 - 2*t + t^2)" and fit["next_predicted"] == "4"
    assert run(["zeta", "--group", "C3", "--window", "5"])[0] == 2
    assert run(["zeta", "--group", "C3", "--window", "2", "--budget", "10"])[0] == 2


def test_zeta_cache(tmp_path):
    cache = tmp_path / "cache.txt"
    a = run(["zeta", "--group", "C2", "--window", "3", "--cache", str(cache)])
    assert cache.exists()
    b = run(["zeta", "--group", "C2", "--window", "3", "--cache", str(cache)])
    assert a == b


def test_schmid():
    code, out, _ = run(["schmid", "--group", "D8"])
    assert code == 0 and fields(out)["verdict"] == "not-CT"
    code, out, _ = run(["schmid", "--group", str(DATA / "q8_unnamed.group.txt")])
    assert fields(out)["verdict"] == "not-CT"
    code, _, err = run(["schmid", "--group", "C4"])
    assert code == 1 and "abelian" in err


def test_precision_exit_code(tmp_path):
    # 15^2 = 1 mod 32 but not over Z_2: the module does not lift
    m = tmp_path / "m.txt"
    m.write_text("format: 1\np: 2\ne: 5\ngroup: C2\ntorsion:\nfree_rank: 1\naction:\n15\n")
    code, _, err = run(["cohomology", "--module", str(m)])
    assert code == 3 and "precision" in err


def test_usage_errors():
    assert run([])[0] == 1
    assert run(["nope"])[0] == 1
    assert run(["invariants"])[0] == 1
    assert run(["invariants", "--module", mod("rg_c2.txt"), "--p", "3"])[0] == 1
    assert run(["--version"])[0] == 0


def test_reproducible_output():
    argv = ["cohomology", "--module", mod("f2c2_plus_rg_c2.txt"), "--all-subgroups", "--format", "record"]
    assert run(argv) == run(argv)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ctkit.cli", "tensor", "--p", "2", "--format", "csv"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("p,n,r,s,parts\n")
