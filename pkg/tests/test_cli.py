import json
import subprocess
import sys

import pytest

from braids import closure
from oddkh import cli, pipeline
from oddkh.linkdiag import BUNDLED_TABLE, TABLE_ENV, add_kink, load_table


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def pd_json(pd):
    return json.dumps([list(x) for x in pd.crossings])


def test_compute_8_19(capsys):
    code, out, _ = run(capsys, "compute", "--knot", "8_19", "--reduced", "--coeffs", "Q")
    assert code == 0
    assert out.strip() == "8_19 odd reduced Q: q^6 + q^10 t^2 + q^16 t^5"


def test_compute_10_152(capsys):
    code, out, _ = run(capsys, "compute", "--knot", "10_152", "--reduced", "--coeffs", "Q", "--json")
    assert code == 0
    obj = json.loads(out)
    assert "3 q^-20 t^-7" in obj["poincare"]
    assert sum(row["rank"] for row in obj["groups"]) == 15


def test_compute_unknot_from_pd(capsys):
    code, out, _ = run(capsys, "compute", "--pd", "PD[X[1,1,2,2]]", "--json")
    assert code == 0
    assert json.loads(out)["groups"] == [
        {"m": 0, "s": -1, "rank": 1, "torsion": []},
        {"m": 0, "s": 1, "rank": 1, "torsion": []},
    ]


def test_open_strand_pd_is_an_input_error(capsys):
    # four distinct labels each used once do not close up
    code, _, err = run(capsys, "compute", "--pd", "PD[X[1,4,2,3]]")
    assert code == 2
    assert "open strands" in err


@pytest.mark.parametrize("argv", [
    ["compute", "--knot", "99_1"],
    ["compute", "--pd", "garbage"],
    ["compute"],
])
def test_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_crossing_cap(capsys):
    code, _, err = run(capsys, "compute", "--knot", "11n_6", "--cap", "10")
    assert code == 3
    assert "cap" in err


def test_large_cap_prints_a_memory_note(capsys):
    code, _, err = run(capsys, "compute", "--knot", "3_1", "--cap", "16")
    assert code == 0
    assert "2^16" in err


def test_torsion_is_reported(capsys):
    code, out, _ = run(capsys, "compute", "--knot", "3_1", "--flavor", "even")
    assert code == 0
    assert "Z/2 at (m=3, s=7)" in out


def test_both_flavors(capsys):
    code, out, _ = run(capsys, "compute", "--knot", "8_19", "--flavor", "both", "--reduced",
                       "--coeffs", "Q", "--json")
    rows = json.loads(out)
    assert [r["flavor"] for r in rows] == ["odd", "even"]
    assert rows[1]["poincare"] == "q^6 + q^10 t^2 + q^12 t^3 + q^12 t^4 + q^16 t^5"


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--max-crossings", "6")
    assert code == 0
    assert out.startswith("ok: 8 diagram(s)")


def test_verify_reports_a_corrupted_assignment(capsys, monkeypatch):
    real = pipeline.edge_assignment

    def corrupted(cube, t="X"):
        return real(cube, t).negated(0, 0)

    monkeypatch.setattr(pipeline, "edge_assignment", corrupted)
    code, out, _ = run(capsys, "verify", "--knot", "3_1", "--check", "gauge", "--json")
    assert code == 1
    failure = json.loads(out)["failures"][0]
    assert failure["check"] == "gauge" and failure["knot"] == "3_1"
    i, b, c = failure["detail"]["face"]
    # the witness is a face containing the negated edge at vertex 0 along crossing 0
    assert 0 in (b, c) and i & (1 << b | 1 << c) == 0


def test_verify_thin_alternating(capsys):
    code, out, _ = run(capsys, "verify", "--check", "thin", "--max-crossings", "10",
                       "--alternating-only")
    assert code == 0
    n = len([r for r in load_table().values() if r.alternating and r.pd.n <= 10])
    assert out.strip() == f"ok: {n} diagram(s), checks thin"


def test_verify_thin_fails_on_a_thick_knot(capsys):
    # 10_132 is thin over Q, but its odd torsion (Z/2, Z/6) sits off the diagonal
    code, out, _ = run(capsys, "verify", "--knot", "10_132", "--check", "thin", "--json")
    assert code == 1
    assert json.loads(out)["failures"][0]["check"] == "thin"


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--knot", "8_19", "--knot", "4_1", "--json")
    assert code == 0
    rows = {r["knot"]: r for r in json.loads(out)}
    assert (rows["8_19"]["odd_rank"], rows["8_19"]["even_rank"]) == (3, 5)
    assert rows["8_19"]["status"] == "differ"
    assert rows["4_1"]["status"] == "both thin" and rows["4_1"]["odd"] == rows["4_1"]["even"]


def test_compare_differ_only(capsys):
    code, out, _ = run(capsys, "compare", "--knot", "8_19", "--knot", "3_1", "--differ-only")
    lines = out.strip().splitlines()
    assert len(lines) == 2 and lines[1].split()[:3] == ["8_19", "3", "5"]


def test_invariance_unknots(capsys):
    two = pd_json(closure([1, -2], 3))
    code, out, _ = run(capsys, "invariance", "--pd", "PD[Loop[1]]", "--pd", "PD[X[1,1,2,2]]",
                       "--pd", two)
    assert code == 0
    assert out.startswith("ok: 3 diagram(s) agree")


def test_invariance_trefoil_and_stabilization(capsys):
    t = load_table()["3_1"].pd
    code, _, _ = run(capsys, "invariance", "--pd", pd_json(t), "--pd", pd_json(add_kink(t, 4, 1)))
    assert code == 0


def test_invariance_catches_different_knots(capsys):
    table = load_table()
    code, out, _ = run(capsys, "invariance", "--pd", pd_json(table["3_1"].pd),
                       "--pd", pd_json(table["4_1"].pd), "--json")
    assert code == 1
    assert json.loads(out)["detail"]["diagram"] == 1


def test_dump_cube(capsys):
    code, out, _ = run(capsys, "dump-cube", "--knot", "8_19", "--type", "Y")
    assert code == 0
    obj = json.loads(out)
    assert obj["knot"] == "8_19" and obj["assignment_type"] == "Y"
    assert len(obj["edge_signs"]) == 8 * 2 ** 7
    assert {f["type"] for f in obj["faces"]} >= {"X", "Y"}


def test_dump_complex(capsys):
    code, out, _ = run(capsys, "dump-complex", "--knot", "3_1", "--reduced", "--compact")
    assert code == 0
    obj = json.loads(out)
    assert obj["reduced"] == "basepoint" and obj["knot"] == "3_1"
    assert sum(r["rank"] for r in obj["ranks"]) == len(obj["generators"])


def test_json_is_deterministic_across_worker_counts(capsys):
    argv = ["compute", "--knot", "6_1", "--knot", "7_3", "--knot", "8_19", "--json"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv, "--jobs", "2")[1]
    c = run(capsys, *argv)[1]
    assert a == b == c


def test_json_round_trip(capsys):
    from oddkh import homology as H
    out = run(capsys, "compute", "--knot", "9_42", "--json")[1]
    assert H.group_from_json(json.loads(out)) == pipeline.compute(load_table()["9_42"])


def test_table_environment_variable(capsys, tmp_path, monkeypatch):
    rows = [r for r in json.loads(BUNDLED_TABLE.read_text()) if r["name"] in ("3_1", "4_1")]
    path = tmp_path / "two.json"
    path.write_text(json.dumps(rows))
    monkeypatch.setenv(TABLE_ENV, str(path))
    code, out, _ = run(capsys, "verify", "--check", "euler")
    assert code == 0 and out.startswith("ok: 2 diagram(s)")
    assert run(capsys, "compute", "--knot", "5_1")[0] == 2
    monkeypatch.delenv(TABLE_ENV)
    assert run(capsys, "compute", "--knot", "5_1", "--table", str(path))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "oddkh.cli", "compute", "--knot", "3_1",
                           "--reduced", "--coeffs", "Q"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "3_1 odd reduced Q: q^2 + q^6 t^2 + q^8 t^3"
