import json
import subprocess
import sys
from pathlib import Path

import pytest

from fpduality import builtin, encode_graph
from fpduality.cli import main
from fpduality.files import (
    dumps,
    forest_to_json,
    json_to_forest,
    json_to_partition,
    json_to_problem,
    json_to_structure,
    partition_to_json,
    problem_to_json,
    structure_to_json,
)
from fpduality.errors import FormatError
from fpduality.relstruct import GRAPH_SIG, Structure, as_coloured
from fpduality.treedepth import Partition, RootedForest
from conftest import C, K, P


def write_structure(tmp_path, name, S):
    path = tmp_path / name
    path.write_text(dumps(structure_to_json(S)))
    return str(path)


def test_structure_json_roundtrip(tmp_path):
    path = write_structure(tmp_path, "k3.json", K(3))
    text = Path(path).read_text()
    S = json_to_structure(json.loads(text))
    assert dumps(structure_to_json(S)) == text  # byte-identical round trip


def test_structure_json_errors():
    with pytest.raises(FormatError) as err:
        json_to_structure(
            {"signature": {"E": 2}, "elements": ["a"], "relations": {"E": [["a", "zz"]]}}
        )
    assert "relations.E[0]" in str(err.value)
    with pytest.raises(FormatError):
        json_to_structure({"signature": {"E": 2}, "elements": ["a", "a"], "relations": {}})
    with pytest.raises(FormatError):
        json_to_structure({"elements": [], "relations": {}})


def test_coloured_structure_roundtrip(tmp_path):
    CS = as_coloured(K(2), "red", "solid")
    obj = structure_to_json(CS)
    back = json_to_structure(obj)
    assert back.vcol == {0: "red", 1: "red"}
    assert set(back.ecol.values()) == {"solid"}


def test_pattern_colour_outside_palette_rejected():
    P0 = builtin("vertex-no-mono-tri")
    obj = problem_to_json(P0)
    obj["patterns"][0]["vertex_colours"][
        list(obj["patterns"][0]["vertex_colours"])[0]
    ] = "zebra"
    with pytest.raises(FormatError):
        json_to_problem(obj)


def test_problem_roundtrip():
    for name in ("vertex-no-mono-tri", "edge-no-mono-tri", "tri-free-tri"):
        P0 = builtin(name)
        P1 = json_to_problem(problem_to_json(P0))
        assert len(P1.patterns) == len(P0.patterns)
        assert P1.undirected == P0.undirected


def test_forest_partition_roundtrip():
    S = P(4)
    forest = RootedForest(S.domain, {1: 0, 2: 1, 3: 2})
    back = json_to_forest(forest_to_json(forest, S), S)
    assert back.parent == forest.parent
    part = Partition({x: x % 2 + 1 for x in S.domain}, q=2)
    back2 = json_to_partition(partition_to_json(part, S), S)
    assert back2.part_of == part.part_of


def test_cli_decide_exit_codes(tmp_path):
    k6 = write_structure(tmp_path, "k6.json", K(6))
    k5 = write_structure(tmp_path, "k5.json", K(5))
    assert main(["decide", "--problem", "edge-no-mono-tri", "--input", k6]) == 1
    witness = str(tmp_path / "w.json")
    assert (
        main(["decide", "--problem", "edge-no-mono-tri", "--input", k5, "--witness", witness])
        == 0
    )
    loaded = json_to_structure(json.loads(Path(witness).read_text()))
    from fpduality.patterns import is_valid

    assert is_valid(loaded, builtin("edge-no-mono-tri"))


def test_cli_usage_and_format_errors(tmp_path):
    assert main(["decide", "--problem", "edge-no-mono-tri", "--input", "missing.json"]) == 2
    assert main(["no-such-verb"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["treedepth", "--input", str(bad)]) == 2


def test_cli_budget_exit(tmp_path):
    k6 = write_structure(tmp_path, "k6.json", K(6))
    assert (
        main(["decide", "--problem", "edge-no-mono-tri", "--input", k6, "--budget", "5"]) == 3
    )


def test_cli_treedepth_and_witness(tmp_path):
    p4 = write_structure(tmp_path, "p4.json", P(4))
    out = str(tmp_path / "forest.json")
    assert main(["treedepth", "--input", p4, "--out", out]) == 0
    obj = json.loads(Path(out).read_text())
    assert obj["height"] == 3


def test_cli_hom_sparse_core(tmp_path):
    p4 = write_structure(tmp_path, "p4.json", P(4))
    k3 = write_structure(tmp_path, "k3.json", K(3))
    hout = str(tmp_path / "h.json")
    assert main(["hom", p4, k3, "--out", hout]) == 0
    assert main(["hom", k3, p4]) == 1
    oout = str(tmp_path / "o.json")
    assert main(["sparse", "--input", p4, "--k", "1", "--out", oout]) == 0
    assert main(["sparse", "--input", write_structure(tmp_path, "k4.json", K(4)), "--k", "1"]) == 1
    cout = str(tmp_path / "core.json")
    assert main(["core", "--input", p4, "--out", cout]) == 0
    core_obj = json_to_structure(json.loads(Path(cout).read_text()))
    assert core_obj.size == 2


def test_cli_gen_deterministic(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (out1, out2):
        assert main(["gen", "--class", "degree2", "--max-n", "4", "--out", out]) == 0
    files1 = sorted(Path(out1).iterdir())
    files2 = sorted(Path(out2).iterdir())
    assert [f.name for f in files1] == [f.name for f in files2]
    assert all(a.read_bytes() == b.read_bytes() for a, b in zip(files1, files2))
    assert len(files1) == 6  # P1..P4, C3, C4


def test_cli_gen_sparse_witness(tmp_path):
    out = str(tmp_path / "gn")
    assert main(["gen", "--class", "k-sparse-witness", "--count", "2", "--out", out]) == 0
    first = json.loads(sorted(Path(out).iterdir())[0].read_text())
    assert first["stamp"]["class"] == "k-sparse-witness"
    S = json_to_structure({k: v for k, v in first.items() if k != "stamp"})
    assert S.size == 4  # G_2


def test_cli_mmsnp_and_encode(tmp_path):
    src = tmp_path / "v.mmsnp"
    src.write_text(
        "exists M. forall x,y,z. "
        "!(E(x,y)&E(y,z)&E(z,x)&M(x)&M(y)&M(z)) & "
        "!(E(x,y)&E(y,z)&E(z,x)&!M(x)&!M(y)&!M(z))\n"
    )
    pout = str(tmp_path / "p.json")
    assert main(["mmsnp-compile", str(src), "--out", pout]) == 0
    sout = str(tmp_path / "back.mmsnp")
    assert main(["mmsnp-decompile", pout, "--out", sout]) == 0
    assert "exists" in Path(sout).read_text()
    enmt = tmp_path / "enmt.json"
    enmt.write_text(dumps(problem_to_json(builtin("edge-no-mono-tri"))))
    eout = str(tmp_path / "enc.json")
    assert main(["encode-fpp2", str(enmt), "--out", eout]) == 0
    assert json.loads(Path(eout).read_text())["signature"] == {"R": 3, "T": 1}
    bad = tmp_path / "bad.mmsnp"
    bad.write_text("exists M. forall x,y. !(E(x,y)&M(x))\n")
    assert main(["mmsnp-compile", str(bad), "--out", pout]) == 2  # not primitive


def test_cli_universal_and_verify(tmp_path):
    tri = encode_graph([0, 1, 2], [(0, 1), (1, 2), (2, 0)])
    from fpduality.patterns import Problem

    Pt = Problem(GRAPH_SIG, ("-",), ("-",), [as_coloured(tri, "-", "-")],
                 undirected=True, name="tri-free")
    ppath = tmp_path / "trifree.json"
    ppath.write_text(dumps(problem_to_json(Pt)))
    upath = str(tmp_path / "U.json")
    assert main(["universal-bd", "--problem", str(ppath), "--degree", "1", "--out", upath]) == 0
    assert Path(upath + ".provenance.json").exists()
    rpath = str(tmp_path / "r.json")
    assert main([
        "verify", "--template", upath, "--problem", str(ppath),
        "--class", "degree1", "--max-n", "2", "--out", rpath,
    ]) == 0
    report = json.loads(Path(rpath).read_text())
    assert report["cases"] == 2 and not report["disagreements"]


def test_cli_tproduct_and_product(tmp_path):
    k2 = write_structure(tmp_path, "k2.json", K(2))
    out = str(tmp_path / "prod.json")
    assert main(["product", k2, k2, "--out", out]) == 0
    assert json_to_structure(json.loads(Path(out).read_text())).size == 4
    coloured = tmp_path / "c.json"
    coloured.write_text(dumps(structure_to_json(as_coloured(K(2), "a", "x"))))
    tout = str(tmp_path / "tp.json")
    assert main(["tproduct", "--input", str(coloured), "--p", "2", "--out", tout]) == 0
    obj = json.loads(Path(tout).read_text())
    assert len(obj["coordinates"]) == 4


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "fpduality.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "universal-bd" in proc.stdout
