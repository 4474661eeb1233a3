import json
import random
import subprocess
import sys
from fractions import Fraction as F

import pytest

from generators import random_metric, shift_system, star_system
from persmod import io
from persmod.cli import main
from persmod.complexes import counterexample_triple
from persmod.core import interval_module
from persmod.kan import verify_coherent
from persmod.spacetime import FiniteMetricSpace


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(io.dumps(obj))
        return str(path)

    out = {
        "i04": write("interval_0_4.json", io.module_to_json(interval_module(2, 0, 4))),
        "i15": write("interval_1_5.json", io.module_to_json(interval_module(2, 1, 5))),
        "tri": [write(f"t{k}.json", io.module_to_json(u)) for k, u in enumerate(counterexample_triple())],
    }
    rng = random.Random(0)
    space = FiniteMetricSpace(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    out["system"] = write("system.json", io.system_to_json(shift_system(rng, space)))
    out["metric"] = write("metric.json", io.metric_to_json(random_metric(rng, 4)))
    big = FiniteMetricSpace(["a", "b", "c", "z"], [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 3], [1, 2, 3, 0]])
    out["big"] = write("big.json", io.metric_to_json(big))
    star = None
    while star is None:
        star = star_system(rng, 3, radius=F(1, 2))
    out["star"] = write("star.json", io.system_to_json(star))
    out["dir"] = tmp_path
    out["write"] = write
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_documented_examples(capsys, files):
    code, out, _ = run(capsys, "barcode", "-i", files["i04"])
    assert code == 0 and out == '{"points":[{"birth":"0","death":"4","mult":1}]}\n'
    code, out, _ = run(capsys, "distance", files["i04"], files["i15"])
    assert code == 0 and json.loads(out) == {"distance": "1"}
    code, out, _ = run(capsys, "coherence", files["system"])
    assert code == 0 and json.loads(out) == {"coherent": True}


def test_oracle_and_eta(capsys, files):
    code, out, _ = run(capsys, "oracle", files["i04"], files["i15"])
    assert code == 0 and json.loads(out) == {"distance": "1"}
    code, out, _ = run(capsys, "oracle", files["i04"], files["i15"], "--e", "1/2")
    assert code == 0 and json.loads(out) == {"e": "1/2", "interleaved": False}
    code, out, _ = run(capsys, "oracle", files["i04"], files["i15"], "--e", "1")
    res = json.loads(out)
    assert res["interleaved"] and {"phi", "psi"} <= set(res)
    code, out, _ = run(capsys, "eta-check", files["metric"], "--samples", "0,1/2,3")
    res = json.loads(out)
    assert code == 0 and res["isometric"] and len(res["pairs"]) == 6


def test_violated_identity_reported(capsys, files):
    data = json.loads(open(files["system"]).read())
    phi = data["morphisms"]["a->b"]
    phi["components"] = [[[0] * len(row) for row in c] for c in phi["components"]]
    path = files["write"]("zeroed.json", data)
    code, out, _ = run(capsys, "coherence", path)
    res = json.loads(out)
    assert code == 0 and res["coherent"] is False and "a" in res["violation"]


def test_inconsistent_system_rejected(capsys, files):
    data = json.loads(open(files["system"]).read())
    data["metric"]["dist"] = [["0", "2", "4"], ["2", "0", "2"], ["4", "2", "0"]]
    path = files["write"]("stretched.json", data)
    code, out, err = run(capsys, "coherence", path)
    assert code == 2 and "error" in err


def test_extend_and_interpolation(capsys, files):
    for mode in ("lan", "ran", "image"):
        code, out, _ = run(capsys, "extend", files["system"], "--metric", files["big"], "--mode", mode)
        assert code == 0
        ext = io.system_from_json(json.loads(out))
        assert set(ext.points) == {"a", "b", "c", "z"} and verify_coherent(ext)
    code, out, _ = run(capsys, "interpolate-segment", files["i04"], files["i15"], "--e", "1", "--samples", "0,1/4,1/2,1")
    res = json.loads(out)
    assert code == 0 and set(res["modules"]) == {"0", "1/4", "1/2", "1"}
    assert res["modules"]["0"] == io.module_to_json(interval_module(2, 0, 4))
    code, out, _ = run(capsys, "interpolate-star", files["star"])
    res = json.loads(out)
    assert code == 0 and res["e"] == "1/2" and set(res["interleavings"]) == {"a0", "a1", "a2"}


def test_complex_commands(capsys, files):
    tri = files["tri"]
    code, out, _ = run(capsys, "rips", *tri, "--e", "1")
    assert code == 0 and [0, 1, 2] in json.loads(out)["simplices"]
    code, out, _ = run(capsys, "cech", *tri, "--e", "3/4")
    res = json.loads(out)
    assert code == 0 and [0, 1, 2] not in res["simplices"] and [0, 1] in res["simplices"]
    code, out, _ = run(capsys, "cech", *tri, "--e", "1", "--max-dim", "1")
    assert code == 0 and [0, 1, 2] not in json.loads(out)["simplices"]
    code, out, _ = run(capsys, "sandwich", *tri, "--e", "1/2")
    res = json.loads(out)
    assert code == 0 and res["holds"] and res["violations"] == []


def test_budget_exit_code(capsys, files):
    code, out, err = run(capsys, "cech", *files["tri"], "--e", "3/4", "--budget", "2")
    assert code == 3 and json.loads(out)["unknown"] and "budget" in err
    quad = {"p": 2, "grid": ["0"], "dims": [4], "maps": []}
    path = files["write"]("quad.json", quad)
    code, _, err = run(capsys, "oracle", path, path, "--e", "0", "--budget", "16")
    assert code == 3 and err


def test_invalid_input(capsys, files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    cases = [
        ("barcode", str(bad)),
        ("barcode", str(tmp_path / "nope.json")),
        ("distance", files["i04"]),
        ("distance", files["i04"], files["i15"], "--p", "3"),
        ("frobnicate",),
        ("rips", files["i04"]),
        ("rips", files["i04"], "--e", "-1"),
        ("rips", files["i04"], "--e", "abc"),
        ("cech", files["i04"], "--e", "1", "--mode", "sideways"),
        ("extend", files["system"]),
        ("interpolate-segment", files["i04"], files["i15"], "--e", "1/2"),
    ]
    for argv in cases:
        code, out, err = run(capsys, *argv)
        assert code == 2, argv
        assert out == "" and err, argv


def test_deterministic_and_output_file(capsys, files):
    argv = ["cech", *files["tri"], "--e", "1"]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    target = files["dir"] / "out.json"
    code, out, _ = run(capsys, *argv, "-o", target)
    assert code == 0 and out == "" and target.read_text() == first


def test_console_script(files):
    proc = subprocess.run(
        [sys.executable, "-m", "persmod.cli", "distance", files["i04"], files["i15"]],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout) == {"distance": "1"}
