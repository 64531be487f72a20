import io
import json

import pytest

from monodimer.cli import run
from monodimer.exact import z_exact
from monodimer.graph import cycle_graph, path_graph


@pytest.fixture
def files(tmp_path):
    p4 = tmp_path / "p4.txt"
    p4.write_text(path_graph(4).to_text())
    c6 = tmp_path / "c6.txt"
    c6.write_text(cycle_graph(6).to_text())
    return tmp_path, p4, c6


def call(args):
    out = io.StringIO()
    code = run([str(a) for a in args], out)
    lines = out.getvalue().splitlines()
    kv = dict(line.split("=", 1) for line in lines if "=" in line and " " not in line.split("=", 1)[0])
    return code, kv, lines


def test_exact_path(files):
    _, p4, _ = files
    code, kv, _ = call(["exact", "--graph", p4, "--gamma", "-1/1 0/1"])
    assert code == 0 and kv["Z"] == "-1"


def test_approx_matches_exact(files):
    _, _, c6 = files
    code, kv, _ = call(["approx", "--graph", c6, "--gamma", "0 1", "--eps", "0.01", "--family", "3,1,1", "--check"])
    assert code == 0 and kv["certified"] == "True"
    assert complex(kv["Z_hat"].replace("i", "j")) == pytest.approx(complex(z_exact(cycle_graph(6), "0 1")))


def test_gadget_vertex_record(files):
    tmp, _, _ = files
    out = tmp / "g.json"
    code, kv, _ = call(["--output", out, "gadget-vertex", "--gamma", "-1 0", "--lambda", "5/1",
                        "--eps", "1/1048576", "--verify"])
    assert code == 0 and kv["kind"] == "vertex_activity"
    rec = json.loads(out.read_text())
    from monodimer.gadgets.gadget import Gadget
    g = Gadget.from_record(rec["result"])
    assert g.verify() and abs(g.achieved["ratio"] - 5) <= g.accuracy


def test_gadget_edge(files):
    code, kv, _ = call(["gadget-edge", "--gamma", "-1", "--gamma-prime=-1/10", "--eps", "1/100"])
    assert code == 0 and kv["kind"] == "edge_activity"


def test_saw_profile_paths(files):
    _, _, c6 = files
    code, kv, _ = call(["saw", "--graph", c6, "--depth", "3", "--gamma", "1/2"])
    assert code == 0 and kv["level_sizes"] == "1,2,2,2"
    code, kv, _ = call(["profile", "--graph", c6, "--family", "2,1,1", "--l-max", "5"])
    assert code == 0 and kv["verdict"] == "pass"
    code, _, lines = call(["paths-table", "--n-max", "6"])
    assert code == 0 and [l.split("Z=")[1] for l in lines] == ["1", "0", "-1", "-1", "0", "1"]


def test_contraction_scan(files):
    code, _, lines = call(["contraction-scan", "--gamma", "0 1", "--delta", "3", "--trials", "200"])
    assert code == 0 and len(lines) == 3
    assert all(float(l.rsplit("=", 1)[1]) <= 1 for l in lines)


def test_zero_scan(files):
    _, _, c6 = files
    code, kv, lines = call(["zero-scan", "--graph", c6, "--steps", "6"])
    assert code == 0 and kv["zeros_off_ray"] == "0" and kv["grid_points"] == "49"


def test_reduce_demo(files):
    _, p4, _ = files
    code, kv, _ = call(["reduce-demo", "--graph", p4, "--edge", "1,2"])
    assert code == 0 and kv["matches_exact"] == "True"


def test_output_is_reproducible(files):
    tmp, p4, _ = files
    a, b = tmp / "a.json", tmp / "b.json"
    call(["--output", a, "reduce-demo", "--graph", p4, "--edge", "0,1", "--oracle", "norm_factor_1_01",
          "--noise", "random", "--seed", "3"])
    call(["--output", b, "reduce-demo", "--graph", p4, "--edge", "0,1", "--oracle", "norm_factor_1_01",
          "--noise", "random", "--seed", "3"])
    assert a.read_text() == b.read_text()


def test_exit_codes(files):
    tmp, p4, c6 = files
    assert call(["approx", "--graph", c6, "--gamma", "-1", "--eps", "0.1", "--family", "3,1,1"])[0] == 1
    assert call(["exact", "--graph", tmp / "missing.txt", "--gamma", "1"])[0] == 2
    assert call(["exact", "--graph", p4, "--gamma", "one"])[0] == 2
    assert call(["exact", "--bogus"])[0] == 2
    assert call(["frobnicate"])[0] == 2
    bad = tmp / "bad.txt"
    bad.write_text("2 1\n1 0\n")
    assert call(["exact", "--graph", bad, "--gamma", "1"])[0] == 2
    assert call(["reduce-demo", "--graph", p4, "--edge", "0,3"])[0] == 1
