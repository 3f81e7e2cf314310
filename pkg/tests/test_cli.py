from __future__ import annotations

import json
import subprocess
import sys

import pytest

from f2sketch.cli import main
from f2sketch.sketch import SketchInstance
from f2sketch.streamsim import automaton_from_sketch


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dim_prints_dimension(capsys):
    assert call(capsys, "dim", "--fn", "maj3k:1") == (0, "3\n", "")


def test_profile_parity_jump(capsys):
    code, out, _ = call(capsys, "--json", "profile", "--fn", "parity:5")
    assert code == 0
    w = json.loads(out)["profile"]["w"]
    assert w == ["0", "1", "1", "1", "1", "1"]


def test_rationals_are_p_over_q(capsys):
    _, out, _ = call(capsys, "--json", "dim", "--fn", "maj:3", "--d", "2")
    assert json.loads(out)["w_d"]["weight"] == "1/2"
    _, out, _ = call(capsys, "--json", "spectrum", "--fn", "parity:2")
    assert json.loads(out)["coefficients"] == {"11": "1/1"}


def test_check_recmaj(capsys):
    code, out, _ = call(capsys, "check", "recmaj-4d-over-n", "--k", "2")
    assert code == 0 and out.startswith("PASS recmaj-4d-over-n")


def test_unknown_subcommand_exits_2(capsys):
    code, _, err = call(capsys, "frobnicate")
    assert code == 2 and "invalid choice" in err


def test_missing_subcommand_exits_2(capsys):
    assert call(capsys)[0] == 2


def test_validation_error_exits_2(capsys):
    code, _, err = call(capsys, "dim", "--fn", "maj:x")
    assert code == 2 and err.startswith("error:")


def test_cap_exceeded_exits_3(capsys):
    code, _, err = call(capsys, "--caps", "arity=8", "dim", "--fn", "maj:9")
    assert code == 3 and "cap" in err
    # caps may also follow the subcommand
    assert call(capsys, "dim", "--fn", "maj:9", "--caps", "arity=8")[0] == 3


def test_malformed_file_reports_line(capsys, tmp_path):
    p = tmp_path / "f.tt"
    p.write_text("n=2\n01x1\n")
    code, _, err = call(capsys, "dim", "--fn", str(p))
    assert code == 2 and "line 2" in err
    s = tmp_path / "s.txt"
    s.write_text("n=3\n1\n2\nseven\n")
    a = tmp_path / "a.json"
    a.write_text(json.dumps(automaton_from_sketch(SketchInstance(3, [1], [1, -1])).to_json()))
    code, _, err = call(capsys, "stream", "run", "--algo", str(a), "--stream", str(s))
    assert code == 2 and "line 4" in err


def test_json_output_is_reproducible(capsys, tmp_path):
    scheme = tmp_path / "p.json"
    assert call(capsys, "sketch", "build", "--kind", "parity", "--fn", "hamge:8:7", "--delta", "1/8", "--out", str(scheme))[0] == 0
    argv = ["--json", "--seed", "9", "sketch", "eval", "--scheme", str(scheme), "--fn", "hamge:8:7", "--mode", "monte:40"]
    first = call(capsys, *argv)[1]
    second = call(capsys, *argv)[1]
    assert first == second
    a = call(capsys, "--json", "--workers", "1", "profile", "--fn", "maj:5")[1]
    b = call(capsys, "--json", "--workers", "2", "profile", "--fn", "maj:5")[1]
    assert a == b


def test_sketch_build_and_exact_eval(capsys, tmp_path):
    out = tmp_path / "det.json"
    assert call(capsys, "sketch", "build", "--kind", "det", "--fn", "maj:3", "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["k"] == 3
    code, text, _ = call(capsys, "--json", "sketch", "eval", "--scheme", str(out), "--fn", "maj:3")
    assert code == 0 and json.loads(text)["uniform_avg"] == "0/1"
    code, text, _ = call(capsys, "sketch", "build", "--kind", "sign", "--fn", "maj:3", "--d", "2")
    assert code == 0 and json.loads(text)["kind"] == "sign-trick"
    assert call(capsys, "sketch", "build", "--kind", "sign", "--fn", "maj:3")[0] == 2


def test_ltf_sketch_cli(capsys, tmp_path):
    out = tmp_path / "ltf.json"
    assert call(capsys, "sketch", "build", "--kind", "ltf", "--fn", "hamge:64:4", "--delta", "1/10", "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["k"] == 20
    code, text, _ = call(
        capsys, "--json", "sketch", "eval", "--scheme", str(out), "--fn", "hamge:64:4", "--mode", "monte:100", "--weights", "3,4,5"
    )
    assert code == 0 and json.loads(text)["trials"] == 100


def test_comm_commands(capsys, tmp_path):
    code, out, _ = call(capsys, "--json", "comm", "onebit", "--fn", "chi:1000:0", "--dist", "sec7")
    assert code == 0 and json.loads(out)["min_error"] == "3/16"
    proto = tmp_path / "p.json"
    proto.write_text(json.dumps({"n": 2, "c": 2, "message": "e4"}))  # message(x) = x
    code, out, _ = call(capsys, "--json", "comm", "eval", "--protocol", str(proto), "--fn", "and:2")
    assert code == 0 and json.loads(out)["error"] == "0/1"


def test_stream_commands(capsys, tmp_path):
    s = tmp_path / "s.txt"
    assert call(capsys, "stream", "gen", "--model", "1", "--n", "3", "--seed", "4", "--out", str(s))[0] == 0
    assert s.read_text().startswith("n=3\n")
    det = tmp_path / "d.json"
    call(capsys, "sketch", "build", "--kind", "det", "--fn", "maj:3", "--out", str(det))
    code, out, _ = call(capsys, "--json", "stream", "run", "--algo", str(det), "--stream", str(s))
    assert code == 0 and json.loads(out)["output"] in (1, -1)
    a = tmp_path / "a.json"
    a.write_text(json.dumps(automaton_from_sketch(SketchInstance(3, [0b011, 0b110], [1, -1, -1, 1])).to_json()))
    code, out, _ = call(capsys, "--json", "stream", "kernel", "--automaton", str(a))
    rep = json.loads(out)
    assert code == 0 and rep["kernel_basis"] == ["111"] and rep["coset_check"]
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"n": 2, "states": 3, "delta": [[1, 0], [2, 1], [0, 2]], "output": [1, -1, 1]}))
    code, out, _ = call(capsys, "--json", "stream", "kernel", "--automaton", str(bad))
    assert code == 2 and json.loads(out)["witness"] == [[1, 1], []]


def test_version(capsys):
    code, out, _ = call(capsys, "--version")
    assert code == 0 and "formats" in json.loads(out)


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "f2sketch.cli", "dim", "--fn", "parity:4"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "1\n"


@pytest.mark.parametrize("argv", [["sketch"], ["stream", "gen", "--model", "3", "--n", "4"], ["check", "nosuch"]])
def test_bad_argument_shapes(capsys, argv):
    assert call(capsys, *argv)[0] == 2
