import io
import json

import pytest

from twistkit.cli import main, run
from twistkit.io import bundled_path

CASES = json.loads(bundled_path("manifest.json").read_text())["cases"]


def call(args):
    buf = io.StringIO()
    code = run(args, buf)
    return code, buf.getvalue()


@pytest.mark.parametrize("case", CASES, ids=[" ".join(c["args"]) for c in CASES])
def test_manifest_case(case):
    code, out = call(case["args"])
    assert code == case["exit"], out
    assert case["contains"] in out


@pytest.mark.parametrize("case", CASES[:8] + CASES[20:32], ids=[" ".join(c["args"]) for c in CASES[:8] + CASES[20:32]])
def test_json_output_is_deterministic(case):
    code1, a = call(case["args"] + ["--json"])
    code2, b = call(case["args"] + ["--json"])
    assert a == b and code1 == code2 == case["exit"]
    assert json.loads(a)["exit"] == case["exit"]


def test_invalid_input_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "complex", "ranks": {"0": 1,}}')
    code, out = call(["homology", str(p)])
    assert code == 2 and out.startswith("error: ") and f"{p}:1:" in out
    code, out = call(["homology", str(p), "--json"])
    assert code == 2 and json.loads(out)["exit"] == 2
    code, out = call(["homology", str(tmp_path / "nope.json")])
    assert code == 2 and "no such file" in out


def test_wrong_kind_exits_2():
    code, out = call(["ttp", "hollow_triangle.json"])
    assert code == 2


def test_unknown_family_exits_2():
    code, out = call(["superconn", "flatness", "--family", "nope"])
    assert code == 2 and "unknown family" in out


def test_usage_error_exits_2(capsys):
    assert main(["no-such-command"]) == 2


def test_bad_worker_count_exits_2(monkeypatch):
    monkeypatch.setenv("TWISTKIT_WORKERS", "zero")
    code, out = call(["superconn", "homotopy", "--family", "flat-xy", "--grid", "20", "--steps", "40"])
    assert code == 2 and "TWISTKIT_WORKERS" in out


def test_workers_do_not_change_output(monkeypatch):
    args = ["superconn", "homotopy", "--family", "flat-xy", "--grid", "40", "--steps", "80", "--json"]
    monkeypatch.setenv("TWISTKIT_WORKERS", "1")
    _, a = call(args)
    monkeypatch.setenv("TWISTKIT_WORKERS", "3")
    _, b = call(args)
    assert a == b
