import json

import pytest

from twistkit.io import KINDS, InputError, bundled_path, dumps, load_entity, read_json, resolve_path


def write(tmp_path, text, name="x.json"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_every_bundled_file_loads():
    manifest = json.loads(bundled_path("manifest.json").read_text())
    files = {a for case in manifest["cases"] for a in case["args"] if a.endswith(".json")}
    for name in files:
        kind, value = load_entity(bundled_path(name))
        assert kind in KINDS and value is not None


def test_resolve_path_falls_back_to_bundled(tmp_path):
    assert resolve_path("torus.json") == bundled_path("torus.json")
    with pytest.raises(InputError, match="no such file"):
        resolve_path(tmp_path / "missing.json")


def test_malformed_json_reports_line_and_column(tmp_path):
    p = write(tmp_path, '{\n  "kind": "complex",\n  "ranks": {"0": 1,}\n}')
    with pytest.raises(InputError) as e:
        read_json(p)
    assert e.value.line == 3 and e.value.column is not None
    assert str(e.value).startswith(f"{p}:3:")


def test_kind_errors(tmp_path):
    with pytest.raises(InputError, match="missing 'kind'"):
        load_entity(write(tmp_path, '{"ranks": {}}'))
    with pytest.raises(InputError, match="unknown kind"):
        load_entity(write(tmp_path, '{"kind": "sheaf"}'))
    with pytest.raises(InputError) as e:
        load_entity(write(tmp_path, '{"kind": "simplicial", "vertices": 2}'))
    assert e.value.field == "simplices"
    with pytest.raises(InputError, match="top level"):
        load_entity(write(tmp_path, "[1, 2]"))


def test_bad_subfield_is_located(tmp_path):
    obj = {"kind": "complex", "ranks": {"0": 1, "1": 1}, "boundaries": {"1": [["x"]]}}
    with pytest.raises(InputError) as e:
        load_entity(write(tmp_path, json.dumps(obj)))
    assert e.value.field == "boundaries.1"


def test_expect_kind():
    with pytest.raises(InputError, match="expected kind"):
        load_entity(bundled_path("torus.json"), expect=("complex",))


def test_bad_volodin_object_names_field(tmp_path):
    obj = {"kind": "volodin-morphism", "source": {"A": [["1"]]}, "target": {"A": [["0"]]}}
    with pytest.raises(InputError) as e:
        load_entity(write(tmp_path, json.dumps(obj)))
    assert e.value.field == "target" and "singular" in str(e.value)


def test_dumps_is_sorted_and_stable():
    assert dumps({"b": 1, "a": [2]}) == '{\n  "a": [\n    2\n  ],\n  "b": 1\n}\n'
