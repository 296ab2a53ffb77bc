"""One loader for every JSON entity, dispatched on its ``"kind"`` field."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from .ainfty import AInftyFunctor
from .complexes import ChainComplex, GradedModule
from .exactlin import Mat
from .simplicial import FiniteCategory, OrderedSimplicialComplex
from .twisting import TwistingCochain
from .volodin import VolodinObject, WhiteheadObject

__all__ = ["InputError", "read_json", "load_entity", "resolve_path", "bundled_path", "KINDS", "dumps"]

KINDS = (
    "complex",
    "simplicial",
    "category",
    "ainfty",
    "twisting",
    "volodin-object",
    "volodin-morphism",
    "volodin-chain",
    "volodin-fragment",
    "whitehead-object",
    "whitehead-morphism",
)

REQUIRED = {
    "complex": ("ranks",),
    "simplicial": ("vertices", "simplices"),
    "category": ("objects", "morphisms"),
    "ainfty": ("base", "objects"),
    "twisting": ("base", "psi"),
    "volodin-object": ("A",),
    "volodin-morphism": ("source", "target"),
    "volodin-chain": ("chain",),
    "volodin-fragment": ("objects",),
    "whitehead-object": ("k", "poset"),
    "whitehead-morphism": ("source", "target", "f", "gamma"),
}


class InputError(ValueError):
    """Malformed input; carries the file, and the line or field when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 column: int | None = None, field: str | None = None):
        where = path or "<input>"
        if line is not None:
            where += f":{line}" + (f":{column}" if column is not None else "")
        if field:
            where += f": field '{field}'"
        super().__init__(f"{where}: {message}")
        self.path, self.line, self.column, self.field = path, line, column, field


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("twistkit") / "data" / name))


def resolve_path(path: str | Path) -> Path:
    """``path`` itself, or the bundled example of that name when no such file exists."""
    p = Path(path)
    if p.exists():
        return p
    b = bundled_path(p.name)
    if b.exists() and len(p.parts) == 1:
        return b
    raise InputError("no such file", str(path))


def read_json(path: str | Path) -> Any:
    p = resolve_path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise InputError(f"cannot read file ({e.strerror})", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e.msg}", str(path), e.lineno, e.colno) from None


def _kind(obj: Any, path: str) -> str:
    if not isinstance(obj, dict):
        raise InputError("top level must be a JSON object", path)
    kind = obj.get("kind")
    if kind is None and "psi" in obj and "base" in obj:
        kind = "twisting"
    if kind is None:
        raise InputError("missing 'kind'", path, field="kind")
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", path, field="kind")
    for f in REQUIRED[kind]:
        if f not in obj:
            raise InputError(f"{kind} is missing a required field", path, field=f)
    return kind


def _volodin(obj: Any, path: str, field: str) -> VolodinObject:
    try:
        return VolodinObject.from_json(obj)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputError(_explain(e), path, field=field) from None


def _explain(e: Exception) -> str:
    if isinstance(e, KeyError):
        return f"missing field {e.args[0]!r}"
    return str(e) or type(e).__name__


def _build(kind: str, obj: dict, path: str) -> Any:
    if kind == "complex":
        return ChainComplex.from_json(obj)
    if kind == "simplicial":
        return OrderedSimplicialComplex.from_json(obj)
    if kind == "category":
        return FiniteCategory.from_json(obj)
    if kind == "ainfty":
        return AInftyFunctor.from_json(obj)
    if kind == "twisting":
        return TwistingCochain.from_json(obj)
    if kind == "volodin-object":
        return VolodinObject.from_json(obj)
    if kind == "volodin-morphism":
        return (_volodin(obj["source"], path, "source"), _volodin(obj["target"], path, "target"))
    if kind == "volodin-chain":
        chain = []
        for i, g in enumerate(obj["chain"]):
            if isinstance(g, dict):
                chain.append(_volodin(g, path, f"chain[{i}]"))
            else:
                chain.append(Mat.from_json(g))
        admissible = [[tuple(p) for p in order] for order in obj.get("admissible", [])]
        return chain, admissible
    if kind == "volodin-fragment":
        objects = {}
        items = obj["objects"].items() if isinstance(obj["objects"], dict) else \
            ((o.get("name", str(i)), o) for i, o in enumerate(obj["objects"]))
        for name, o in items:
            objects[str(name)] = _volodin(o, path, f"objects.{name}")
        morphisms = obj.get("morphisms")
        morphisms = None if morphisms is None else [tuple(m) for m in morphisms]
        return objects, morphisms, obj.get("max_p")
    if kind == "whitehead-object":
        return WhiteheadObject.from_json(obj)
    if kind == "whitehead-morphism":
        src = _whitehead(obj["source"], path, "source")
        dst = _whitehead(obj["target"], path, "target")
        return src, dst, dict(obj["f"]), dict(obj["gamma"])
    raise InputError(f"unsupported kind {kind!r}", path)


def _whitehead(obj: Any, path: str, field: str) -> WhiteheadObject:
    try:
        return WhiteheadObject.from_json(obj)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputError(_explain(e), path, field=field) from None


def _locate(kind: str, obj: dict) -> str | None:
    """Name the first sub-field that fails to parse on its own."""
    try:
        if kind == "complex":
            ranks = GradedModule.from_json(obj.get("ranks", {}))
            for n, rows in obj.get("boundaries", {}).items():
                try:
                    Mat.from_json(rows, shape=(ranks.rank(int(n) - 1), ranks.rank(int(n))))
                except (TypeError, ValueError, ZeroDivisionError):
                    return f"boundaries.{n}"
        if kind in ("twisting", "ainfty"):
            top = "psi" if kind == "twisting" else "maps"
            for p, ent in obj.get(top, {}).items():
                for key, g in ent.items():
                    for n, rows in g.get("components", {}).items():
                        try:
                            Mat.from_json(rows)
                        except (TypeError, ValueError, ZeroDivisionError):
                            return f"{top}.{p}.{key}.components.{n}"
                    if "degree" in g and int(g["degree"]) != int(p) - 1:
                        return f"{top}.{p}.{key}.degree"
    except (TypeError, ValueError, AttributeError):
        return None
    return None


def load_entity(path: str | Path, expect: tuple[str, ...] | None = None) -> tuple[str, Any]:
    """Read ``path`` and build the entity its ``kind`` names; returns ``(kind, value)``."""
    obj = read_json(path)
    kind = _kind(obj, str(path))
    if expect is not None and kind not in expect:
        raise InputError(f"expected kind {' or '.join(expect)}, got {kind!r}", str(path), field="kind")
    try:
        return kind, _build(kind, obj, str(path))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError, IndexError, ZeroDivisionError) as e:
        raise InputError(f"invalid {kind}: {_explain(e)}", str(path), field=_locate(kind, obj)) from None


def dumps(obj: Any) -> str:
    """Deterministic JSON text for reports."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
