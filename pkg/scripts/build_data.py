"""Regenerate the bundled example files and their manifest in src/twistkit/data."""

from __future__ import annotations

import json
from pathlib import Path

from twistkit.ainfty import AInftyFunctor
from twistkit.complexes import ChainComplex, GradedMap, GradedModule
from twistkit.exactlin import Mat
from twistkit.simplicial import OrderedSimplicialComplex, poset_category
from twistkit.twisting import klein_cochain, lens_cochain, torus_cochain
from twistkit.volodin import VolodinObject, WhiteheadObject

DATA = Path(__file__).resolve().parents[1] / "src" / "twistkit" / "data"


def write(name: str, obj: dict) -> None:
    (DATA / name).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def path_functor() -> AInftyFunctor:
    """Strict functor on [2]: every object is Q^2 -> Q, arrows swap the degree 0 basis."""
    C = ChainComplex(GradedModule({0: 2, 1: 1}), {1: Mat([[1], [1]])}, "Q")
    H = C.module
    swap = GradedMap(H, H, 0, {0: Mat([[0, 1], [1, 0]]), 1: Mat([[1]])})
    ident = GradedMap.identity(H)
    maps = {1: {"1->0": swap, "2->1": swap, "2->0": ident}}
    return AInftyFunctor(poset_category(2), {"0": C, "1": C, "2": C}, maps)


def broken_functor() -> AInftyFunctor:
    F = path_functor()
    H = F.objects["0"].module
    bad = GradedMap(H, H, 0, {0: Mat([[1, 0], [0, 0]]), 1: Mat([[1]])})
    return F.with_maps({1: {**F.maps[1], "1->0": bad}})


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    manifest = []

    def case(args, code, contains):
        manifest.append({"args": args, "exit": code, "contains": contains})

    write("hollow_triangle.json", OrderedSimplicialComplex.sphere(1).to_json())
    case(["homology", "hollow_triangle.json"], 0, "H0=Z H1=Z")
    rp2 = ChainComplex(GradedModule({0: 1, 1: 1, 2: 1}), {1: Mat([[0]]), 2: Mat([[2]])}, "Z")
    write("rp2.json", rp2.to_json())
    case(["homology", "rp2.json"], 0, "H0=Z H1=Z/2 H2=0")
    case(["homology", "rp2.json", "--ring", "q"], 0, "H0=Q H1=0 H2=0")

    write("torus.json", torus_cochain().to_json())
    case(["ttp", "torus.json", "--homology"], 0, "H0=Z H1=Z^2 H2=Z")
    write("klein.json", klein_cochain().to_json())
    case(["ttp", "klein.json", "--homology"], 0, "H0=Z H1=Z+Z/2 H2=0")
    write("hopf.json", lens_cochain(1).to_json())
    case(["ttp", "hopf.json", "--homology"], 0, "H0=Z H1=0 H2=0 H3=Z")
    case(["ttp", "hopf.json", "--ss"], 0, "rank d2 = 1")
    case(["euler", "hopf.json", "--cycle", "auto"], 0, "= 1")
    for k in (0, 2, 3, 5):
        write(f"lens_{k}.json", lens_cochain(k).to_json())
        h1 = "Z" if k == 0 else f"Z/{k}"
        h2 = "Z" if k == 0 else "0"
        case(["ttp", f"lens_{k}.json", "--homology"], 0, f"H0=Z H1={h1} H2={h2} H3=Z")
        case(["euler", f"lens_{k}.json", "--cycle", "auto"], 0, f"= {k}")
    for name in ("torus", "klein", "hopf"):
        case(["check-twisting", f"{name}.json"], 0, "pass")
    bad = lens_cochain(1).to_json()
    bad["psi"]["1"] = {"0,1": {"degree": 0, "components": {"1": [["1"]]}}}
    write("perturbed_hopf.json", bad)
    case(["check-twisting", "perturbed_hopf.json"], 1, "fail")

    write("path_functor.json", path_functor().to_json())
    case(["check-ainfty", "path_functor.json"], 0, "pass")
    case(["em-transfer", "path_functor.json"], 0, "check: pass")
    write("broken_functor.json", broken_functor().to_json())
    case(["check-ainfty", "broken_functor.json"], 1, "fail")

    I = Mat.identity(2)
    E12 = Mat([[1, 1], [0, 1]])
    E21 = Mat([[1, 0], [1, 1]])
    o0 = VolodinObject(I, frozenset())
    o1 = VolodinObject(E12, frozenset({(1, 2)}))
    write("volodin_object.json", o1.to_json())
    case(["volodin", "check", "volodin_object.json"], 0, "pass")
    write("volodin_morphism.json", {"kind": "volodin-morphism", "source": o0.to_json(), "target": o1.to_json()})
    case(["volodin", "check", "volodin_morphism.json"], 0, "pass")
    write("volodin_morphism_bad.json", {"kind": "volodin-morphism", "source": o0.to_json(),
                                        "target": VolodinObject(E12, frozenset()).to_json()})
    case(["volodin", "check", "volodin_morphism_bad.json"], 1, "not <= 2")
    write("volodin_chain.json", {"kind": "volodin-chain", "chain": [I.to_json(), E12.to_json()]})
    case(["volodin", "check", "volodin_chain.json"], 0, "[(1, 2)]")
    write("volodin_cycle.json", {"kind": "volodin-chain",
                                 "chain": [I.to_json(), E12.to_json(), E21.to_json()]})
    case(["volodin", "check", "volodin_cycle.json"], 1, "cycle")
    frag = {"a": o0, "b": o1, "c": VolodinObject(Mat([[1, 3], [0, 1]]), frozenset({(1, 2)}))}
    write("volodin_fragment.json", {"kind": "volodin-fragment",
                                    "objects": {k: v.to_json() for k, v in frag.items()}})
    case(["volodin", "check", "volodin_fragment.json"], 0, "acyclic over Q: yes")

    pair = WhiteheadObject(0, [("x+", 1), ("x-", 0)], frozenset({("x-", "x+")}),
                           {0: {"0": Mat([[0, 0], [1, 0]])}})
    write("whitehead_pair.json", pair.to_json())
    case(["whitehead", "check", "whitehead_pair.json"], 0, "pass")
    lone = WhiteheadObject(0, [("x", 0)], frozenset(), {})
    write("whitehead_lonely.json", lone.to_json())
    case(["whitehead", "check", "whitehead_lonely.json"], 1, "h-condition")
    empty = WhiteheadObject(0, [], frozenset(), {})
    write("whitehead_expansion.json", {"kind": "whitehead-morphism", "source": pair.to_json(),
                                       "target": empty.to_json(), "f": {}, "gamma": {}})
    case(["whitehead", "check", "whitehead_expansion.json"], 0, "pass")

    case(["superconn", "flatness", "--family", "flat-xy"], 0, "pass")
    case(["superconn", "flatness", "--family", "nilpotent-const", "--params", "a=1", "b=1"], 1, "fail")
    case(["superconn", "transport", "--family", "constant", "--steps", "1000"], 0, "|Phi - expm|")
    case(["superconn", "transport", "--family", "diag-exp", "--steps", "200"], 0, "chain map residual")
    case(["superconn", "homotopy", "--family", "flat-xy", "--grid", "40", "--steps", "400"], 0, "pass")

    write("manifest.json", {"cases": manifest})


if __name__ == "__main__":
    main()
