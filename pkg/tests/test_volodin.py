import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.exactlin import Mat
from twistkit.io import bundled_path, load_entity
from twistkit.twisting import check_twisting
from twistkit.volodin import (
    VolodinError,
    VolodinObject,
    WhiteheadObject,
    canonical_twisting_cochain,
    check_volodin_morphism,
    check_whitehead_morphism,
    check_whitehead_object,
    compose_volodin,
    forget_partial_orders,
    is_partial_order,
    is_upper_triangular,
    transitive_closure,
    volodin_category,
    volodin_morphism,
)

from gen import all_partial_orders, rand_chain, rand_fragment, rand_whitehead


def test_partial_order_helpers():
    assert transitive_closure({(1, 2), (2, 3)}) == {(1, 2), (2, 3), (1, 3)}
    assert is_partial_order({(1, 2)})
    assert not is_partial_order({(1, 2), (2, 1), (1, 1), (2, 2)})
    assert is_upper_triangular(Mat([[1, 5], [0, 1]]), {(1, 2)}) is None
    assert "1 not <= 2" in is_upper_triangular(Mat([[1, 5], [0, 1]]), set())
    assert "!= 1" in is_upper_triangular(Mat([[2, 0], [0, 1]]), set())


def test_object_validation():
    with pytest.raises(VolodinError):
        VolodinObject(Mat([[1, 1], [1, 1]]))
    with pytest.raises(VolodinError):
        VolodinObject(Mat([[2]]), ring="Z")
    with pytest.raises(VolodinError):
        VolodinObject(Mat.identity(2), {(1, 2), (2, 1)})
    with pytest.raises(VolodinError):
        VolodinObject(Mat.identity(2), {(1, 3)})


def test_morphism_examples():
    A = VolodinObject(Mat.identity(2))
    B = VolodinObject(Mat([[1, 3], [0, 1]]), {(1, 2)})
    r = check_volodin_morphism(A, B)
    assert r.ok and r.T == Mat([[1, 3], [0, 1]])
    back = check_volodin_morphism(B, A)
    assert not back.ok and "not contained" in back.reason
    C = VolodinObject(Mat([[1, 0], [3, 1]]), {(1, 2)})
    r = check_volodin_morphism(A, C)
    assert not r.ok and r.reason == "t21 != 0 with 2 not <= 1"
    D = VolodinObject(Mat([["1/2", 0], [0, 1]]), ring="Q")
    assert not check_volodin_morphism(A, D).ok
    E = VolodinObject(Mat([[1, "1/2"], [0, 1]]), {(1, 2)})
    assert check_volodin_morphism(A, E).ok
    Az = VolodinObject(Mat.identity(2), ring="Z")
    with pytest.raises(VolodinError):
        VolodinObject(Mat([[1, "1/2"], [0, 1]]), {(1, 2)}, "Z")
    assert volodin_morphism(Az, B) is not None


def test_compose():
    A = VolodinObject(Mat.identity(3))
    B = VolodinObject(Mat([[1, 2, 0], [0, 1, 0], [0, 0, 1]]), {(1, 2)})
    C = VolodinObject(Mat([[1, 2, 1], [0, 1, 4], [0, 0, 1]]), transitive_closure({(1, 2), (2, 3)}))
    f, g = volodin_morphism(A, B), volodin_morphism(B, C)
    h = compose_volodin(g, f)
    assert h.T == f.T @ g.T
    assert h.T == volodin_morphism(A, C).T
    assert compose_volodin(Mat([[1, 1], [0, 1]]), Mat([[1, 0], [0, 2]])) == Mat([[1, 1], [0, 2]])
    with pytest.raises(VolodinError):
        compose_volodin(f, g)


def test_forget_examples():
    _, (chain, _) = load_entity(bundled_path("volodin_chain.json"))
    r = forget_partial_orders(chain)
    assert r.minimal_order == {(1, 2)}
    _, (chain, _) = load_entity(bundled_path("volodin_cycle.json"))
    with pytest.raises(VolodinError, match="forced cycle"):
        forget_partial_orders(chain)
    r = forget_partial_orders([Mat.identity(3)])
    assert r.minimal_order == frozenset()
    with pytest.raises(VolodinError, match="not admissible"):
        forget_partial_orders([Mat.identity(2), Mat([[1, 1], [0, 1]])], [set()])
    r = forget_partial_orders([Mat.identity(3), Mat([[1, 1, 0], [0, 1, 0], [0, 0, 1]])], [{(1, 2), (3, 2), (3, 1)}])
    assert r.checked_orders == 1


def brute_minimal_order(chain):
    n = chain[0].rows
    good = []
    for tau in all_partial_orders(n):
        if all(is_upper_triangular(chain[i].inverse() @ chain[j], tau) is None
               for i, j in product(range(len(chain)), repeat=2)):
            good.append(tau)
    if not good:
        return None
    best = min(good, key=len)
    assert all(best <= t for t in good)
    return best


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_forget_matches_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    chain = rand_chain(rng, n, rng.randint(1, 3))
    want = brute_minimal_order(chain)
    if want is None:
        with pytest.raises(VolodinError):
            forget_partial_orders(chain)
    else:
        assert forget_partial_orders(chain).minimal_order == want


def test_brute_force_order_counts():
    assert [len(all_partial_orders(n)) for n in range(1, 5)] == [1, 3, 19, 219]


def test_volodin_category_is_opposite():
    A = VolodinObject(Mat.identity(2))
    B = VolodinObject(Mat([[1, 3], [0, 1]]), {(1, 2)})
    C, mats = volodin_category({"a": A, "b": B})
    assert C.morphisms["T[a;b]"] == ("b", "a")
    assert mats["T[a;b]"] == Mat([[1, 3], [0, 1]])
    assert "T[b;a]" not in C.morphisms
    with pytest.raises(VolodinError):
        volodin_category({"a": A, "b": B}, [("b", "a")])


def test_canonical_cochain_examples():
    _, (objects, morphisms, max_p) = load_entity(bundled_path("volodin_fragment.json"))
    psi = canonical_twisting_cochain(objects, morphisms, max_p)
    assert check_twisting(psi).ok
    with pytest.raises(VolodinError):
        canonical_twisting_cochain({"a": VolodinObject(Mat.identity(1)), "b": VolodinObject(Mat.identity(2))})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_canonical_cochain_is_twisting(seed):
    objects = rand_fragment(random.Random(seed))
    assert check_twisting(canonical_twisting_cochain(objects, max_p=3)).ok


def test_whitehead_examples():
    _, W = load_entity(bundled_path("whitehead_pair.json"))
    rep = check_whitehead_object(W)
    assert rep.ok and rep.acyclic == {str(v): True for v in range(W.k + 1)}
    _, lonely = load_entity(bundled_path("whitehead_lonely.json"))
    rep = check_whitehead_object(lonely)
    assert not rep.ok and any(p.startswith("h-condition") for p in rep.problems)
    _, (src, dst, f, gamma) = load_entity(bundled_path("whitehead_expansion.json"))
    assert check_whitehead_morphism(src, dst, f, gamma).ok


def test_whitehead_object_violations():
    els = [("a", 1), ("b", 0)]
    wrong_way = WhiteheadObject(0, els, {("a", "b")}, {0: {"0": Mat([[0, 0], [1, 0]])}})
    rep = check_whitehead_object(wrong_way)
    assert not rep.ok and rep.problems[0].startswith("upper-triangular")
    bad_deg = WhiteheadObject(0, [("a", 0), ("b", 0)], {("b", "a")}, {0: {"0": Mat([[0, 0], [1, 0]])}})
    assert check_whitehead_object(bad_deg).problems[0].startswith("degree")
    bad_key = WhiteheadObject(0, els, {("b", "a")}, {1: {"0,1": Mat.zeros(2, 2)}})
    assert "not a 1-simplex" in check_whitehead_object(bad_key).problems[0]


def expansion_with_survivor():
    G = (Fraction(1), Fraction(-1))
    src = WhiteheadObject(0, [("y", 0), ("x+", 1), ("x-", 0)], {("x-", "x+")},
                          {0: {"0": Mat([[0, 0, 0], [0, 0, 0], [0, -1, 0]])}}, G, False)
    dst = WhiteheadObject(0, [("y", 0)], set(), {}, G, False)
    return src, dst


def test_whitehead_morphism_with_survivor():
    src, dst = expansion_with_survivor()
    assert check_whitehead_morphism(src, dst, {"y": "y"}, {"y": "-1"}).ok
    rep = check_whitehead_morphism(src, dst, {"y": "y"}, {"y": "2"})
    assert not rep.ok and any("not in G" in p for p in rep.problems)
    rep = check_whitehead_morphism(src, dst, {"y": "x-"}, {"y": "1"})
    assert not rep.ok
    rep = check_whitehead_morphism(src, dst, {}, {})
    assert rep.problems == ["f must be defined exactly on the elements of Q"]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_whitehead_acyclicity_oracle(seed):
    W = rand_whitehead(random.Random(seed), k=random.Random(seed).randint(0, 2))
    rep = check_whitehead_object(W)
    M = W.matrix(0, "0")
    acyclic = 2 * M.rank() == len(W.elements)
    assert all(v == acyclic for v in rep.acyclic.values())
    assert rep.ok == acyclic


def test_json_roundtrips():
    _, W = load_entity(bundled_path("whitehead_pair.json"))
    assert WhiteheadObject.from_json(W.to_json()) == W
    X = VolodinObject(Mat([[1, 2], [0, 1]]), {(1, 2)})
    assert VolodinObject.from_json(X.to_json()) == X
