import random
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.complexes import format_homology, homology
from twistkit.simplicial import (
    CategoryError,
    FiniteCategory,
    OrderedSimplicialComplex,
    back_face,
    barycentric_subdivision,
    category_from_poset,
    chain_complex_of,
    front_face,
    fundamental_cycle,
    nerve,
    point_category,
    poset_category,
    product_with_I,
)
from twistkit.volodin import transitive_closure


def test_chain_complex_examples():
    pt = OrderedSimplicialComplex.simplex(0)
    assert format_homology(homology(chain_complex_of(pt))) == "H0=Z"
    sphere = OrderedSimplicialComplex.sphere(2)
    assert sphere.f_vector() == [4, 6, 4]
    assert format_homology(homology(chain_complex_of(sphere))) == "H0=Z H1=0 H2=Z"
    assert format_homology(homology(chain_complex_of(OrderedSimplicialComplex.sphere(1)))) == "H0=Z H1=Z"


def test_closure_violation_rejected():
    with pytest.raises(ValueError):
        OrderedSimplicialComplex.from_json({"vertices": 3, "simplices": [[0], [1], [2], [0, 1, 2]]})


def test_faces():
    assert front_face((0, 1, 2), 1) == (0, 1)
    assert back_face((0, 1, 2), 1) == (1, 2)
    assert front_face((0, 1, 2), 2) == (0, 1, 2)
    with pytest.raises(IndexError):
        front_face((0, 1), 2)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=7, unique=True))
def test_front_back_share_middle_vertex(vs):
    s = tuple(sorted(vs))
    n = len(s) - 1
    for j in range(n + 1):
        f, b = front_face(s, j), back_face(s, n - j)
        assert set(f) & set(b) == {s[j]}
        assert f[-1] == b[0]


def test_nerve_examples():
    levels = nerve(point_category(), 3)
    assert len(levels[0]) == 1
    assert all(s.degenerate for lev in levels[1:] for s in lev)
    levels = nerve(poset_category(1), 1, include_degenerate=False)
    assert len(levels[1]) == 1
    levels = nerve(poset_category(2), 2, include_degenerate=False)
    assert [len(lev) for lev in levels] == [3, 3, 1]


def strict_chains(elements, less, length):
    lt = set(less)
    return sum(1 for c in permutations(elements, length)
               if all((c[i], c[i + 1]) in lt for i in range(length - 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_nerve_counts_match_chain_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    els = [f"p{i}" for i in range(n)]
    less = transitive_closure({(els[a], els[b]) for a, b in combinations(range(n), 2) if rng.random() < 0.5})
    C = category_from_poset(els, less)
    levels = nerve(C, n, include_degenerate=False)
    for p, lev in enumerate(levels):
        assert len(lev) == strict_chains(els, less, p + 1)


def test_product_with_I():
    P = product_with_I(point_category())
    assert len(P.objects) == 2 and len(P.morphisms) == 3
    Q = product_with_I(poset_category(1))
    assert len(Q.objects) == 4 and len(Q.morphisms) == 9
    R = product_with_I(poset_category(2))
    assert len(R.objects) == 6


def test_category_validation():
    with pytest.raises(CategoryError):
        FiniteCategory(["a", "b"], {"f": ("a", "b"), "g": ("b", "a")}, {})


def test_category_json_roundtrip():
    C = poset_category(2)
    D = FiniteCategory.from_json(C.to_json())
    assert D == C


def test_fundamental_cycle_examples():
    circle = OrderedSimplicialComplex.sphere(1)
    z = fundamental_cycle(circle, 1)
    assert all(abs(c) == 1 for c in z)
    d = chain_complex_of(circle).boundary(1)
    assert all(x == 0 for x in d.apply(z))
    z = fundamental_cycle(OrderedSimplicialComplex.sphere(2), 2)
    assert z == (1, -1, 1, -1)
    two = OrderedSimplicialComplex.from_maximal(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    with pytest.raises(ValueError):
        fundamental_cycle(two, 1)


def test_fundamental_cycle_rp2_not_orientable():
    tris = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
            (2, 3, 5), (3, 4, 6), (2, 4, 5), (3, 5, 6), (2, 4, 6)]
    K = OrderedSimplicialComplex.from_maximal(6, [tuple(v - 1 for v in t) for t in tris])
    assert format_homology(homology(chain_complex_of(K))) == "H0=Z H1=Z/2 H2=0"
    with pytest.raises(ValueError, match="orientable"):
        fundamental_cycle(K, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_complexes_have_d_squared_zero(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 7)
    tris = [t for t in combinations(range(n), 3) if rng.random() < 0.3]
    edges = [e for e in combinations(range(n), 2) if rng.random() < 0.3]
    K = OrderedSimplicialComplex.from_maximal(n, tris + edges + [(v,) for v in range(n)])
    C = chain_complex_of(K)
    assert C.square_defect() is None


def test_barycentric_subdivision_preserves_homology():
    K = OrderedSimplicialComplex.sphere(2)
    S, labels = barycentric_subdivision(K)
    assert len(labels) == 14
    assert format_homology(homology(chain_complex_of(S))) == "H0=Z H1=0 H2=Z"
