import random

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.complexes import (
    ChainComplex,
    ComplexError,
    GradedMap,
    GradedModule,
    dualize_complex,
    format_homology,
    homology,
    m1,
    m1_squared_check,
    mapping_cone,
)
from twistkit.exactlin import Mat
from twistkit.simplicial import OrderedSimplicialComplex, chain_complex_of

from gen import rand_chain_map, rand_complex, rand_mat


def interval_complex():
    # Q --1--> Q in degrees 1, 0
    return ChainComplex(GradedModule({0: 1, 1: 1}), {1: Mat([[1]])}, "Q")


def test_d_squared_enforced():
    M = GradedModule({0: 1, 1: 1, 2: 1})
    with pytest.raises(ComplexError) as e:
        ChainComplex(M, {1: Mat([[1]]), 2: Mat([[1]])})
    assert e.value.args[0] == "d_1 d_2 != 0"


def test_m1_examples():
    C = interval_complex()
    assert m1(GradedMap.identity(C.module), C, C).is_zero()
    f = GradedMap(C.module, C.module, 0, {1: Mat([[1]])})
    g = m1(f, C, C)
    assert g.degree == -1
    assert g.components == {1: Mat([[1]])}
    assert m1_squared_check(f, C, C)
    assert m1_squared_check(GradedMap.zero(C.module, C.module, 3), C, C)


def test_homology_examples():
    assert homology(ChainComplex.zero()) == {}
    circle = chain_complex_of(OrderedSimplicialComplex.sphere(1))
    assert format_homology(homology(circle)) == "H0=Z H1=Z"
    two = ChainComplex(GradedModule({0: 1, 1: 1}), {1: Mat([[2]])}, "Z")
    assert format_homology(homology(two)) == "H0=Z/2 H1=0"
    assert format_homology(homology(two, "Q"), "Q") == "H0=0 H1=0"


def test_mapping_cone_examples():
    C = interval_complex()
    assert all(h.is_zero() for h in homology(mapping_cone(GradedMap.identity(C.module), C, C)).values())
    Z = ChainComplex(GradedModule({0: 1}), {}, "Z")
    cone = mapping_cone(GradedMap(Z.module, Z.module, 0, {0: Mat([[2]])}), Z, Z)
    assert format_homology(homology(cone)) == "H0=Z/2 H1=0"
    circle = chain_complex_of(OrderedSimplicialComplex.sphere(1))
    zero = GradedMap.zero(circle.module, circle.module, 0)
    h = homology(mapping_cone(zero, circle, circle))
    assert [h[n].betti for n in sorted(h)] == [1, 2, 1]


def test_mapping_cone_rejects_non_chain_map():
    C = interval_complex()
    f = GradedMap(C.module, C.module, 0, {1: Mat([[1]])})
    with pytest.raises(ComplexError):
        mapping_cone(f, C, C)


def test_dualize_examples():
    C = ChainComplex(GradedModule({0: 2, 1: 1}), {1: Mat([[1], [2]])}, "Q")
    D = dualize_complex(C)
    assert D.module.ranks == {-1: 1, 0: 2}
    assert D.boundary(0) == Mat([[1, 2]])
    assert dualize_complex(D).boundaries == C.boundaries
    with pytest.raises(ComplexError):
        dualize_complex(C.over("Z"))


def test_graded_map_shape_checked():
    M = GradedModule({0: 2})
    with pytest.raises(ComplexError):
        GradedMap(M, M, 0, {0: Mat([[1]])})


def test_json_roundtrip():
    C = ChainComplex(GradedModule({0: 2, 1: 1}), {1: Mat([[1], ["1/2"]])}, "Q")
    assert ChainComplex.from_json(C.to_json()).boundaries == C.boundaries


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_complex_properties(seed):
    rng = random.Random(seed)
    C = rand_complex(rng, 6)
    hq, hz = homology(C, "Q"), homology(C.over("Z"), "Z")
    assert {n: g.betti for n, g in hq.items()} == {n: g.betti for n, g in hz.items()}
    assert sum((-1) ** n * g.betti for n, g in hq.items()) == C.euler_characteristic()
    cone = mapping_cone(GradedMap.identity(C.module), C, C)
    assert all(g.is_zero() for g in homology(cone).values())
    D = rand_complex(rng, 4)
    f = rand_chain_map(rng, C, D)
    assert m1(f, C, D).is_zero()
    cone = mapping_cone(f, C, D)
    assert cone.square_defect() is None
    h = GradedMap(C.module, D.module, 1, {
        n: rand_mat(rng, D.module.rank(n + 1), C.module.rank(n)) for n in C.module.degrees if D.module.rank(n + 1)})
    assert m1_squared_check(h, C, D)
