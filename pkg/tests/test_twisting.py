import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from twistkit.complexes import GradedMap, GradedModule, format_homology, homology
from twistkit.exactlin import Mat
from twistkit.io import bundled_path, load_entity
from twistkit.simplicial import OrderedSimplicialComplex, chain_complex_of, fundamental_cycle, point_category, poset_category
from twistkit.twisting import (
    TwistError,
    TwistingCochain,
    check_twisting,
    coboundary,
    cup_prime,
    euler_class,
    fiber_degree_spectral_sequence,
    klein_cochain,
    lens_cochain,
    simplex_subcomplex,
    torus_cochain,
    total_complex,
    twisted_tensor_product,
)

H = GradedModule({0: 1, 1: 1})


def rand_map(rng, src, tgt, degree, lo=-2, hi=2):
    comps = {}
    for n in src.degrees:
        r, c = tgt.rank(n + degree), src.rank(n)
        if r and c:
            comps[n] = Mat([[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)], shape=(r, c))
    return GradedMap(src, tgt, degree, comps)


def test_constant_zero_cochain_has_zero_coboundary():
    g = GradedMap(H, H, -1, {1: Mat([[3]])})
    psi = TwistingCochain(poset_category(2), H, {0: {o: g for o in "012"}})
    assert all(v.is_zero() for v in coboundary(psi, 0).values())


def test_psi1_on_hollow_triangle_has_no_coboundary():
    K = OrderedSimplicialComplex.sphere(1)
    psi = TwistingCochain(K, H, {1: {"0,1": GradedMap(H, H, 0, {0: Mat([[1]])})}})
    assert coboundary(psi, 1) == {}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_coboundary_squares_to_zero(seed):
    rng = random.Random(seed)
    C = poset_category(3)
    probe = TwistingCochain(C, H, {})
    psi1 = TwistingCochain(C, H, {1: {k: rand_map(rng, H, H, 0) for k in probe.simplices(1)}})
    d1 = coboundary(psi1, 1)
    psi2 = TwistingCochain(C, H, {2: d1}, max_p=3, check=False)
    assert all(g.is_zero() for g in coboundary(psi2, 2).values())


def test_cup_prime_examples():
    psi = TwistingCochain(poset_category(1), H, {})
    assert all(g.is_zero() for lev in cup_prime(psi).values() for g in lev.values())
    M = GradedModule({0: 1, 1: 1, 2: 1})
    g = GradedMap(M, M, -1, {1: Mat([[1]]), 2: Mat([[1]])})
    psi = TwistingCochain(point_category(), M, {0: {"0": g}})
    assert cup_prime(psi)[0]["0"] == g @ g


def test_check_twisting_examples():
    assert check_twisting(torus_cochain()).ok
    _, hopf = load_entity(bundled_path("hopf.json"))
    assert check_twisting(hopf).ok
    M = GradedModule({0: 1, 1: 1, 2: 1})
    g = GradedMap(M, M, -1, {1: Mat([[1]]), 2: Mat([[1]])})
    rep = check_twisting(TwistingCochain(point_category(), M, {0: {"0": g}}))
    assert not rep.ok and rep.violations[0].n == 0


def test_brown_examples():
    T = twisted_tensor_product(torus_cochain())
    assert format_homology(T.homology()) == "H0=Z H1=Z^2 H2=Z"
    K = twisted_tensor_product(klein_cochain())
    assert format_homology(K.homology()) == "H0=Z H1=Z+Z/2 H2=0"
    for k, want in [(0, "H0=Z H1=Z H2=Z H3=Z"), (1, "H0=Z H1=0 H2=0 H3=Z"), (3, "H0=Z H1=Z/3 H2=0 H3=Z")]:
        assert format_homology(twisted_tensor_product(lens_cochain(k)).homology()) == want


def test_non_twisting_raises_with_bidegree():
    psi = lens_cochain(1).with_entries({1: {"0,1": GradedMap(H, H, 0, {0: Mat([[1]])})},
                                        2: lens_cochain(1).entries[2]})
    assert not check_twisting(psi).ok
    with pytest.raises(TwistError) as e:
        twisted_tensor_product(psi)
    assert e.value.bidegree is not None


def test_total_complex_examples():
    M = GradedModule({0: 1, 1: 1})
    g = GradedMap(M, M, -1, {1: Mat([[2]])})
    E = total_complex(TwistingCochain(point_category(), M, {0: {"0": g}}))
    assert E.complex.boundary(1) == Mat([[-2]]) or E.complex.boundary(1) == Mat([[2]])
    E = total_complex(TwistingCochain(poset_category(1), M, {}))
    h = E.homology("Q")
    assert {n: g.betti for n, g in h.items() if g.betti} == {0: 1, 1: 1}
    psi = TwistingCochain(poset_category(2), M, {0: {o: g for o in "012"}})
    whole = total_complex(psi)
    sub = simplex_subcomplex(psi, "1->0,2->1")
    assert sub.complex.boundaries == whole.complex.boundaries


def test_euler_examples():
    assert euler_class(lens_cochain(0), 2) == 0
    assert abs(euler_class(lens_cochain(1), 2)) == 1
    for k in (2, 3, 5):
        e = euler_class(lens_cochain(k), 2)
        assert abs(e) == k
        z = fundamental_cycle(OrderedSimplicialComplex.sphere(2), 2)
        keys = [",".join(map(str, s)) for s in OrderedSimplicialComplex.sphere(2).simplices(2)]
        neg = {key: -c for key, c in zip(keys, z)}
        assert euler_class(lens_cochain(k), 2, neg) == -e


def test_euler_rejects_extra_components():
    with pytest.raises(TwistError):
        euler_class(klein_cochain(), 2)


def test_spectral_sequence_examples():
    T = twisted_tensor_product(lens_cochain(1))
    ss = fiber_degree_spectral_sequence(T)
    assert set(ss.pages[2]) == {(0, 0), (2, 0), (0, 1), (2, 1)}
    assert ss.d_rank(2) == 1
    assert ss.total_infinity() == {0: 1, 3: 1}
    ss = fiber_degree_spectral_sequence(twisted_tensor_product(torus_cochain()))
    assert ss.d_rank(2) == 0
    assert ss.total_infinity() == {0: 1, 1: 2, 2: 1}
    assert ss.pages[2] == ss.infinity


@pytest.mark.parametrize("name", ["torus", "klein", "hopf", "lens_0", "lens_2", "lens_3", "lens_5"])
def test_e_infinity_matches_rational_betti(name):
    _, psi = load_entity(bundled_path(f"{name}.json"))
    T = twisted_tensor_product(psi)
    betti = {n: g.betti for n, g in T.homology("Q").items() if g.betti}
    assert fiber_degree_spectral_sequence(T).total_infinity() == betti


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_zero_cochain_is_kunneth(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    tris = [t for t in combinations(range(n), 3) if rng.random() < 0.3]
    edges = [e for e in combinations(range(n), 2) if rng.random() < 0.4]
    K = OrderedSimplicialComplex.from_maximal(n, tris + edges + [(v,) for v in range(n)])
    F = GradedModule({q: rng.randint(0, 2) for q in range(3)})
    if F.total_rank == 0:
        F = GradedModule({0: 1})
    T = twisted_tensor_product(TwistingCochain(K, F, {}))
    hb = homology(chain_complex_of(K), "Q")
    ht = T.homology("Q")
    for d in range(K.dim + F.degrees[-1] + 1):
        want = sum(hb[p].betti * F.rank(d - p) for p in hb)
        assert ht.get(d, None) is None and want == 0 or ht[d].betti == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_twisting_iff_square_zero(seed):
    rng = random.Random(seed)
    psi = rng.choice([lens_cochain(rng.choice([0, 1, 2])), klein_cochain(), torus_cochain()])
    p = rng.choice([0, 1, 2])
    keys = psi.simplices(p)
    entries = {q: dict(v) for q, v in psi.entries.items()}
    if keys:
        key = rng.choice(keys)
        entries.setdefault(p, {})[key] = psi.value(p, key) + rand_map(rng, H, H, p - 1, -1, 1)
    q = psi.with_entries(entries)
    T = twisted_tensor_product(q, check=False)
    assert check_twisting(q).ok == (T.square_defect is None)


def test_json_roundtrip():
    psi = klein_cochain()
    assert TwistingCochain.from_json(psi.to_json()).entries == psi.entries
