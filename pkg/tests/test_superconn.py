import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from twistkit.complexes import GradedModule
from twistkit.superconn.forms import (
    FormError,
    Poly,
    PolyForm,
    SuperconnectionData,
    SuperForm,
    all_indices,
    check_flatness,
    exterior_d,
    tilde_check,
    wedge,
)
from twistkit.superconn.registry import Family, _exact_family, family_names, make_family, parse_params
from twistkit.superconn.transport import (
    STANDARD_TRIANGLE,
    TransportError,
    check_chain_map,
    check_homotopy,
    homotopy_convergence,
    numeric_flatness,
    psi2_quadrature,
    segment_transport,
    transport,
    transport_convergence,
)

V = GradedModule({0: 1, 1: 1})


def rand_poly(rng, m, max_deg=2):
    terms = {}
    for e in product(range(max_deg + 1), repeat=m):
        if sum(e) <= max_deg and rng.random() < 0.4:
            terms[e] = rng.randint(-3, 3)
    return Poly(m, terms)


def rand_form(rng, m, k):
    return PolyForm(m, {I: rand_poly(rng, m) for I in all_indices(m) if len(I) == k})


def rand_superform(rng, module, m, total):
    degs = [d for d in module.degrees for _ in range(module.rank(d))]
    n = len(degs)
    terms = {}
    for I in all_indices(m):
        for i, j in product(range(n), repeat=2):
            if len(I) + degs[i] - degs[j] == total and rng.random() < 0.5:
                terms[(I, i, j)] = rand_poly(rng, m, 1)
    return SuperForm(module, m, terms)


def test_poly_basics():
    m = 2
    x, y = Poly.var(m, 0), Poly.var(m, 1)
    p = x * y + Poly.const(m, 3)
    assert p.derivative(0) == y
    assert p.evaluate([2, 5]) == 13
    assert (p - p).is_zero()
    with pytest.raises(FormError):
        SuperForm(V, 4)


def test_d_of_y_dx():
    m = 2
    w = PolyForm.basic(m, (0,), Poly.var(m, 1))
    assert w.d() == PolyForm.basic(m, (0, 1), Poly.const(m, -1))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_form_algebra(seed):
    rng = random.Random(seed)
    m = rng.randint(1, 3)
    ka, kb, kc = (rng.randint(0, m) for _ in range(3))
    a, b, c = rand_form(rng, m, ka), rand_form(rng, m, kb), rand_form(rng, m, kc)
    assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))
    ba = b.wedge(a)
    assert a.wedge(b) == (ba if (ka * kb) % 2 == 0 else -ba)
    lhs = a.wedge(b).d()
    db = a.wedge(b.d())
    assert lhs == a.d().wedge(b) + (db if ka % 2 == 0 else -db)
    assert a.d().d().is_zero()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_superform_algebra(seed):
    rng = random.Random(seed)
    M = GradedModule({0: 1, 1: rng.randint(1, 2)})
    m = rng.randint(1, 2)
    ta, tb = rng.randint(-1, 2), rng.randint(-1, 2)
    A, B = rand_superform(rng, M, m, ta), rand_superform(rng, M, m, tb)
    C = rand_superform(rng, M, m, rng.randint(-1, 2))
    assert wedge(wedge(A, B), C) == wedge(A, wedge(B, C))
    AdB = wedge(A, exterior_d(B))
    assert exterior_d(wedge(A, B)) == wedge(exterior_d(A), B) + (AdB if ta % 2 == 0 else -AdB)
    assert exterior_d(exterior_d(A)).is_zero()
    assert tilde_check(A).ok


def test_superform_rejects_mixed_degrees():
    with pytest.raises(FormError):
        SuperForm(V, 1, {((), 1, 0): Poly.const(1), ((), 0, 0): Poly.const(1)})
    with pytest.raises(FormError):
        SuperconnectionData(V, 1, {1: SuperForm.from_matrix(V, 1, [[0, 0], [1, 0]])})


@pytest.mark.parametrize("name", ["flat-xy", "flat-xyz", "abelian", "zero", "constant", "nilpotent-const"])
def test_registered_exact_families_are_flat(name):
    rep = check_flatness(make_family(name).exact)
    assert rep.ok and rep.d_squared_zero and rep.agrees
    assert sorted(rep.residuals) == list(range(make_family(name).m + 2))


def test_nilpotent_product_not_flat():
    rep = check_flatness(make_family("nilpotent-const", {"a": 1, "b": 1}).exact)
    assert not rep.ok
    assert not rep.residuals[0].is_zero()
    assert not rep.d_squared_zero and rep.agrees
    rep = check_flatness(make_family("flat-xy", {"lam": "1/3"}).exact)
    assert rep.ok


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_single_entry_perturbations_detected(seed):
    rng = random.Random(seed)
    fam = make_family(rng.choice(["flat-xy", "flat-xyz", "abelian"]))
    S = fam.exact
    m = fam.m
    p = rand_poly(rng, m)
    if p.is_zero():
        p = Poly.const(m, 1)
    if rng.random() < 0.5:
        i = rng.choice([0, 1])
        delta = SuperForm(V, m, {((rng.randrange(m),), i, i): p})
        comps = {**S.components, 1: S.A(1) + delta}
    else:
        I = rng.choice([I for I in all_indices(m) if len(I) == 2])
        comps = {**S.components, 2: S.A(2) + SuperForm(V, m, {(I, 0, 1): p})}
    rep = check_flatness(SuperconnectionData(V, m, comps))
    assert not rep.ok and rep.agrees


def test_registry():
    assert set(family_names()) == {"flat-xy", "flat-xyz", "nilpotent-const", "zero", "abelian", "constant", "diag-exp"}
    assert make_family("flat-xy", {"lam": "2"}).describe() == "flat-xy(lam=2)"
    assert make_family("diag-exp").exact is None
    with pytest.raises(ValueError, match="unknown family"):
        make_family("nope")
    with pytest.raises(ValueError, match="no parameter"):
        make_family("zero", {"lam": 1})


def test_parse_params():
    assert parse_params(["lam=1/2", "a=3,b=-1"]) == {"lam": Fraction(1, 2), "a": 3, "b": -1}
    with pytest.raises(ValueError, match="not of the form"):
        parse_params(["lam"])
    with pytest.raises(ValueError, match="non-rational"):
        parse_params(["lam=pi"])


def test_exact_and_numeric_coefficients_agree():
    fam = make_family("flat-xy", {"lam": "1/2"})
    P = np.array([[0.3, 0.7]])
    assert np.allclose(fam.A1(P)[0, 0], 0.35 * np.eye(2))
    assert np.allclose(fam.A2(P)[(0, 1)][0], [[0, -0.5], [0, 0]])
    assert numeric_flatness(fam, np.random.default_rng(0).random((10, 2))) < 1e-8


def test_zero_family_transport_is_identity():
    r = transport(make_family("zero"), [[0, 0], [1, 0], [1, 1]], 10)
    assert np.array_equal(r.matrix, np.eye(2))
    assert r.change == 0


def test_constant_transport_matches_expm():
    fam = make_family("constant")
    M = np.array([[0, 0.5], [-0.5, 0.25]])
    assert np.allclose(segment_transport(fam, [0], [1], 7), expm(M), atol=1e-13)
    assert np.allclose(segment_transport(fam, [0], [1], 8, "euler"),
                       np.linalg.matrix_power(np.eye(2) + M / 8, 8), atol=1e-13)
    rows = transport_convergence(fam, [[0], [1]], [10, 20, 40], "euler", expm(M))
    assert 0.4 < rows[2]["ratio"] < 0.6


def test_diag_exp_closed_form():
    fam = make_family("diag-exp")
    T = segment_transport(fam, [0], [1], 50)
    assert np.allclose(T, np.diag([1, np.e]), atol=1e-12)
    rep = check_chain_map(fam, [[0], [0.5], [1]], 50)
    assert rep.consistent and rep.residual < 1e-12


def test_chain_map_input_inconsistency():
    fam = Family("ramp", 1, V, {}, "A0 = t E10, A1 = 0", None,
                 lambda P: np.einsum("k,ij->kij", P[:, 0], [[0, 0], [1, 0]]),
                 lambda P: np.zeros((len(P), 1, 2, 2)), lambda P: {})
    rep = check_chain_map(fam, [[0], [1]], 10)
    assert not rep.consistent and "input inconsistency" in rep.summary()


def test_psi2_examples():
    assert np.allclose(psi2_quadrature(make_family("abelian"), grid=6, steps=60).matrix, 0)
    S = SuperconnectionData(V, 2, {2: SuperForm.from_matrix(V, 2, [[0, 3], [0, 0]], (0, 1))})
    fam = _exact_family("pure-A2", "", {}, S)
    assert np.allclose(psi2_quadrature(fam, grid=4, steps=10).matrix, [[0, 1.5], [0, 0]], atol=1e-14)
    with pytest.raises(TransportError):
        psi2_quadrature(make_family("constant"))


def test_homotopy_examples():
    rep = check_homotopy(make_family("abelian"), grid=8, steps=80)
    assert rep.residual < 1e-12 and rep.flatness == "exact"
    rows = homotopy_convergence(make_family("flat-xy"), [(10, 100), (20, 200)])
    assert rows[1]["residual"] < 2e-4
    assert 0.2 < rows[1]["ratio"] < 0.3
    with pytest.raises(TransportError, match="not flat"):
        check_homotopy(make_family("nilpotent-const", {"a": 1, "b": 1}), grid=2, steps=2)


def test_homotopy_on_other_simplex():
    tri = ((0.0, 0.0, 0.0), (0.5, 0.2, 0.0), (0.3, 0.6, 0.4))
    assert check_homotopy(make_family("flat-xyz"), tri, grid=20, steps=200).residual < 1e-3


def test_transport_rejects_bad_input():
    fam = make_family("flat-xy")
    with pytest.raises(TransportError):
        transport(fam, [[0, 0]], 10)
    with pytest.raises(TransportError):
        transport(fam, [[0, 0], [1, 1]], 0)
