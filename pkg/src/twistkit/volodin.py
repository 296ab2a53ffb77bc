"""Volodin and Whitehead category validators.

Orders on ``{1..n}`` are sets of pairs ``(i, j)`` meaning ``i < j``.  A
Volodin morphism ``(A, s) -> (B, t)`` is ``T = A^-1 B`` when ``s`` is
contained in ``t`` and ``T`` is ``t``-upper triangular with unit diagonal.

The canonical twisting cochain uses the fiber ``R^n (deg 1) -> R^n (deg 0)``
with ``psi_0(A) = A`` and ``psi_1(T) = (0, T - I)``.  Since ``(I, T)`` maps
the complex with differential ``B`` to the one with differential ``A``, the
cochain lives on the opposite category: the Volodin morphism ``a -> b``
becomes the category morphism ``b -> a`` named ``T[a;b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from .complexes import ChainComplex, GradedMap, GradedModule, homology
from .exactlin import Mat, to_fraction
from .simplicial import FiniteCategory, nerve_dimension, poset_category
from .twisting import TwistingCochain, check_twisting

__all__ = [
    "VolodinError",
    "VolodinObject",
    "VolodinMorphism",
    "MorphismCheck",
    "ForgetResult",
    "WhiteheadObject",
    "WhiteheadReport",
    "transitive_closure",
    "is_partial_order",
    "check_volodin_morphism",
    "compose_volodin",
    "forget_partial_orders",
    "is_upper_triangular",
    "volodin_category",
    "canonical_twisting_cochain",
    "check_whitehead_object",
    "check_whitehead_morphism",
]


class VolodinError(ValueError):
    pass


Order = frozenset


def transitive_closure(pairs: Iterable[tuple]) -> frozenset:
    rel = set(pairs)
    while True:
        extra = {(a, d) for (a, b) in rel for (c, d) in rel if b == c} - rel
        if not extra:
            return frozenset(rel)
        rel |= extra


def is_partial_order(pairs: Iterable[tuple]) -> bool:
    rel = frozenset(pairs)
    return all(a != b for a, b in rel) and transitive_closure(rel) == rel


def is_upper_triangular(T: Mat, order: Iterable[tuple[int, int]]) -> str | None:
    """``None`` if ``T`` has unit diagonal and is supported on ``i <= j``; else the reason."""
    order = set(order)
    for i in range(T.rows):
        if T[i, i] != 1:
            return f"t{i + 1}{i + 1} = {T[i, i]} != 1"
    for i, j, x in T.nonzero_entries():
        if i != j and (i + 1, j + 1) not in order:
            return f"t{i + 1}{j + 1} != 0 with {i + 1} not <= {j + 1}"
    return None


@dataclass(frozen=True)
class VolodinObject:
    A: Mat
    order: frozenset = frozenset()
    ring: str = "Q"

    def __post_init__(self):
        object.__setattr__(self, "order", frozenset((int(a), int(b)) for a, b in self.order))
        n = self.A.rows
        if not self.A.is_square or n == 0:
            raise VolodinError("A must be a nonempty square matrix")
        d = self.A.det()
        if d == 0:
            raise VolodinError("A is singular")
        if self.ring == "Z" and (not self.A.is_integral or abs(d) != 1):
            raise VolodinError("over Z, A must be integral with determinant +-1")
        for a, b in self.order:
            if not (1 <= a <= n and 1 <= b <= n):
                raise VolodinError(f"order pair ({a},{b}) outside 1..{n}")
        if not is_partial_order(self.order):
            raise VolodinError("order must be irreflexive and transitively closed")

    @property
    def n(self) -> int:
        return self.A.rows

    def to_json(self) -> dict:
        return {"kind": "volodin-object", "A": self.A.to_json(),
                "order": [list(p) for p in sorted(self.order)], "ring": self.ring}

    @classmethod
    def from_json(cls, obj) -> "VolodinObject":
        return cls(Mat.from_json(obj["A"]), frozenset(tuple(p) for p in obj.get("order", [])),
                   obj.get("ring", "Q"))


@dataclass(frozen=True)
class VolodinMorphism:
    source: VolodinObject
    target: VolodinObject
    T: Mat


@dataclass
class MorphismCheck:
    ok: bool
    T: Mat | None
    reason: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "T": None if self.T is None else self.T.to_json(), "reason": self.reason}


def check_volodin_morphism(src: VolodinObject, dst: VolodinObject) -> MorphismCheck:
    """``T = A^-1 B`` and the first failing condition, if any."""
    if src.n != dst.n:
        raise VolodinError("objects have different sizes")
    T = src.A.inverse() @ dst.A
    if not src.order <= dst.order:
        missing = sorted(src.order - dst.order)[0]
        return MorphismCheck(False, T, f"source order not contained in target order: {missing} missing")
    if (src.ring == "Z" or dst.ring == "Z") and not T.is_integral:
        return MorphismCheck(False, T, "T is not integral")
    why = is_upper_triangular(T, dst.order)
    if why:
        return MorphismCheck(False, T, why)
    return MorphismCheck(True, T, "valid")


def volodin_morphism(src: VolodinObject, dst: VolodinObject) -> VolodinMorphism | None:
    r = check_volodin_morphism(src, dst)
    return VolodinMorphism(src, dst, r.T) if r.ok else None


def compose_volodin(S, T):
    """``S o T = T S`` (reverse matrix product).

    Accepts matrices, or morphisms ``T: X -> Y`` and ``S: Y -> Z`` in which
    case the composite is verified to be a morphism ``X -> Z``.
    """
    if isinstance(S, VolodinMorphism) and isinstance(T, VolodinMorphism):
        if T.target != S.source:
            raise VolodinError("morphisms are not composable")
        M = T.T @ S.T
        why = is_upper_triangular(M, S.target.order)
        if why:
            raise VolodinError(f"composite is not a morphism: {why}")
        if T.source.A @ M != S.target.A:
            raise VolodinError("composite does not satisfy A T = B")
        return VolodinMorphism(T.source, S.target, M)
    return T @ S


@dataclass
class ForgetResult:
    simplex: tuple[Mat, ...]
    minimal_order: frozenset
    checked_orders: int = 0

    def to_json(self) -> dict:
        return {"simplex": [g.to_json() for g in self.simplex],
                "minimal_order": [list(p) for p in sorted(self.minimal_order)]}


def _find_cycle(rel: frozenset) -> list[int]:
    for a, b in sorted(rel):
        if a != b and (b, a) in rel:
            return [a, b, a]
    a = next(a for a, b in rel if a == b)
    return [a, a]


def forget_partial_orders(chain: Sequence, admissible: Iterable[Iterable[tuple[int, int]]] = ()) -> ForgetResult:
    """Drop the orders of a nerve chain and compute the minimal admissible order.

    ``chain`` is a sequence of VolodinObjects or invertible matrices.  The
    minimal order is the transitive closure of the relations forced by
    off-diagonal entries of every ``g_i^-1 g_j``.  Each order in
    ``admissible`` is verified to be admissible and to contain it.
    """
    gs = tuple(g.A if isinstance(g, VolodinObject) else g for g in chain)
    if not gs:
        raise VolodinError("empty chain")
    n = gs[0].rows
    invs = []
    for g in gs:
        if g.shape != (n, n) or g.det() == 0:
            raise VolodinError("chain entries must be invertible n x n matrices")
        invs.append(g.inverse())
    forced = set()
    for i, j in product(range(len(gs)), repeat=2):
        if i == j:
            continue
        for a, b, _ in (invs[i] @ gs[j]).nonzero_entries():
            if a != b:
                forced.add((a + 1, b + 1))
    sigma = transitive_closure(forced)
    if any(a == b for a, b in sigma):
        cyc = _find_cycle(sigma)
        raise VolodinError("no admissible order: forced cycle " + " < ".join(map(str, cyc)))
    for i, j in product(range(len(gs)), repeat=2):
        M = invs[i] @ gs[j]
        for a in range(n):
            if M[a, a] != 1:
                raise VolodinError(f"no admissible order: g{i}^-1 g{j} has diagonal entry {M[a, a]} at {a + 1}")
    count = 0
    for tau in admissible:
        tau = frozenset(tuple(p) for p in tau)
        count += 1
        if not is_partial_order(tau):
            raise VolodinError(f"supplied relation {sorted(tau)} is not a partial order")
        for i, j in product(range(len(gs)), repeat=2):
            if i != j and is_upper_triangular(invs[i] @ gs[j], tau):
                raise VolodinError(f"supplied order {sorted(tau)} is not admissible")
        if not sigma <= tau:
            raise VolodinError(f"minimal order is not contained in {sorted(tau)}")
    return ForgetResult(gs, sigma, count)


def volodin_category(objects: Mapping[str, VolodinObject],
                     morphisms: Iterable[tuple[str, str]] | None = None):
    """Opposite category of a fragment of the Volodin category.

    Returns the category and the matrix ``T`` of each morphism.  Without
    ``morphisms`` every valid morphism between the objects is used; with
    them, their closure under composition.
    """
    names = list(objects)
    valid: dict[tuple[str, str], Mat] = {}
    for a in names:
        for b in names:
            r = check_volodin_morphism(objects[a], objects[b])
            if r.ok:
                valid[(a, b)] = r.T
    if morphisms is not None:
        keep = {(a, a) for a in names}
        for a, b in morphisms:
            if (a, b) not in valid:
                r = check_volodin_morphism(objects[a], objects[b])
                raise VolodinError(f"{a} -> {b} is not a Volodin morphism: {r.reason}")
            keep.add((a, b))
        while True:
            extra = {(a, c) for (a, b) in keep for (b2, c) in keep if b == b2} - keep
            if not extra:
                break
            keep |= extra
        valid = {k: v for k, v in valid.items() if k in keep}
    mor = {f"T[{a};{b}]": (b, a) for (a, b) in valid}
    ids = {a: f"T[{a};{a}]" for a in names}
    comp = {}
    for (a, b) in valid:
        for (b2, c) in valid:
            if b2 == b:
                # op morphisms: T[b,c]: c -> b then T[a,b]: b -> a
                comp[(f"T[{a};{b}]", f"T[{b};{c}]")] = f"T[{a};{c}]"
    C = FiniteCategory(names, mor, comp, ids)
    mats = {f"T[{a};{b}]": T for (a, b), T in valid.items()}
    return C, mats


def canonical_twisting_cochain(objects: Mapping[str, VolodinObject],
                               morphisms: Iterable[tuple[str, str]] | None = None,
                               max_p: int | None = None) -> TwistingCochain:
    """``psi_0(A) = A``, ``psi_1(T) = (0, T - I)``, higher terms zero."""
    sizes = {o.n for o in objects.values()}
    if len(sizes) != 1:
        raise VolodinError("fragment objects must share the matrix size")
    n = sizes.pop()
    C, mats = volodin_category(objects, morphisms)
    if max_p is None:
        max_p = nerve_dimension(C, limit=8)
        if max_p is None:
            max_p = 3
    H = GradedModule({0: n, 1: n})
    entries: dict[int, dict[str, GradedMap]] = {0: {}, 1: {}}
    for name, obj in objects.items():
        entries[0][name] = GradedMap(H, H, -1, {1: obj.A})
    I = Mat.identity(n)
    for m, T in mats.items():
        if C.is_identity(m):
            continue
        entries[1][m] = GradedMap(H, H, 0, {1: T - I})
    return TwistingCochain(C, H, entries, max_p=max_p)


@dataclass
class WhiteheadObject:
    """A graded poset ``P`` with an upper-triangular cochain on ``[k]``.

    ``psi[p][key]`` is a ``|P| x |P|`` matrix in the element order of
    ``elements``; column ``x`` holds ``psi(sigma)(x)``.  Simplex keys are
    comma-joined increasing vertex lists of ``[k]``.
    """

    k: int
    elements: list[tuple[str, int]]
    less: frozenset
    psi: dict[int, dict[str, Mat]]
    G: tuple = (Fraction(1),)
    h: bool = True

    def __post_init__(self):
        self.elements = [(str(n), int(d)) for n, d in self.elements]
        self.less = frozenset((str(a), str(b)) for a, b in self.less)
        self.G = tuple(to_fraction(g) for g in self.G)
        names = [n for n, _ in self.elements]
        if len(set(names)) != len(names):
            raise VolodinError("duplicate element names")
        for p, ent in self.psi.items():
            for key, M in ent.items():
                if M.shape != (len(names), len(names)):
                    raise VolodinError(f"psi_{p}({key}) must be {len(names)} x {len(names)}")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.elements]

    @property
    def degree(self) -> dict[str, int]:
        return dict(self.elements)

    def related(self, x: str) -> set[str]:
        return {b for a, b in self.less if a == x} | {a for a, b in self.less if b == x}

    def matrix(self, p: int, key: str) -> Mat:
        n = len(self.elements)
        return self.psi.get(p, {}).get(key, Mat.zeros(n, n))

    def module(self) -> GradedModule:
        ranks: dict[int, int] = {}
        for _, d in self.elements:
            ranks[d] = ranks.get(d, 0) + 1
        return GradedModule(ranks)

    def graded_index(self) -> dict[str, tuple[int, int]]:
        pos: dict[int, int] = {}
        out = {}
        for name, d in self.elements:
            out[name] = (d, pos.get(d, 0))
            pos[d] = pos.get(d, 0) + 1
        return out

    def cochain(self) -> TwistingCochain:
        """The cochain on the category ``[k]`` with fiber ``R^P``."""
        H = self.module()
        gi = self.graded_index()
        names = self.names
        entries: dict[int, dict[str, GradedMap]] = {}
        for p, ent in self.psi.items():
            for key, M in ent.items():
                comps: dict[int, list[list]] = {}
                for i, j, x in M.nonzero_entries():
                    dy, iy = gi[names[i]]
                    dx, ix = gi[names[j]]
                    if dy != dx + p - 1:
                        raise VolodinError(f"psi_{p}({key}) is not of degree {p - 1}")
                    comps.setdefault(dx, [[0] * H.rank(dx) for _ in range(H.rank(dx + p - 1))])[iy][ix] = x
                g = GradedMap(H, H, p - 1, {d: Mat(r, shape=(H.rank(d + p - 1), H.rank(d)))
                                            for d, r in comps.items()})
                entries.setdefault(p, {})[_nerve_key(key)] = g
        return TwistingCochain(poset_category(self.k), H, entries, max_p=self.k)

    def to_json(self) -> dict:
        return {
            "kind": "whitehead-object",
            "k": self.k,
            "poset": {"elements": [{"name": n, "degree": d} for n, d in self.elements],
                      "less": [list(p) for p in sorted(self.less)]},
            "psi": {str(p): {key: M.to_json() for key, M in sorted(ent.items())}
                    for p, ent in sorted(self.psi.items())},
            "G": [str(g) for g in self.G],
            "h": self.h,
        }

    @classmethod
    def from_json(cls, obj) -> "WhiteheadObject":
        poset = obj["poset"]
        elements = [(e["name"], e["degree"]) for e in poset["elements"]]
        n = len(elements)
        psi = {int(p): {key.replace(" ", ""): Mat.from_json(M, shape=(n, n)) for key, M in ent.items()}
               for p, ent in obj.get("psi", {}).items()}
        return cls(int(obj["k"]), elements, frozenset(tuple(x) for x in poset.get("less", [])),
                   psi, tuple(obj.get("G", ["1"])), bool(obj.get("h", True)))


def _nerve_key(key: str) -> str:
    vs = [int(v) for v in key.split(",")]
    if len(vs) == 1:
        return str(vs[0])
    return ",".join(f"{vs[i + 1]}->{vs[i]}" for i in range(len(vs) - 1))


@dataclass
class WhiteheadReport:
    ok: bool
    problems: list[str] = field(default_factory=list)
    acyclic: dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok, "problems": list(self.problems), "acyclic": dict(sorted(self.acyclic.items()))}

    def summary(self) -> str:
        if self.ok:
            return "pass"
        return "fail:\n" + "\n".join(f"  {p}" for p in self.problems)


def _simplex_keys(k: int, p: int) -> list[str]:
    from itertools import combinations
    return [",".join(map(str, c)) for c in combinations(range(k + 1), p + 1)]


def check_whitehead_object(W: WhiteheadObject) -> WhiteheadReport:
    problems = []
    names = W.names
    for a, b in sorted(W.less):
        if a not in names or b not in names:
            problems.append(f"poset: relation {a} < {b} names an unknown element")
    if problems:
        return WhiteheadReport(False, problems)
    if not is_partial_order(W.less):
        problems.append("poset: relation is not an irreflexive transitive order")
    valid_keys = {p: set(_simplex_keys(W.k, p)) for p in range(W.k + 1)}
    deg = W.degree
    for p, ent in sorted(W.psi.items()):
        for key, M in sorted(ent.items()):
            if key not in valid_keys.get(p, set()):
                problems.append(f"psi_{p}: {key} is not a {p}-simplex of [{W.k}]")
                continue
            for i, j, _ in M.nonzero_entries():
                x, y = names[j], names[i]
                if (y, x) not in W.less:
                    problems.append(f"upper-triangular: psi_{p}({key})({x}) has a component on {y}, "
                                    f"which is not below {x}")
                if deg[y] != deg[x] + p - 1:
                    problems.append(f"degree: psi_{p}({key})({x}) has a component on {y} "
                                    f"of degree {deg[y]}, expected {deg[x] + p - 1}")
    if problems:
        return WhiteheadReport(False, problems)
    psi = W.cochain()
    rep = check_twisting(psi)
    for v in rep.violations:
        problems.append(f"twisting: residual nonzero on simplex {v.simplex} (n={v.n})")
    acyclic = {}
    H = W.module()
    for v in range(W.k + 1):
        d = psi.value(0, str(v))
        C = ChainComplex(H, {n: d.component(n) for n in H.degrees}, "Q", check=False)
        if C.square_defect() is not None:
            acyclic[str(v)] = False
            continue
        acyclic[str(v)] = all(g.is_zero() for g in homology(C, "Q").values())
    if W.h:
        for v, ok in acyclic.items():
            if not ok:
                problems.append(f"h-condition: (R^P, psi_0) at vertex {v} is not acyclic")
    return WhiteheadReport(not problems, problems, acyclic)


def check_whitehead_morphism(src: WhiteheadObject, dst: WhiteheadObject,
                             f: Mapping[str, str], gamma: Mapping[str, object]) -> WhiteheadReport:
    """Morphism ``(P, psi) -> (Q, phi)`` given by ``f: Q -> P`` and ``gamma: Q -> G``."""
    problems = []
    P, Q = src, dst
    if P.k != Q.k:
        return WhiteheadReport(False, [f"level mismatch: {P.k} != {Q.k}"])
    pn, qn = P.names, Q.names
    if set(f) != set(qn):
        return WhiteheadReport(False, ["f must be defined exactly on the elements of Q"])
    if set(gamma) != set(qn):
        return WhiteheadReport(False, ["gamma must be defined exactly on the elements of Q"])
    image = [f[x] for x in qn]
    if any(y not in pn for y in image):
        return WhiteheadReport(False, ["f takes values outside P"])
    if len(set(image)) != len(image):
        problems.append("f is not injective")
    pdeg, qdeg = P.degree, Q.degree
    for x in qn:
        if pdeg[f[x]] != qdeg[x]:
            problems.append(f"f is not graded at {x}")
    for a, b in sorted(Q.less):
        if (f[a], f[b]) not in P.less:
            problems.append(f"f does not preserve {a} < {b}")
    units = set(P.G)
    g_of = {}
    for x in qn:
        g = to_fraction(gamma[x])
        if g not in units:
            problems.append(f"gamma({x}) = {g} is not in G")
        g_of[x] = g
    rest = [y for y in pn if y not in set(image)]
    seen = set()
    for y in rest:
        if y in seen:
            continue
        rel = P.related(y)
        if len(rel) != 1 or next(iter(rel)) not in rest or P.related(next(iter(rel))) != {y}:
            problems.append(f"expansion pair: {y} is not otherwise unrelated to every other element")
            seen.add(y)
            continue
        z = next(iter(rel))
        seen |= {y, z}
        plus, minus = (y, z) if (z, y) in P.less else (z, y)
        ip, im = pn.index(plus), pn.index(minus)
        for v in range(P.k + 1):
            col = P.matrix(0, str(v)).col(ip)
            g = col[im]
            others = any(c for i, c in enumerate(col) if i != im)
            if others or g not in units:
                problems.append(f"expansion pair: psi_0({plus}) at vertex {v} is not {minus} times a unit of G")
    for p in range(P.k + 1):
        for key in _simplex_keys(P.k, p):
            psiM, phiM = P.matrix(p, key), Q.matrix(p, key)
            for jx, x in enumerate(qn):
                lhs = [Fraction(0)] * len(pn)
                for iy, y in enumerate(qn):
                    c = phiM[iy, jx]
                    if c:
                        lhs[pn.index(f[y])] += c
                fx = pn.index(f[x])
                rhs = [psiM[i, fx] * g_of[x] for i in range(len(pn))]
                if lhs != rhs:
                    problems.append(f"equivariance: f_*(phi_{p}({key})({x})) != psi_{p}({key})(f({x})) gamma({x})")
    return WhiteheadReport(not problems, problems)
