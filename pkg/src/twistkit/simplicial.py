"""Ordered simplicial complexes, finite categories and nerves.

Simplices are strictly increasing vertex tuples.  In a category the nerve
p-simplex is a chain ``X0 <-f1- X1 <-f2- ... <-fp- Xp``: ``f_i`` runs from
``X_i`` to ``X_{i-1}``.  The poset category ``[k]`` has one morphism
``i -> j`` whenever ``i >= j``, so its nondegenerate nerve simplices are the
increasing vertex tuples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .complexes import ChainComplex, GradedModule
from .exactlin import Mat

__all__ = [
    "OrderedSimplicialComplex",
    "FiniteCategory",
    "NerveSimplex",
    "CategoryError",
    "chain_complex_of",
    "front_face",
    "back_face",
    "delete_vertex",
    "nerve",
    "product_with_I",
    "poset_category",
    "fundamental_cycle",
    "barycentric_subdivision",
    "category_from_poset",
    "point_category",
    "make_simplex",
    "simplex_from_key",
    "simplex_from_morphisms",
    "nerve_dimension",
]

Simplex = tuple[int, ...]


class CategoryError(ValueError):
    pass


def front_face(s: Sequence[int], p: int) -> Simplex:
    if not 0 <= p <= len(s) - 1:
        raise IndexError(f"front face of dimension {p} of a {len(s) - 1}-simplex")
    return tuple(s[: p + 1])


def back_face(s: Sequence[int], q: int) -> Simplex:
    if not 0 <= q <= len(s) - 1:
        raise IndexError(f"back face of dimension {q} of a {len(s) - 1}-simplex")
    return tuple(s[len(s) - 1 - q:])


def delete_vertex(s: Sequence[int], i: int) -> Simplex:
    return tuple(s[:i]) + tuple(s[i + 1:])


class OrderedSimplicialComplex:
    """A finite simplicial complex on vertices ``0..vertex_count-1``."""

    __slots__ = ("vertex_count", "_by_dim", "_index")

    def __init__(self, vertex_count: int, simplices: Iterable[Sequence[int]]):
        self.vertex_count = int(vertex_count)
        cells = set()
        for s in simplices:
            t = tuple(int(v) for v in s)
            if not t:
                continue
            if any(b <= a for a, b in zip(t, t[1:])):
                raise ValueError(f"simplex {list(t)} is not strictly increasing")
            if t[0] < 0 or t[-1] >= self.vertex_count:
                raise ValueError(f"simplex {list(t)} uses a vertex outside 0..{self.vertex_count - 1}")
            cells.add(t)
        for t in cells:
            if len(t) > 1:
                for i in range(len(t)):
                    f = delete_vertex(t, i)
                    if f not in cells:
                        raise ValueError(f"face {list(f)} of {list(t)} is missing")
        by_dim: dict[int, list[Simplex]] = {}
        for t in sorted(cells):
            by_dim.setdefault(len(t) - 1, []).append(t)
        self._by_dim = {d: tuple(v) for d, v in by_dim.items()}
        self._index = {t: i for v in self._by_dim.values() for i, t in enumerate(v)}

    @classmethod
    def from_maximal(cls, vertex_count: int, maximal: Iterable[Sequence[int]]) -> "OrderedSimplicialComplex":
        cells = set()
        for s in maximal:
            t = tuple(sorted(int(v) for v in s))
            for r in range(1, len(t) + 1):
                cells.update(combinations(t, r))
        return cls(vertex_count, cells)

    @classmethod
    def simplex(cls, n: int) -> "OrderedSimplicialComplex":
        return cls.from_maximal(n + 1, [range(n + 1)])

    @classmethod
    def sphere(cls, n: int) -> "OrderedSimplicialComplex":
        """Boundary of the (n+1)-simplex."""
        return cls.from_maximal(n + 2, combinations(range(n + 2), n + 1))

    @property
    def dim(self) -> int:
        return max(self._by_dim, default=-1)

    def simplices(self, p: int) -> tuple[Simplex, ...]:
        return self._by_dim.get(p, ())

    def all_simplices(self) -> list[Simplex]:
        return [s for d in sorted(self._by_dim) for s in self._by_dim[d]]

    def index(self, s: Sequence[int]) -> int:
        return self._index[tuple(s)]

    def __contains__(self, s) -> bool:
        return tuple(s) in self._index

    def f_vector(self) -> list[int]:
        return [len(self.simplices(p)) for p in range(self.dim + 1)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, OrderedSimplicialComplex)
                and self.vertex_count == other.vertex_count and self._by_dim == other._by_dim)

    def __hash__(self) -> int:
        return hash((self.vertex_count, tuple(sorted(self._by_dim.items()))))

    def __repr__(self) -> str:
        return f"OrderedSimplicialComplex(vertices={self.vertex_count}, f={self.f_vector()})"

    def to_json(self) -> dict:
        return {"kind": "simplicial", "vertices": self.vertex_count,
                "simplices": [list(s) for s in self.all_simplices()]}

    @classmethod
    def from_json(cls, obj) -> "OrderedSimplicialComplex":
        return cls(obj["vertices"], obj["simplices"])


def chain_complex_of(K: OrderedSimplicialComplex) -> ChainComplex:
    """Simplicial chains over Z with ``d = sum (-1)^i (delete vertex i)``."""
    ranks = {p: len(K.simplices(p)) for p in range(K.dim + 1)}
    bd = {}
    for p in range(1, K.dim + 1):
        rows = [[0] * ranks[p] for _ in range(ranks[p - 1])]
        for j, s in enumerate(K.simplices(p)):
            for i in range(p + 1):
                rows[K.index(delete_vertex(s, i))][j] += (-1) ** i
        bd[p] = Mat(rows, shape=(ranks[p - 1], ranks[p]))
    return ChainComplex(GradedModule(ranks), bd, "Z")


def fundamental_cycle(K: OrderedSimplicialComplex, n: int | None = None) -> tuple[int, ...]:
    """A +-1 n-cycle on a connected closed orientable pseudomanifold.

    The coefficient of the first n-simplex is +1; the other solution is the
    negative of the returned one.
    """
    n = K.dim if n is None else n
    tops = K.simplices(n)
    if not tops:
        raise ValueError(f"complex has no {n}-simplices")
    if n == 0:
        if len(tops) != 1:
            raise ValueError("a 0-dimensional fundamental cycle needs a single point")
        return (1,)
    cofaces: dict[Simplex, list[tuple[int, int]]] = {}
    for j, s in enumerate(tops):
        for i in range(n + 1):
            cofaces.setdefault(delete_vertex(s, i), []).append((j, (-1) ** i))
    for f in K.simplices(n - 1):
        if len(cofaces.get(f, ())) != 2:
            raise ValueError(f"face {list(f)} lies in {len(cofaces.get(f, ()))} {n}-simplices, not 2")
    coeff = [0] * len(tops)
    coeff[0] = 1
    queue = deque([0])
    while queue:
        j = queue.popleft()
        s = tops[j]
        for i in range(n + 1):
            (a, sa), (b, sb) = cofaces[delete_vertex(s, i)]
            other, so, sj = (b, sb, sa) if a == j else (a, sa, sb)
            want = -coeff[j] * sj * so
            if coeff[other] == 0:
                coeff[other] = want
                queue.append(other)
            elif coeff[other] != want:
                raise ValueError("complex is not orientable")
    if 0 in coeff:
        raise ValueError("complex is not connected through codimension-one faces")
    return tuple(coeff)


def barycentric_subdivision(K: OrderedSimplicialComplex):
    """First barycentric subdivision, ordered by decreasing cell dimension.

    Returns the subdivided complex and the list of original cells labelling
    its vertices.  A subdivided simplex is a chain ``x0 > x1 > ... > xp`` of
    faces, so the first vertex is the largest cell.
    """
    labels = sorted(K.all_simplices(), key=lambda s: (-len(s), s))
    pos = {s: i for i, s in enumerate(labels)}
    cells = set()

    def extend(chain):
        cells.add(tuple(pos[c] for c in chain))
        last = chain[-1]
        for r in range(1, len(last)):
            for face in combinations(last, r):
                extend(chain + [face])

    for s in labels:
        extend([s])
    return OrderedSimplicialComplex(len(labels), [tuple(sorted(c)) for c in cells]), labels


class FiniteCategory:
    """A finite category given by its composition table.

    ``compose[(g, f)]`` is the composite ``g o f`` for ``f: a -> b`` and
    ``g: b -> c``.
    """

    __slots__ = ("objects", "morphisms", "identities", "_compose", "_out", "_in")

    def __init__(self, objects: Sequence[str], morphisms: dict[str, tuple[str, str]],
                 compose: dict[tuple[str, str], str], identities: dict[str, str] | None = None,
                 check: bool = True):
        self.objects = tuple(str(o) for o in objects)
        if len(set(self.objects)) != len(self.objects):
            raise CategoryError("duplicate object names")
        mor = {str(m): (str(s), str(t)) for m, (s, t) in morphisms.items()}
        ids = dict(identities or {})
        for o in self.objects:
            if o not in ids:
                ids[o] = f"1_{o}"
            mor.setdefault(ids[o], (o, o))
        self.morphisms = mor
        self.identities = ids
        comp = {(str(g), str(f)): str(h) for (g, f), h in compose.items()}
        for m, (s, t) in mor.items():
            comp.setdefault((ids[t], m), m)
            comp.setdefault((m, ids[s]), m)
        self._compose = comp
        self._out: dict[str, list[str]] = {o: [] for o in self.objects}
        self._in: dict[str, list[str]] = {o: [] for o in self.objects}
        for m in sorted(mor):
            s, t = mor[m]
            if s not in self._out or t not in self._in:
                raise CategoryError(f"morphism {m} has an unknown endpoint")
            self._out[s].append(m)
            self._in[t].append(m)
        if check:
            self.validate()

    def src(self, m: str) -> str:
        return self.morphisms[m][0]

    def dst(self, m: str) -> str:
        return self.morphisms[m][1]

    def is_identity(self, m: str) -> bool:
        s, t = self.morphisms[m]
        return s == t and self.identities[s] == m

    def compose(self, g: str, f: str) -> str:
        """``g o f``."""
        if self.dst(f) != self.src(g):
            raise CategoryError(f"{g} o {f} is not composable")
        try:
            return self._compose[(g, f)]
        except KeyError:
            raise CategoryError(f"composite {g} o {f} missing from the table") from None

    def hom(self, a: str, b: str) -> list[str]:
        return [m for m in self._out[a] if self.dst(m) == b]

    def out_of(self, a: str) -> list[str]:
        return list(self._out[a])

    def into(self, b: str) -> list[str]:
        return list(self._in[b])

    def validate(self) -> None:
        for (g, f), h in self._compose.items():
            if g not in self.morphisms or f not in self.morphisms or h not in self.morphisms:
                raise CategoryError(f"composition entry {g} o {f} = {h} names an unknown morphism")
            if self.dst(f) != self.src(g):
                raise CategoryError(f"composition entry {g} o {f} is not composable")
            if (self.src(h), self.dst(h)) != (self.src(f), self.dst(g)):
                raise CategoryError(f"{g} o {f} = {h} has the wrong endpoints")
        for f in self.morphisms:
            for g in self._out[self.dst(f)]:
                if (g, f) not in self._compose:
                    raise CategoryError(f"composite {g} o {f} missing from the table")
        for f in self.morphisms:
            for g in self._out[self.dst(f)]:
                gf = self._compose[(g, f)]
                for h in self._out[self.dst(g)]:
                    if self._compose[(h, gf)] != self._compose[(self._compose[(h, g)], f)]:
                        raise CategoryError(f"composition is not associative on {h}, {g}, {f}")

    def opposite(self) -> "FiniteCategory":
        mor = {m: (t, s) for m, (s, t) in self.morphisms.items()}
        comp = {(f, g): h for (g, f), h in self._compose.items()}
        return FiniteCategory(self.objects, mor, comp, self.identities, check=False)

    def full_subcategory(self, objects: Iterable[str]) -> "FiniteCategory":
        keep = [o for o in self.objects if o in set(objects)]
        ks = set(keep)
        mor = {m: st for m, st in self.morphisms.items() if st[0] in ks and st[1] in ks}
        comp = {k: h for k, h in self._compose.items() if k[0] in mor and k[1] in mor}
        ids = {o: self.identities[o] for o in keep}
        return FiniteCategory(keep, mor, comp, ids, check=False)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteCategory) and self.objects == other.objects
                and self.morphisms == other.morphisms and self._compose == other._compose)

    def __hash__(self) -> int:
        return hash((self.objects, tuple(sorted(self.morphisms.items()))))

    def __repr__(self) -> str:
        return f"FiniteCategory(objects={len(self.objects)}, morphisms={len(self.morphisms)})"

    def to_json(self) -> dict:
        nonid = [m for m in sorted(self.morphisms) if not self.is_identity(m)]
        return {
            "kind": "category",
            "objects": list(self.objects),
            "identities": {o: self.identities[o] for o in self.objects},
            "morphisms": [{"id": m, "src": self.src(m), "dst": self.dst(m)} for m in nonid],
            "compose": [[g, f, h] for (g, f), h in sorted(self._compose.items())
                        if not self.is_identity(g) and not self.is_identity(f)],
        }

    @classmethod
    def from_json(cls, obj) -> "FiniteCategory":
        mor = {}
        for m in obj.get("morphisms", []):
            mor[str(m["id"])] = (str(m["src"]), str(m["dst"]))
        comp = {(str(g), str(f)): str(h) for g, f, h in obj.get("compose", [])}
        return cls(obj["objects"], mor, comp, obj.get("identities"))


def poset_category(k: int) -> FiniteCategory:
    """The category ``[k]``: objects ``0..k`` and one morphism ``i -> j`` for ``i >= j``."""
    objs = [str(i) for i in range(k + 1)]
    mor = {f"{i}->{j}": (str(i), str(j)) for i in range(k + 1) for j in range(i + 1)}
    ids = {str(i): f"{i}->{i}" for i in range(k + 1)}
    comp = {}
    for i in range(k + 1):
        for j in range(i + 1):
            for l in range(j + 1):
                comp[(f"{j}->{l}", f"{i}->{j}")] = f"{i}->{l}"
    return FiniteCategory(objs, mor, comp, ids)


def point_category() -> FiniteCategory:
    return poset_category(0)


@dataclass(frozen=True)
class NerveSimplex:
    """``X0 <-f1- X1 <- ... <-fp- Xp`` with ``objects = (X0..Xp)``."""

    objects: tuple[str, ...]
    morphisms: tuple[str, ...]
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return len(self.morphisms)

    @property
    def key(self) -> str:
        if not self.morphisms:
            return self.objects[0]
        return ",".join(self.morphisms)

    def face(self, C: FiniteCategory, i: int) -> "NerveSimplex":
        p = self.dim
        if not 0 <= i <= p or p == 0:
            raise IndexError(f"face {i} of a {p}-simplex")
        objs = self.objects[:i] + self.objects[i + 1:]
        if i == 0:
            mors = self.morphisms[1:]
        elif i == p:
            mors = self.morphisms[:-1]
        else:
            g, f = self.morphisms[i - 1], self.morphisms[i]
            mors = self.morphisms[: i - 1] + (C.compose(g, f),) + self.morphisms[i + 1:]
        return make_simplex(C, objs, mors)

    def front(self, C: FiniteCategory, p: int) -> "NerveSimplex":
        return make_simplex(C, self.objects[: p + 1], self.morphisms[:p])

    def back(self, C: FiniteCategory, q: int) -> "NerveSimplex":
        p = self.dim
        return make_simplex(C, self.objects[p - q:], self.morphisms[p - q:])


def make_simplex(C: FiniteCategory, objects: Sequence[str], morphisms: Sequence[str]) -> NerveSimplex:
    objects, morphisms = tuple(objects), tuple(morphisms)
    if len(objects) != len(morphisms) + 1:
        raise CategoryError("a p-simplex needs p+1 objects and p morphisms")
    for i, m in enumerate(morphisms, start=1):
        if C.morphisms.get(m) != (objects[i], objects[i - 1]):
            raise CategoryError(f"morphism {m} does not run from {objects[i]} to {objects[i - 1]}")
    return NerveSimplex(objects, morphisms, any(C.is_identity(m) for m in morphisms))


def simplex_from_morphisms(C: FiniteCategory, morphisms: Sequence[str]) -> NerveSimplex:
    if not morphisms:
        raise CategoryError("a 0-simplex is named by its object")
    objs = [C.dst(morphisms[0])] + [C.src(m) for m in morphisms]
    return make_simplex(C, objs, morphisms)


def simplex_from_key(C: FiniteCategory, key: str) -> NerveSimplex:
    if key in C.objects:
        return NerveSimplex((key,), ())
    return simplex_from_morphisms(C, [k.strip() for k in key.split(",")])


def nerve(C: FiniteCategory, up_to: int, include_degenerate: bool = True) -> list[list[NerveSimplex]]:
    """Composable chains of length ``0..up_to``; degenerate ones are flagged."""
    levels = [[NerveSimplex((o,), ()) for o in C.objects]]
    for p in range(1, up_to + 1):
        nxt = []
        for s in levels[-1]:
            for m in C.into(s.objects[-1]):
                objs = s.objects + (C.src(m),)
                nxt.append(NerveSimplex(objs, s.morphisms + (m,), s.degenerate or C.is_identity(m)))
        levels.append(nxt)
    if not include_degenerate:
        levels = [[s for s in lev if not s.degenerate] for lev in levels]
    return levels


def nerve_dimension(C: FiniteCategory, limit: int = 64) -> int | None:
    """Largest p with a nondegenerate p-chain, or None if chains exceed ``limit``."""
    nondeg = {m for m in C.morphisms if not C.is_identity(m)}
    best = 0
    frontier = [(m,) for m in sorted(nondeg)]
    p = 1
    while frontier:
        best = p
        if p >= limit:
            return None
        frontier = [ch + (m,) for ch in frontier for m in C.into(C.src(ch[-1])) if m in nondeg]
        p += 1
    return best


def product_with_I(C: FiniteCategory) -> FiniteCategory:
    """``C x I`` where ``I`` has objects 0, 1 and one arrow ``u: 0 -> 1``.

    Objects are named ``X|0`` and ``X|1``; morphisms ``f|0``, ``f|1``, ``f|u``.
    """
    i_mor = {"0": ("0", "0"), "1": ("1", "1"), "u": ("0", "1")}
    i_comp = {("0", "0"): "0", ("1", "1"): "1", ("u", "0"): "u", ("1", "u"): "u"}
    objs = [f"{o}|{i}" for i in ("0", "1") for o in C.objects]
    mor, ids, comp = {}, {}, {}
    for m, (s, t) in C.morphisms.items():
        for a, (si, ti) in i_mor.items():
            mor[f"{m}|{a}"] = (f"{s}|{si}", f"{t}|{ti}")
    for o in C.objects:
        ids[f"{o}|0"] = f"{C.identities[o]}|0"
        ids[f"{o}|1"] = f"{C.identities[o]}|1"
    for f in C.morphisms:
        for g in C.out_of(C.dst(f)):
            h = C.compose(g, f)
            for (b, a), c in i_comp.items():
                comp[(f"{g}|{b}", f"{f}|{a}")] = f"{h}|{c}"
    return FiniteCategory(objs, mor, comp, ids)


def category_from_poset(elements: Sequence[str], less: Iterable[tuple[str, str]]) -> FiniteCategory:
    """Poset category with a morphism ``a -> b`` whenever ``b <= a``.

    This matches ``[k]``: nerve chains ``X0 <- X1 <- ...`` are increasing.
    """
    elements = [str(e) for e in elements]
    lt = {(str(a), str(b)) for a, b in less}
    le = {(e, e) for e in elements} | lt
    mor = {f"{a}->{b}": (a, b) for (b, a) in le}
    ids = {e: f"{e}->{e}" for e in elements}
    comp = {}
    for (b, a) in le:
        for (c, b2) in le:
            if b2 == b:
                if (c, a) not in le:
                    raise CategoryError("order relation is not transitive")
                comp[(f"{b}->{c}", f"{a}->{b}")] = f"{a}->{c}"
    return FiniteCategory(elements, mor, comp, ids)
