"""Twisting cochains, twisted tensor products and the fiber-degree spectral sequence.

A cochain ``psi = sum psi_p`` assigns to each nondegenerate p-simplex
``X0 <- ... <- Xp`` a graded map ``Phi X_p -> Phi X_0`` of degree ``p - 1``.
The coboundary of a p-cochain is

    (d psi)(X0..X_{p+1}) = T(f1) psi(d_0) + sum_{i=1}^{p} (-1)^i psi(d_i)
                           + (-1)^(p+1) psi(d_{p+1}) T(f_{p+1})

where ``T`` is the degree 0 transport (the identity on a simplicial complex
with one fiber), and the twisting condition in simplex dimension ``n`` is
``d psi_{n-1} = sum_{p+q=n} (-1)^p psi_p(front) psi_q(back)``, with
``psi_0^2 = 0`` for ``n = 0``.  The last coboundary sign is the one for which
this condition matches the A-infinity cocycle condition for
``(Phi, psi_0, T + psi_1, psi_2, ...)``.

The twisted boundary on ``x (x) y`` with ``x`` of dimension ``n`` is

    sum_{i<n} (-1)^i d_i x (x) y + (-1)^n d_n x (x) T(f_n) y
        - sum_{p+q=n} (-1)^p f_p(x) (x) psi_q(b_q(x)) y,

the fiber sitting over the last vertex.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ._parallel import pmap
from .complexes import ChainComplex, GradedMap, GradedModule, HomologyGroup, homology
from .exactlin import Mat, rank_kernel
from .simplicial import (
    FiniteCategory,
    OrderedSimplicialComplex,
    delete_vertex,
    fundamental_cycle,
    nerve,
    nerve_dimension,
    poset_category,
    simplex_from_key,
    simplex_from_morphisms,
)

__all__ = [
    "TwistError",
    "TwistingCochain",
    "TwistReport",
    "TwistedComplex",
    "SpectralSequence",
    "coboundary",
    "cup_prime",
    "twisting_residual",
    "check_twisting",
    "twisted_tensor_product",
    "total_complex",
    "simplex_subcomplex",
    "euler_class",
    "fiber_degree_spectral_sequence",
    "circle_fiber",
    "torus_cochain",
    "klein_cochain",
    "lens_cochain",
]


class TwistError(ValueError):
    def __init__(self, message: str, bidegree: tuple[int, int] | None = None):
        super().__init__(message)
        self.bidegree = bidegree


def _vkey(s) -> str:
    return ",".join(str(v) for v in s)


class _ComplexBase:
    """Simplices of an ordered simplicial complex, one fiber, identity transport."""

    kind = "simplicial"

    def __init__(self, K: OrderedSimplicialComplex):
        self.K = K
        self.max_dim = K.dim

    def simplices(self, p: int) -> list[str]:
        return [_vkey(s) for s in self.K.simplices(p)]

    @staticmethod
    def parse(key: str) -> tuple[int, ...]:
        return tuple(int(v) for v in key.split(","))

    def is_simplex(self, key: str) -> bool:
        try:
            return self.parse(key) in self.K
        except ValueError:
            return False

    def dim(self, key: str) -> int:
        return key.count(",")

    def face(self, key: str, i: int) -> str | None:
        return _vkey(delete_vertex(self.parse(key), i))

    def front(self, key: str, p: int) -> str:
        return _vkey(self.parse(key)[: p + 1])

    def back(self, key: str, q: int) -> str:
        s = self.parse(key)
        return _vkey(s[len(s) - 1 - q:])

    def first(self, key: str) -> str:
        return key.split(",")[0]

    def last(self, key: str) -> str:
        return key.split(",")[-1]

    def edge(self, key: str, i: int) -> str:
        """The 1-simplex ``f_i`` from vertex ``i`` to vertex ``i-1``."""
        s = self.parse(key)
        return _vkey(s[i - 1: i + 1])


class _CategoryBase:
    """Nondegenerate nerve chains of a finite category."""

    kind = "category"

    def __init__(self, C: FiniteCategory, max_dim: int):
        self.C = C
        self.max_dim = max_dim
        self._levels = nerve(C, max_dim, include_degenerate=False)

    def simplices(self, p: int) -> list[str]:
        if p > self.max_dim:
            return []
        return [s.key for s in self._levels[p]]

    def simplex(self, key: str):
        return simplex_from_key(self.C, key)

    def is_simplex(self, key: str) -> bool:
        try:
            return not self.simplex(key).degenerate
        except Exception:
            return False

    def dim(self, key: str) -> int:
        return self.simplex(key).dim

    def face(self, key: str, i: int) -> str | None:
        f = self.simplex(key).face(self.C, i)
        return None if f.degenerate else f.key

    def front(self, key: str, p: int) -> str | None:
        f = self.simplex(key).front(self.C, p)
        return None if f.degenerate else f.key

    def back(self, key: str, q: int) -> str | None:
        f = self.simplex(key).back(self.C, q)
        return None if f.degenerate else f.key

    def first(self, key: str) -> str:
        return self.simplex(key).objects[0]

    def last(self, key: str) -> str:
        return self.simplex(key).objects[-1]

    def edge(self, key: str, i: int) -> str:
        return self.simplex(key).morphisms[i - 1]


class TwistingCochain:
    """A candidate twisting cochain on a simplicial complex or a finite category.

    ``fiber`` is one graded module, or a map object -> module for a category
    base.  ``transport`` maps morphism ids to degree 0 maps (identity when
    absent).  ``entries[p][key]`` is ``psi_p`` on a simplex; missing entries
    are zero.
    """

    def __init__(self, base, fiber, entries: Mapping[int, Mapping[str, GradedMap]] | None = None,
                 transport: Mapping[str, GradedMap] | None = None, max_p: int | None = None,
                 check: bool = True):
        self.base = base
        if isinstance(base, OrderedSimplicialComplex):
            if transport:
                raise TwistError("transport is only supported over a category base")
            self._b = _ComplexBase(base)
            if not isinstance(fiber, GradedModule):
                raise TwistError("a simplicial base takes a single fiber module")
        elif isinstance(base, FiniteCategory):
            if max_p is None:
                max_p = nerve_dimension(base)
                if max_p is None:
                    raise TwistError("base has chains of unbounded length; pass max_p")
            self._b = _CategoryBase(base, max_p)
        else:
            raise TypeError("base must be an OrderedSimplicialComplex or a FiniteCategory")
        self.fiber = fiber
        self.transport = dict(transport or {})
        self.entries: dict[int, dict[str, GradedMap]] = {
            int(p): dict(v) for p, v in (entries or {}).items()}
        self.max_p = self._b.max_dim
        if check:
            problems = self.shape_errors()
            if problems:
                raise TwistError("; ".join(problems))

    @property
    def base_kind(self) -> str:
        return self._b.kind

    def module(self, obj: str) -> GradedModule:
        if isinstance(self.fiber, GradedModule):
            return self.fiber
        return self.fiber[obj]

    def simplices(self, p: int) -> list[str]:
        return self._b.simplices(p)

    def shape_errors(self) -> list[str]:
        out = []
        if self._b.kind == "category":
            C = self._b.C
            if not isinstance(self.fiber, GradedModule):
                missing = [o for o in C.objects if o not in self.fiber]
                if missing:
                    out.append(f"no fiber module for objects {missing}")
                    return out
            for m, g in self.transport.items():
                if m not in C.morphisms:
                    out.append(f"transport for unknown morphism {m}")
                    continue
                if (g.source, g.target, g.degree) != (self.module(C.src(m)), self.module(C.dst(m)), 0):
                    out.append(f"transport {m} has the wrong shape")
            for m in C.morphisms:
                if m not in self.transport and self.module(C.src(m)) != self.module(C.dst(m)):
                    out.append(f"morphism {m} needs a transport between different fibers")
        for p, ent in sorted(self.entries.items()):
            for key, g in sorted(ent.items()):
                if not self._b.is_simplex(key) or self._b.dim(key) != p:
                    out.append(f"psi_{p}: {key} is not a nondegenerate {p}-simplex")
                    continue
                want = (self.module(self._b.last(key)), self.module(self._b.first(key)), p - 1)
                if (g.source, g.target, g.degree) != want:
                    out.append(f"psi_{p}({key}) must have degree {p - 1} from the fiber over "
                               f"{self._b.last(key)} to the fiber over {self._b.first(key)}")
        return out

    def value(self, p: int, key: str | None) -> GradedMap | None:
        """``psi_p`` on a simplex; ``None`` for degenerate simplices (value zero)."""
        if key is None:
            return None
        g = self.entries.get(p, {}).get(key)
        if g is not None:
            return g
        return GradedMap.zero(self.module(self._b.last(key)), self.module(self._b.first(key)), p - 1)

    def transport_of(self, key: str, i: int) -> GradedMap | None:
        """``T(f_i)`` along the i-th edge of a simplex; ``None`` means identity."""
        if self._b.kind == "simplicial":
            return None
        m = self._b.edge(key, i)
        return self.transport.get(m)

    def component(self, p: int) -> dict[str, GradedMap]:
        return dict(self.entries.get(p, {}))

    def nonzero_degrees(self) -> list[int]:
        return sorted(p for p, v in self.entries.items() if any(not g.is_zero() for g in v.values()))

    def with_entries(self, entries) -> "TwistingCochain":
        return TwistingCochain(self.base, self.fiber, entries, self.transport,
                               self.max_p if self._b.kind == "category" else None)

    def to_json(self) -> dict:
        out = {"kind": "twisting", "base": self.base.to_json()}
        if isinstance(self.fiber, GradedModule):
            out["fiber_ranks"] = self.fiber.to_json()
        else:
            out["fiber_ranks"] = {o: self.fiber[o].to_json() for o in self.base.objects}
        if self._b.kind == "category":
            out["max_p"] = self.max_p
        if self.transport:
            out["transport"] = {m: {"components": {str(n): c.to_json() for n, c in sorted(g.components.items())}}
                                for m, g in sorted(self.transport.items())}
        out["psi"] = {str(p): {k: {"degree": g.degree,
                                   "components": {str(n): c.to_json() for n, c in sorted(g.components.items())}}
                               for k, g in sorted(v.items())}
                      for p, v in sorted(self.entries.items())}
        return out

    @classmethod
    def from_json(cls, obj) -> "TwistingCochain":
        b = obj["base"]
        kind = b.get("kind")
        if kind == "category" or "objects" in b:
            base = FiniteCategory.from_json(b)
            fr = obj.get("fiber_ranks", {})
            if fr and all(isinstance(v, dict) for v in fr.values()):
                fiber = {str(o): GradedModule.from_json(v) for o, v in fr.items()}
            else:
                fiber = GradedModule.from_json(fr)
        else:
            base = OrderedSimplicialComplex.from_json(b)
            fiber = GradedModule.from_json(obj.get("fiber_ranks", {}))
        mod = (lambda o: fiber) if isinstance(fiber, GradedModule) else (lambda o: fiber[o])
        transport = {}
        for m, g in obj.get("transport", {}).items():
            transport[m] = GradedMap.from_json({"degree": 0, "components": g.get("components", {})},
                                               mod(base.src(m)), mod(base.dst(m)))
        probe = cls(base, fiber, {}, transport, obj.get("max_p"), check=False)
        entries: dict[int, dict[str, GradedMap]] = {}
        for p_str, ent in obj.get("psi", {}).items():
            p = int(p_str)
            for key, g in ent.items():
                key = key.replace(" ", "")
                if not probe._b.is_simplex(key):
                    raise TwistError(f"psi.{p_str}: {key} is not a simplex of the base")
                src, tgt = mod(probe._b.last(key)), mod(probe._b.first(key))
                data = {"degree": g.get("degree", p - 1), "components": g.get("components", {})}
                entries.setdefault(p, {})[key] = GradedMap.from_json(data, src, tgt)
        return cls(base, fiber, entries, transport, obj.get("max_p"))


def _add(acc: GradedMap | None, term: GradedMap | None, sign: int) -> GradedMap | None:
    if term is None:
        return acc
    term = term if sign > 0 else -term
    return term if acc is None else acc + term


def coboundary(psi: TwistingCochain, p: int, key: str | None = None) -> dict[str, GradedMap]:
    """``d psi_p`` on each (p+1)-simplex (or only on ``key``)."""
    b = psi._b
    keys = [key] if key is not None else b.simplices(p + 1)
    out = {}
    for k in keys:
        acc = None
        first = psi.value(p, b.face(k, 0))
        if first is not None:
            t = psi.transport_of(k, 1)
            acc = _add(acc, first if t is None else t @ first, 1)
        for i in range(1, p + 1):
            acc = _add(acc, psi.value(p, b.face(k, i)), (-1) ** i)
        last = psi.value(p, b.face(k, p + 1))
        if last is not None:
            t = psi.transport_of(k, p + 1)
            acc = _add(acc, last if t is None else last @ t, (-1) ** (p + 1))
        if acc is None:
            acc = GradedMap.zero(psi.module(b.last(k)), psi.module(b.first(k)), p - 1)
        out[k] = acc
    return out


def _cup_at(psi: TwistingCochain, phi: TwistingCochain, n: int, k: str) -> GradedMap:
    b = psi._b
    acc = None
    for p in range(n + 1):
        left = psi.value(p, b.front(k, p))
        right = phi.value(n - p, b.back(k, n - p))
        if left is None or right is None:
            continue
        acc = _add(acc, left @ right, (-1) ** p)
    if acc is None:
        acc = GradedMap.zero(psi.module(b.last(k)), psi.module(b.first(k)), n - 2)
    return acc


def cup_prime(psi: TwistingCochain, phi: TwistingCochain | None = None,
              degrees: list[int] | None = None) -> dict[int, dict[str, GradedMap]]:
    """``(psi cup' phi)_n = sum_{p+q=n} (-1)^p psi_p(front) phi_q(back)``."""
    phi = psi if phi is None else phi
    degrees = list(range(psi.max_p + 1)) if degrees is None else degrees
    return {n: {k: _cup_at(psi, phi, n, k) for k in psi.simplices(n)} for n in degrees}


def twisting_residual(psi: TwistingCochain, n: int, key: str) -> GradedMap:
    """``d psi_{n-1} - (psi cup' psi)_n`` on an n-simplex."""
    cup = _cup_at(psi, psi, n, key)
    if n == 0:
        return -cup
    return coboundary(psi, n - 1, key)[key] - cup


@dataclass
class TwistViolation:
    n: int
    simplex: str
    degree: int
    residual: Mat

    def to_json(self) -> dict:
        return {"n": self.n, "simplex": self.simplex, "degree": self.degree,
                "residual": self.residual.to_json()}


@dataclass
class TwistReport:
    ok: bool
    checked: int
    violations: list[TwistViolation] = field(default_factory=list)
    truncated_at: int | None = None

    def to_json(self) -> dict:
        out = {"ok": self.ok, "checked": self.checked,
               "violations": [v.to_json() for v in self.violations]}
        if self.truncated_at is not None:
            out["truncated_at"] = self.truncated_at
        return out

    def summary(self) -> str:
        if self.ok:
            return f"pass: twisting condition holds on {self.checked} simplices"
        lines = [f"fail: {len(self.violations)} simplices violate the twisting condition"]
        for v in self.violations:
            lines.append(f"  n={v.n} simplex={v.simplex} degree={v.degree} residual={v.residual.to_json()}")
        return "\n".join(lines)


def check_twisting(psi: TwistingCochain, workers: int | None = None) -> TwistReport:
    jobs = [(n, k) for n in range(psi.max_p + 1) for k in psi.simplices(n)]
    results = pmap(lambda job: twisting_residual(psi, *job), jobs, workers)
    violations = []
    for (n, k), r in zip(jobs, results):
        if not r.is_zero():
            d = min(r.components)
            violations.append(TwistViolation(n, k, d, r.component(d)))
    violations.sort(key=lambda v: (v.n, v.simplex))
    return TwistReport(not violations, len(jobs), violations)


@dataclass
class TwistedComplex:
    """``C(B) (x)_psi H`` with the (base, fiber) bidegree of every basis element.

    ``basis[k]`` lists ``(simplex key, fiber degree, fiber index)`` for total
    degree ``k``.
    """

    complex: ChainComplex
    basis: dict[int, list[tuple[str, int, int]]]
    square_defect: tuple[int, int] | None = None
    truncated: bool = False

    def bidegree(self, k: int, i: int) -> tuple[int, int]:
        key, q, _ = self.basis[k][i]
        return k - q, q

    def homology(self, ring: str | None = None) -> dict[int, HomologyGroup]:
        return homology(self.complex, ring)


def _build_twisted(psi: TwistingCochain, check: bool, ring: str) -> TwistedComplex:
    b = psi._b
    basis: dict[int, list[tuple[str, int, int]]] = {}
    for p in range(b.max_dim + 1):
        for key in b.simplices(p):
            M = psi.module(b.last(key))
            for q, r in M.ranks.items():
                for j in range(r):
                    basis.setdefault(p + q, []).append((key, q, j))
    for k in basis:
        basis[k].sort(key=lambda e: (_order_key(b, e[0]), e[1], e[2]))
    index = {k: {e: i for i, e in enumerate(v)} for k, v in basis.items()}

    bd = {}
    for k, elems in basis.items():
        tgt = index.get(k - 1, {})
        rows = [[0] * len(elems) for _ in range(len(tgt))]
        for col, (key, q, j) in enumerate(elems):
            n = b.dim(key)

            def put(face_key, deg, vec, sign):
                for i2, x in enumerate(vec):
                    if x:
                        rows[tgt[(face_key, deg, i2)]][col] += sign * x

            if n > 0:
                for i in range(n + 1):
                    fk = b.face(key, i)
                    if fk is None:
                        continue
                    if i < n:
                        put(fk, q, _unit(psi.module(b.last(key)).rank(q), j), (-1) ** i)
                    else:
                        t = psi.transport_of(key, n)
                        vec = (_unit(psi.module(b.last(key)).rank(q), j) if t is None
                               else t.component(q).col(j))
                        put(fk, q, vec, (-1) ** n)
            for qq in range(n + 1):
                pp = n - qq
                g = psi.value(qq, b.back(key, qq))
                front = b.front(key, pp)
                if g is None or front is None:
                    continue
                comp = g.component(q)
                if comp.rows == 0:
                    continue
                put(front, q + qq - 1, comp.col(j), -((-1) ** pp))
        bd[k] = Mat(rows, shape=(len(tgt), len(elems)))
    module = GradedModule({k: len(v) for k, v in basis.items()})
    C = ChainComplex(module, bd, ring, check=False)
    defect = C.square_defect()
    bideg = None
    if defect is not None:
        prod = C.boundary(defect - 1) @ C.boundary(defect)
        col = next(j for i, j, _ in prod.nonzero_entries())
        key, q, _ = basis[defect][col]
        bideg = (defect - q, q)
        if check:
            raise TwistError(f"twisted boundary does not square to zero at bidegree {bideg}", bideg)
    return TwistedComplex(C, basis, bideg)


def _order_key(b, key: str):
    if b.kind == "simplicial":
        return (b.dim(key), b.parse(key))
    return (b.dim(key), key)


def _unit(n: int, j: int) -> tuple:
    return tuple(1 if i == j else 0 for i in range(n))


def twisted_tensor_product(psi: TwistingCochain, check: bool = True) -> TwistedComplex:
    """Assemble the twisted boundary; raises when it does not square to zero.

    With ``check=False`` the complex is returned with ``square_defect`` set
    to the first failing (base, fiber) bidegree.
    """
    ring = "Z" if all(m.is_integral for ent in psi.entries.values() for g in ent.values()
                      for m in g.components.values()) and all(
        m.is_integral for g in psi.transport.values() for m in g.components.values()) else "Q"
    return _build_twisted(psi, check, ring)


def total_complex(psi: TwistingCochain, check: bool = True) -> TwistedComplex:
    """Total complex over a category base, truncated at ``psi.max_p``."""
    if psi.base_kind != "category":
        return twisted_tensor_product(psi, check)
    truncated = nerve_dimension(psi.base) is None
    if truncated:
        warnings.warn(f"nerve is infinite; total complex truncated at chain length {psi.max_p}")
    T = twisted_tensor_product(psi, check)
    T.truncated = truncated
    return T


def pullback_to_simplex(psi: TwistingCochain, key: str) -> TwistingCochain:
    """Pull ``psi`` back along the chain ``X0 <- ... <- Xk`` viewed as a functor on ``[k]``."""
    if psi.base_kind != "category":
        raise TwistError("pullback needs a category base")
    C = psi.base
    s = simplex_from_key(C, key)
    k = s.dim
    P = poset_category(k)
    fiber = {str(i): psi.module(s.objects[i]) for i in range(k + 1)}

    def chain_morphism(i: int, j: int) -> str:
        m = C.identities[s.objects[i]]
        for t in range(i, j, -1):
            m = C.compose(s.morphisms[t - 1], m)
        return m

    transport = {}
    for i in range(k + 1):
        for j in range(i):
            m = chain_morphism(i, j)
            if m in psi.transport:
                transport[f"{i}->{j}"] = psi.transport[m]
            elif C.is_identity(m):
                continue
    entries: dict[int, dict[str, GradedMap]] = {}
    for p, level in enumerate(nerve(P, k, include_degenerate=False)):
        for t in level:
            idx = [int(o) for o in t.objects]
            if p == 0:
                g = psi.entries.get(0, {}).get(s.objects[idx[0]])
            else:
                mors = [chain_morphism(idx[a + 1], idx[a]) for a in range(p)]
                image = simplex_from_morphisms(C, mors)
                g = None if image.degenerate else psi.entries.get(p, {}).get(image.key)
            if g is not None:
                entries.setdefault(p, {})[t.key] = g
    return TwistingCochain(P, fiber, entries, transport, k)


def simplex_subcomplex(psi: TwistingCochain, key: str, check: bool = True) -> TwistedComplex:
    """The subcomplex carried by one nerve simplex, as the total complex over ``[k]``."""
    return total_complex(pullback_to_simplex(psi, key), check)


def euler_class(psi: TwistingCochain, n: int, z: Mapping[str, int] | None = None) -> int | Fraction:
    """``<psi_n, z>`` for a sphere-bundle cochain with fiber ranks 1 in degrees 0, n-1.

    ``z`` defaults to the fundamental cycle with first coefficient +1.
    """
    if psi.base_kind != "simplicial":
        raise TwistError("Euler pairing needs a simplicial base")
    if psi.fiber.ranks != {0: 1, n - 1: 1}:
        raise TwistError(f"fiber must have rank 1 in degrees 0 and {n - 1}")
    extra = [p for p in psi.nonzero_degrees() if p != n]
    if extra:
        raise TwistError(f"psi has nonzero components in degrees {extra}")
    bad = [k for k, g in coboundary(psi, n).items() if not g.is_zero()]
    if bad:
        raise TwistError(f"d psi_{n} is nonzero on {bad}")
    if z is None:
        coeffs = fundamental_cycle(psi.base, n)
        z = {_vkey(s): c for s, c in zip(psi.base.simplices(n), coeffs)}
    total = Fraction(0)
    for key, c in z.items():
        g = psi.entries.get(n, {}).get(key)
        if g is not None:
            total += c * g.component(0)[0, 0]
    return int(total) if total.denominator == 1 else total


@dataclass
class SpectralSequence:
    """Page ranks keyed by ``(p, q)`` = (base degree, fiber degree).

    ``pages[r]`` and ``differentials[r]`` (rank of ``d_r`` leaving a spot) use
    the Serre numbering: page 1 is the bicomplex itself, ``d_2`` comes from
    ``psi_2``.
    """

    pages: dict[int, dict[tuple[int, int], int]]
    differentials: dict[int, dict[tuple[int, int], int]]
    infinity: dict[tuple[int, int], int]

    def d_rank(self, r: int) -> int:
        return sum(self.differentials.get(r, {}).values())

    def total_infinity(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (p, q), v in self.infinity.items():
            out[p + q] = out.get(p + q, 0) + v
        return {k: v for k, v in sorted(out.items()) if v}

    def to_json(self) -> dict:
        def tab(t):
            return [[p, q, v] for (p, q), v in sorted(t.items()) if v]
        return {"pages": {str(r): tab(t) for r, t in sorted(self.pages.items())},
                "differentials": {str(r): tab(t) for r, t in sorted(self.differentials.items())},
                "infinity": tab(self.infinity)}

    def table(self, r: int | None = None) -> str:
        t = self.infinity if r is None else self.pages[r]
        ps = sorted({p for p, _ in t}) or [0]
        qs = sorted({q for _, q in t}, reverse=True) or [0]
        width = max(3, max((len(str(v)) for v in t.values()), default=1) + 1)
        lines = ["q\\p " + "".join(f"{p:>{width}}" for p in ps)]
        for q in qs:
            lines.append(f"{q:>3} " + "".join(f"{t.get((p, q), 0) or '.':>{width}}" for p in ps))
        return "\n".join(lines)

    def csv(self) -> str:
        lines = ["page,p,q,rank"]
        for r, t in sorted(self.pages.items()):
            for (p, q), v in sorted(t.items()):
                lines.append(f"{r},{p},{q},{v}")
        for (p, q), v in sorted(self.infinity.items()):
            lines.append(f"inf,{p},{q},{v}")
        return "\n".join(lines)


def _span_dim(vectors: list[tuple], n: int) -> int:
    if not vectors:
        return 0
    return Mat.from_columns(vectors, n).rank()


def fiber_degree_spectral_sequence(T: TwistedComplex) -> SpectralSequence:
    """Pages of the filtration ``F^n = C(B) (x) H_{>= n}`` over Q.

    Requires ``psi_0 = 0`` so that each ``F^n`` is a subcomplex.
    """
    C = T.complex
    fibdeg = {k: [q for _, q, _ in v] for k, v in T.basis.items()}
    all_q = sorted({q for v in fibdeg.values() for q in v})
    if not all_q:
        return SpectralSequence({}, {}, {})
    for k in fibdeg:
        d = C.boundary(k)
        for i, j, _ in d.nonzero_entries():
            if fibdeg[k - 1][i] < fibdeg[k][j]:
                raise TwistError("fiber filtration is not preserved; psi_0 must vanish")
    qmin, qmax = all_q[0], all_q[-1]
    span = qmax - qmin

    def F(k, n):
        return [i for i, q in enumerate(fibdeg.get(k, [])) if q >= n]

    def Z(k, n, rho):
        """Vectors of F^n_k whose boundary lies in F^{n+rho}."""
        dim = len(fibdeg.get(k, []))
        cols = F(k, n)
        if not cols:
            return []
        d = C.boundary(k)
        low = [i for i, q in enumerate(fibdeg.get(k - 1, [])) if q < n + rho]
        if low:
            sub = d.submatrix(low, cols)
            kern = rank_kernel(sub)[1]
        else:
            kern = [_unit(len(cols), a) for a in range(len(cols))]
        out = []
        for v in kern:
            full = [0] * dim
            for a, c in enumerate(cols):
                full[c] = v[a]
            out.append(tuple(full))
        return out

    def B(k, n, rho):
        """``F^n_k`` intersected with the boundaries of ``F^{n-rho}_{k+1}``."""
        src = Z(k + 1, n - rho, rho)
        if not src:
            return []
        d = C.boundary(k + 1)
        return [d.apply(v) for v in src]

    pages: dict[int, dict[tuple[int, int], int]] = {}
    diffs: dict[int, dict[tuple[int, int], int]] = {}
    degrees = sorted(T.basis)
    for rho in range(span + 2):
        page, diff = {}, {}
        for k in degrees:
            dim = len(fibdeg[k])
            for n in range(qmin, qmax + 1):
                z = Z(k, n, rho)
                if not z:
                    continue
                below = Z(k, n + 1, rho - 1) if rho >= 1 else [
                    _unit(dim, i) for i in F(k, n + 1)]
                bnd = B(k, n, rho - 1) if rho >= 1 else []
                base_dim = _span_dim(below + bnd, dim)
                e = len(z) - base_dim
                if e:
                    page[(k - n, n)] = e
                    nxt = Z(k, n, rho + 1)
                    ker = _span_dim(nxt + below, dim) - base_dim
                    if e - ker:
                        diff[(k - n, n)] = e - ker
        pages[rho + 1] = page
        diffs[rho + 1] = diff
    infinity = pages[span + 2]
    return SpectralSequence(pages, diffs, infinity)


def circle_fiber() -> GradedModule:
    return GradedModule({0: 1, 1: 1})


def torus_cochain() -> TwistingCochain:
    """Circle bundle over a circle with trivial monodromy."""
    return TwistingCochain(OrderedSimplicialComplex.sphere(1), circle_fiber(), {})


def klein_cochain() -> TwistingCochain:
    """Circle bundle over a circle whose monodromy is -1 on H_1 of the fiber."""
    H = circle_fiber()
    psi1 = GradedMap(H, H, 0, {1: Mat([[-2]])})
    return TwistingCochain(OrderedSimplicialComplex.sphere(1), H, {1: {"0,1": psi1}})


def lens_cochain(k: int) -> TwistingCochain:
    """Circle bundle over the 2-sphere with Euler number ``k`` (``psi_2`` on one triangle)."""
    H = circle_fiber()
    K = OrderedSimplicialComplex.sphere(2)
    entries = {}
    if k:
        entries = {2: {"0,1,2": GradedMap(H, H, 1, {0: Mat([[k]])})}}
    return TwistingCochain(K, H, entries)
