"""A-infinity functors from finite categories into chain complexes.

For a nerve chain ``X0 <-f1- ... <-fp- Xp`` the map ``Phi_p(f1..fp)`` runs
from ``Phi X_p`` to ``Phi X_0`` with degree ``p - 1``, and ``Phi_0`` is the
boundary of the complex.  The cocycle condition checked here is

    sum_{i=0}^{p} (-1)^i Phi_i(f1..fi) Phi_{p-i}(f_{i+1}..fp)
        = sum_{i=1}^{p-1} (-1)^i Phi_{p-1}(f1, .., f_i f_{i+1}, .., fp)

with ``Phi_0`` taken on ``X0`` for ``i = 0`` and on ``Xp`` for ``i = p``.
Chains through identities are normalized: ``Phi_1(1_X)`` is the identity
unless a value is stored and ``Phi_p`` vanishes for ``p >= 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ._parallel import pmap
from .complexes import (
    ChainComplex,
    ComplexError,
    GradedMap,
    GradedModule,
    dualize_complex,
    homology,
    m1,
    mapping_cone,
)
from .exactlin import Mat, rank_kernel, rref
from .simplicial import (
    FiniteCategory,
    NerveSimplex,
    make_simplex,
    nerve,
    nerve_dimension,
    product_with_I,
    simplex_from_key,
)

__all__ = [
    "AInftyError",
    "AInftyFunctor",
    "AInftyReport",
    "Violation",
    "SDR",
    "check_ainfty",
    "em_transfer",
    "em_formula",
    "sdr_from_field_complex",
    "trivial_sdr",
    "dualize_ainfty",
    "check_natural_transformation",
    "NaturalityReport",
    "pullback_along_projection",
    "transfer_comparison",
    "is_strict",
]


class AInftyError(ValueError):
    pass


class AInftyFunctor:
    """Object-wise complexes plus higher maps on nondegenerate nerve chains.

    ``maps[p][key]`` holds ``Phi_p`` on the chain whose morphism ids joined by
    commas give ``key``.  Missing entries are zero, except identities in
    degree one (see the module docstring).
    """

    def __init__(self, base: FiniteCategory, objects: Mapping[str, ChainComplex],
                 maps: Mapping[int, Mapping[str, GradedMap]] | None = None,
                 max_p: int | None = None, check: bool = True):
        self.base = base
        self.objects = dict(objects)
        missing = [o for o in base.objects if o not in self.objects]
        if missing:
            raise AInftyError(f"no complex for objects {missing}")
        self.maps: dict[int, dict[str, GradedMap]] = {
            int(p): dict(v) for p, v in (maps or {}).items() if int(p) >= 1}
        if max_p is None:
            max_p = nerve_dimension(base)
            if max_p is None:
                raise AInftyError("base has chains of unbounded length; pass max_p")
        self.max_p = int(max_p)
        if check:
            problems = self.shape_errors()
            if problems:
                raise AInftyError("; ".join(problems))

    def simplex(self, key: str) -> NerveSimplex:
        return simplex_from_key(self.base, key)

    def shape_errors(self) -> list[str]:
        out = []
        for p, entries in sorted(self.maps.items()):
            for key, g in sorted(entries.items()):
                try:
                    s = self.simplex(key)
                except Exception as exc:
                    out.append(f"p={p} chain {key}: {exc}")
                    continue
                if s.dim != p:
                    out.append(f"p={p} chain {key}: chain has length {s.dim}")
                    continue
                if s.degenerate and p >= 2:
                    out.append(f"p={p} chain {key}: value stored on a chain through an identity")
                if g.degree != p - 1:
                    out.append(f"p={p} chain {key}: degree {g.degree}, expected {p - 1}")
                if g.source != self.objects[s.objects[-1]].module:
                    out.append(f"p={p} chain {key}: source ranks do not match {s.objects[-1]}")
                if g.target != self.objects[s.objects[0]].module:
                    out.append(f"p={p} chain {key}: target ranks do not match {s.objects[0]}")
        return out

    def value(self, s: NerveSimplex) -> GradedMap:
        p = s.dim
        if p == 0:
            return self.objects[s.objects[0]].d()
        stored = self.maps.get(p, {}).get(s.key)
        if stored is not None:
            return stored
        src = self.objects[s.objects[-1]].module
        tgt = self.objects[s.objects[0]].module
        if p == 1 and s.degenerate:
            return GradedMap.identity(src)
        return GradedMap.zero(src, tgt, p - 1)

    def chains(self, up_to: int | None = None, include_degenerate: bool = False) -> list[list[NerveSimplex]]:
        return nerve(self.base, self.max_p if up_to is None else up_to, include_degenerate)

    def with_maps(self, maps, max_p: int | None = None) -> "AInftyFunctor":
        return AInftyFunctor(self.base, self.objects, maps, self.max_p if max_p is None else max_p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AInftyFunctor):
            return NotImplemented
        return (self.base == other.base and self.objects == other.objects
                and _nonzero(self.maps) == _nonzero(other.maps) and self.max_p == other.max_p)

    def to_json(self) -> dict:
        return {
            "kind": "ainfty",
            "base": self.base.to_json(),
            "max_p": self.max_p,
            "objects": {o: self.objects[o].to_json() for o in self.base.objects},
            "maps": {str(p): {k: {"degree": g.degree,
                                  "components": {str(n): m.to_json()
                                                 for n, m in sorted(g.components.items())}}
                              for k, g in sorted(v.items())}
                     for p, v in sorted(self.maps.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "AInftyFunctor":
        base = FiniteCategory.from_json(obj["base"])
        objects = {str(k): ChainComplex.from_json(v) for k, v in obj["objects"].items()}
        maps: dict[int, dict[str, GradedMap]] = {}
        for p_str, entries in obj.get("maps", {}).items():
            p = int(p_str)
            for key, g in entries.items():
                s = simplex_from_key(base, key)
                if s.dim != p:
                    raise AInftyError(f"chain {key} listed under p={p} has length {s.dim}")
                src = objects[s.objects[-1]].module
                tgt = objects[s.objects[0]].module
                data = {"degree": g.get("degree", p - 1), "components": g.get("components", {})}
                maps.setdefault(p, {})[key] = GradedMap.from_json(data, src, tgt)
        return cls(base, objects, maps, obj.get("max_p"))


def _nonzero(maps):
    return {p: {k: g for k, g in v.items() if not g.is_zero()} for p, v in maps.items()
            if any(not g.is_zero() for g in v.values())}


@dataclass
class Violation:
    p: int
    chain: str
    degree: int
    residual: Mat

    def to_json(self) -> dict:
        return {"p": self.p, "chain": self.chain, "degree": self.degree,
                "residual": self.residual.to_json()}


@dataclass
class AInftyReport:
    ok: bool
    max_p: int
    checked: int
    violations: list[Violation] = field(default_factory=list)
    shape_errors: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "max_p": self.max_p, "checked": self.checked,
                "shape_errors": list(self.shape_errors),
                "violations": [v.to_json() for v in self.violations]}

    def summary(self) -> str:
        if self.shape_errors:
            return "malformed: " + "; ".join(self.shape_errors)
        if self.ok:
            return f"pass: {self.checked} chains checked up to p={self.max_p}"
        lines = [f"fail: {len(self.violations)} violations"]
        for v in self.violations:
            lines.append(f"  p={v.p} chain={v.chain} degree={v.degree} residual={v.residual.to_json()}")
        return "\n".join(lines)


def cocycle_residual(Phi: AInftyFunctor, s: NerveSimplex) -> GradedMap:
    """Left side minus right side of the cocycle condition on ``s``."""
    C = Phi.base
    p = s.dim
    total = None
    for i in range(p + 1):
        term = Phi.value(s.front(C, i)) @ Phi.value(s.back(C, p - i))
        term = term if i % 2 == 0 else -term
        total = term if total is None else total + term
    for i in range(1, p):
        term = Phi.value(s.face(C, i))
        total = total - term if i % 2 == 0 else total + term
    return total


def check_ainfty(Phi: AInftyFunctor, max_p: int | None = None, workers: int | None = None) -> AInftyReport:
    max_p = Phi.max_p if max_p is None else max_p
    problems = Phi.shape_errors()
    if problems:
        return AInftyReport(False, max_p, 0, [], problems)
    chains = []
    for p, level in enumerate(nerve(Phi.base, max_p)):
        for s in level:
            if not s.degenerate or (p == 1 and s.key in Phi.maps.get(1, {})):
                chains.append(s)

    def run(s):
        return s, cocycle_residual(Phi, s)

    violations = []
    for s, r in pmap(run, chains, workers):
        if not r.is_zero():
            n = min(r.components)
            violations.append(Violation(s.dim, s.key, n, r.component(n)))
    violations.sort(key=lambda v: (v.p, v.chain))
    return AInftyReport(not violations, max_p, len(chains), violations)


@dataclass
class SDR:
    """Deformation retract data ``small <-q- big -j->`` with homotopy ``eta``.

    Required: ``j, q`` chain maps, ``q j = 1``, ``1 - j q = d eta + eta d``,
    ``eta j = 0``, ``q eta = 0``, ``eta eta = 0``.
    """

    small: ChainComplex
    big: ChainComplex
    j: GradedMap
    q: GradedMap
    eta: GradedMap

    def violations(self) -> list[str]:
        out = []
        S, B = self.small.module, self.big.module
        if (self.j.source, self.j.target, self.j.degree) != (S, B, 0):
            return ["j must be a degree 0 map small -> big"]
        if (self.q.source, self.q.target, self.q.degree) != (B, S, 0):
            return ["q must be a degree 0 map big -> small"]
        if (self.eta.source, self.eta.target, self.eta.degree) != (B, B, 1):
            return ["eta must be a degree 1 map big -> big"]
        if not m1(self.j, self.small, self.big).is_zero():
            out.append("j is not a chain map")
        if not m1(self.q, self.big, self.small).is_zero():
            out.append("q is not a chain map")
        if self.q @ self.j != GradedMap.identity(S):
            out.append("q j != 1")
        if GradedMap.identity(B) - self.j @ self.q != m1(self.eta, self.big, self.big):
            out.append("1 - j q != d eta + eta d")
        if not (self.eta @ self.j).is_zero():
            out.append("eta j != 0")
        if not (self.q @ self.eta).is_zero():
            out.append("q eta != 0")
        if not (self.eta @ self.eta).is_zero():
            out.append("eta eta != 0")
        return out

    def dual(self) -> "SDR":
        return SDR(dualize_complex(self.small), dualize_complex(self.big),
                   self.q.transpose(), self.j.transpose(), self.eta.transpose())

    def to_json(self) -> dict:
        return {"small": self.small.to_json(), "j": self.j.to_json(),
                "q": self.q.to_json(), "eta": self.eta.to_json()}

    @classmethod
    def from_json(cls, obj, big: ChainComplex) -> "SDR":
        small = ChainComplex.from_json(obj["small"])
        return cls(small, big,
                   GradedMap.from_json(obj["j"], small.module, big.module),
                   GradedMap.from_json(obj["q"], big.module, small.module),
                   GradedMap.from_json(obj["eta"], big.module, big.module))


def trivial_sdr(C: ChainComplex) -> SDR:
    ident = GradedMap.identity(C.module)
    return SDR(C, C, ident, ident, GradedMap.zero(C.module, C.module, 1))


def sdr_from_field_complex(C: ChainComplex) -> SDR:
    """Retract of a complex over Q onto a copy of its homology.

    In each degree the basis ``B | H | L`` is used, where ``L`` are unit
    vectors at the leftmost pivot columns of ``d``, ``B = d(L)`` from the
    degree above and ``H`` extends ``B`` to a basis of the cycles.
    """
    C = C.over("Q")
    degs = C.module.degrees
    lifts: dict[int, list[int]] = {}
    for n in degs:
        d = C.boundary(n)
        lifts[n] = rref(d)[1] if d.rows and d.cols else []
    small_ranks, j_comp, q_comp, eta_comp = {}, {}, {}, {}
    for n in degs:
        r = C.module.rank(n)
        above = C.boundary(n + 1)
        B = [above.col(c) for c in lifts.get(n + 1, [])]
        d = C.boundary(n)
        if d.rows:
            kernel = rank_kernel(d)[1]
        else:
            kernel = [tuple(1 if i == k else 0 for i in range(r)) for k in range(r)]
        H: list[tuple] = []
        cur = list(B)
        for v in kernel:
            if Mat.from_columns(cur + [v], r).rank() > len(cur):
                cur.append(v)
                H.append(v)
        L = [tuple(1 if i == c else 0 for i in range(r)) for c in lifts[n]]
        P = Mat.from_columns(B + H + L, r)
        Pinv = P.inverse()
        h = len(H)
        small_ranks[n] = h
        if h:
            j_comp[n] = Mat.from_columns(H, r)
            q_comp[n] = Pinv.submatrix(range(len(B), len(B) + h), range(r))
        if B:
            up_rank = C.module.rank(n + 1)
            Lup = Mat.from_columns(
                [tuple(1 if i == c else 0 for i in range(up_rank)) for c in lifts[n + 1]], up_rank)
            eta_comp[n] = Lup @ Pinv.submatrix(range(len(B)), range(r))
    small = ChainComplex(GradedModule(small_ranks), {}, "Q")
    return SDR(small, C,
               GradedMap(small.module, C.module, 0, j_comp),
               GradedMap(C.module, small.module, 0, q_comp),
               GradedMap(C.module, C.module, 1, eta_comp))


def _strict_map(F: AInftyFunctor, m: str) -> GradedMap:
    s = make_simplex(F.base, (F.base.dst(m), F.base.src(m)), (m,))
    return F.value(s)


def em_formula(F: AInftyFunctor, sdr: Mapping[str, SDR], s: NerveSimplex) -> GradedMap:
    """``(-1)^(p-1) q0 C(f1) eta1 C(f2) ... eta_{p-1} C(fp) jp``.

    The sign makes the output satisfy the cocycle condition when the
    homotopy satisfies ``1 - j q = d eta + eta d``.
    """
    p = s.dim
    if p == 0:
        return sdr[s.objects[0]].small.d()
    acc = sdr[s.objects[-1]].j
    for i in range(p, 0, -1):
        acc = _strict_map(F, s.morphisms[i - 1]) @ acc
        if i > 1:
            acc = sdr[s.objects[i - 1]].eta @ acc
    acc = sdr[s.objects[0]].q @ acc
    return acc if p % 2 == 1 else -acc


def em_transfer(F: AInftyFunctor, sdr: Mapping[str, SDR] | None = None,
                max_p: int | None = None) -> AInftyFunctor:
    """Transfer a strict functor along deformation retracts.

    With ``sdr=None`` every object is retracted onto its rational homology.
    """
    strict, why = is_strict(F)
    if not strict:
        raise AInftyError(f"em_transfer needs a strict functor: {why}")
    if sdr is None:
        sdr = {o: sdr_from_field_complex(F.objects[o]) for o in F.base.objects}
    problems = []
    for o in F.base.objects:
        if o not in sdr:
            problems.append(f"{o}: no retract data")
            continue
        if sdr[o].big.module != F.objects[o].module or sdr[o].big.boundaries != F.objects[o].boundaries:
            problems.append(f"{o}: retract data is for a different complex")
            continue
        problems.extend(f"{o}: {v}" for v in sdr[o].violations())
    if problems:
        raise AInftyError("invalid retract data: " + "; ".join(problems))
    max_p = F.max_p if max_p is None else max_p
    maps: dict[int, dict[str, GradedMap]] = {}
    for p, level in enumerate(nerve(F.base, max_p)):
        if p == 0:
            continue
        for s in level:
            if s.degenerate:
                continue
            g = em_formula(F, sdr, s)
            if not g.is_zero():
                maps.setdefault(p, {})[s.key] = g
    objects = {o: sdr[o].small for o in F.base.objects}
    return AInftyFunctor(F.base, objects, maps, max_p)


def dualize_ainfty(Phi: AInftyFunctor) -> AInftyFunctor:
    """Dual functor on the opposite category with reversed chains and transposed maps."""
    for o, C in Phi.objects.items():
        if C.ring != "Q":
            raise AInftyError(f"duality needs field coefficients; {o} is over Z")
    base = Phi.base.opposite()
    objects = {o: dualize_complex(C) for o, C in Phi.objects.items()}
    maps: dict[int, dict[str, GradedMap]] = {}
    for p, entries in Phi.maps.items():
        for key, g in entries.items():
            rkey = ",".join(reversed(key.split(",")))
            maps.setdefault(p, {})[rkey] = g.transpose()
    return AInftyFunctor(base, objects, maps, Phi.max_p)


def is_strict(Phi: AInftyFunctor, up_to: int | None = None) -> tuple[bool, str]:
    """Whether ``Phi`` is an honest functor; the string explains a failure."""
    C = Phi.base
    up_to = max(2, Phi.max_p if up_to is None else up_to)
    for p, level in enumerate(nerve(C, up_to, include_degenerate=False)):
        if p < 2:
            continue
        for s in level:
            if not Phi.value(s).is_zero():
                return False, f"Phi_{p} is nonzero on chain {s.key}"
    for o in C.objects:
        ident = C.identities[o]
        g = _strict_map(Phi, ident)
        if g != GradedMap.identity(Phi.objects[o].module):
            if g.total().rank() < Phi.objects[o].module.total_rank:
                return False, f"Phi_1 does not take isomorphisms to isomorphisms (at {ident})"
            return False, f"Phi_1({ident}) is not the identity"
    for f in sorted(C.morphisms):
        for g in C.out_of(C.dst(f)):
            if _strict_map(Phi, C.compose(g, f)) != _strict_map(Phi, g) @ _strict_map(Phi, f):
                return False, f"Phi_1({C.compose(g, f)}) != Phi_1({g}) Phi_1({f})"
    return True, "strict functor"


@dataclass
class NaturalityReport:
    ok: bool
    ainfty: AInftyReport
    quasi_isomorphisms: dict[str, bool]

    def to_json(self) -> dict:
        return {"ok": self.ok, "ainfty": self.ainfty.to_json(),
                "quasi_isomorphisms": dict(sorted(self.quasi_isomorphisms.items()))}


def _level(P: FiniteCategory, obj: str) -> str:
    return obj.rsplit("|", 1)[1]


def _strip(key: str) -> str:
    return ",".join(k.rsplit("|", 1)[0] for k in key.split(","))


def assemble_on_product(Phi: AInftyFunctor, Phi2: AInftyFunctor,
                        cross: Mapping[str, GradedMap], max_p: int | None = None) -> AInftyFunctor:
    """Functor on ``X x I`` equal to ``Phi`` on level 0, ``Phi2`` on level 1 and ``cross`` between."""
    if Phi.base != Phi2.base:
        raise AInftyError("functors live on different categories")
    P = product_with_I(Phi.base)
    max_p = Phi.max_p + 1 if max_p is None else max_p
    objects = {}
    for o in Phi.base.objects:
        objects[f"{o}|0"] = Phi.objects[o]
        objects[f"{o}|1"] = Phi2.objects[o]
    maps: dict[int, dict[str, GradedMap]] = {}
    missing = []
    for p, level in enumerate(nerve(P, max_p)):
        if p == 0:
            continue
        for s in level:
            if s.degenerate and not (p == 1 and s.key in cross):
                continue
            levels = {_level(P, o) for o in s.objects}
            if levels == {"0"} or levels == {"1"}:
                src = Phi if levels == {"0"} else Phi2
                inner = simplex_from_key(src.base, _strip(s.key))
                if inner.degenerate and p == 1 and inner.key not in src.maps.get(1, {}):
                    continue
                g = src.value(inner)
            elif s.key in cross:
                g = cross[s.key]
            elif p == 1:
                missing.append(s.key)
                continue
            else:
                continue
            maps.setdefault(p, {})[s.key] = g
    if missing:
        raise AInftyError(f"missing cross terms for {missing}")
    return AInftyFunctor(P, objects, maps, max_p, check=False)


def check_natural_transformation(Phi: AInftyFunctor, Phi2: AInftyFunctor,
                                 cross: Mapping[str, GradedMap], max_p: int | None = None,
                                 workers: int | None = None) -> NaturalityReport:
    """Run the cocycle check on the assembled functor on ``X x I``.

    ``cross`` is keyed by chains of ``product_with_I(X)``; the degree one
    entries ``f|u`` are required.  Also reports, per object, whether the
    component ``1_X|u`` is a rational quasi-isomorphism.
    """
    total = assemble_on_product(Phi, Phi2, cross, max_p)
    report = check_ainfty(total, workers=workers)
    quasi = {}
    for o in Phi.base.objects:
        key = f"{Phi.base.identities[o]}|u"
        comp = cross[key]
        A, B = Phi.objects[o].over("Q"), Phi2.objects[o].over("Q")
        try:
            cone = mapping_cone(comp, A, B)
            quasi[o] = all(h.is_zero() for h in homology(cone, "Q").values())
        except ComplexError:
            quasi[o] = False
    return NaturalityReport(report.ok and all(quasi.values()), report, quasi)


def pullback_along_projection(Phi: AInftyFunctor) -> dict[str, GradedMap]:
    """Cross terms of the identity transformation ``Phi -> Phi``.

    Each mixed chain of ``X x I`` takes the value of ``Phi`` on its
    projection to ``X``.
    """
    P = product_with_I(Phi.base)
    out = {}
    for p, level in enumerate(nerve(P, Phi.max_p + 1)):
        if p == 0:
            continue
        for s in level:
            levels = {_level(P, o) for o in s.objects}
            if len(levels) < 2:
                continue
            inner = simplex_from_key(Phi.base, _strip(s.key))
            if s.degenerate and p > 1:
                continue
            if inner.degenerate and p > 1:
                continue
            out[s.key] = Phi.value(inner)
    return out


def transfer_comparison(F: AInftyFunctor, sdr: Mapping[str, SDR] | None = None):
    """The transfer ``Phi`` of ``F`` and cross terms of a transformation ``F -> Phi``.

    The cross terms come from transferring ``F`` pulled back to ``X x I``
    along the trivial retract on level 0 and ``sdr`` on level 1.
    """
    if sdr is None:
        sdr = {o: sdr_from_field_complex(F.objects[o]) for o in F.base.objects}
    Phi = em_transfer(F, sdr)
    P = product_with_I(F.base)
    objects = {}
    maps: dict[int, dict[str, GradedMap]] = {1: {}}
    big_sdr = {}
    for o in F.base.objects:
        objects[f"{o}|0"] = objects[f"{o}|1"] = F.objects[o]
        big_sdr[f"{o}|0"] = trivial_sdr(F.objects[o])
        big_sdr[f"{o}|1"] = sdr[o]
    for m in P.morphisms:
        if not P.is_identity(m):
            maps[1][m] = _strict_map(F, m.rsplit("|", 1)[0])
    lifted = AInftyFunctor(P, objects, maps, F.max_p + 1)
    cross = {}
    for p, level in enumerate(nerve(P, F.max_p + 1)):
        if p == 0:
            continue
        for s in level:
            if len({_level(P, o) for o in s.objects}) < 2:
                continue
            if s.degenerate and p > 1:
                continue
            cross[s.key] = em_formula(lifted, big_sdr, s)
    return Phi, cross
