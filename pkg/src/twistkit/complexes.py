"""Graded free modules, chain complexes and the graded hom complex.

Chain complexes lower degree by one.  A :class:`GradedMap` of degree ``k``
sends degree ``n`` to degree ``n + k``; its differential in the hom complex
is ``m1(f) = d f - (-1)^k f d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .exactlin import Mat, rank_kernel, rref, snf

__all__ = [
    "GradedModule",
    "GradedMap",
    "ChainComplex",
    "HomologyGroup",
    "ComplexError",
    "m1",
    "m1_squared_check",
    "homology",
    "mapping_cone",
    "dualize_complex",
    "format_homology",
]


class ComplexError(ValueError):
    """Raised when boundary data does not square to zero or shapes disagree."""

    def __init__(self, message: str, degree: int | None = None):
        super().__init__(message)
        self.degree = degree


class GradedModule:
    """A finitely supported assignment ``degree -> rank``."""

    __slots__ = ("_ranks",)

    def __init__(self, ranks: Mapping[int, int] | None = None):
        clean = {}
        for deg, r in (ranks or {}).items():
            deg, r = int(deg), int(r)
            if r < 0:
                raise ValueError(f"negative rank {r} in degree {deg}")
            if r:
                clean[deg] = r
        self._ranks = tuple(sorted(clean.items()))

    def rank(self, n: int) -> int:
        for deg, r in self._ranks:
            if deg == n:
                return r
        return 0

    __getitem__ = rank

    @property
    def ranks(self) -> dict[int, int]:
        return dict(self._ranks)

    @property
    def degrees(self) -> list[int]:
        return [d for d, _ in self._ranks]

    @property
    def total_rank(self) -> int:
        return sum(r for _, r in self._ranks)

    def is_nonnegative(self) -> bool:
        return all(d >= 0 for d, _ in self._ranks)

    def offsets(self) -> dict[int, int]:
        """Start index of each degree in the total (degree-ascending) basis."""
        out, pos = {}, 0
        for d, r in self._ranks:
            out[d] = pos
            pos += r
        return out

    def basis(self) -> list[tuple[int, int]]:
        return [(d, i) for d, r in self._ranks for i in range(r)]

    def shift(self, k: int) -> "GradedModule":
        return GradedModule({d + k: r for d, r in self._ranks})

    def negate(self) -> "GradedModule":
        return GradedModule({-d: r for d, r in self._ranks})

    def __add__(self, other: "GradedModule") -> "GradedModule":
        out = dict(self._ranks)
        for d, r in other._ranks:
            out[d] = out.get(d, 0) + r
        return GradedModule(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedModule) and self._ranks == other._ranks

    def __hash__(self) -> int:
        return hash(self._ranks)

    def __repr__(self) -> str:
        return f"GradedModule({dict(self._ranks)})"

    def to_json(self) -> dict:
        return {str(d): r for d, r in self._ranks}

    @classmethod
    def from_json(cls, obj) -> "GradedModule":
        if not isinstance(obj, dict):
            raise ValueError("ranks must be an object mapping degree to rank")
        return cls({int(k): v for k, v in obj.items()})


class GradedMap:
    """A homogeneous map of graded modules.

    ``components[n]`` is the matrix from ``source`` degree ``n`` to ``target``
    degree ``n + degree``; missing components are zero.
    """

    __slots__ = ("source", "target", "degree", "_comp")

    def __init__(self, source: GradedModule, target: GradedModule, degree: int,
                 components: Mapping[int, Mat] | None = None):
        self.source, self.target, self.degree = source, target, int(degree)
        comp = {}
        for n, m in (components or {}).items():
            n = int(n)
            shape = (target.rank(n + self.degree), source.rank(n))
            if m.shape != shape:
                raise ComplexError(
                    f"component at source degree {n} has shape {m.shape}, expected {shape}", n)
            if shape[0] and shape[1] and not m.is_zero():
                comp[n] = m
        self._comp = comp

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule, degree: int) -> "GradedMap":
        return cls(source, target, degree)

    @classmethod
    def identity(cls, module: GradedModule) -> "GradedMap":
        return cls(module, module, 0, {d: Mat.identity(r) for d, r in module.ranks.items()})

    @classmethod
    def from_total(cls, source: GradedModule, target: GradedModule, degree: int,
                   total: Mat) -> "GradedMap":
        """Cut a matrix on the total bases into homogeneous blocks.

        Raises if ``total`` has entries outside the blocks of the given degree.
        """
        so, to = source.offsets(), target.offsets()
        comps = {}
        for i, j, _ in total.nonzero_entries():
            sd = _degree_of(source, so, j)
            td = _degree_of(target, to, i)
            if td != sd + degree:
                raise ComplexError(f"entry ({i},{j}) maps degree {sd} to {td}, not degree {degree}", sd)
        for n, r in source.ranks.items():
            t = target.rank(n + degree)
            if t:
                rows = range(to[n + degree], to[n + degree] + t)
                cols = range(so[n], so[n] + r)
                comps[n] = total.submatrix(rows, cols)
        return cls(source, target, degree, comps)

    @property
    def components(self) -> dict[int, Mat]:
        return dict(self._comp)

    def component(self, n: int) -> Mat:
        m = self._comp.get(n)
        if m is not None:
            return m
        return Mat.zeros(self.target.rank(n + self.degree), self.source.rank(n))

    def is_zero(self) -> bool:
        return not self._comp

    def _check_parallel(self, other: "GradedMap") -> None:
        if (self.source, self.target, self.degree) != (other.source, other.target, other.degree):
            raise ComplexError("graded maps are not parallel")

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._check_parallel(other)
        keys = set(self._comp) | set(other._comp)
        return GradedMap(self.source, self.target, self.degree,
                         {n: self.component(n) + other.component(n) for n in keys})

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        self._check_parallel(other)
        keys = set(self._comp) | set(other._comp)
        return GradedMap(self.source, self.target, self.degree,
                         {n: self.component(n) - other.component(n) for n in keys})

    def __neg__(self) -> "GradedMap":
        return GradedMap(self.source, self.target, self.degree, {n: -m for n, m in self._comp.items()})

    def scale(self, c) -> "GradedMap":
        return GradedMap(self.source, self.target, self.degree,
                         {n: m.scale(c) for n, m in self._comp.items()})

    def __matmul__(self, other: "GradedMap") -> "GradedMap":
        """Composition ``self o other``."""
        if other.target != self.source:
            raise ComplexError("composition of graded maps with mismatched modules")
        comps = {}
        for n, m in other._comp.items():
            g = self._comp.get(n + other.degree)
            if g is not None:
                comps[n] = g @ m
        return GradedMap(other.source, self.target, self.degree + other.degree, comps)

    def transpose(self) -> "GradedMap":
        """The plain (sign-free) dual map between negated gradings."""
        comps = {-(n + self.degree): m.T for n, m in self._comp.items()}
        return GradedMap(self.target.negate(), self.source.negate(), self.degree, comps)

    def total(self) -> Mat:
        so, to = self.source.offsets(), self.target.offsets()
        rows = [[0] * self.source.total_rank for _ in range(self.target.total_rank)]
        for n, m in self._comp.items():
            r0, c0 = to[n + self.degree], so[n]
            for i, j, x in m.nonzero_entries():
                rows[r0 + i][c0 + j] = x
        return Mat(rows, shape=(self.target.total_rank, self.source.total_rank))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        return (self.source, self.target, self.degree, self._comp) == (
            other.source, other.target, other.degree, other._comp)

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.degree, tuple(sorted(self._comp.items()))))

    def __repr__(self) -> str:
        return f"GradedMap(degree={self.degree}, components={self._comp})"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "components": {str(n): m.to_json() for n, m in sorted(self._comp.items())},
        }

    @classmethod
    def from_json(cls, obj, source: GradedModule | None = None,
                  target: GradedModule | None = None) -> "GradedMap":
        src = GradedModule.from_json(obj["source"]) if "source" in obj else source
        tgt = GradedModule.from_json(obj["target"]) if "target" in obj else target
        if src is None or tgt is None:
            raise ValueError("graded map needs source and target ranks")
        deg = int(obj["degree"])
        comps = {}
        for k, rows in obj.get("components", {}).items():
            n = int(k)
            comps[n] = Mat.from_json(rows, shape=(tgt.rank(n + deg), src.rank(n)))
        return cls(src, tgt, deg, comps)


def _degree_of(module: GradedModule, offsets: dict[int, int], index: int) -> int:
    for d, r in module.ranks.items():
        if offsets[d] <= index < offsets[d] + r:
            return d
    raise IndexError(index)


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...] = ()

    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion

    def format(self, ring: str = "Z") -> str:
        parts = []
        if self.betti == 1:
            parts.append(ring)
        elif self.betti > 1:
            parts.append(f"{ring}^{self.betti}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return "+".join(parts) if parts else "0"


class ChainComplex:
    """A bounded chain complex of free modules with exact boundary matrices.

    ``boundaries[n]`` maps degree ``n`` to degree ``n - 1``.  ``ring`` is
    ``"Z"`` (integral entries required) or ``"Q"``.
    """

    __slots__ = ("module", "ring", "_d")

    def __init__(self, module: GradedModule, boundaries: Mapping[int, Mat] | None = None,
                 ring: str = "Q", check: bool = True):
        if ring not in ("Z", "Q"):
            raise ValueError(f"unknown ring {ring!r}")
        self.module, self.ring = module, ring
        d = {}
        for n, m in (boundaries or {}).items():
            n = int(n)
            shape = (module.rank(n - 1), module.rank(n))
            if m.shape != shape:
                raise ComplexError(f"boundary d_{n} has shape {m.shape}, expected {shape}", n)
            if ring == "Z" and not m.is_integral:
                raise ComplexError(f"boundary d_{n} is not integral", n)
            if shape[0] and shape[1] and not m.is_zero():
                d[n] = m
        self._d = d
        if check:
            bad = self.square_defect()
            if bad is not None:
                raise ComplexError(f"d_{bad - 1} d_{bad} != 0", bad)

    @classmethod
    def zero(cls, ring: str = "Q") -> "ChainComplex":
        return cls(GradedModule(), {}, ring)

    def boundary(self, n: int) -> Mat:
        m = self._d.get(n)
        if m is not None:
            return m
        return Mat.zeros(self.module.rank(n - 1), self.module.rank(n))

    @property
    def boundaries(self) -> dict[int, Mat]:
        return dict(self._d)

    def d(self) -> GradedMap:
        return GradedMap(self.module, self.module, -1, self._d)

    def square_defect(self) -> int | None:
        """The first degree ``n`` with ``d_{n-1} d_n != 0``, if any."""
        for n in sorted(self._d):
            lower = self._d.get(n - 1)
            if lower is not None and not (lower @ self._d[n]).is_zero():
                return n
        return None

    def over(self, ring: str) -> "ChainComplex":
        return ChainComplex(self.module, self._d, ring, check=False)

    def euler_characteristic(self) -> int:
        return sum((-1) ** (d % 2) * r for d, r in self.module.ranks.items())

    def direct_sum(self, other: "ChainComplex") -> "ChainComplex":
        mod = self.module + other.module
        degs = set(self.module.degrees) | set(other.module.degrees)
        bd = {}
        for n in degs:
            a, b = self.boundary(n), other.boundary(n)
            bd[n] = Mat.block([[a, Mat.zeros(a.rows, b.cols)], [Mat.zeros(b.rows, a.cols), b]])
        ring = "Z" if self.ring == other.ring == "Z" else "Q"
        return ChainComplex(mod, bd, ring, check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainComplex):
            return NotImplemented
        return (self.module, self.ring, self._d) == (other.module, other.ring, other._d)

    def __hash__(self) -> int:
        return hash((self.module, self.ring, tuple(sorted(self._d.items()))))

    def __repr__(self) -> str:
        return f"ChainComplex(ranks={self.module.ranks}, ring={self.ring})"

    def to_json(self) -> dict:
        return {
            "kind": "complex",
            "ring": self.ring,
            "ranks": self.module.to_json(),
            "boundaries": {str(n): m.to_json() for n, m in sorted(self._d.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "ChainComplex":
        module = GradedModule.from_json(obj.get("ranks", {}))
        bd = {}
        for k, rows in obj.get("boundaries", {}).items():
            n = int(k)
            bd[n] = Mat.from_json(rows, shape=(module.rank(n - 1), module.rank(n)))
        return cls(module, bd, obj.get("ring", "Q"))


def m1(f: GradedMap, C: ChainComplex, D: ChainComplex) -> GradedMap:
    """Differential of the hom complex: ``d f - (-1)^deg(f) f d``."""
    if f.source != C.module or f.target != D.module:
        raise ComplexError("graded map does not run between the given complexes")
    left = D.d() @ f
    right = f @ C.d()
    return left - right if f.degree % 2 == 0 else left + right


def m1_squared_check(f: GradedMap, C: ChainComplex, D: ChainComplex) -> bool:
    return m1(m1(f, C, D), C, D).is_zero()


def homology(C: ChainComplex, ring: str | None = None) -> dict[int, HomologyGroup]:
    """Betti numbers and, over Z, torsion invariant factors in each degree."""
    ring = ring or C.ring
    if ring not in ("Z", "Q"):
        raise ValueError(f"unknown ring {ring!r}")
    bad = C.square_defect()
    if bad is not None:
        raise ComplexError(f"d_{bad - 1} d_{bad} != 0", bad)
    if ring == "Z" and any(not m.is_integral for m in C.boundaries.values()):
        raise ComplexError("integral homology of a complex with non-integral boundaries")
    out = {}
    ranks = {}
    for n in C.module.degrees:
        ranks[n] = C.boundary(n).rank() if C.module.rank(n - 1) else 0
    for n in C.module.degrees:
        above = C.boundary(n + 1)
        r_above = above.rank() if C.module.rank(n + 1) else 0
        betti = C.module.rank(n) - ranks[n] - r_above
        torsion: tuple[int, ...] = ()
        if ring == "Z" and r_above:
            torsion = tuple(x for x in snf(above).invariant_factors if x > 1)
        out[n] = HomologyGroup(betti, torsion)
    return out


def format_homology(h: dict[int, HomologyGroup], ring: str = "Z", degrees=None) -> str:
    degrees = sorted(h) if degrees is None else degrees
    return " ".join(f"H{n}={h.get(n, HomologyGroup(0)).format(ring)}" for n in degrees)


def mapping_cone(f: GradedMap, C: ChainComplex, D: ChainComplex) -> ChainComplex:
    """Cone with ``cone_n = C_{n-1} + D_n`` and boundary ``[[-d_C, 0], [-f, d_D]]``."""
    if f.degree != 0:
        raise ComplexError("mapping cone needs a degree 0 map")
    if not m1(f, C, D).is_zero():
        raise ComplexError("mapping cone of a map that is not a chain map")
    module = C.module.shift(1) + D.module
    degs = set(module.degrees)
    bd = {}
    for n in degs:
        dc = C.boundary(n - 1)
        dd = D.boundary(n)
        fn = f.component(n - 1)
        top = [(-dc), Mat.zeros(dc.rows, dd.cols)]
        bottom = [(-fn), dd]
        bd[n] = Mat.block([top, bottom])
    ring = "Z" if C.ring == D.ring == "Z" else "Q"
    return ChainComplex(module, bd, ring)


def dualize_complex(C: ChainComplex) -> ChainComplex:
    """Linear dual over a field, regraded as a chain complex in negated degrees."""
    if C.ring != "Q":
        raise ComplexError("duality is only available over the field Q")
    module = C.module.negate()
    bd = {1 - n: m.T for n, m in C.boundaries.items()}
    return ChainComplex(module, bd, "Q")
