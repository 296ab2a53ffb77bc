"""Exact polynomial-coefficient forms and endomorphism-valued superforms.

A form index is a strictly increasing tuple of variable positions, so
``(0, 1)`` is ``dx_0 ^ dx_1``.  A :class:`SuperForm` on a graded module ``V``
stores terms ``(I, i, j) -> p`` meaning ``E_ij (x) p dx_I`` where ``E_ij``
sends basis vector ``j`` to basis vector ``i``; its endomorphism degree is
``deg(i) - deg(j)``.

Sign conventions (Koszul throughout):

* product ``(phi (x) a)(phi' (x) a') = (-1)^{|a||phi'|} phi phi' (x) a ^ a'``;
* ``d(phi (x) a) = (-1)^{|phi|} phi (x) da``;
* ``A~(c (x) g) = (-1)^{|c||a|} phi(c) (x) a ^ g`` on V-valued forms;
* ``d(c (x) g) = (-1)^{|c|} c (x) dg`` and ``w(c (x) g) = (-1)^{k|c|} c (x) w ^ g``.

With these choices ``[d, A~] = (dA)~`` and ``(A A')~ = A~ A'~`` hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product as iproduct
from typing import Iterable, Mapping

from ..complexes import GradedModule
from ..exactlin import format_fraction, to_fraction

__all__ = [
    "Poly",
    "PolyForm",
    "SuperForm",
    "VForm",
    "SuperconnectionData",
    "FlatnessReport",
    "TildeReport",
    "FormError",
    "wedge_indices",
    "wedge",
    "exterior_d",
    "check_flatness",
    "tilde_check",
    "tilde_apply",
    "d_apply",
    "omega_apply",
    "superconnection_apply",
    "reconstruct_from_tilde",
    "all_indices",
]

MAX_VARIABLES = 3


class FormError(ValueError):
    """Raised for mismatched modules, variable counts or degrees."""


# ---------------------------------------------------------------- polynomials


class Poly:
    """Polynomial in ``m`` variables with exact rational coefficients."""

    __slots__ = ("m", "_terms")

    def __init__(self, m: int, terms: Mapping[tuple, object] | None = None):
        self.m = int(m)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.m or any(e < 0 for e in exps):
                raise FormError(f"bad exponent {exps} for {self.m} variables")
            c = to_fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean

    @classmethod
    def const(cls, m: int, c=1) -> "Poly":
        return cls(m, {(0,) * m: c})

    @classmethod
    def var(cls, m: int, k: int, c=1) -> "Poly":
        exps = [0] * m
        exps[k] = 1
        return cls(m, {tuple(exps): c})

    @property
    def terms(self) -> dict[tuple, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def _same(self, other: "Poly") -> None:
        if other.m != self.m:
            raise FormError(f"polynomials in {self.m} and {other.m} variables")

    def __add__(self, other: "Poly") -> "Poly":
        self._same(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Poly(self.m, out)

    def __neg__(self) -> "Poly":
        return Poly(self.m, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = to_fraction(c)
        return Poly(self.m, {e: c * v for e, v in self._terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        self._same(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly(self.m, out)

    def derivative(self, k: int) -> "Poly":
        out = {}
        for e, c in self._terms.items():
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                out[tuple(e2)] = c * e[k]
        return Poly(self.m, out)

    def evaluate(self, point):
        """Evaluate at ``point`` (exact for Fractions; vectorised for numpy arrays)."""
        if len(point) != self.m:
            raise FormError(f"point has {len(point)} coordinates, expected {self.m}")
        total = 0
        for e, c in sorted(self._terms.items()):
            term = c if all(isinstance(x, (int, Fraction)) for x in point) else float(c)
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.m == other.m and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.m, tuple(sorted(self._terms.items()))))

    def format(self, names: str = "xyz") -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items(), key=lambda t: (-sum(t[0]), t[0])):
            mono = "*".join(f"{names[k]}^{p}" if p > 1 else names[k]
                            for k, p in enumerate(e) if p)
            if not mono:
                parts.append(format_fraction(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{format_fraction(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self.format()})"


# ---------------------------------------------------------------- form indices


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def wedge_indices(a: tuple, b: tuple) -> tuple[int, tuple] | None:
    """``dx_a ^ dx_b = sign * dx_c``; returns ``(sign, c)`` or None when zero."""
    if set(a) & set(b):
        return None
    seq = list(a) + list(b)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return _sign(inversions), tuple(sorted(seq))


def all_indices(m: int) -> list[tuple]:
    return [c for k in range(m + 1) for c in combinations(range(m), k)]


def _d_terms(I: tuple, p: Poly) -> Iterable[tuple[tuple, Poly]]:
    """``d(p dx_I)`` as pairs ``(J, q)``."""
    for k in range(p.m):
        dp = p.derivative(k)
        if dp.is_zero():
            continue
        w = wedge_indices((k,), I)
        if w is not None:
            yield w[1], dp.scale(w[0])


def _name(I: tuple, names: str = "xyz") -> str:
    return "^".join("d" + names[k] for k in I) if I else "1"


# ---------------------------------------------------------------- scalar forms


class PolyForm:
    """Scalar differential form with polynomial coefficients."""

    __slots__ = ("m", "_terms")

    def __init__(self, m: int, terms: Mapping[tuple, Poly] | None = None):
        if not 0 <= m <= MAX_VARIABLES:
            raise FormError(f"at most {MAX_VARIABLES} variables are supported, got {m}")
        self.m = m
        clean = {}
        for I, p in (terms or {}).items():
            I = tuple(I)
            if list(I) != sorted(set(I)) or any(k >= m or k < 0 for k in I):
                raise FormError(f"form index {I} is not increasing in range({m})")
            if p.m != m:
                raise FormError("coefficient has the wrong number of variables")
            if not p.is_zero():
                clean[I] = clean[I] + p if I in clean else p
                if clean[I].is_zero():
                    del clean[I]
        self._terms = clean

    @classmethod
    def basic(cls, m: int, I: tuple, p: Poly | None = None) -> "PolyForm":
        return cls(m, {tuple(I): p if p is not None else Poly.const(m)})

    @property
    def terms(self) -> dict[tuple, Poly]:
        return dict(self._terms)

    def degrees(self) -> set[int]:
        return {len(I) for I in self._terms}

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise FormError(f"form is not homogeneous (degrees {sorted(degs)})")
        return degs.pop() if degs else 0

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "PolyForm") -> "PolyForm":
        out = dict(self._terms)
        for I, p in other._terms.items():
            out[I] = out[I] + p if I in out else p
        return PolyForm(self.m, out)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.m, {I: -p for I, p in self._terms.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def wedge(self, other: "PolyForm") -> "PolyForm":
        if other.m != self.m:
            raise FormError("forms in different numbers of variables")
        out: dict[tuple, Poly] = {}
        for I, p in self._terms.items():
            for J, q in other._terms.items():
                w = wedge_indices(I, J)
                if w is None:
                    continue
                term = (p * q).scale(w[0])
                out[w[1]] = out[w[1]] + term if w[1] in out else term
        return PolyForm(self.m, out)

    def d(self) -> "PolyForm":
        out: dict[tuple, Poly] = {}
        for I, p in self._terms.items():
            for J, q in _d_terms(I, p):
                out[J] = out[J] + q if J in out else q
        return PolyForm(self.m, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyForm) and self.m == other.m and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.m, tuple(sorted(self._terms.items()))))

    def format(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"({p.format()}){'' if not I else ' ' + _name(I)}"
                          for I, p in sorted(self._terms.items()))

    def __repr__(self) -> str:
        return f"PolyForm({self.format()})"


# ---------------------------------------------------------------- superforms


def _basis_degrees(module: GradedModule) -> list[int]:
    return [deg for deg in module.degrees for _ in range(module.rank(deg))]


class SuperForm:
    """``End(V)``-valued form of fixed total degree."""

    __slots__ = ("module", "m", "_terms", "_degs")

    def __init__(self, module: GradedModule | Mapping[int, int], m: int,
                 terms: Mapping[tuple, Poly] | None = None):
        if not isinstance(module, GradedModule):
            module = GradedModule(module)
        if not 0 <= m <= MAX_VARIABLES:
            raise FormError(f"at most {MAX_VARIABLES} variables are supported, got {m}")
        self.module = module
        self.m = m
        self._degs = _basis_degrees(module)
        n = len(self._degs)
        clean: dict[tuple, Poly] = {}
        for key, p in (terms or {}).items():
            I, i, j = tuple(key[0]), int(key[1]), int(key[2])
            if not (0 <= i < n and 0 <= j < n):
                raise FormError(f"entry ({i},{j}) outside a rank-{n} module")
            if list(I) != sorted(set(I)) or any(k >= m or k < 0 for k in I):
                raise FormError(f"form index {I} is not increasing in range({m})")
            if p.m != m:
                raise FormError("coefficient has the wrong number of variables")
            if p.is_zero():
                continue
            k = (I, i, j)
            clean[k] = clean[k] + p if k in clean else p
            if clean[k].is_zero():
                del clean[k]
        self._terms = clean
        degs = {len(I) + self._degs[i] - self._degs[j] for I, i, j in clean}
        if len(degs) > 1:
            raise FormError(f"superform mixes total degrees {sorted(degs)}")

    # construction helpers

    @classmethod
    def zero(cls, module, m: int) -> "SuperForm":
        return cls(module, m, {})

    @classmethod
    def from_matrix(cls, module, m: int, matrix, I: tuple = (), p: Poly | None = None) -> "SuperForm":
        """``matrix (x) p dx_I`` for an exact matrix given as nested rows."""
        p = p if p is not None else Poly.const(m)
        terms = {}
        for i, row in enumerate(matrix):
            for j, c in enumerate(row):
                c = to_fraction(c)
                if c:
                    terms[(tuple(I), i, j)] = p.scale(c)
        return cls(module, m, terms)

    @classmethod
    def identity(cls, module, m: int, form: PolyForm | None = None) -> "SuperForm":
        module = module if isinstance(module, GradedModule) else GradedModule(module)
        form = form if form is not None else PolyForm.basic(m, ())
        terms = {}
        for i in range(module.total_rank):
            for I, p in form.terms.items():
                terms[(I, i, i)] = p
        return cls(module, m, terms)

    # inspection

    @property
    def terms(self) -> dict[tuple, Poly]:
        return dict(self._terms)

    @property
    def basis_degrees(self) -> list[int]:
        return list(self._degs)

    def endo_degree(self, i: int, j: int) -> int:
        return self._degs[i] - self._degs[j]

    def total_degree(self) -> int | None:
        for I, i, j in self._terms:
            return len(I) + self._degs[i] - self._degs[j]
        return None

    def form_degrees(self) -> set[int]:
        return {len(I) for I, _, _ in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, I: tuple, i: int, j: int) -> Poly:
        return self._terms.get((tuple(I), i, j), Poly(self.m))

    def _same(self, other: "SuperForm") -> None:
        if other.module != self.module:
            raise FormError(f"superforms on different modules {self.module!r} and {other.module!r}")
        if other.m != self.m:
            raise FormError(f"superforms in {self.m} and {other.m} variables")

    def __add__(self, other: "SuperForm") -> "SuperForm":
        self._same(other)
        out = dict(self._terms)
        for k, p in other._terms.items():
            out[k] = out[k] + p if k in out else p
        return SuperForm(self.module, self.m, out)

    def __neg__(self) -> "SuperForm":
        return SuperForm(self.module, self.m, {k: -p for k, p in self._terms.items()})

    def __sub__(self, other: "SuperForm") -> "SuperForm":
        return self + (-other)

    def scale(self, c) -> "SuperForm":
        return SuperForm(self.module, self.m, {k: p.scale(c) for k, p in self._terms.items()})

    def __mul__(self, other: "SuperForm") -> "SuperForm":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SuperForm) and self.module == other.module
                and self.m == other.m and self._terms == other._terms)

    def __hash__(self) -> int:
        return hash((self.module, self.m, tuple(sorted(self._terms.items()))))

    def evaluate_matrix(self, I: tuple, point):
        """Numeric coefficient matrix of ``dx_I`` at ``point`` (numpy, vectorised)."""
        import numpy as np

        n = len(self._degs)
        pts = [np.asarray(x, dtype=float) for x in point]
        shape = np.broadcast(*pts).shape if pts else ()
        out = np.zeros(shape + (n, n))
        for (J, i, j), p in self._terms.items():
            if J == tuple(I):
                out[..., i, j] = p.evaluate(pts)
        return out

    def format(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"E{i}{j}*({p.format()}){'' if not I else ' ' + _name(I)}"
                          for (I, i, j), p in sorted(self._terms.items()))

    def __repr__(self) -> str:
        return f"SuperForm({self.format()})"

    def to_json(self) -> dict:
        return {
            "ranks": {str(k): v for k, v in self.module.ranks.items()},
            "variables": self.m,
            "terms": [{"form": list(I), "row": i, "col": j,
                       "poly": [[list(e), format_fraction(c)] for e, c in sorted(p.terms.items())]}
                      for (I, i, j), p in sorted(self._terms.items())],
        }


def wedge(a: SuperForm, b: SuperForm) -> SuperForm:
    """Koszul-signed product ``(phi (x) a)(phi' (x) a') = (-1)^{|a||phi'|} phi phi' (x) a ^ a'``."""
    a._same(b)
    out: dict[tuple, Poly] = {}
    for (I, i, j), p in a._terms.items():
        for (J, k, l), q in b._terms.items():
            if j != k:
                continue
            w = wedge_indices(I, J)
            if w is None:
                continue
            sign = w[0] * _sign(len(I) * b.endo_degree(k, l))
            key = (w[1], i, l)
            term = (p * q).scale(sign)
            out[key] = out[key] + term if key in out else term
    return SuperForm(a.module, a.m, out)


def exterior_d(a: SuperForm) -> SuperForm:
    """``d(phi (x) alpha) = (-1)^{|phi|} phi (x) d alpha``."""
    out: dict[tuple, Poly] = {}
    for (I, i, j), p in a._terms.items():
        sign = _sign(a.endo_degree(i, j))
        for J, q in _d_terms(I, p):
            key = (J, i, j)
            term = q.scale(sign)
            out[key] = out[key] + term if key in out else term
    return SuperForm(a.module, a.m, out)


# ---------------------------------------------------------------- V-valued forms


class VForm:
    """``V``-valued form: terms ``(i, I) -> p`` meaning ``e_i (x) p dx_I``."""

    __slots__ = ("module", "m", "_terms", "_degs")

    def __init__(self, module: GradedModule, m: int, terms: Mapping[tuple, Poly] | None = None):
        self.module = module
        self.m = m
        self._degs = _basis_degrees(module)
        clean: dict[tuple, Poly] = {}
        for (i, I), p in (terms or {}).items():
            key = (int(i), tuple(I))
            if p.is_zero():
                continue
            clean[key] = clean[key] + p if key in clean else p
            if clean[key].is_zero():
                del clean[key]
        self._terms = clean

    @classmethod
    def basic(cls, module: GradedModule, m: int, i: int, form: PolyForm) -> "VForm":
        return cls(module, m, {(i, I): p for I, p in form.terms.items()})

    @property
    def terms(self) -> dict[tuple, Poly]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "VForm") -> "VForm":
        out = dict(self._terms)
        for k, p in other._terms.items():
            out[k] = out[k] + p if k in out else p
        return VForm(self.module, self.m, out)

    def __neg__(self) -> "VForm":
        return VForm(self.module, self.m, {k: -p for k, p in self._terms.items()})

    def __sub__(self, other: "VForm") -> "VForm":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return (isinstance(other, VForm) and self.module == other.module
                and self.m == other.m and self._terms == other._terms)

    def __hash__(self) -> int:
        return hash((self.module, self.m, tuple(sorted(self._terms.items()))))

    def __repr__(self) -> str:
        if not self._terms:
            return "VForm(0)"
        return "VForm(" + " + ".join(f"e{i}*({p.format()}){'' if not I else ' ' + _name(I)}"
                                     for (i, I), p in sorted(self._terms.items())) + ")"


def tilde_apply(a: SuperForm, v: VForm) -> VForm:
    """``A~(c (x) g) = (-1)^{|c||alpha|} phi(c) (x) alpha ^ g``."""
    out: dict[tuple, Poly] = {}
    for (I, i, j), p in a._terms.items():
        for (k, J), q in v._terms.items():
            if k != j:
                continue
            w = wedge_indices(I, J)
            if w is None:
                continue
            sign = w[0] * _sign(v._degs[k] * len(I))
            key = (i, w[1])
            term = (p * q).scale(sign)
            out[key] = out[key] + term if key in out else term
    return VForm(v.module, v.m, out)


def d_apply(v: VForm) -> VForm:
    """Flat differential ``d(c (x) g) = (-1)^{|c|} c (x) dg`` in the trivialisation."""
    out: dict[tuple, Poly] = {}
    for (i, I), p in v._terms.items():
        sign = _sign(v._degs[i])
        for J, q in _d_terms(I, p):
            key = (i, J)
            term = q.scale(sign)
            out[key] = out[key] + term if key in out else term
    return VForm(v.module, v.m, out)


def omega_apply(w: PolyForm, v: VForm) -> VForm:
    """Left multiplication ``w(c (x) g) = (-1)^{k|c|} c (x) w ^ g`` for homogeneous ``w`` of degree ``k``."""
    k = w.degree()
    out: dict[tuple, Poly] = {}
    for I, p in w.terms.items():
        for (i, J), q in v._terms.items():
            wi = wedge_indices(I, J)
            if wi is None:
                continue
            sign = wi[0] * _sign(k * v._degs[i])
            key = (i, wi[1])
            term = (p * q).scale(sign)
            out[key] = out[key] + term if key in out else term
    return VForm(v.module, v.m, out)


def reconstruct_from_tilde(values: Mapping[int, VForm], module: GradedModule, m: int) -> SuperForm:
    """Recover ``A`` from the values ``A~(e_j (x) 1)`` on the section basis."""
    degs = _basis_degrees(module)
    terms = {}
    for j, v in values.items():
        for (i, I), p in v.terms.items():
            terms[(I, i, j)] = p.scale(_sign(degs[j] * len(I)))
    return SuperForm(module, m, terms)


# ---------------------------------------------------------------- superconnections


@dataclass(frozen=True)
class SuperconnectionData:
    """Components ``A_p`` of form degree ``p`` and endomorphism degree ``1 - p``."""

    module: GradedModule
    m: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.module, GradedModule):
            object.__setattr__(self, "module", GradedModule(self.module))
        for p, A in self.components.items():
            if A.module != self.module or A.m != self.m:
                raise FormError(f"A_{p} lives on a different module or variable set")
            bad = A.form_degrees() - {p}
            if bad:
                raise FormError(f"A_{p} has form degree {sorted(bad)}, expected {p}")
            td = A.total_degree()
            if td is not None and td != 1:
                raise FormError(f"A_{p} has total degree {td}, expected 1")

    def A(self, p: int) -> SuperForm:
        return self.components.get(p) or SuperForm.zero(self.module, self.m)

    def total(self) -> SuperForm:
        out = SuperForm.zero(self.module, self.m)
        for p in sorted(self.components):
            out = out + self.components[p]
        return out

    def residual(self, n: int) -> SuperForm:
        """``d A_{n-1} - sum_{p+q=n} A_p A_q`` (``A_{-1} = 0``)."""
        lhs = exterior_d(self.A(n - 1)) if n >= 1 else SuperForm.zero(self.module, self.m)
        for p in range(n + 1):
            lhs = lhs - wedge(self.A(p), self.A(n - p))
        return lhs


def superconnection_apply(S: SuperconnectionData, v: VForm) -> VForm:
    """``D = d - sum_p A_p~`` applied to a V-valued form."""
    out = d_apply(v)
    for p in sorted(S.components):
        out = out - tilde_apply(S.components[p], v)
    return out


def _sample_sections(module: GradedModule, m: int, max_degree: int = 1) -> list[VForm]:
    monos = [e for e in iproduct(range(max_degree + 1), repeat=m) if sum(e) <= max_degree]
    out = []
    for i in range(module.total_rank):
        for I in all_indices(m):
            for e in monos:
                out.append(VForm(module, m, {(i, I): Poly(m, {e: 1})}))
    return out


@dataclass
class FlatnessReport:
    ok: bool
    residuals: dict
    d_squared_zero: bool
    agrees: bool
    samples: int

    def summary(self) -> str:
        bad = [n for n, r in sorted(self.residuals.items()) if not r.is_zero()]
        status = "pass" if self.ok else "fail"
        lines = [f"{status}: flatness residuals checked for n = {min(self.residuals)}..{max(self.residuals)}"]
        for n, r in sorted(self.residuals.items()):
            lines.append(f"  n={n}: {'0' if r.is_zero() else r.format()}")
        lines.append(f"  D^2 = 0 on {self.samples} samples: {'yes' if self.d_squared_zero else 'no'}"
                     f" ({'agrees' if self.agrees else 'DISAGREES'} with residuals)")
        if bad:
            lines.append(f"  nonzero residuals at n = {bad}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "residuals": {str(n): (None if r.is_zero() else r.to_json()["terms"])
                          for n, r in sorted(self.residuals.items())},
            "d_squared_zero": self.d_squared_zero,
            "agrees": self.agrees,
            "samples": self.samples,
        }


def check_flatness(S: SuperconnectionData, sample_degree: int = 1) -> FlatnessReport:
    """Exact residuals of ``d A_{n-1} = sum A_p A_q`` for ``n = 0..m+1`` plus a ``D^2`` cross-check.

    ``D^2 = -(dA - A A)~``, so ``D^2`` is compared termwise against the residuals on
    polynomial samples ``e_i (x) x^e dx_I``.
    """
    residuals = {n: S.residual(n) for n in range(0, S.m + 2)}
    flat = all(r.is_zero() for r in residuals.values())
    total_res = SuperForm.zero(S.module, S.m)
    for r in residuals.values():
        total_res = total_res + r
    samples = _sample_sections(S.module, S.m, sample_degree)
    d2_zero = True
    agrees = True
    for v in samples:
        d2 = superconnection_apply(S, superconnection_apply(S, v))
        if not d2.is_zero():
            d2_zero = False
        if d2 != -tilde_apply(total_res, v):
            agrees = False
    return FlatnessReport(flat and d2_zero and agrees, residuals, d2_zero, agrees, len(samples))


@dataclass
class TildeReport:
    ok: bool
    sign_rule_ok: bool
    reconstruction_ok: bool
    checked: int
    failures: list

    def summary(self) -> str:
        status = "pass" if self.ok else "fail"
        lines = [f"{status}: sign rule on {self.checked} products, reconstruction "
                 f"{'exact' if self.reconstruction_ok else 'FAILED'}"]
        lines.extend(f"  {f}" for f in self.failures[:10])
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"ok": self.ok, "sign_rule_ok": self.sign_rule_ok,
                "reconstruction_ok": self.reconstruction_ok, "checked": self.checked,
                "failures": self.failures}


def default_omegas(m: int) -> list[PolyForm]:
    """Homogeneous test forms ``x^e dx_I`` with ``|e| <= 2``."""
    monos = [e for e in iproduct(range(3), repeat=m) if sum(e) <= 2]
    return [PolyForm.basic(m, I, Poly(m, {e: 1})) for I in all_indices(m) for e in monos]


def tilde_check(A: SuperForm, samples: Iterable[PolyForm] | None = None) -> TildeReport:
    """Check ``A~ w = (-1)^{k|A|} w A~`` on a spanning set and exact reconstruction of ``A``."""
    omegas = list(samples) if samples is not None else default_omegas(A.m)
    total = A.total_degree() or 0
    sections = [VForm.basic(A.module, A.m, i, PolyForm.basic(A.m, I))
                for i in range(A.module.total_rank) for I in all_indices(A.m)]
    failures = []
    checked = 0
    for w in omegas:
        k = w.degree()
        for v in sections:
            left = tilde_apply(A, omega_apply(w, v))
            right = omega_apply(w, tilde_apply(A, v))
            if _sign(k * total) == -1:
                right = -right
            checked += 1
            if left != right:
                failures.append(f"sign rule fails for w={w.format()} on {v!r}")
    values = {j: tilde_apply(A, VForm.basic(A.module, A.m, j, PolyForm.basic(A.m, ())))
              for j in range(A.module.total_rank)}
    recon = reconstruct_from_tilde(values, A.module, A.m) == A
    if not recon:
        failures.append("reconstruction from section values does not recover A")
    sign_ok = not any(f.startswith("sign") for f in failures)
    return TildeReport(sign_ok and recon, sign_ok, recon, checked, failures)
