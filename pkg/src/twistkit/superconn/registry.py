"""Named superconnection families.

Each family provides numeric evaluators for ``A_0``, ``A_1`` and ``A_2``
(coefficient matrices, vectorised over sample points of shape ``(K, m)``) and,
when its coefficients are polynomial, the exact :class:`SuperconnectionData`
the numerics were derived from.

Numeric ``A_1`` has shape ``(K, m, n, n)``: entry ``k`` is the coefficient of
``dx_k``.  Numeric ``A_2`` is a dict ``(k, l) -> (K, n, n)`` for ``k < l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ..complexes import GradedModule
from ..exactlin import format_fraction, to_fraction
from .forms import Poly, PolyForm, SuperconnectionData, SuperForm

__all__ = ["Family", "FAMILIES", "make_family", "family_names", "parse_params"]


@dataclass
class Family:
    name: str
    m: int
    module: GradedModule
    params: dict
    description: str
    exact: SuperconnectionData | None
    a0: Callable
    a1: Callable
    a2: Callable

    @property
    def rank(self) -> int:
        return self.module.total_rank

    def A0(self, pts) -> np.ndarray:
        return self.a0(np.atleast_2d(np.asarray(pts, dtype=float)))

    def A1(self, pts) -> np.ndarray:
        return self.a1(np.atleast_2d(np.asarray(pts, dtype=float)))

    def A2(self, pts) -> dict:
        return self.a2(np.atleast_2d(np.asarray(pts, dtype=float)))

    def describe(self) -> str:
        ps = ", ".join(f"{k}={format_fraction(v)}" for k, v in sorted(self.params.items()))
        return f"{self.name}({ps})" if ps else self.name


def _from_exact(S: SuperconnectionData):
    n = S.module.total_rank
    m = S.m

    def a0(P):
        return S.A(0).evaluate_matrix((), [P[:, k] for k in range(m)]).reshape(len(P), n, n)

    def a1(P):
        out = np.zeros((len(P), m, n, n))
        for k in range(m):
            out[:, k] = S.A(1).evaluate_matrix((k,), [P[:, c] for c in range(m)]).reshape(len(P), n, n)
        return out

    def a2(P):
        out = {}
        for k in range(m):
            for l in range(k + 1, m):
                out[(k, l)] = S.A(2).evaluate_matrix((k, l), [P[:, c] for c in range(m)]).reshape(len(P), n, n)
        return out

    return a0, a1, a2


def _exact_family(name, description, params, S: SuperconnectionData) -> Family:
    a0, a1, a2 = _from_exact(S)
    return Family(name, S.m, S.module, params, description, S, a0, a1, a2)


def _flat_xy(params) -> Family:
    lam = params["lam"]
    V, m = GradedModule({0: 1, 1: 1}), 2
    y = Poly.var(m, 1, lam)
    S = SuperconnectionData(V, m, {
        0: SuperForm.from_matrix(V, m, [[0, 0], [1, 0]]),
        1: SuperForm.identity(V, m, PolyForm.basic(m, (0,), y)),
        2: SuperForm.from_matrix(V, m, [[0, -lam], [0, 0]], (0, 1)),
    })
    return _exact_family("flat-xy", "ranks (1,1) on (x,y): A0=E10, A1=lam*y dx*I, A2=-lam*E01 dx^dy", params, S)


def _flat_xyz(params) -> Family:
    lam = params["lam"]
    V, m = GradedModule({0: 1, 1: 1}), 3
    x, y, z = (Poly.var(m, k, lam) for k in range(3))
    alpha = PolyForm(m, {(0,): y, (1,): z, (2,): x})
    beta = alpha.d()
    A2 = SuperForm(V, m, {(I, 0, 1): p for I, p in beta.terms.items()})
    S = SuperconnectionData(V, m, {
        0: SuperForm.from_matrix(V, m, [[0, 0], [1, 0]]),
        1: SuperForm.identity(V, m, alpha),
        2: A2,
    })
    return _exact_family("flat-xyz", "ranks (1,1) on (x,y,z): A1=lam*(y dx+z dy+x dz)*I, A2=E01*d(alpha)", params, S)


def _nilpotent_const(params) -> Family:
    a, b = params["a"], params["b"]
    V, m = GradedModule({0: 1, 1: 1, 2: 1}), 2
    S = SuperconnectionData(V, m, {0: SuperForm.from_matrix(V, m, [[0, 0, 0], [a, 0, 0], [0, b, 0]])})
    return _exact_family("nilpotent-const", "ranks (1,1,1): constant A0=a*E10+b*E21, flat iff a*b=0", params, S)


def _zero(params) -> Family:
    V, m = GradedModule({0: 1, 1: 1}), 2
    return _exact_family("zero", "ranks (1,1) on (x,y): all components zero", params, SuperconnectionData(V, m, {}))


def _abelian(params) -> Family:
    c = params["c"]
    V, m = GradedModule({0: 1, 1: 1}), 2
    x, y = Poly.var(m, 0, c), Poly.var(m, 1, c)
    closed = PolyForm(m, {(0,): y, (1,): x})
    S = SuperconnectionData(V, m, {
        0: SuperForm.from_matrix(V, m, [[0, 0], [1, 0]]),
        1: SuperForm.identity(V, m, closed),
    })
    return _exact_family("abelian", "ranks (1,1) on (x,y): A0=E10, A1=c*(y dx + x dy)*I closed, A2=0", params, S)


def _constant(params) -> Family:
    V, m = GradedModule({0: 2}), 1
    M = [[params["a11"], params["a12"]], [params["a21"], params["a22"]]]
    S = SuperconnectionData(V, m, {1: SuperForm.from_matrix(V, m, M, (0,))})
    return _exact_family("constant", "rank 2 in degree 0 on t: constant A1=[[a11,a12],[a21,a22]] dt", params, S)


def _diag_exp(params) -> Family:
    V, m = GradedModule({0: 1, 1: 1}), 1

    def a0(P):
        out = np.zeros((len(P), 2, 2))
        out[:, 1, 0] = np.exp(P[:, 0])
        return out

    def a1(P):
        out = np.zeros((len(P), 1, 2, 2))
        out[:, 0, 1, 1] = 1.0
        return out

    def a2(P):
        return {}

    return Family("diag-exp", m, V, params, "ranks (1,1) on t: A0=e^t*E10, A1=diag(0,1) dt (numeric only)",
                  None, a0, a1, a2)


FAMILIES: dict[str, tuple[Callable, dict]] = {
    "flat-xy": (_flat_xy, {"lam": Fraction(1)}),
    "flat-xyz": (_flat_xyz, {"lam": Fraction(1)}),
    "nilpotent-const": (_nilpotent_const, {"a": Fraction(1), "b": Fraction(0)}),
    "zero": (_zero, {}),
    "abelian": (_abelian, {"c": Fraction(1)}),
    "constant": (_constant, {"a11": Fraction(0), "a12": Fraction(1, 2),
                             "a21": Fraction(-1, 2), "a22": Fraction(1, 4)}),
    "diag-exp": (_diag_exp, {}),
}


def family_names() -> list[str]:
    return sorted(FAMILIES)


def parse_params(items) -> dict:
    """Parse ``["lam=1/2", "b=3"]`` into exact rationals."""
    out = {}
    for item in items or []:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ValueError(f"parameter {part!r} is not of the form name=value")
            k, v = part.split("=", 1)
            try:
                out[k.strip()] = to_fraction(v.strip())
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"parameter {k.strip()!r} has non-rational value {v.strip()!r}") from None
    return out


def make_family(name: str, params: dict | None = None) -> Family:
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; known: {', '.join(family_names())}")
    builder, defaults = FAMILIES[name]
    merged = dict(defaults)
    for k, v in (params or {}).items():
        if k not in defaults:
            raise ValueError(f"family {name!r} has no parameter {k!r}"
                             + (f"; parameters: {', '.join(sorted(defaults))}" if defaults else ""))
        merged[k] = to_fraction(v)
    return builder(merged)
