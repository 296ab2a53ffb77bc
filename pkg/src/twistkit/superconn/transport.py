"""Numeric parallel transport, the cochain-map check and the ``psi_2`` homotopy check.

``Phi_1(t, s)`` maps the fibre at ``gamma(s)`` to the fibre at ``gamma(t)`` and
solves ``d/dt Phi_1(t, s) = (A_1/t) Phi_1(t, s)``.  It is computed as the
ordered product (multiplied right to left) of one factor per step, sampled at
step midpoints.  The default factor is ``expm((A_1/t) dt)``; ``method="euler"``
uses ``I + (A_1/t) dt``.

Points of the standard 2-simplex ``1 >= x >= y >= 0`` map to ``B`` by
``sigma(x, y) = v0 + x (v1 - v0) + y (v2 - v1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .._parallel import pmap
from .forms import check_flatness
from .registry import Family

__all__ = [
    "TransportError",
    "TransportResult",
    "ChainMapReport",
    "Psi2Result",
    "HomotopyReport",
    "transport",
    "segment_transport",
    "check_chain_map",
    "numeric_flatness",
    "psi2_quadrature",
    "check_homotopy",
    "transport_convergence",
    "homotopy_convergence",
    "table_csv",
    "format_matrix",
    "STANDARD_TRIANGLE",
]

STANDARD_TRIANGLE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0))
METHODS = ("expm", "euler")
COLUMN_BLOCK = 16


class TransportError(ArithmeticError):
    """Raised on non-finite values, unknown methods or non-flat input."""


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise TransportError(f"unknown transport method {method!r}; use one of {', '.join(METHODS)}")


def _finite(M: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(M)):
        raise TransportError(f"{what} produced non-finite values (blow-up)")
    return M


def _factors(family: Family, starts: np.ndarray, ends: np.ndarray, steps: int, method: str) -> np.ndarray:
    """Step factors for many segments at once: shape ``(S, steps, n, n)``, first step first."""
    S = len(starts)
    delta = (ends - starts) / steps
    frac = (np.arange(steps) + 0.5) / steps
    mids = starts[:, None, :] + frac[None, :, None] * (ends - starts)[:, None, :]
    A1 = family.A1(mids.reshape(S * steps, family.m))
    X = np.einsum("skij,sk->sij", A1, np.repeat(delta, steps, axis=0))
    if method == "expm":
        F = expm(X) if len(X) else X
    else:
        F = np.eye(family.rank) + X
    return _finite(F.reshape(S, steps, family.rank, family.rank), "transport step")


def _reduce(F: np.ndarray) -> np.ndarray:
    """``F[:, K-1] @ ... @ F[:, 0]`` for a stack of step factors."""
    out = F[:, 0]
    for k in range(1, F.shape[1]):
        out = F[:, k] @ out
    return out


def segment_transport(family: Family, start, end, steps: int, method: str = "expm") -> np.ndarray:
    """Transport from ``start`` to ``end`` along the straight segment: ``Phi_1(end, start)``."""
    _check_method(method)
    if steps < 1:
        raise TransportError("step count must be at least 1")
    s = np.asarray([start], dtype=float)
    e = np.asarray([end], dtype=float)
    return _reduce(_factors(family, s, e, steps, method))[0]


def _path_product(family: Family, path, steps: int, method: str) -> np.ndarray:
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != family.m or len(pts) < 2:
        raise TransportError(f"path must be a list of at least two points in {family.m} coordinates")
    out = np.eye(family.rank)
    for a, b in zip(pts[:-1], pts[1:]):
        out = segment_transport(family, a, b, steps, method) @ out
    return out


@dataclass
class TransportResult:
    """``Phi_1(end, start)`` along a piecewise-linear path plus refinement metadata."""

    matrix: np.ndarray
    steps: int
    refined: np.ndarray
    change: float
    richardson: np.ndarray
    method: str

    def to_json(self, digits: int = 12) -> dict:
        return {
            "steps": self.steps,
            "method": self.method,
            "matrix": format_matrix(self.matrix, digits),
            "refined_2n": format_matrix(self.refined, digits),
            "change": float(self.change),
            "richardson": format_matrix(self.richardson, digits),
        }


def transport(family: Family, path, steps: int, method: str = "expm") -> TransportResult:
    """Ordered-product transport along ``path`` (``steps`` per segment), with its 2N refinement.

    The Richardson estimate assumes order 2 for ``expm`` and order 1 for ``euler``;
    it is reported, never substituted for the value.
    """
    _check_method(method)
    if steps < 1:
        raise TransportError("step count must be at least 1")
    M1 = _path_product(family, path, steps, method)
    M2 = _path_product(family, path, 2 * steps, method)
    order = 2 if method == "expm" else 1
    rich = M2 + (M2 - M1) / (2 ** order - 1)
    return TransportResult(M1, steps, M2, float(np.max(np.abs(M2 - M1))), rich, method)


# ---------------------------------------------------------------- cochain map


def numeric_flatness(family: Family, points, h: float = 1e-5) -> float:
    """Largest entry of the coefficient identities behind flatness, by central differences.

    Checks ``d_k A0 = A1_k A0 - A0 A1_k`` and
    ``d_k A1_l - d_l A1_k = [A1_k, A1_l] + A0 A2_kl + A2_kl A0`` at each point.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = family.m
    A0 = family.A0(P)
    A1 = family.A1(P)
    A2 = family.A2(P)
    worst = 0.0
    dA1 = []
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        dA0 = (family.A0(P + e) - family.A0(P - e)) / (2 * h)
        dA1.append((family.A1(P + e) - family.A1(P - e)) / (2 * h))
        r = dA0 - (A1[:, k] @ A0 - A0 @ A1[:, k])
        worst = max(worst, float(np.max(np.abs(r))) if r.size else 0.0)
    for k in range(m):
        for l in range(k + 1, m):
            C = A2.get((k, l), np.zeros_like(A0))
            r = (dA1[k][:, l] - dA1[l][:, k]) - (A1[:, k] @ A1[:, l] - A1[:, l] @ A1[:, k]) - (A0 @ C + C @ A0)
            worst = max(worst, float(np.max(np.abs(r))))
    return worst


@dataclass
class ChainMapReport:
    residual: float
    precondition_residual: float
    consistent: bool
    samples: int
    steps: int

    @property
    def ok(self) -> bool:
        return self.consistent

    def summary(self) -> str:
        if not self.consistent:
            return (f"input inconsistency: A0 does not satisfy dA0/dt = [A1/t, A0] along the path "
                    f"(residual {self.precondition_residual:.3e}); transport residual "
                    f"{self.residual:.3e} is not meaningful")
        return (f"chain map residual {self.residual:.3e} over {self.samples} samples "
                f"(N={self.steps}, precondition residual {self.precondition_residual:.3e})")

    def to_json(self) -> dict:
        return {"residual": self.residual, "precondition_residual": self.precondition_residual,
                "consistent": self.consistent, "samples": self.samples, "steps": self.steps}


def check_chain_map(family: Family, path, steps: int, method: str = "expm",
                    precondition_tol: float = 1e-6) -> ChainMapReport:
    """``sup_t |A0(gamma(t)) Phi_1(t, s) - Phi_1(t, s) A0(gamma(s))|`` over the step nodes."""
    _check_method(method)
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != family.m or len(pts) < 2:
        raise TransportError(f"path must be a list of at least two points in {family.m} coordinates")
    nodes = [pts[0]]
    Phi = [np.eye(family.rank)]
    for a, b in zip(pts[:-1], pts[1:]):
        F = _factors(family, a[None, :], b[None, :], steps, method)[0]
        for k in range(steps):
            Phi.append(F[k] @ Phi[-1])
            nodes.append(a + (k + 1) / steps * (b - a))
    nodes = np.asarray(nodes)
    Phi = np.asarray(Phi)
    A0 = family.A0(nodes)
    res = A0 @ Phi - Phi @ A0[0]
    residual = float(np.max(np.abs(res)))
    pre = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        d = b - a
        sample = a + np.linspace(0.0, 1.0, 17)[:, None] * d
        h = 1e-5
        dA0 = (family.A0(sample + h * d) - family.A0(sample - h * d)) / (2 * h)
        A1t = np.einsum("pkij,k->pij", family.A1(sample), d)
        A0s = family.A0(sample)
        r = dA0 - (A1t @ A0s - A0s @ A1t)
        pre = max(pre, float(np.max(np.abs(r))))
    return ChainMapReport(residual, pre, pre <= precondition_tol, len(nodes), steps)


# ---------------------------------------------------------------- psi_2


@dataclass
class Psi2Result:
    matrix: np.ndarray
    grid: int
    steps: int
    method: str

    def to_json(self, digits: int = 12) -> dict:
        return {"grid": self.grid, "steps": self.steps, "method": self.method,
                "matrix": format_matrix(self.matrix, digits)}


def _sigma(simplex, x, y) -> np.ndarray:
    v0, v1, v2 = (np.asarray(v, dtype=float) for v in simplex)
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    return v0 + x * (v1 - v0) + y * (v2 - v1)


def _area_coefficients(family: Family, simplex) -> dict:
    v0, v1, v2 = (np.asarray(v, dtype=float) for v in simplex)
    a, b = v1 - v0, v2 - v1
    return {(k, l): a[k] * b[l] - a[l] * b[k] for k in range(family.m) for l in range(k + 1, family.m)}


def _A2_pullback(family: Family, simplex, pts: np.ndarray) -> np.ndarray:
    out = np.zeros((len(pts), family.rank, family.rank))
    A2 = family.A2(pts)
    for kl, c in _area_coefficients(family, simplex).items():
        if c and kl in A2:
            out += c * A2[kl]
    return out


def _cumulative(F: np.ndarray, left: bool) -> np.ndarray:
    """Partial products of a chain of cell transports.

    ``left=False``: ``P_0 = I, P_{k+1} = P_k @ F_k``; ``left=True``: ``P_K = I, P_k = F_k @ P_{k+1}``.
    """
    K, n = F.shape[0], F.shape[-1]
    out = np.empty((K + 1,) + F.shape[1:])
    if left:
        out[K] = np.eye(n)
        for k in range(K - 1, -1, -1):
            out[k] = F[k] @ out[k + 1]
    else:
        out[0] = np.eye(n)
        for k in range(K):
            out[k + 1] = out[k] @ F[k]
    return out


def _column_block(family: Family, simplex, M: int, steps: int, method: str,
                  cols: range, bottom: np.ndarray, diag: np.ndarray) -> np.ndarray:
    """Quadrature contribution of a block of columns, summed in column order."""
    h = 1.0 / M
    q = h / 4.0
    r = max(1, math.ceil(steps * q))
    n = family.rank
    total = np.zeros((n, n))
    for i in cols:
        xc = (i + 0.5) * h
        K = 4 * i + 2
        ys = np.arange(K + 1) * q
        tops = _sigma(simplex, np.full(K, xc), ys[1:])
        lows = _sigma(simplex, np.full(K, xc), ys[:-1])
        G = _reduce(_factors(family, tops, lows, r, method))
        L = _cumulative(G, left=False)
        U = _cumulative(G, left=True)
        idx = [4 * j + 2 for j in range(i)] + [4 * i + 1]
        weights = np.array([h * h] * i + [h * h / 2.0])
        nodes = _sigma(simplex, np.full(len(idx), xc), ys[idx])
        A2 = _A2_pullback(family, simplex, nodes)
        inner = np.einsum("p,pij->ij", weights, L[idx] @ A2 @ U[idx])
        total = total + bottom[i] @ inner @ diag[i]
    return total


def psi2_quadrature(family: Family, simplex=STANDARD_TRIANGLE, grid: int = 50, steps: int = 500,
                    method: str = "expm", workers: int | None = None) -> Psi2Result:
    """``int_{1>=x>=y>=0} Phi_1(v0, v) A_2(v) Phi_1(v, v2)`` with the two-segment transports.

    ``Phi_1(v0, v) = Phi_1(v0, sigma(x,0)) Phi_1(sigma(x,0), v)`` and
    ``Phi_1(v, v2) = Phi_1(v, sigma(x,x)) Phi_1(sigma(x,x), v2)``.  Columns use the
    midpoint ``x = (i + 1/2)/M``; each column integrates in ``y`` with full cells
    of height ``h`` at their midpoints and a final half cell at its midpoint.
    Transports use at least ``steps`` factors per unit parameter length.
    """
    _check_method(method)
    if grid < 1 or steps < 1:
        raise TransportError("grid and step counts must be at least 1")
    if family.m < 2:
        raise TransportError(f"family {family.name!r} has {family.m} variable(s); psi_2 needs two")
    M = grid
    h = 1.0 / M
    half = h / 2.0
    r2 = max(1, math.ceil(steps * half))
    xs = np.arange(2 * M + 1) * half
    # bottom edge: Phi_1(v0, sigma(x_c, 0)), transports run toward v0
    F = _reduce(_factors(family, _sigma(simplex, xs[1:], 0 * xs[1:]),
                         _sigma(simplex, xs[:-1], 0 * xs[:-1]), r2, method))
    bottom = _cumulative(F, left=False)[1::2]
    # diagonal: Phi_1(sigma(x_c, x_c), v2), transports run away from v2
    F = _reduce(_factors(family, _sigma(simplex, xs[1:], xs[1:]),
                         _sigma(simplex, xs[:-1], xs[:-1]), r2, method))
    diag = _cumulative(F, left=True)[1::2]
    blocks = [range(s, min(s + COLUMN_BLOCK, M)) for s in range(0, M, COLUMN_BLOCK)]
    parts = pmap(lambda cols: _column_block(family, simplex, M, steps, method, cols, bottom, diag),
                 blocks, workers)
    total = np.zeros((family.rank, family.rank))
    for p in parts:
        total = total + p
    return Psi2Result(_finite(total, "psi_2 quadrature"), grid, steps, method)


@dataclass
class HomotopyReport:
    residual: float
    lhs: np.ndarray
    rhs: np.ndarray
    psi2: np.ndarray
    grid: int
    steps: int
    flatness: str

    def summary(self, digits: int = 10) -> str:
        lines = [f"homotopy residual {self.residual:.3e} (M={self.grid}, N={self.steps}; flatness {self.flatness})",
                 "psi2 = " + _rows(self.psi2, digits),
                 "A0(v0) psi2 + psi2 A0(v2) = " + _rows(self.lhs, digits),
                 "Phi(v0,v2) - Phi(v0,v1) Phi(v1,v2) = " + _rows(self.rhs, digits)]
        return "\n".join(lines)

    def to_json(self, digits: int = 12) -> dict:
        return {"residual": self.residual, "grid": self.grid, "steps": self.steps,
                "flatness": self.flatness, "psi2": format_matrix(self.psi2, digits),
                "lhs": format_matrix(self.lhs, digits), "rhs": format_matrix(self.rhs, digits)}


def _flatness_status(family: Family, simplex) -> str:
    if family.exact is not None:
        report = check_flatness(family.exact)
        if not report.ok:
            bad = [n for n, r in sorted(report.residuals.items()) if not r.is_zero()]
            raise TransportError(f"family {family.describe()} is not flat (nonzero residuals at n = {bad})")
        return "exact"
    g = np.linspace(0.0, 1.0, 7)
    X, Y = np.meshgrid(g, g)
    mask = X >= Y
    pts = _sigma(simplex, X[mask], Y[mask])
    worst = numeric_flatness(family, pts)
    if worst >= 1e-8:
        raise TransportError(f"family {family.describe()} fails numeric flatness (residual {worst:.3e})")
    return f"numeric {worst:.1e}"


def check_homotopy(family: Family, simplex=STANDARD_TRIANGLE, grid: int = 50, steps: int = 500,
                   method: str = "expm", workers: int | None = None) -> HomotopyReport:
    """``|A0(v0) psi2 + psi2 A0(v2) - (Phi_1(v0,v2) - Phi_1(v0,v1) Phi_1(v1,v2))|`` (max entry)."""
    status = _flatness_status(family, simplex)
    v0, v1, v2 = (np.asarray(v, dtype=float) for v in simplex)
    psi2 = psi2_quadrature(family, simplex, grid, steps, method, workers).matrix
    A0 = family.A0(np.stack([v0, v2]))
    lhs = A0[0] @ psi2 + psi2 @ A0[1]
    rhs = (segment_transport(family, v2, v0, steps, method)
           - segment_transport(family, v1, v0, steps, method) @ segment_transport(family, v2, v1, steps, method))
    return HomotopyReport(float(np.max(np.abs(lhs - rhs))), lhs, rhs, psi2, grid, steps, status)


# ---------------------------------------------------------------- convergence tables


def transport_convergence(family: Family, path, steps_list, method: str = "expm", reference=None) -> list[dict]:
    """Rows ``N, residual, ratio``; residual against ``reference`` or else against the 2N value."""
    rows = []
    prev = None
    for N in steps_list:
        res = transport(family, path, N, method)
        err = res.change if reference is None else float(np.max(np.abs(res.matrix - reference)))
        rows.append({"N": N, "residual": err, "ratio": (err / prev) if prev else None})
        prev = err
    return rows


def homotopy_convergence(family: Family, levels, simplex=STANDARD_TRIANGLE, method: str = "expm",
                         workers: int | None = None) -> list[dict]:
    """Rows ``M, N, residual, ratio`` for each ``(M, N)`` level."""
    rows = []
    prev = None
    for M, N in levels:
        rep = check_homotopy(family, simplex, M, N, method, workers)
        rows.append({"M": M, "N": N, "residual": rep.residual,
                     "ratio": (rep.residual / prev) if prev else None})
        prev = rep.residual
    return rows


def table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    out = [",".join(cols)]
    for row in rows:
        vals = []
        for c in cols:
            v = row[c]
            vals.append("" if v is None else (str(v) if isinstance(v, int) else f"{v:.6e}"))
        out.append(",".join(vals))
    return "\n".join(out) + "\n"


def format_matrix(M: np.ndarray, digits: int = 12) -> list[list[str]]:
    def fmt(v: float) -> str:
        s = f"{v:.{digits}f}"
        return "0." + "0" * digits if s.lstrip("-").strip("0.") == "" else s
    return [[fmt(float(v)) for v in row] for row in np.asarray(M)]


def _rows(M: np.ndarray, digits: int) -> str:
    return "[" + "; ".join(" ".join(row) for row in format_matrix(M, digits)) + "]"
