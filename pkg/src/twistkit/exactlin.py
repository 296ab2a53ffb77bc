"""Exact dense linear algebra over the integers and rationals.

Everything here works with :class:`fractions.Fraction` entries.  Matrices are
immutable; every operation returns a new :class:`Mat`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Mat",
    "SNFResult",
    "snf",
    "rank_kernel",
    "solve",
    "rref",
    "to_fraction",
    "format_fraction",
]


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: silently accepting them would smuggle rounding into
    an exact computation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, float):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot use {x!r} ({type(x).__name__}) as an exact entry")


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Mat:
    """Immutable dense matrix with exact rational entries."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, data: Iterable[Iterable] = (), shape: tuple[int, int] | None = None):
        rows = tuple(tuple(to_fraction(x) for x in row) for row in data)
        if shape is None:
            if not rows:
                raise ValueError("an empty matrix needs an explicit shape")
            shape = (len(rows), len(rows[0]))
        r, c = shape
        if len(rows) != r or any(len(row) != c for row in rows):
            raise ValueError(f"entries do not match shape {shape}")
        self.rows, self.cols, self._data = r, c, rows
        self._hash = None

    @classmethod
    def _raw(cls, data: tuple, r: int, c: int) -> "Mat":
        m = object.__new__(cls)
        m.rows, m.cols, m._data, m._hash = r, c, data, None
        return m

    @classmethod
    def zeros(cls, r: int, c: int) -> "Mat":
        z = Fraction(0)
        return cls._raw(tuple((z,) * c for _ in range(r)), r, c)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        one, z = Fraction(1), Fraction(0)
        return cls._raw(tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def diag(cls, entries: Sequence) -> "Mat":
        n = len(entries)
        z = Fraction(0)
        vals = [to_fraction(e) for e in entries]
        return cls._raw(tuple(tuple(vals[i] if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def column(cls, vec: Sequence) -> "Mat":
        return cls([[v] for v in vec], shape=(len(vec), 1))

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "Mat":
        data = [[to_fraction(col[i]) for col in cols] for i in range(nrows)]
        return cls(data, shape=(nrows, len(cols)))

    @classmethod
    def unit(cls, r: int, c: int, i: int, j: int, value=1) -> "Mat":
        rows = [[0] * c for _ in range(r)]
        rows[i][j] = value
        return cls(rows, shape=(r, c))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Mat"]]) -> "Mat":
        """Assemble a block matrix; every block row must share heights."""
        out = []
        for brow in blocks:
            h = brow[0].rows
            if any(b.rows != h for b in brow):
                raise ValueError("block row heights differ")
            for i in range(h):
                line: list = []
                for b in brow:
                    line.extend(b._data[i])
                out.append(tuple(line))
        width = sum(b.cols for b in blocks[0]) if blocks else 0
        if any(len(row) != width for row in out):
            raise ValueError("block column widths differ")
        return cls._raw(tuple(out), len(out), width)

    # -- access ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Mat":
        data = tuple(tuple(self._data[i][j] for j in cols) for i in rows)
        return Mat._raw(data, len(rows), len(cols))

    # -- predicates -----------------------------------------------------
    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self._data for x in r)

    def is_zero(self) -> bool:
        return not any(x for r in self._data for x in r)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def nonzero_entries(self):
        for i, r in enumerate(self._data):
            for j, x in enumerate(r):
                if x:
                    yield i, j, x

    # -- arithmetic -----------------------------------------------------
    def _check_same(self, other: "Mat") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Mat") -> "Mat":
        self._check_same(other)
        data = tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        return Mat._raw(data, self.rows, self.cols)

    def __sub__(self, other: "Mat") -> "Mat":
        self._check_same(other)
        data = tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        return Mat._raw(data, self.rows, self.cols)

    def __neg__(self) -> "Mat":
        return Mat._raw(tuple(tuple(-a for a in r) for r in self._data), self.rows, self.cols)

    def scale(self, c) -> "Mat":
        c = to_fraction(c)
        return Mat._raw(tuple(tuple(c * a for a in r) for r in self._data), self.rows, self.cols)

    def __rmul__(self, c) -> "Mat":
        return self.scale(c)

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        z = Fraction(0)
        ocols = other.cols
        odata = other._data
        out = []
        for r in self._data:
            acc = [z] * ocols
            for k, a in enumerate(r):
                if a:
                    orow = odata[k]
                    for j in range(ocols):
                        b = orow[j]
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return Mat._raw(tuple(out), self.rows, ocols)

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        v = [to_fraction(x) for x in vec]
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), Fraction(0)) for r in self._data)

    @property
    def T(self) -> "Mat":
        if not self.rows:
            return Mat.zeros(self.cols, 0)
        return Mat._raw(tuple(zip(*self._data)), self.cols, self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, self._data))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_fraction(x) for x in r) for r in self._data)
        return f"Mat({self.rows}x{self.cols}: [{body}])"

    # -- derived quantities --------------------------------------------
    def rank(self) -> int:
        return len(rref(self)[1])

    def det(self) -> Fraction:
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        a = [list(r) for r in self._data]
        n = self.rows
        det = Fraction(1)
        for c in range(n):
            piv = next((i for i in range(c, n) if a[i][c]), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            p = a[c][c]
            det *= p
            for i in range(c + 1, n):
                if a[i][c]:
                    f = a[i][c] / p
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return det

    def inverse(self) -> "Mat":
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        aug = Mat.block([[self, Mat.identity(n)]])
        r, piv = rref(aug)
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return r.submatrix(range(n), range(n, 2 * n))

    # -- serialization --------------------------------------------------
    def to_json(self) -> list[list[str]]:
        return [[format_fraction(x) for x in r] for r in self._data]

    @classmethod
    def from_json(cls, rows, shape: tuple[int, int] | None = None) -> "Mat":
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            raise ValueError("a matrix must be a list of rows")
        if not rows and shape is None:
            raise ValueError("an empty matrix needs an explicit shape")
        if shape is not None and not rows:
            return cls.zeros(*shape)
        return cls(rows, shape=shape)


def rref(m: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form with leftmost pivots, plus the pivot columns."""
    a = [list(r) for r in m._data]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        piv = next((i for i in range(r, m.rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        if p != 1:
            a[r] = [x / p for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return Mat._raw(tuple(tuple(row) for row in a), m.rows, m.cols), pivots


def rank_kernel(m: Mat) -> tuple[int, list[tuple[Fraction, ...]]]:
    """Rank of ``m`` over Q and a basis of its right kernel.

    The basis has one vector per free column of the reduced echelon form,
    with a 1 in that column.
    """
    r, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -r[i, f]
        basis.append(tuple(v))
    return len(pivots), basis


def solve(m: Mat, b: Sequence) -> tuple[Fraction, ...] | None:
    """A solution of ``m x = b`` (free variables set to 0), or None."""
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
    aug = Mat.block([[m, Mat.column(b)]]) if m.rows else Mat.zeros(0, m.cols + 1)
    r, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = [Fraction(0)] * m.cols
    for i, pc in enumerate(pivots):
        x[pc] = r[i, m.cols]
    return tuple(x)


@dataclass(frozen=True)
class SNFResult:
    U: Mat
    S: Mat
    V: Mat

    @property
    def invariant_factors(self) -> list[int]:
        n = min(self.S.rows, self.S.cols)
        return [int(self.S[i, i]) for i in range(n) if self.S[i, i]]


def snf(m: Mat) -> SNFResult:
    """Smith normal form ``U m V = S`` with unimodular ``U`` and ``V``.

    Pivots are chosen by minimal absolute value, which keeps coefficient
    growth modest on the small matrices this package deals with.
    """
    if not m.is_integral:
        raise ValueError("Smith normal form needs an integral matrix")
    rows, cols = m.rows, m.cols
    a = [[int(x) for x in r] for r in m._data]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row_dst += k row_src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, k):  # col_dst += k col_src
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    x = a[i][j]
                    if x and (best is None or abs(x) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if best is None:
            break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]

    return SNFResult(
        U=Mat(u, shape=(rows, rows)),
        S=Mat(a, shape=(rows, cols)),
        V=Mat(v, shape=(cols, cols)),
    )

