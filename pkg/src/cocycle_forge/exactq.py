"""Exact rational vectors, matrices, linear solving and cone feasibility.

Everything here works over ``Q`` (arbitrary precision rationals, always in
lowest terms).  No floating point is used anywhere.

    >>> A = QMatrix([[1, 1]])
    >>> solve_linear(A, QVector([1]))
    (QVector(['1', '0']), [QVector(['1', '-1'])])
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from typing import Optional, Union

from gmpy2 import mpq

from .errors import ContractError

# Rational scalar type.  gmpy2's mpq keeps lowest terms with a positive
# denominator, hashes like fractions.Fraction and is several times faster.
Q = mpq

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

Scalar = Union[int, str, "mpq"]


def to_q(value) -> mpq:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to ``Q``."""
    if isinstance(value, str):
        return parse_q(value)
    if isinstance(value, float):
        raise ContractError(f"floats are not accepted as exact rationals: {value!r}")
    if isinstance(value, bool):
        raise ContractError("booleans are not rationals")
    try:
        return Q(value)
    except (TypeError, ValueError) as exc:
        raise ContractError(f"cannot interpret {value!r} as a rational") from exc


def parse_q(text: str) -> mpq:
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ContractError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ContractError(f"zero denominator in {text!r}")
    return Q(num, den)


def format_q(x) -> str:
    x = Q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class QVector(tuple):
    """Immutable vector of rationals.

    ``+`` and ``-`` are componentwise, ``*`` takes a scalar.  Lengths must
    agree; a mismatch raises :class:`ContractError`.
    """

    __slots__ = ()

    def __new__(cls, entries: Iterable = ()):
        return tuple.__new__(cls, [to_q(e) for e in entries])

    @classmethod
    def _raw(cls, entries) -> "QVector":
        return tuple.__new__(cls, entries)

    @classmethod
    def zeros(cls, n: int) -> "QVector":
        return cls._raw([Q(0)] * n)

    @classmethod
    def unit(cls, n: int, i: int) -> "QVector":
        e = [Q(0)] * n
        e[i] = Q(1)
        return cls._raw(e)

    @property
    def dim(self) -> int:
        return len(self)

    def _check(self, other):
        if len(other) != len(self):
            raise ContractError(f"dimension mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other):
        self._check(other)
        return QVector._raw([x + y for x, y in zip(self, other)])

    def __sub__(self, other):
        self._check(other)
        return QVector._raw([x - y for x, y in zip(self, other)])

    def __neg__(self):
        return QVector._raw([-x for x in self])

    def __mul__(self, c):
        if isinstance(c, tuple):
            return NotImplemented
        c = Q(c)
        return QVector._raw([c * x for x in self])

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = Q(c)
        return QVector._raw([x / c for x in self])

    def __eq__(self, other):
        return tuple.__eq__(self, other)

    def __ne__(self, other):
        return tuple.__ne__(self, other)

    __hash__ = tuple.__hash__

    def dot(self, other) -> mpq:
        self._check(other)
        return sum((x * y for x, y in zip(self, other)), Q(0))

    def is_zero(self) -> bool:
        return not any(self)

    def to_json(self) -> list[str]:
        return [format_q(x) for x in self]

    @classmethod
    def from_json(cls, data) -> "QVector":
        if not isinstance(data, list):
            raise ContractError(f"expected a list of rationals, got {data!r}")
        return cls(data)

    def __repr__(self):
        return f"QVector({self.to_json()!r})"


def vsum(vectors: Iterable[QVector], dim: int) -> QVector:
    total = [Q(0)] * dim
    for v in vectors:
        if len(v) != dim:
            raise ContractError(f"dimension mismatch: {len(v)} vs {dim}")
        for i, x in enumerate(v):
            if x:
                total[i] += x
    return QVector._raw(total)


def combination(coeffs: Sequence, vectors: Sequence[QVector], dim: int) -> QVector:
    """Return ``sum(c * v)`` over paired coefficients and vectors."""
    total = [Q(0)] * dim
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    total[i] += c * x
    return QVector._raw(total)


class QMatrix:
    """Dense rational matrix; ``@`` applies it to a QVector or composes."""

    __slots__ = ("rows", "shape")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(QVector(r) for r in rows)
        if not rows or not rows[0]:
            raise ContractError("matrix must have at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ContractError("ragged matrix rows")
        self.rows = rows
        self.shape = (len(rows), width)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_flat(cls, nrows: int, ncols: int, flat: Sequence) -> "QMatrix":
        if len(flat) != nrows * ncols:
            raise ContractError(
                f"expected {nrows * ncols} entries for a {nrows}x{ncols} matrix, got {len(flat)}"
            )
        return cls([flat[i * ncols:(i + 1) * ncols] for i in range(nrows)])

    def flat(self) -> list[mpq]:
        return [x for r in self.rows for x in r]

    def columns(self) -> list[QVector]:
        return [QVector._raw(c) for c in zip(*self.rows)]

    def transpose(self) -> "QMatrix":
        return QMatrix(zip(*self.rows))

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.rows)

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            if other.shape[0] != self.shape[1]:
                raise ContractError(f"cannot compose {self.shape} with {other.shape}")
            cols = other.columns()
            return QMatrix([[r.dot(c) for c in cols] for r in self.rows])
        if len(other) != self.shape[1]:
            raise ContractError(f"cannot apply {self.shape} matrix to length-{len(other)} vector")
        return QVector._raw([r.dot(other) for r in self.rows])

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if other.shape != self.shape:
            raise ContractError(f"shape mismatch {self.shape} vs {other.shape}")
        return QMatrix([a + b for a, b in zip(self.rows, other.rows)])

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return self + (-1) * other

    def __mul__(self, c) -> "QMatrix":
        return QMatrix([r * c for r in self.rows])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def to_json(self) -> list[list[str]]:
        return [r.to_json() for r in self.rows]

    def __repr__(self):
        return f"QMatrix({self.to_json()!r})"


def _as_matrix(A) -> QMatrix:
    return A if isinstance(A, QMatrix) else QMatrix(A)


class LinearSystem:
    """Incremental sparse Gaussian elimination over Q.

    Equations are added one at a time as ``{column: coefficient}`` dicts with
    a right-hand side that may be a scalar or a QVector (several systems with
    the same coefficient matrix solved at once).  Each new row is reduced
    against the existing pivot rows; the pivot of a row is its smallest
    remaining column, so results are deterministic in the insertion order.
    """

    def __init__(self, ncols: int, rhs_zero=None):
        self.ncols = ncols
        self._zero = Q(0) if rhs_zero is None else rhs_zero
        self._pivots: dict[int, tuple[dict, object]] = {}
        self._order: list[int] = []
        self.inconsistent_at: Optional[int] = None
        self.n_equations = 0

    @property
    def consistent(self) -> bool:
        return self.inconsistent_at is None

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def add(self, row: dict, rhs, soft: bool = False) -> bool:
        """Add one equation; returns False if it contradicts earlier ones.

        A ``soft`` equation that is already implied by (or contradicts) the
        current rows is dropped without marking the system inconsistent.
        """
        idx = self.n_equations
        self.n_equations += 1
        row = {c: Q(v) for c, v in row.items() if v}
        rank_of = {c: i for i, c in enumerate(self._order)}
        while True:
            hits = [c for c in row if c in rank_of]
            if not hits:
                break
            c = min(hits, key=rank_of.__getitem__)
            prow, prhs = self._pivots[c]
            factor = row[c]
            for j, v in prow.items():
                nv = row.get(j, 0) - factor * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            rhs = rhs - factor * prhs
        if not row:
            if soft:
                return False
            if _nonzero(rhs):
                if self.inconsistent_at is None:
                    self.inconsistent_at = idx
                return False
            return True
        c = min(row)
        lead = row[c]
        row = {j: v / lead for j, v in row.items()}
        self._pivots[c] = (row, rhs / lead)
        self._order.append(c)
        return True

    def free_columns(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self._pivots]

    def _back_substitute(self, free_values: dict, homogeneous: bool) -> list:
        zero = Q(0) if homogeneous else self._zero
        x = [None] * self.ncols
        for c in range(self.ncols):
            if c not in self._pivots:
                x[c] = free_values.get(c, zero)
        # A pivot row only mentions its own pivot, free columns and pivots added later.
        for c in reversed(self._order):
            row, rhs = self._pivots[c]
            val = zero if homogeneous else rhs
            for j, v in row.items():
                if j != c:
                    val = val - v * x[j]
            x[c] = val
        return x

    def solution(self) -> Optional[list]:
        """Particular solution with every free column set to zero."""
        if not self.consistent:
            return None
        return self._back_substitute({}, homogeneous=False)

    def kernel_basis(self) -> list[QVector]:
        basis = []
        for fc in self.free_columns():
            x = self._back_substitute({fc: Q(1)}, homogeneous=True)
            lead = next(v for v in x if v)
            basis.append(QVector._raw([v / lead for v in x]))
        return basis


def _nonzero(x) -> bool:
    if isinstance(x, tuple):
        return any(x)
    return bool(x)


def solve_linear(A, b) -> Optional[tuple[QVector, list[QVector]]]:
    """Solve ``A x = b`` exactly.

    Returns ``(particular, kernel_basis)`` or ``None`` when inconsistent.
    The particular solution sets free variables to zero; each kernel vector
    is scaled so that its first nonzero entry is 1.
    """
    A = _as_matrix(A)
    b = b if isinstance(b, QVector) else QVector(b)
    m, n = A.shape
    if len(b) != m:
        raise ContractError(f"rhs length {len(b)} does not match {m} rows")
    system = LinearSystem(n)
    for row, rhs in zip(A.rows, b):
        system.add({j: v for j, v in enumerate(row) if v}, rhs)
    x = system.solution()
    if x is None:
        return None
    return QVector._raw(x), system.kernel_basis()


def _check_dims(vectors: Sequence[QVector], d: int):
    for v in vectors:
        if len(v) != d:
            raise ContractError(f"dimension mismatch: expected {d}, got {len(v)}")


def in_span(G: Sequence[QVector], s: QVector) -> Optional[QVector]:
    """Coefficients ``c`` (any sign) with ``sum(c_i G_i) == s``, or None."""
    s = s if isinstance(s, QVector) else QVector(s)
    d = len(s)
    _check_dims(G, d)
    if not G:
        return QVector() if s.is_zero() else None
    system = LinearSystem(len(G))
    for i in range(d):
        system.add({j: g[i] for j, g in enumerate(G) if g[i]}, s[i])
    x = system.solution()
    return None if x is None else QVector._raw(x)


def cone_feasible(
    G: Sequence[QVector], x: QVector, extra_ray: Optional[QVector] = None
) -> Optional[tuple[list, Optional[mpq]]]:
    """Find ``lambda >= 0`` (and ``beta >= 0``) with ``sum lambda_i G_i + beta*ray == x``.

    Exact phase-one simplex with one artificial variable per coordinate and
    Bland's rule: the entering variable is the lowest-index column (input
    order, extra ray last) with negative reduced cost, ties in the ratio test
    go to the lowest-index basic variable.  Returns ``(lambda, beta)`` or
    None if ``x`` is not in the cone.  ``beta`` is None when no ray is given.
    """
    x = x if isinstance(x, QVector) else QVector(x)
    d = len(x)
    _check_dims(G, d)
    cols = list(G)
    if extra_ray is not None:
        _check_dims([extra_ray], d)
        cols.append(extra_ray)
    n = len(cols)

    if x.is_zero():
        return [Q(0)] * len(G), (Q(0) if extra_ray is not None else None)

    zero = Q(0)
    # Tableau rows: structural columns 0..n-1, artificials n..n+d-1, rhs last.
    tab = []
    for i in range(d):
        sign = -1 if x[i] < 0 else 1
        row = [sign * c[i] for c in cols] + [zero] * d + [sign * x[i]]
        row[n + i] = Q(1)
        tab.append(row)
    basis = [n + i for i in range(d)]
    width = n + d
    # Reduced costs for minimising the sum of artificials.
    cost = [-sum((tab[i][j] for i in range(d)), zero) for j in range(n)] + [zero] * d
    obj = -sum((tab[i][width] for i in range(d)), zero)

    while True:
        enter = next((j for j in range(n) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(d):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            # Unbounded direction cannot happen for phase one; guard anyway.
            break
        prow = tab[leave]
        piv = prow[enter]
        prow = [v / piv for v in prow]
        tab[leave] = prow
        for i in range(d):
            if i != leave:
                a = tab[i][enter]
                if a:
                    r = tab[i]
                    tab[i] = [r[j] - a * prow[j] for j in range(width + 1)]
        a = cost[enter]
        cost = [cost[j] - a * prow[j] for j in range(width)]
        obj = obj - a * prow[width]
        basis[leave] = enter

    if obj != 0:
        return None
    values = [zero] * n
    for i, j in enumerate(basis):
        if j < n:
            values[j] = tab[i][width]
    if extra_ray is not None:
        return values[:-1], values[-1]
    return values, None
