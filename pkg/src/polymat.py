"""
Polynomial Matrix Module
Exact univariate polynomials over the rationals and dense polynomial
matrices, with the normal forms every synthesis layer is built on:
Hermite (row echelon) form, Smith form, column compression, left
division and unimodular completion.

The indeterminate stands for the differential operator d/dt and is
rendered as ``x``.
"""

import logging
import math
import re
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import sympy as sp
from sympy import QQ

from limits import load_limits

logger = logging.getLogger(__name__)

XI = sp.Symbol("x")
DEGREE_OF_ZERO = -math.inf

# Wire coefficients: integers or reduced-looking fractions, no floats
_COEFF_PATTERN = re.compile(r"^-?\d+(/[1-9]\d*)?$")

_degree_cap = load_limits().max_degree


class PolyMatrixError(ValueError):
    """Base class for polynomial matrix failures"""


class DimensionError(PolyMatrixError):
    """Operand shapes do not agree"""


class DegreeOverflowError(PolyMatrixError):
    """An entry grew past the configured degree cap"""


class NotFullRowRankError(PolyMatrixError):
    """Operation requires a full row rank matrix"""


class NotUnimodularError(PolyMatrixError):
    """Matrix has no polynomial inverse"""


class WireFormatError(PolyMatrixError):
    """Coefficient or matrix literal could not be parsed"""


def set_degree_cap(cap: int) -> None:
    """Change the degree guard for the rest of the process"""
    global _degree_cap
    if cap < 1:
        raise ValueError(f"degree cap must be positive, got {cap}")
    logger.debug(f"Degree cap set to {cap}")
    _degree_cap = cap


def degree_cap() -> int:
    return _degree_cap


@contextmanager
def degree_limit(cap: int) -> Iterator[int]:
    """Apply a degree cap for the duration of one call, then restore the previous one"""
    previous = _degree_cap
    set_degree_cap(cap)
    try:
        yield cap
    finally:
        set_degree_cap(previous)


def _rational(value) -> sp.Rational:
    if isinstance(value, str):
        text = value.strip()
        if not _COEFF_PATTERN.match(text):
            raise WireFormatError(f"bad coefficient literal {value!r}")
        return sp.Rational(text)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        raise WireFormatError(f"floating point coefficient {value!r} is not exact")
    return sp.Rational(value)


class Poly:
    """Immutable polynomial in x with rational coefficients"""

    __slots__ = ("_p",)

    def __init__(self, p: sp.Poly):
        self._p = p

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return _ZERO

    @classmethod
    def one(cls) -> "Poly":
        return _ONE

    @classmethod
    def const(cls, value) -> "Poly":
        return cls(sp.Poly(_rational(value), XI, domain=QQ))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> "Poly":
        """Build from coefficients in ascending degree order"""
        values = [_rational(c) for c in coeffs]
        while values and values[-1] == 0:
            values.pop()
        if not values:
            return _ZERO
        return cls(sp.Poly.from_list(values[::-1], XI, domain=QQ))

    @classmethod
    def from_expr(cls, expr) -> "Poly":
        return cls(sp.Poly(expr, XI, domain=QQ))

    @classmethod
    def from_wire(cls, coeffs: Sequence[str]) -> "Poly":
        if not isinstance(coeffs, (list, tuple)):
            raise WireFormatError(f"polynomial must be a list of coefficients, got {coeffs!r}")
        for c in coeffs:
            if not isinstance(c, str):
                raise WireFormatError(f"coefficient {c!r} must be a string")
        return cls.from_coeffs(coeffs)

    # -- inspection ---------------------------------------------------

    @property
    def coeffs(self) -> Tuple[sp.Rational, ...]:
        """Coefficients in ascending degree order, empty for zero"""
        if self._p.is_zero:
            return ()
        return tuple(reversed(self._p.all_coeffs()))

    @property
    def degree(self):
        if self._p.is_zero:
            return DEGREE_OF_ZERO
        return self._p.degree()

    @property
    def lead(self) -> sp.Rational:
        return self._p.LC()

    @property
    def is_zero(self) -> bool:
        return self._p.is_zero

    @property
    def is_unit(self) -> bool:
        """Nonzero constant"""
        return not self._p.is_zero and self._p.degree() == 0

    def to_sympy(self) -> sp.Poly:
        return self._p

    def to_wire(self) -> List[str]:
        return [str(c) for c in self.coeffs]

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other) -> "Poly":
        return Poly(self._p + _as_poly(other)._p)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        return Poly(self._p - _as_poly(other)._p)

    def __rsub__(self, other) -> "Poly":
        return Poly(_as_poly(other)._p - self._p)

    def __mul__(self, other) -> "Poly":
        return Poly(self._p * _as_poly(other)._p)

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return Poly(-self._p)

    def __divmod__(self, other) -> Tuple["Poly", "Poly"]:
        divisor = _as_poly(other)
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q, r = self._p.div(divisor._p)
        return Poly(q), Poly(r)

    def exact_quotient(self, other) -> Optional["Poly"]:
        """self / other when the division is exact, else None"""
        divisor = _as_poly(other)
        if divisor.is_zero:
            return _ZERO if self.is_zero else None
        q, r = divmod(self, divisor)
        return q if r.is_zero else None

    def divides(self, other) -> bool:
        return _as_poly(other).exact_quotient(self) is not None

    def monic(self) -> "Poly":
        if self._p.is_zero:
            return self
        return Poly(self._p.monic())

    # -- protocol -----------------------------------------------------

    def __eq__(self, other) -> bool:
        try:
            return self.coeffs == _as_poly(other).coeffs
        except (TypeError, ValueError, sp.PolynomialError):
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __str__(self) -> str:
        if self._p.is_zero:
            return "0"
        return sp.sstr(self._p.as_expr()).replace("**", "^")

    def __repr__(self) -> str:
        return f"Poly({self})"


_ZERO = Poly(sp.Poly(0, XI, domain=QQ))
_ONE = Poly(sp.Poly(1, XI, domain=QQ))


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    if isinstance(value, sp.Basic) and not value.is_Number:
        return Poly.from_expr(value)
    return Poly.const(value)


def _guard(p: Poly) -> Poly:
    if p.degree > _degree_cap:
        raise DegreeOverflowError(f"degree {p.degree} exceeds cap {_degree_cap}")
    return p


# ---------------------------------------------------------------------------
# Bezout identities
# ---------------------------------------------------------------------------

def poly_gcd_bezout(a: Poly, b: Poly) -> Tuple[Poly, Poly, Poly]:
    """
    Monic gcd with Bezout coefficients

    Returns:
        (g, s, t) with s*a + t*b == g; gcd(0, 0) is (0, 0, 0)
    """
    a, b = _as_poly(a), _as_poly(b)
    if a.is_zero and b.is_zero:
        return _ZERO, _ZERO, _ZERO
    if b.is_zero:
        return a.monic(), Poly.const(sp.Integer(1) / a.lead), _ZERO
    if a.is_zero:
        return b.monic(), _ZERO, Poly.const(sp.Integer(1) / b.lead)
    s, t, h = a.to_sympy().gcdex(b.to_sympy())
    return Poly(h), Poly(s), Poly(t)


def col_gcd_bezout(column: Sequence[Poly]) -> Tuple[Poly, Tuple[Poly, ...]]:
    """
    Monic gcd of a column with a row vector v such that v . column == gcd
    """
    g = _ZERO
    v: List[Poly] = []
    for entry in column:
        g, s, t = poly_gcd_bezout(g, entry)
        v = [s * vi for vi in v] + [t]
    return g, tuple(v)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

class PolyMatrix:
    """Dense rows x cols matrix of Poly, stored row-major"""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: int, cols: int, entries: Sequence[Poly]):
        if rows < 0 or cols < 0:
            raise DimensionError(f"negative shape {rows}x{cols}")
        entries = tuple(_as_poly(e) for e in entries)
        if len(entries) != rows * cols:
            raise DimensionError(f"{len(entries)} entries do not fill a {rows}x{cols} matrix")
        for e in entries:
            _guard(e)
        self.rows = rows
        self.cols = cols
        self._entries = entries

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PolyMatrix":
        return cls(rows, cols, [_ZERO] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls(n, n, [_ONE if i == j else _ZERO for i in range(n) for j in range(n)])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "PolyMatrix":
        """Build from nested rows; cols is required when there are no rows"""
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionError("column count needed for a matrix without rows")
            cols = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != cols:
                raise DimensionError(f"row {i} has {len(r)} entries, expected {cols}")
        return cls(len(rows), cols, [e for r in rows for e in r])

    @classmethod
    def column_vector(cls, entries: Sequence) -> "PolyMatrix":
        return cls(len(entries), 1, list(entries))

    @classmethod
    def from_wire(cls, data, cols: Optional[int] = None) -> "PolyMatrix":
        if not isinstance(data, (list, tuple)):
            raise WireFormatError("matrix must be a list of rows")
        rows = []
        for i, row in enumerate(data):
            if not isinstance(row, (list, tuple)):
                raise WireFormatError(f"row {i} must be a list of polynomials")
            rows.append([Poly.from_wire(p) for p in row])
        return cls.from_rows(rows, cols)

    @staticmethod
    def vstack(*blocks: "PolyMatrix") -> "PolyMatrix":
        if not blocks:
            raise DimensionError("vstack needs at least one block")
        cols = blocks[0].cols
        for b in blocks:
            if b.cols != cols:
                raise DimensionError(f"vstack of {b.cols} and {cols} columns")
        return PolyMatrix(sum(b.rows for b in blocks), cols,
                          [e for b in blocks for e in b._entries])

    @staticmethod
    def hstack(*blocks: "PolyMatrix") -> "PolyMatrix":
        if not blocks:
            raise DimensionError("hstack needs at least one block")
        rows = blocks[0].rows
        for b in blocks:
            if b.rows != rows:
                raise DimensionError(f"hstack of {b.rows} and {rows} rows")
        entries = []
        for i in range(rows):
            for b in blocks:
                entries.extend(b.row(i))
        return PolyMatrix(rows, sum(b.cols for b in blocks), entries)

    # -- access -------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, key: Tuple[int, int]) -> Poly:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
        return self._entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Poly, ...]:
        return self._entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Tuple[Poly, ...]:
        return tuple(self._entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> List[List[Poly]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def select_rows(self, indices: Iterable[int]) -> "PolyMatrix":
        indices = list(indices)
        return PolyMatrix(len(indices), self.cols, [e for i in indices for e in self.row(i)])

    def select_cols(self, indices: Iterable[int]) -> "PolyMatrix":
        indices = list(indices)
        return PolyMatrix(self.rows, len(indices),
                          [self[i, j] for i in range(self.rows) for j in indices])

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(self.cols, self.rows,
                          [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    # -- arithmetic ---------------------------------------------------

    def _check_same_shape(self, other: "PolyMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionError(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check_same_shape(other)
        return PolyMatrix(self.rows, self.cols, [a + b for a, b in zip(self._entries, other._entries)])

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check_same_shape(other)
        return PolyMatrix(self.rows, self.cols, [a - b for a, b in zip(self._entries, other._entries)])

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, [-a for a in self._entries])

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        entries = []
        for i in range(self.rows):
            row = self.row(i)
            for j in range(other.cols):
                acc = _ZERO
                for k in range(self.cols):
                    if not row[k].is_zero:
                        b = other[k, j]
                        if not b.is_zero:
                            acc = acc + row[k] * b
                entries.append(acc)
        return PolyMatrix(self.rows, other.cols, entries)

    # -- structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(e.is_zero for e in self._entries)

    def zero_columns(self) -> Tuple[int, ...]:
        return tuple(j for j in range(self.cols) if all(e.is_zero for e in self.col(j)))

    def nonzero_rows(self) -> "PolyMatrix":
        keep = [i for i in range(self.rows) if not all(e.is_zero for e in self.row(i))]
        return self.select_rows(keep)

    def max_degree(self):
        return max((e.degree for e in self._entries), default=DEGREE_OF_ZERO)

    def to_wire(self) -> List[List[List[str]]]:
        return [[p.to_wire() for p in self.row(i)] for i in range(self.rows)]

    def pretty(self) -> str:
        if self.rows == 0:
            return f"[] (0x{self.cols})"
        return "\n".join("[" + ", ".join(str(p) for p in self.row(i)) + "]" for i in range(self.rows))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._entries))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(p) for p in self.row(i)) for i in range(self.rows))
        return f"PolyMatrix({self.rows}x{self.cols}: [{body}])"


def block_diag(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    top = PolyMatrix.hstack(a, PolyMatrix.zeros(a.rows, b.cols))
    bottom = PolyMatrix.hstack(PolyMatrix.zeros(b.rows, a.cols), b)
    return PolyMatrix.vstack(top, bottom)


# ---------------------------------------------------------------------------
# Row operations on mutable working arrays
# ---------------------------------------------------------------------------

def _axpy(target: List[Poly], source: List[Poly], factor: Poly) -> List[Poly]:
    """target + factor * source"""
    if factor.is_zero:
        return target
    return [t if s.is_zero else _guard(t + factor * s) for t, s in zip(target, source)]


def _echelon(rows: List[List[Poly]], n_cols: int) -> int:
    """
    Reduce rows in place to Hermite form on their first n_cols entries;
    trailing entries (an appended identity) ride along.

    Returns:
        number of pivots found
    """
    m = len(rows)
    pivot_row = 0
    for j in range(n_cols):
        if pivot_row == m:
            break
        if all(rows[i][j].is_zero for i in range(pivot_row, m)):
            continue

        while True:
            candidates = [i for i in range(pivot_row, m) if not rows[i][j].is_zero]
            best = min(candidates, key=lambda i: (rows[i][j].degree, i))
            rows[pivot_row], rows[best] = rows[best], rows[pivot_row]
            pivot = rows[pivot_row][j]
            cleared = True
            for i in range(pivot_row + 1, m):
                if rows[i][j].is_zero:
                    continue
                q, _ = divmod(rows[i][j], pivot)
                rows[i] = _axpy(rows[i], rows[pivot_row], -q)
                if not rows[i][j].is_zero:
                    cleared = False
            if cleared:
                break

        scale = Poly.const(sp.Integer(1) / rows[pivot_row][j].lead)
        rows[pivot_row] = [e * scale for e in rows[pivot_row]]
        pivot = rows[pivot_row][j]
        for i in range(pivot_row):
            if rows[i][j].is_zero:
                continue
            q, _ = divmod(rows[i][j], pivot)
            rows[i] = _axpy(rows[i], rows[pivot_row], -q)
        pivot_row += 1
    return pivot_row


def hermite_form(M: PolyMatrix) -> Tuple[PolyMatrix, PolyMatrix]:
    """
    Row Hermite form H = U @ M with U unimodular

    Pivots are monic and entries above a pivot have lower degree than it.
    Zero rows sit at the bottom.
    """
    m, n = M.shape
    work = [list(M.row(i)) + [_ONE if k == i else _ZERO for k in range(m)] for i in range(m)]
    _echelon(work, n)
    H = PolyMatrix(m, n, [e for r in work for e in r[:n]])
    U = PolyMatrix(m, m, [e for r in work for e in r[n:]])
    return H, U


def rank(M: PolyMatrix) -> int:
    """Rank over the field of rational functions"""
    if M.rows == 0 or M.cols == 0:
        return 0
    work = M.to_rows() if M.rows <= M.cols else M.transpose().to_rows()
    return _echelon(work, len(work[0]))


def is_unimodular(M: PolyMatrix) -> bool:
    if M.rows != M.cols:
        return False
    return determinant(M).is_unit or M.rows == 0


def determinant(M: PolyMatrix) -> Poly:
    """Fraction-free Bareiss elimination"""
    n = M.rows
    if M.cols != n:
        raise DimensionError(f"determinant of non-square {M.shape} matrix")
    if n == 0:
        return _ONE
    a = M.to_rows()
    sign = 1
    prev = _ONE
    for k in range(n - 1):
        if a[k][k].is_zero:
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero), None)
            if swap is None:
                return _ZERO
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num.exact_quotient(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def inverse_unimodular(U: PolyMatrix) -> PolyMatrix:
    if U.rows != U.cols:
        raise NotUnimodularError(f"{U.shape} matrix is not square")
    H, W = hermite_form(U)
    if H != PolyMatrix.identity(U.rows):
        raise NotUnimodularError("matrix has no polynomial inverse")
    return W


def _min_degree_entry(a: List[List[Poly]], t: int, m: int, n: int) -> Optional[Tuple[int, int]]:
    best = None
    best_key = None
    for i in range(t, m):
        for j in range(t, n):
            if a[i][j].is_zero:
                continue
            key = (a[i][j].degree, i, j)
            if best_key is None or key < best_key:
                best, best_key = (i, j), key
    return best


def smith_form(M: PolyMatrix) -> Tuple[PolyMatrix, PolyMatrix, PolyMatrix]:
    """
    Smith form M = U @ D @ V

    D has monic diagonal entries d_1 | d_2 | ... followed by zeros; U and V
    are unimodular. U and V are updated with the inverse of each elementary
    operation applied to the working copy of M.
    """
    m, n = M.shape
    a = M.to_rows()
    u = PolyMatrix.identity(m).to_rows()
    v = PolyMatrix.identity(n).to_rows()

    for t in range(min(m, n)):
        pos = None
        while True:
            pos = _min_degree_entry(a, t, m, n)
            if pos is None:
                break
            i, j = pos
            if i != t:
                a[t], a[i] = a[i], a[t]
                for r in u:
                    r[t], r[i] = r[i], r[t]
            if j != t:
                for r in a:
                    r[t], r[j] = r[j], r[t]
                v[t], v[j] = v[j], v[t]

            pivot = a[t][t]
            cleared = True
            for i in range(t + 1, m):
                if a[i][t].is_zero:
                    continue
                q, _ = divmod(a[i][t], pivot)
                a[i] = _axpy(a[i], a[t], -q)
                for r in u:
                    r[t] = _guard(r[t] + q * r[i])
                if not a[i][t].is_zero:
                    cleared = False
            for j in range(t + 1, n):
                if a[t][j].is_zero:
                    continue
                q, _ = divmod(a[t][j], pivot)
                for r in a:
                    r[j] = _guard(r[j] - q * r[t])
                v[t] = _axpy(v[t], v[j], q)
                if not a[t][j].is_zero:
                    cleared = False
            if not cleared:
                continue

            bad_row = next((i for i in range(t + 1, m)
                            if any(not pivot.divides(a[i][j]) for j in range(t + 1, n))), None)
            if bad_row is None:
                break
            a[t] = _axpy(a[t], a[bad_row], _ONE)
            for r in u:
                r[bad_row] = _guard(r[bad_row] - r[t])

        if pos is None:
            break
        lead = a[t][t].lead
        a[t][t] = a[t][t].monic()
        factor = Poly.const(lead)
        for r in u:
            r[t] = r[t] * factor

    D = PolyMatrix(m, n, [e for r in a for e in r])
    return (PolyMatrix(m, m, [e for r in u for e in r]), D,
            PolyMatrix(n, n, [e for r in v for e in r]))


def column_compress(R: PolyMatrix) -> Tuple[PolyMatrix, PolyMatrix]:
    """
    Unimodular W with R @ W == [D 0], D square nonsingular

    Raises:
        NotFullRowRankError: R has dependent rows
    """
    r = R.rows
    if rank(R) != r:
        raise NotFullRowRankError(f"{R.shape} matrix does not have full row rank")
    H, U = hermite_form(R.transpose())
    return U.transpose(), H.select_rows(range(r)).transpose()


def solve_left_division(A: PolyMatrix, B: PolyMatrix) -> Optional[PolyMatrix]:
    """
    Polynomial X with X @ A == B, or None when the rows of B leave the
    row module of A
    """
    if A.cols != B.cols:
        raise DimensionError(f"left division of {B.shape} by {A.shape}")
    H, U = hermite_form(A)
    pivots = []
    for i in range(H.rows):
        row = H.row(i)
        j = next((k for k, e in enumerate(row) if not e.is_zero), None)
        if j is None:
            break
        pivots.append(j)
    r = len(pivots)

    coefficients = []
    for b in range(B.rows):
        residual = list(B.row(b))
        y = []
        for i, j in enumerate(pivots):
            q, _ = divmod(residual[j], H[i, j])
            y.append(q)
            residual = _axpy(residual, list(H.row(i)), -q)
        if any(not e.is_zero for e in residual):
            logger.debug(f"Row {b} of the dividend is outside the row module")
            return None
        coefficients.append(y)

    Y = PolyMatrix.from_rows(coefficients, cols=r)
    return Y @ U.select_rows(range(r))


def unimodular_completion(U1: PolyMatrix) -> Optional[PolyMatrix]:
    """
    U2 such that [U1; U2] is unimodular, or None when U1 is not left prime
    """
    r, n = U1.shape
    if r > n:
        raise DimensionError(f"cannot complete a {r}x{n} matrix")
    _, D, V = smith_form(U1)
    for i in range(r):
        if D[i, i] != _ONE:
            logger.debug(f"Invariant factor {i} is {D[i, i]}, not left prime")
            return None
    return V.select_rows(range(r, n))
