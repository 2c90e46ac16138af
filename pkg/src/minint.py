"""
Minimal Interaction Module
Finds a controller C + V P, equivalent to C, with as many identically
zero columns as possible. Each zero column is a control variable the
controller never needs to read or drive.

The search walks increasing index strings over {1..c} in depth-first
preorder. A node s means "columns in s are nullified, in order"; every
node keeps the residual (C, P) left after its last nullification, so a
child only costs one column reduction.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from behavior import irrelevant_columns
from control import (
    STATUS_NOT_REGULARLY_IMPLEMENTABLE,
    STATUS_SOLVED,
    ControlProblem,
    SynthesisResult,
    bootstrap_regular_controller,
    certify,
    control_manifest,
    parametrize,
)
from limits import load_limits
from polymat import (
    DimensionError,
    Poly,
    PolyMatrix,
    hermite_form,
    is_unimodular,
    rank,
    solve_left_division,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Index strings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SearchString:
    """Strictly increasing symbols from {1..c}; tuple order is DFS preorder"""

    symbols: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        for a, b in zip(self.symbols, self.symbols[1:]):
            if a >= b:
                raise ValueError(f"symbols must increase, got {self.symbols}")
        if self.symbols and self.symbols[0] < 1:
            raise ValueError(f"symbols start at 1, got {self.symbols}")

    def __len__(self) -> int:
        return len(self.symbols)

    def extend(self, symbol: int) -> "SearchString":
        return SearchString(self.symbols + (symbol,))

    def is_prefix_of(self, other: "SearchString") -> bool:
        return other.symbols[:len(self.symbols)] == self.symbols

    def columns(self) -> Tuple[int, ...]:
        """0-based column indices"""
        return tuple(s - 1 for s in self.symbols)

    def __str__(self) -> str:
        if not self.symbols:
            return "ε"
        sep = "" if self.symbols[-1] < 10 else "."
        return sep.join(str(s) for s in self.symbols)


EPSILON = SearchString()


def string_order(s: SearchString, t: SearchString) -> int:
    """-1, 0 or 1; a proper prefix sorts before its extensions"""
    return (s > t) - (s < t)


def all_strings(c: int) -> List[SearchString]:
    return sorted(SearchString(combo)
                  for k in range(c + 1)
                  for combo in combinations(range(1, c + 1), k))


def terminal_strings(c: int) -> List[SearchString]:
    return [s for s in all_strings(c) if s.symbols and s.symbols[-1] == c]


def prefixes(s: SearchString) -> Tuple[SearchString, ...]:
    return tuple(SearchString(s.symbols[:k]) for k in range(len(s) + 1))


def last_symbol(s: SearchString) -> int:
    if not s.symbols:
        raise ValueError("the empty string has no last symbol")
    return s.symbols[-1]


def drop_last(s: SearchString) -> SearchString:
    if not s.symbols:
        raise ValueError("cannot shorten the empty string")
    return SearchString(s.symbols[:-1])


def next_terminal(s: SearchString, k: int, c: int) -> SearchString:
    """Smallest terminal string after s longer than k, or the empty string"""
    return min((t for t in terminal_strings(c) if t > s and len(t) > k), default=EPSILON)


def first_new_prefix(s: SearchString, target: SearchString) -> Optional[SearchString]:
    """Smallest prefix of target that is not a prefix of s"""
    seen = set(prefixes(s))
    return min((p for p in prefixes(target) if p not in seen), default=None)


def skip_subtree(s: SearchString, c: int) -> Optional[SearchString]:
    """First string after s outside the subtree rooted at s"""
    return min((t for t in all_strings(c) if t > s and not s.is_prefix_of(t)), default=None)


def string_nav(kind: str, *args, c: Optional[int] = None):
    navigators: Dict[str, Callable] = {
        "pre": prefixes,
        "plus": last_symbol,
        "minus": drop_last,
        "ket": lambda s, k: next_terminal(s, k, c),
        "down": first_new_prefix,
        "ceil": lambda s: skip_subtree(s, c),
    }
    if kind not in navigators:
        raise ValueError(f"unknown navigation {kind!r}, expected one of {sorted(navigators)}")
    if kind in ("ket", "ceil") and c is None:
        raise ValueError(f"{kind} needs the alphabet size c")
    return navigators[kind](*args)


# ---------------------------------------------------------------------------
# Column nullification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullifyResult:
    C_tilde: PolyMatrix
    P2_tilde: PolyMatrix
    V1_tilde: PolyMatrix
    U: PolyMatrix
    fail: bool
    skip: bool


def _check_shapes(C: PolyMatrix, P: PolyMatrix, col: int) -> None:
    if C.cols != P.cols:
        raise DimensionError(f"C has {C.cols} columns but P has {P.cols}")
    if not 0 <= col < C.cols:
        raise DimensionError(f"column {col} outside 0..{C.cols - 1}")


def _is_zero_column(M: PolyMatrix, col: int) -> bool:
    return all(e.is_zero for e in M.col(col))


def _reduce_column(C: PolyMatrix, P: PolyMatrix, col: int) -> NullifyResult:
    """
    Zero column col of C by adding a multiple of one row of P

    U compresses column col of P to [pi, 0, ..., 0]; the first row of U P is
    spent on C and the rest is the residual P for deeper columns. When
    column col of P vanishes no row is spent: skip if C is already zero
    there, fail otherwise.
    """
    H, U = hermite_form(P.select_cols([col]))
    pi = H[0, 0] if H.rows else Poly.zero()
    target = C.col(col)

    if pi.is_zero:
        if all(e.is_zero for e in target):
            return NullifyResult(C, P, PolyMatrix.zeros(C.rows, 1),
                                 PolyMatrix.identity(P.rows), fail=False, skip=True)
        return NullifyResult(C, P, PolyMatrix.zeros(C.rows, 1), U, fail=True, skip=False)

    Pt = U @ P
    quotients = [e.exact_quotient(pi) for e in target]
    if any(q is None for q in quotients):
        logger.debug(f"Column {col}: gcd {pi} does not divide {[str(e) for e in target]}")
        return NullifyResult(C, Pt.select_rows(range(1, Pt.rows)),
                             PolyMatrix.zeros(C.rows, 1), U, fail=True, skip=False)

    V1 = PolyMatrix.column_vector([-q for q in quotients])
    C_tilde = C + V1 @ Pt.select_rows([0])
    return NullifyResult(C_tilde, Pt.select_rows(range(1, Pt.rows)), V1, U, fail=False, skip=False)


def nullify(C: PolyMatrix, P: PolyMatrix, col: int) -> NullifyResult:
    """
    One nullification step on 0-based column col

    A column already zero in C is skipped and the inputs come back unchanged.
    """
    _check_shapes(C, P, col)
    if _is_zero_column(C, col):
        return NullifyResult(C, P, PolyMatrix.zeros(C.rows, 1),
                             PolyMatrix.identity(P.rows), fail=False, skip=True)
    return _reduce_column(C, P, col)


def check_nullify(C: PolyMatrix, P: PolyMatrix, col: int, result: NullifyResult) -> bool:
    """Verify a successful, non-skipped nullification tuple"""
    _check_shapes(C, P, col)
    if result.fail or result.skip:
        return False
    U = result.U
    if U.shape != (P.rows, P.rows) or not is_unimodular(U):
        return False
    Pt = U @ P
    pi = Pt[0, col]
    if pi.is_zero or any(not e.is_zero for e in Pt.col(col)[1:]):
        return False
    expected_V1 = []
    for e in C.col(col):
        q = e.exact_quotient(pi)
        if q is None:
            return False
        expected_V1.append(-q)
    if result.V1_tilde != PolyMatrix.column_vector(expected_V1):
        return False
    if result.P2_tilde != Pt.select_rows(range(1, Pt.rows)):
        return False
    if result.C_tilde != C + result.V1_tilde @ Pt.select_rows([0]):
        return False
    return _is_zero_column(result.C_tilde, col)


def max_nullifiable_bound(C: PolyMatrix, P: PolyMatrix) -> int:
    """Upper bound on zero columns of C + V P over all polynomial V"""
    return C.cols - (rank(PolyMatrix.vstack(P, C)) - rank(P))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass
class _Node:
    string: SearchString
    C: PolyMatrix
    P: PolyMatrix
    step: Optional[NullifyResult] = None
    parent: Optional["_Node"] = None


@dataclass
class _SearchState:
    best: _Node
    bound: int
    visited: int = 0

    @property
    def done(self) -> bool:
        return len(self.best.string) == self.bound


def _search(node: _Node, c: int, state: _SearchState) -> None:
    depth = len(node.string)
    if depth > len(state.best.string):
        state.best = node
    if state.done:
        return

    start = node.string.symbols[-1] + 1 if node.string.symbols else 1
    for k in range(start, c + 1):
        # the subtree under k can reach at most depth + 1 + (c - k) columns
        if depth + 1 + (c - k) <= len(state.best.string):
            break
        state.visited += 1
        step = _reduce_column(node.C, node.P, k - 1)
        if step.fail:
            continue
        child = _Node(node.string.extend(k), step.C_tilde, step.P2_tilde, step, node)
        _search(child, c, state)
        if state.done:
            return


def _rebuild_v(node: _Node, q: int) -> PolyMatrix:
    V = PolyMatrix.zeros(q, node.P.rows)
    while node.parent is not None:
        step = node.step
        if not step.skip:
            V = PolyMatrix.hstack(step.V1_tilde, V) @ step.U
        node = node.parent
    return V


def compute_v(C: PolyMatrix, P: PolyMatrix) -> Tuple[PolyMatrix, Tuple[int, ...]]:
    """
    V maximizing the zero columns of C + V P

    Among maximum solutions the one whose column string comes first in DFS
    preorder wins.

    Returns:
        (V, 0-based zero columns of C + V P)
    """
    if C.cols != P.cols:
        raise DimensionError(f"C has {C.cols} columns but P has {P.cols}")
    c = C.cols
    root = _Node(EPSILON, C, P)
    state = _SearchState(best=root, bound=max_nullifiable_bound(C, P))
    _search(root, c, state)

    V = _rebuild_v(state.best, C.rows)
    zero_cols = (C + V @ P).zero_columns()
    logger.debug(f"Search visited {state.visited} nodes, best string {state.best.string}, "
                 f"bound {state.bound}")
    return V, zero_cols


def subset_is_nullifiable(C: PolyMatrix, P: PolyMatrix, columns: Sequence[int]) -> bool:
    """Whether some polynomial V zeroes every listed column of C + V P"""
    columns = list(columns)
    return solve_left_division(P.select_cols(columns), -C.select_cols(columns)) is not None


def oracle_max_nullifiable(C: PolyMatrix, P: PolyMatrix,
                           max_columns: Optional[int] = None) -> Tuple[int, Tuple[int, ...]]:
    """
    Exhaustive reference for compute_v

    Returns:
        (count, first feasible subset of that size in combination order)
    """
    if C.cols != P.cols:
        raise DimensionError(f"C has {C.cols} columns but P has {P.cols}")
    limit = max_columns if max_columns is not None else load_limits().oracle_max_columns
    if C.cols > limit:
        raise DimensionError(f"oracle limited to {limit} columns, got {C.cols}")
    for size in range(C.cols, -1, -1):
        for subset in combinations(range(C.cols), size):
            if subset_is_nullifiable(C, P, subset):
                return size, subset
    return 0, ()


def minimize_interaction(p: ControlProblem, oracle: bool = False,
                         oracle_max_columns: Optional[int] = None) -> SynthesisResult:
    """
    Regular controller equivalent to the canonical one that leaves as many
    control variables unconnected as possible
    """
    C0 = bootstrap_regular_controller(p)
    if C0 is None:
        return SynthesisResult(status=STATUS_NOT_REGULARLY_IMPLEMENTABLE)

    Pc = control_manifest(p).aligned(p.c_vars)
    V, zero_cols = compute_v(C0.rep, Pc.rep)
    controller = parametrize(C0, Pc, V)
    irrelevant = irrelevant_columns(controller)

    details = {
        "zero_columns": [p.c_vars[j] for j in zero_cols],
        "bound": max_nullifiable_bound(C0.rep, Pc.rep),
    }
    if oracle:
        count, witness = oracle_max_nullifiable(C0.rep, Pc.rep, oracle_max_columns)
        details["oracle_count"] = count
        details["oracle_witness"] = [p.c_vars[j] for j in witness]
        details["oracle_agrees"] = count == len(zero_cols)
        if count != len(zero_cols):
            logger.error(f"Search found {len(zero_cols)} zero columns, oracle found {count}")

    logger.info(f"Irrelevant control variables: {list(irrelevant) or 'none'}")
    return SynthesisResult(status=STATUS_SOLVED, controller=controller,
                           certificate=certify(p, controller), V=V,
                           irrelevant=irrelevant, details=details)
