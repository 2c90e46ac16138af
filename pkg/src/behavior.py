"""
Behavior Module
Linear time-invariant behaviors given by kernel representations
R(d/dt) w = 0, with the representation-independent operations the
synthesis layers rely on. Behaviors are compared through their row
modules only: ker R1 is contained in ker R2 exactly when R2 = X R1 for a
minimal R1.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

from polymat import (
    DimensionError,
    PolyMatrix,
    hermite_form,
    rank,
    smith_form,
    solve_left_division,
)

logger = logging.getLogger(__name__)


class VariableError(ValueError):
    """Unknown, missing or duplicate variable names"""


@dataclass(frozen=True)
class Behavior:
    """Kernel of rep; vars name the columns in order"""

    rep: PolyMatrix
    vars: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(self.vars) != self.rep.cols:
            raise DimensionError(f"{len(self.vars)} names for {self.rep.cols} columns")
        if len(set(self.vars)) != len(self.vars):
            raise VariableError(f"duplicate variable names in {self.vars}")

    def indices_of(self, names: Iterable[str]) -> Tuple[int, ...]:
        lookup = {v: i for i, v in enumerate(self.vars)}
        missing = [n for n in names if n not in lookup]
        if missing:
            raise VariableError(f"unknown variables {missing}, behavior has {self.vars}")
        return tuple(lookup[n] for n in names)

    def aligned(self, order: Sequence[str]) -> "Behavior":
        """Same behavior with columns reordered to order"""
        order = tuple(order)
        if order == self.vars:
            return self
        if sorted(order) != sorted(self.vars):
            raise VariableError(f"cannot align {self.vars} to {order}")
        return Behavior(self.rep.select_cols(self.indices_of(order)), order)

    def __str__(self) -> str:
        return f"ker over ({', '.join(self.vars)}):\n{self.rep.pretty()}"


class IOPartition(NamedTuple):
    outputs: Tuple[str, ...]
    inputs: Tuple[str, ...]


def full_behavior(vars: Sequence[str]) -> Behavior:
    """Every trajectory; no equations"""
    return Behavior(PolyMatrix.zeros(0, len(vars)), tuple(vars))


def zero_behavior(vars: Sequence[str]) -> Behavior:
    return Behavior(PolyMatrix.identity(len(vars)), tuple(vars))


def outputs(B: Behavior) -> int:
    return rank(B.rep)


def minimal_rep(B: Behavior) -> Behavior:
    H, _ = hermite_form(B.rep)
    return Behavior(H.nonzero_rows(), B.vars)


def eliminate(B: Behavior, drop: Iterable[str]) -> Behavior:
    """Project B onto the variables not in drop"""
    drop = set(drop)
    unknown = drop - set(B.vars)
    if unknown:
        raise VariableError(f"cannot eliminate unknown variables {sorted(unknown)}")
    if not drop:
        return minimal_rep(B)

    keep = [v for v in B.vars if v not in drop]
    dropped = B.rep.select_cols(B.indices_of([v for v in B.vars if v in drop]))
    kept = B.rep.select_cols(B.indices_of(keep))

    H, U = hermite_form(dropped)
    pivots = H.nonzero_rows().rows
    residual = (U @ kept).select_rows(range(pivots, B.rep.rows))
    logger.debug(f"Eliminated {sorted(drop)}: {residual.rows} equations remain on {keep}")
    return minimal_rep(Behavior(residual, keep))


def includes(B1: Behavior, B2: Behavior) -> bool:
    """True when B1 is contained in B2"""
    other = B2.aligned(B1.vars)
    return solve_left_division(minimal_rep(B1).rep, other.rep) is not None


def equals(B1: Behavior, B2: Behavior) -> bool:
    return includes(B1, B2) and includes(B2, B1)


def intersect(B1: Behavior, B2: Behavior) -> Behavior:
    stacked = PolyMatrix.vstack(B1.rep, B2.aligned(B1.vars).rep)
    return minimal_rep(Behavior(stacked, B1.vars))


def _auxiliary_names(vars: Sequence[str]) -> Tuple[str, ...]:
    taken = set(vars)
    names = []
    for v in vars:
        candidate = f"{v}'"
        while candidate in taken:
            candidate += "'"
        taken.add(candidate)
        names.append(candidate)
    return tuple(names)


def behavior_sum(B1: Behavior, B2: Behavior) -> Behavior:
    """
    {w1 + w2 | w1 in B1, w2 in B2}

    Uses the auxiliary behavior R1 (w - a) = 0, R2 a = 0 and projects out a.
    """
    n = len(B1.vars)
    R1 = B1.rep
    R2 = B2.aligned(B1.vars).rep
    aux = _auxiliary_names(B1.vars)
    rep = PolyMatrix.vstack(
        PolyMatrix.hstack(R1, -R1),
        PolyMatrix.hstack(PolyMatrix.zeros(R2.rows, n), R2),
    )
    return eliminate(Behavior(rep, B1.vars + aux), aux)


def controllable_part(B: Behavior) -> Behavior:
    """Largest controllable sub-behavior, from the Smith form of a minimal rep"""
    R = minimal_rep(B).rep
    if R.rows == 0:
        return minimal_rep(B)
    _, _, V = smith_form(R)
    return minimal_rep(Behavior(V.select_rows(range(R.rows)), B.vars))


def irrelevant_columns(B: Behavior) -> Tuple[str, ...]:
    """Variables left unconstrained by B, in column order"""
    R = minimal_rep(B).rep
    return tuple(B.vars[j] for j in R.zero_columns())


def io_partition(B: Behavior, desired_inputs: Iterable[str] = ()) -> Optional[IOPartition]:
    """
    Pick outputs whose columns form a nonsingular square block of a minimal
    rep, never choosing a desired input. None when no such choice exists.
    """
    desired = set(desired_inputs)
    unknown = desired - set(B.vars)
    if unknown:
        raise VariableError(f"unknown desired inputs {sorted(unknown)}")

    R = minimal_rep(B).rep
    p = R.rows
    chosen = []
    for j, name in enumerate(B.vars):
        if len(chosen) == p:
            break
        if name in desired:
            continue
        if rank(R.select_cols(chosen + [j])) > len(chosen):
            chosen.append(j)

    if len(chosen) < p:
        logger.debug(f"No partition keeps {sorted(desired)} as inputs")
        return None
    outs = tuple(B.vars[j] for j in chosen)
    ins = tuple(v for v in B.vars if v not in outs)
    return IOPartition(outs, ins)
