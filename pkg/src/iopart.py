"""
Input-Output Partition Module
Synthesis under the constraint that some control variables are outputs
of the plant (sensor readings) and so must stay free inputs of the
controller.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from behavior import Behavior, VariableError, eliminate, io_partition, minimal_rep
from control import (
    STATUS_NOT_REGULARLY_IMPLEMENTABLE,
    STATUS_PARTITION_UNSATISFIABLE,
    STATUS_SOLVED,
    ControlProblem,
    SynthesisResult,
    bootstrap_regular_controller,
    certify,
    control_manifest,
    parametrize,
)
from polymat import (
    DimensionError,
    NotFullRowRankError,
    PolyMatrix,
    block_diag,
    hermite_form,
    inverse_unimodular,
    rank,
    smith_form,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartitionedControllerSpec:
    """Controller C1 u + C2 y = 0 with [C1 C2] of full row rank"""

    C1: PolyMatrix
    C2: PolyMatrix
    u_vars: Tuple[str, ...]
    y_vars: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "u_vars", tuple(self.u_vars))
        object.__setattr__(self, "y_vars", tuple(self.y_vars))
        if self.C1.rows != self.C2.rows:
            raise DimensionError(f"C1 has {self.C1.rows} rows but C2 has {self.C2.rows}")
        if self.C1.cols != len(self.u_vars) or self.C2.cols != len(self.y_vars):
            raise DimensionError("block widths do not match the variable names")
        if rank(PolyMatrix.hstack(self.C1, self.C2)) != self.C1.rows:
            raise NotFullRowRankError("[C1 C2] must have full row rank")


def partition_controller(C: Behavior, u_vars: Sequence[str], y_vars: Sequence[str]) -> PartitionedControllerSpec:
    if sorted(tuple(u_vars) + tuple(y_vars)) != sorted(C.vars):
        raise VariableError(f"{tuple(u_vars)} and {tuple(y_vars)} do not split {C.vars}")
    rep = minimal_rep(C)
    return PartitionedControllerSpec(
        C1=rep.rep.select_cols(C.indices_of(u_vars)),
        C2=rep.rep.select_cols(C.indices_of(y_vars)),
        u_vars=u_vars,
        y_vars=y_vars,
    )


def is_input_selectable(spec: PartitionedControllerSpec) -> bool:
    """y can be left free by the controller"""
    return rank(spec.C1) == spec.C1.rows


def admits_free_declared_outputs(spec: PartitionedControllerSpec) -> bool:
    """Every y trajectory has a compatible u"""
    B = Behavior(PolyMatrix.hstack(spec.C1, spec.C2), spec.u_vars + spec.y_vars)
    return eliminate(B, spec.u_vars).rep.rows == 0


def _pick_independent_columns(M: PolyMatrix, count: int) -> Tuple[int, ...]:
    chosen = []
    for j in range(M.cols):
        if len(chosen) == count:
            break
        if rank(M.select_cols(chosen + [j])) > len(chosen):
            chosen.append(j)
    return tuple(chosen)


def construct_fullrank_v(C: PolyMatrix, P: PolyMatrix) -> Optional[PolyMatrix]:
    """
    V making C + V P full row rank, or None when rank [P; C] < rows(C)

    P is brought to Smith form U D W and C to a block shape whose lower
    rows only meet the columns where D has invariant factors. The rows
    that stay dependent then get one distinct free invariant-factor
    column each.
    """
    if C.cols != P.cols:
        raise DimensionError(f"C has {C.cols} columns but P has {P.cols}")
    c, p = C.rows, P.rows
    if rank(PolyMatrix.vstack(P, C)) < c:
        logger.debug("rank [P; C] is below the row count of C")
        return None
    if rank(C) == c:
        return PolyMatrix.zeros(c, p)

    U, D, W = smith_form(P)
    p_rank = sum(1 for i in range(min(D.rows, D.cols)) if not D[i, i].is_zero)
    C_w = C @ inverse_unimodular(W)

    H1, L1 = hermite_form(C_w.select_cols(range(p_rank, C.cols)))
    c1 = H1.nonzero_rows().rows
    lower_left = (L1 @ C_w).select_rows(range(c1, c)).select_cols(range(p_rank))
    H2, L2 = hermite_form(lower_left)
    c2 = H2.nonzero_rows().rows
    L = block_diag(PolyMatrix.identity(c1), L2) @ L1

    taken = set(_pick_independent_columns(H2.select_rows(range(c2)), c2))
    free = [j for j in range(p_rank) if j not in taken]
    extra = c - c1 - c2
    if len(free) < extra:
        logger.error(f"Only {len(free)} free columns for {extra} dependent rows")
        return None

    rows = [[0] * p for _ in range(c)]
    for k in range(extra):
        rows[c1 + c2 + k][free[k]] = 1
    V_block = PolyMatrix.from_rows(rows, cols=p)
    V = inverse_unimodular(L) @ V_block @ inverse_unimodular(U)

    if rank(C + V @ P) != c:
        raise NotFullRowRankError("constructed V did not reach full row rank")
    return V


def solve_io_partition(p: ControlProblem, start: Optional[Behavior] = None) -> SynthesisResult:
    """
    Regular controller equivalent to the canonical one that leaves the
    declared outputs free

    Args:
        p: problem; declared_outputs are y, the other control variables u
        start: regular controller to refine instead of the bootstrap one
    """
    C0 = start.aligned(p.c_vars) if start is not None else bootstrap_regular_controller(p)
    if C0 is None:
        return SynthesisResult(status=STATUS_NOT_REGULARLY_IMPLEMENTABLE)
    C0 = minimal_rep(C0)

    if not p.declared_outputs:
        logger.warning("No declared outputs, any regular controller qualifies")
        return SynthesisResult(status=STATUS_SOLVED, controller=C0, certificate=certify(p, C0))

    Pc = control_manifest(p).aligned(p.c_vars)
    u_idx = [j for j, v in enumerate(p.c_vars) if v not in p.declared_outputs]
    C1 = C0.rep.select_cols(u_idx)
    P1 = Pc.rep.select_cols(u_idx)

    if rank(PolyMatrix.vstack(C1, P1)) < C0.rep.rows:
        logger.info(f"Declared outputs {list(p.declared_outputs)} cannot be left free")
        return SynthesisResult(status=STATUS_PARTITION_UNSATISFIABLE)

    V = construct_fullrank_v(C1, P1)
    if V is None:
        return SynthesisResult(status=STATUS_PARTITION_UNSATISFIABLE)

    controller = parametrize(C0, Pc, V)
    partition = io_partition(controller, p.declared_outputs)
    details = {}
    if partition is not None:
        details = {"outputs": list(partition.outputs), "inputs": list(partition.inputs)}
    return SynthesisResult(status=STATUS_SOLVED, controller=controller,
                           certificate=certify(p, controller), V=V, details=details)
