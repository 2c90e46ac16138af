"""
Control Module
Plant/specification pairs and the controller synthesis built on them:
hidden, manifest and control-manifest behaviors, the canonical
controller, implementability and regularity tests, a constructive
regular controller and the family of controllers equivalent to the
canonical one.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from behavior import (
    Behavior,
    VariableError,
    behavior_sum,
    controllable_part,
    eliminate,
    equals,
    includes,
    intersect,
    io_partition,
    minimal_rep,
)
from polymat import (
    DimensionError,
    PolyMatrix,
    rank,
    solve_left_division,
    unimodular_completion,
)

logger = logging.getLogger(__name__)

STATUS_SOLVED = "solved"
STATUS_NOT_REGULARLY_IMPLEMENTABLE = "not_regularly_implementable"
STATUS_PARTITION_UNSATISFIABLE = "partition_unsatisfiable"


@dataclass(frozen=True)
class ControlProblem:
    """Full plant R w + M c = 0 and specification S w = 0"""

    R: PolyMatrix
    M: PolyMatrix
    S: PolyMatrix
    w_vars: Tuple[str, ...]
    c_vars: Tuple[str, ...]
    declared_outputs: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("w_vars", "c_vars", "declared_outputs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.R.rows != self.M.rows:
            raise DimensionError(f"R has {self.R.rows} rows but M has {self.M.rows}")
        if self.R.cols != len(self.w_vars):
            raise DimensionError(f"R has {self.R.cols} columns for {len(self.w_vars)} w variables")
        if self.M.cols != len(self.c_vars):
            raise DimensionError(f"M has {self.M.cols} columns for {len(self.c_vars)} c variables")
        if self.S.cols != len(self.w_vars):
            raise DimensionError(f"S has {self.S.cols} columns for {len(self.w_vars)} w variables")
        names = self.w_vars + self.c_vars
        if len(set(names)) != len(names):
            raise VariableError(f"variable names must be unique, got {names}")
        stray = set(self.declared_outputs) - set(self.c_vars)
        if stray:
            raise VariableError(f"declared outputs {sorted(stray)} are not control variables")


@dataclass(frozen=True)
class Certificate:
    implementable: bool
    regularly_implementable: bool
    regular: bool
    implements_specification: bool
    equivalent_to_canonical: bool
    # None when the problem declares no outputs
    input_selectable: Optional[bool] = None

    @property
    def passed(self) -> bool:
        checks = [self.regular, self.implements_specification, self.equivalent_to_canonical]
        if self.input_selectable is not None:
            checks.append(self.input_selectable)
        return all(checks)

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


@dataclass(frozen=True)
class SynthesisResult:
    status: str
    controller: Optional[Behavior] = None
    certificate: Optional[Certificate] = None
    V: Optional[PolyMatrix] = None
    irrelevant: Tuple[str, ...] = ()
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status == STATUS_SOLVED


def full_plant(p: ControlProblem) -> Behavior:
    return Behavior(PolyMatrix.hstack(p.R, p.M), p.w_vars + p.c_vars)


def specification(p: ControlProblem) -> Behavior:
    return Behavior(p.S, p.w_vars)


def hidden_behavior(p: ControlProblem) -> Behavior:
    """Plant trajectories visible while the control terminals rest at zero"""
    return minimal_rep(Behavior(p.R, p.w_vars))


def manifest_behavior(p: ControlProblem) -> Behavior:
    return eliminate(full_plant(p), p.c_vars)


def control_manifest(p: ControlProblem) -> Behavior:
    return eliminate(full_plant(p), p.w_vars)


def canonical_controller(p: ControlProblem) -> Behavior:
    stacked = PolyMatrix.vstack(
        PolyMatrix.hstack(p.R, p.M),
        PolyMatrix.hstack(p.S, PolyMatrix.zeros(p.S.rows, len(p.c_vars))),
    )
    return eliminate(Behavior(stacked, p.w_vars + p.c_vars), p.w_vars)


def _interconnection(p: ControlProblem, C: Behavior) -> Behavior:
    Crep = C.aligned(p.c_vars).rep
    stacked = PolyMatrix.vstack(
        PolyMatrix.hstack(p.R, p.M),
        PolyMatrix.hstack(PolyMatrix.zeros(Crep.rows, len(p.w_vars)), Crep),
    )
    return Behavior(stacked, p.w_vars + p.c_vars)


def controlled_behavior(p: ControlProblem, C: Behavior) -> Behavior:
    return eliminate(_interconnection(p, C), p.c_vars)


def is_implementable(p: ControlProblem) -> bool:
    """Hidden behavior inside the specification inside the manifest behavior"""
    S = specification(p)
    return includes(hidden_behavior(p), S) and includes(S, manifest_behavior(p))


def is_regular(p: ControlProblem, C: Behavior) -> bool:
    Cmin = minimal_rep(C.aligned(p.c_vars))
    plant = PolyMatrix.hstack(p.R, p.M)
    stacked = _interconnection(p, Cmin).rep
    return rank(stacked) == rank(plant) + Cmin.rep.rows


def is_regularly_implementable(p: ControlProblem) -> bool:
    if not is_implementable(p):
        return False
    P = manifest_behavior(p)
    return equals(behavior_sum(specification(p), controllable_part(P)), P)


def bootstrap_regular_controller(p: ControlProblem) -> Optional[Behavior]:
    """
    One regular controller equivalent to the canonical one

    Stacks the control manifest P over the canonical controller into a
    minimal T, writes P = U1 T and completes U1 to a unimodular matrix
    [U1; U2]. The controller is ker(U2 T).

    Returns:
        the controller over c_vars, or None when the specification is not
        regularly implementable
    """
    if not is_implementable(p):
        logger.info("Specification is not implementable")
        return None

    P = minimal_rep(control_manifest(p)).rep
    G = minimal_rep(canonical_controller(p)).rep
    T = minimal_rep(Behavior(PolyMatrix.vstack(P, G), p.c_vars)).rep

    U1 = solve_left_division(T, P)
    if U1 is None:
        logger.error("Control manifest is not implied by the canonical interconnection")
        return None

    U2 = unimodular_completion(U1)
    if U2 is None:
        logger.info("Control manifest is not a left prime part of the canonical interconnection")
        return None

    C0 = Behavior(U2 @ T, p.c_vars)
    logger.debug(f"Bootstrap controller has {C0.rep.rows} equations")
    return C0


def parametrize(C0: Behavior, Pc: Behavior, V: PolyMatrix) -> Behavior:
    """ker(C0 + V Pc) over the variables of C0"""
    P = Pc.aligned(C0.vars).rep
    if V.shape != (C0.rep.rows, P.rows):
        raise DimensionError(f"V is {V.shape}, expected {(C0.rep.rows, P.rows)}")
    return Behavior(C0.rep + V @ P, C0.vars)


def regularize_with(p: ControlProblem, C: Behavior) -> Behavior:
    """Enlarge a regular implementing controller by adding the canonical one"""
    return minimal_rep(behavior_sum(C.aligned(p.c_vars), canonical_controller(p)))


def certify(p: ControlProblem, C: Behavior) -> Certificate:
    """Recompute every check for controller C from scratch"""
    C = C.aligned(p.c_vars)
    Pc = control_manifest(p)
    certificate = Certificate(
        implementable=is_implementable(p),
        regularly_implementable=is_regularly_implementable(p),
        regular=is_regular(p, C),
        implements_specification=equals(controlled_behavior(p, C), specification(p)),
        equivalent_to_canonical=equals(intersect(C, Pc), intersect(canonical_controller(p), Pc)),
        input_selectable=(io_partition(C, p.declared_outputs) is not None
                          if p.declared_outputs else None),
    )
    logger.debug(f"Certificate: {certificate}")
    return certificate


def synthesize(p: ControlProblem) -> SynthesisResult:
    """Bootstrap a regular controller and certify it"""
    C0 = bootstrap_regular_controller(p)
    if C0 is None:
        return SynthesisResult(status=STATUS_NOT_REGULARLY_IMPLEMENTABLE)
    controller = minimal_rep(C0)
    logger.info(f"Synthesized a regular controller with {controller.rep.rows} equations")
    return SynthesisResult(status=STATUS_SOLVED, controller=controller,
                           certificate=certify(p, controller))
