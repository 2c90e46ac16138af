"""
Problem File Module
JSON problem files: a full plant R w + M c = 0, a specification S w = 0,
optional declared outputs, an optional controller to verify and solver
options. Polynomials are lists of coefficient strings in ascending
degree order, e.g. x^2 - x is ["0", "-1", "1"].
"""

import json
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from behavior import Behavior
from control import ControlProblem
from polymat import Poly, PolyMatrix, WireFormatError

logger = logging.getLogger(__name__)

WireMatrix = List[List[List[str]]]


class ProblemFileError(ValueError):
    """Problem file could not be read, parsed or validated"""


class ProblemOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_degree: Optional[int] = Field(default=None, ge=1)
    oracle_max_columns: Optional[int] = Field(default=None, ge=1)


class ProblemFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w_vars: List[str]
    c_vars: List[str]
    R: WireMatrix
    M: WireMatrix
    S: WireMatrix = Field(default_factory=list)
    declared_outputs: List[str] = Field(default_factory=list)
    controller: Optional[WireMatrix] = None
    options: ProblemOptions = Field(default_factory=ProblemOptions)

    @field_validator("R", "M", "S", "controller")
    @classmethod
    def _canonical_coefficients(cls, matrix: Optional[WireMatrix], info) -> Optional[WireMatrix]:
        if matrix is None:
            return None
        try:
            return [[Poly.from_wire(p).to_wire() for p in row] for row in matrix]
        except WireFormatError as e:
            raise ValueError(f"matrix '{info.field_name}': {e}") from e

    @model_validator(mode="after")
    def _check_dimensions(self) -> "ProblemFile":
        names = self.w_vars + self.c_vars
        if len(set(names)) != len(names):
            raise ValueError(f"variable names must be unique, got {names}")
        stray = sorted(set(self.declared_outputs) - set(self.c_vars))
        if stray:
            raise ValueError(f"declared_outputs {stray} are not in c_vars")

        widths = {"R": len(self.w_vars), "M": len(self.c_vars), "S": len(self.w_vars),
                  "controller": len(self.c_vars)}
        for name, width in widths.items():
            matrix = getattr(self, name)
            for i, row in enumerate(matrix or []):
                if len(row) != width:
                    raise ValueError(f"matrix '{name}' row {i} has {len(row)} entries, expected {width}")
        if len(self.R) != len(self.M):
            raise ValueError(f"matrix 'R' has {len(self.R)} rows but matrix 'M' has {len(self.M)}")
        return self

    def to_problem(self) -> ControlProblem:
        return ControlProblem(
            R=PolyMatrix.from_wire(self.R, cols=len(self.w_vars)),
            M=PolyMatrix.from_wire(self.M, cols=len(self.c_vars)),
            S=PolyMatrix.from_wire(self.S, cols=len(self.w_vars)),
            w_vars=self.w_vars,
            c_vars=self.c_vars,
            declared_outputs=self.declared_outputs,
        )

    def controller_behavior(self) -> Optional[Behavior]:
        if self.controller is None:
            return None
        return Behavior(PolyMatrix.from_wire(self.controller, cols=len(self.c_vars)), self.c_vars)


def _describe(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        location = ".".join(str(x) for x in err.get("loc", ()))
        message = err.get("msg", "invalid value")
        parts.append(f"{location}: {message}" if location else message)
    return "; ".join(parts)


def parse_problem(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return ProblemFile.model_validate(data)
    except ValidationError as e:
        raise ProblemFileError(_describe(e)) from e


def load_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ProblemFileError(f"cannot read {path}: {e}") from e
    logger.debug(f"Loaded problem file {path}")
    return parse_problem(text)


def serialize_problem(pf: ProblemFile) -> str:
    """Canonical JSON; parse_problem reads it back to an equal model"""
    data = pf.model_dump(exclude_none=True)
    if data.get("options") == {}:
        del data["options"]
    return json.dumps(data, indent=2) + "\n"


def problem_file_from(p: ControlProblem, controller: Optional[Behavior] = None) -> ProblemFile:
    return ProblemFile(
        w_vars=list(p.w_vars),
        c_vars=list(p.c_vars),
        R=p.R.to_wire(),
        M=p.M.to_wire(),
        S=p.S.to_wire(),
        declared_outputs=list(p.declared_outputs),
        controller=controller.aligned(p.c_vars).rep.to_wire() if controller is not None else None,
    )
