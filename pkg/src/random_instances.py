"""
Random Instances
Seeded generators for polynomial matrices, behaviors and control
problems. Sizes stay small so the exact arithmetic stays fast.
"""

import random
from dataclasses import replace
from typing import Optional, Sequence

from behavior import Behavior
from control import ControlProblem, controlled_behavior
from polymat import Poly, PolyMatrix


def random_poly(rng: random.Random, max_degree: int = 2, coeff_range: int = 2,
                zero_probability: float = 0.3) -> Poly:
    if rng.random() < zero_probability:
        return Poly.zero()
    degree = rng.randint(0, max_degree)
    return Poly.from_coeffs([rng.randint(-coeff_range, coeff_range) for _ in range(degree + 1)])


def random_matrix(rng: random.Random, rows: int, cols: int, max_degree: int = 2,
                  zero_probability: float = 0.3) -> PolyMatrix:
    return PolyMatrix(rows, cols, [random_poly(rng, max_degree, zero_probability=zero_probability)
                                   for _ in range(rows * cols)])


def random_unimodular(rng: random.Random, n: int, steps: int = 3, max_degree: int = 1) -> PolyMatrix:
    """Product of random elementary row operations"""
    rows = PolyMatrix.identity(n).to_rows()
    for _ in range(steps):
        if n < 2:
            break
        i, k = rng.sample(range(n), 2)
        factor = random_poly(rng, max_degree, zero_probability=0.0)
        rows[i] = [a + factor * b for a, b in zip(rows[i], rows[k])]
        if rng.random() < 0.3:
            rows[i], rows[k] = rows[k], rows[i]
    scale = Poly.const(rng.choice([-2, -1, 1, 2]))
    rows[0] = [scale * e for e in rows[0]]
    return PolyMatrix.from_rows(rows, cols=n)


def random_behavior(rng: random.Random, vars: Sequence[str], max_rows: int = 2,
                    max_degree: int = 2) -> Behavior:
    rows = rng.randint(0, max_rows)
    return Behavior(random_matrix(rng, rows, len(vars), max_degree), tuple(vars))


def random_problem(rng: random.Random, max_w: int = 2, max_c: int = 2, max_equations: int = 2,
                   max_degree: int = 1, implementable: Optional[bool] = True) -> ControlProblem:
    """
    Random plant with a specification

    implementable=True takes the specification from a random controller,
    False or None draws it at random (it may or may not be implementable).
    """
    w = rng.randint(1, max_w)
    c = rng.randint(1, max_c)
    g = rng.randint(1, max_equations)
    w_vars = tuple(f"w{i + 1}" for i in range(w))
    c_vars = tuple(f"c{i + 1}" for i in range(c))
    problem = ControlProblem(
        R=random_matrix(rng, g, w, max_degree),
        M=random_matrix(rng, g, c, max_degree),
        S=PolyMatrix.zeros(0, w),
        w_vars=w_vars,
        c_vars=c_vars,
    )
    if implementable:
        controller = random_behavior(rng, c_vars, max_rows=c, max_degree=max_degree)
        S = controlled_behavior(problem, controller).rep
    else:
        S = random_matrix(rng, rng.randint(0, w), w, max_degree)
    return replace(problem, S=S)


def autonomous_problem(rng: random.Random) -> ControlProblem:
    """
    Plant with an uncontrollable autonomous part and the zero specification

    The manifest behavior is ker(a) for a nonconstant a, so the zero
    specification is implementable but never regularly implementable.
    """
    a = Poly.from_coeffs([rng.choice([-2, -1, 1, 2]), rng.choice([-1, 1, 2])])
    U = random_unimodular(rng, 2, steps=2)
    R = U @ PolyMatrix.from_rows([[a], [Poly.one()]])
    M = U @ PolyMatrix.from_rows([[Poly.zero()], [Poly.const(-1)]])
    return ControlProblem(R=R, M=M, S=PolyMatrix.identity(1), w_vars=("w1",), c_vars=("c1",))
