"""
Unit Tests for Controller Synthesis
Tests plant projections, the canonical controller, regularity, the
bootstrap construction and the family of equivalent regular controllers
"""

import os
import random
import unittest
from pathlib import Path

import sympy as sp

from behavior import (
    Behavior,
    equals,
    full_behavior,
    includes,
    intersect,
    minimal_rep,
    outputs,
    zero_behavior,
)
from control import (
    STATUS_NOT_REGULARLY_IMPLEMENTABLE,
    ControlProblem,
    bootstrap_regular_controller,
    canonical_controller,
    certify,
    control_manifest,
    controlled_behavior,
    hidden_behavior,
    is_implementable,
    is_regular,
    is_regularly_implementable,
    manifest_behavior,
    parametrize,
    regularize_with,
    specification,
    synthesize,
)
from polymat import (
    XI,
    DimensionError,
    Poly,
    PolyMatrix,
    is_unimodular,
    rank,
    solve_left_division,
    unimodular_completion,
)
from problem_file import load_problem
from random_instances import autonomous_problem, random_matrix, random_problem, random_unimodular

x = XI
PROBLEMS = Path(os.getenv("PROJECT_ROOT", Path(__file__).resolve().parent.parent)) / "data" / "problems"


def mat(rows, cols=None) -> PolyMatrix:
    return PolyMatrix.from_rows([[Poly.from_expr(sp.sympify(e)) for e in row] for row in rows], cols)


def fixture(name: str) -> ControlProblem:
    return load_problem(PROBLEMS / name).to_problem()


def random_cases(seed: int, count: int):
    """Mix of implementable, arbitrary and autonomous-plant problems"""
    rng = random.Random(seed)
    for k in range(count):
        if k % 5 == 4:
            yield autonomous_problem(rng)
        elif k % 5 == 3:
            yield random_problem(rng, implementable=None)
        else:
            yield random_problem(rng)


class TestWaterTank(unittest.TestCase):
    """Test the tank plant e = u + d"""

    def setUp(self):
        self.tank = fixture("water_tank.json")
        self.ex1 = fixture("water_tank_ex1.json")

    def test_hidden_behavior(self):
        """Test that e vanishes when u and d do"""
        self.assertTrue(equals(hidden_behavior(self.tank), zero_behavior(["e"])))

    def test_projections(self):
        """Test manifest and control-manifest behaviors are free"""
        self.assertTrue(equals(manifest_behavior(self.tank), full_behavior(["e"])))
        self.assertTrue(equals(control_manifest(self.tank), full_behavior(["u", "d"])))

    def test_sensor_controller_is_regular(self):
        """Test rank [R M; 0 C] = 1 + 1 for C = [0 1]"""
        C = Behavior(mat([[0, 1]]), ("u", "d"))
        stacked = PolyMatrix.vstack(PolyMatrix.hstack(self.tank.R, self.tank.M), mat([[0, 0, 1]]))
        self.assertEqual(rank(stacked), 2)
        self.assertTrue(is_regular(self.tank, C))
        self.assertTrue(is_regular(self.tank, full_behavior(["u", "d"])))

    def test_full_specification(self):
        """Test S = P gives the free controller"""
        self.assertTrue(is_implementable(self.tank))
        self.assertTrue(is_regularly_implementable(self.tank))
        C0 = bootstrap_regular_controller(self.tank)
        self.assertEqual(C0.rep.rows, 0)
        self.assertTrue(equals(canonical_controller(self.tank), full_behavior(["u", "d"])))

    def test_level_specification(self):
        """Test forcing m = d = 0 bootstraps a controller equal to ker[0 1]"""
        p = self.ex1
        target = Behavior(mat([[0, 1]]), ("u", "d"))
        self.assertTrue(equals(canonical_controller(p), target))
        C0 = bootstrap_regular_controller(p)
        self.assertEqual(C0.rep.rows, 1)
        self.assertTrue(equals(C0, target))
        self.assertTrue(certify(p, C0).regular)

    def test_controlled_behavior_extremes(self):
        """Test the free and the zero controller"""
        p = self.ex1
        self.assertTrue(equals(controlled_behavior(p, full_behavior(p.c_vars)), manifest_behavior(p)))
        self.assertTrue(equals(controlled_behavior(p, zero_behavior(p.c_vars)), hidden_behavior(p)))


class TestImplementability(unittest.TestCase):
    """Test implementability and regularity on small plants"""

    def test_specification_below_hidden(self):
        """Test S = {0} with hidden behavior ker(x) is not implementable"""
        p = ControlProblem(R=mat([[x]]), M=mat([[-1]]), S=mat([[1]]), w_vars=("w",), c_vars=("c",))
        self.assertFalse(is_implementable(p))
        self.assertFalse(is_regularly_implementable(p))
        self.assertIsNone(bootstrap_regular_controller(p))

    def test_autonomous_plant(self):
        """Test an implementable but not regularly implementable specification"""
        p = fixture("autonomous_plant.json")
        self.assertTrue(is_implementable(p))
        self.assertFalse(is_regularly_implementable(p))
        self.assertIsNone(bootstrap_regular_controller(p))
        self.assertEqual(synthesize(p).status, STATUS_NOT_REGULARLY_IMPLEMENTABLE)
        # the canonical controller implements S but only irregularly
        Ccan = canonical_controller(p)
        self.assertTrue(equals(controlled_behavior(p, Ccan), specification(p)))
        self.assertFalse(is_regular(p, Ccan))

    def test_redundant_controller_is_irregular(self):
        """Test that re-imposing the control manifest is not regular"""
        p = fixture("min_interaction_demo.json")
        Pc = control_manifest(p)
        self.assertGreater(outputs(Pc), 0)
        self.assertFalse(is_regular(p, Pc))

    def test_problem_validation(self):
        """Test dimension checks on problems"""
        with self.assertRaises(DimensionError):
            ControlProblem(R=mat([[1]]), M=mat([[1], [1]]), S=mat([[1]]), w_vars=("w",), c_vars=("c",))
        with self.assertRaises(DimensionError):
            ControlProblem(R=mat([[1]]), M=mat([[1]]), S=mat([[1, 1]]), w_vars=("w",), c_vars=("c",))


class TestParametrization(unittest.TestCase):
    """Test controllers of the form C0 + V Pc"""

    def test_zero_v(self):
        """Test V = 0 returns C0"""
        p = fixture("min_interaction_demo.json")
        C0 = bootstrap_regular_controller(p)
        Pc = control_manifest(p)
        same = parametrize(C0, Pc, PolyMatrix.zeros(C0.rep.rows, Pc.rep.rows))
        self.assertEqual(same.rep, C0.rep)

    def test_nullifying_v(self):
        """Test V = [x^2 - x, x - x^2] zeroes the first column"""
        C = Behavior(mat([[x**2 - x, x - 1, -1]]), ("c1", "c2", "c3"))
        Pc = Behavior(mat([[x, x, 1], [x + 1, x, 0]]), ("c1", "c2", "c3"))
        result = parametrize(C, Pc, mat([[x**2 - x, x - x**2]]))
        self.assertEqual(result.rep, mat([[0, x - 1, x**2 - x - 1]]))

    def test_shape_mismatch(self):
        """Test that a wrongly shaped V is refused"""
        C = Behavior(mat([[1, 0]]), ("a", "b"))
        Pc = Behavior(mat([[0, 1]]), ("a", "b"))
        with self.assertRaises(DimensionError):
            parametrize(C, Pc, mat([[1, 1]]))

    def test_regularize_with_canonical(self):
        """Test that C + Ccan contains C and still implements S"""
        p = fixture("water_tank_ex1.json")
        C = load_problem(PROBLEMS / "water_tank_ex1.json").controller_behavior()
        enlarged = regularize_with(p, C)
        self.assertTrue(includes(C, enlarged))
        self.assertTrue(certify(p, enlarged).implements_specification)
        self.assertTrue(is_regular(p, enlarged))


class TestSynthesisProperties(unittest.TestCase):
    """Property checks on random problems"""

    def test_canonical_controller_implements_exactly_when_implementable(self):
        """Test Ccan implements S exactly when S is implementable"""
        for p in random_cases(101, 60):
            implements = equals(controlled_behavior(p, canonical_controller(p)), specification(p))
            self.assertEqual(implements, is_implementable(p))

    def test_regular_implementability_matches_bootstrap(self):
        """Test the ranking condition agrees with the construction"""
        for p in random_cases(202, 100):
            C0 = bootstrap_regular_controller(p)
            self.assertEqual(is_regularly_implementable(p), C0 is not None)
            if C0 is not None:
                certificate = certify(p, C0)
                self.assertTrue(certificate.regular)
                self.assertTrue(certificate.implements_specification)
                self.assertTrue(certificate.equivalent_to_canonical)

    def test_parametrization_soundness(self):
        """Test random V keeps regularity, equivalence and output count"""
        rng = random.Random(303)
        checked = 0
        for p in random_cases(304, 400):
            if checked >= 100:
                break
            C0 = bootstrap_regular_controller(p)
            if C0 is None:
                continue
            Pc = minimal_rep(control_manifest(p))
            V = random_matrix(rng, C0.rep.rows, Pc.rep.rows, max_degree=1)
            refined = parametrize(C0, Pc, V)
            self.assertTrue(is_regular(p, refined))
            self.assertTrue(equals(intersect(refined, Pc), intersect(canonical_controller(p), Pc)))
            self.assertEqual(outputs(refined), outputs(C0))
            # least restrictive
            self.assertTrue(includes(intersect(refined, Pc), intersect(canonical_controller(p), Pc)))
            checked += 1
        self.assertGreaterEqual(checked, 100)

    def test_parametrization_completeness(self):
        """Test a controller from an independent completion is recovered as C0 + V Pc"""
        rng = random.Random(405)
        for p in random_cases(406, 60):
            C0 = bootstrap_regular_controller(p)
            if C0 is None:
                continue
            Pc = minimal_rep(control_manifest(p))
            G = minimal_rep(canonical_controller(p)).rep
            T = minimal_rep(Behavior(PolyMatrix.vstack(Pc.rep, G), p.c_vars)).rep
            # Reshuffled stack and a fresh completion of Pc inside it
            T2 = random_unimodular(rng, T.rows, steps=3) @ T if T.rows else T
            U1 = solve_left_division(T2, Pc.rep)
            self.assertIsNotNone(U1)
            U2 = unimodular_completion(U1)
            self.assertIsNotNone(U2)
            member = Behavior(U2 @ T2, p.c_vars)
            certificate = certify(p, member)
            self.assertTrue(certificate.regular)
            self.assertTrue(certificate.implements_specification)
            self.assertTrue(certificate.equivalent_to_canonical)

            X = solve_left_division(PolyMatrix.vstack(Pc.rep, C0.rep), member.rep)
            self.assertIsNotNone(X)
            X1 = X.select_cols(range(Pc.rep.rows))
            X2 = X.select_cols(range(Pc.rep.rows, X.cols))
            self.assertTrue(is_unimodular(X2))
            # ker(X2 (C0 + X2^-1 X1 Pc)) = ker(member)
            recovered = Behavior(X2 @ C0.rep + X1 @ Pc.rep, C0.vars)
            self.assertTrue(equals(recovered, member))


def run_tests():
    """Run all tests and print results"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestWaterTank))
    suite.addTests(loader.loadTestsFromTestCase(TestImplementability))
    suite.addTests(loader.loadTestsFromTestCase(TestParametrization))
    suite.addTests(loader.loadTestsFromTestCase(TestSynthesisProperties))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print("\n" + "="*70)
    print("TEST SUMMARY")
    print("="*70)
    print(f"Tests run: {result.testsRun}")
    print(f"Successes: {result.testsRun - len(result.failures) - len(result.errors)}")
    print(f"Failures: {len(result.failures)}")
    print(f"Errors: {len(result.errors)}")
    print("="*70)

    return result.wasSuccessful()


if __name__ == "__main__":
    success = run_tests()
    exit(0 if success else 1)
