"""
Unit Tests for Minimal Interaction
Tests index strings, column nullification, the depth-first search and its
agreement with exhaustive search
"""

import os
import random
import unittest
from pathlib import Path

import sympy as sp

from behavior import irrelevant_columns
from control import (
    STATUS_NOT_REGULARLY_IMPLEMENTABLE,
    STATUS_SOLVED,
    bootstrap_regular_controller,
    control_manifest,
)
from minint import (
    EPSILON,
    NullifyResult,
    SearchString,
    all_strings,
    check_nullify,
    compute_v,
    first_new_prefix,
    max_nullifiable_bound,
    minimize_interaction,
    next_terminal,
    nullify,
    oracle_max_nullifiable,
    prefixes,
    skip_subtree,
    string_nav,
    string_order,
    subset_is_nullifiable,
    terminal_strings,
)
from polymat import XI, DimensionError, Poly, PolyMatrix, col_gcd_bezout, rank
from problem_file import load_problem
from random_instances import random_matrix, random_problem

x = XI
PROBLEMS = Path(os.getenv("PROJECT_ROOT", Path(__file__).resolve().parent.parent)) / "data" / "problems"


def mat(rows, cols=None) -> PolyMatrix:
    return PolyMatrix.from_rows([[Poly.from_expr(sp.sympify(e)) for e in row] for row in rows], cols)


def S(text: str) -> SearchString:
    return SearchString(tuple(int(ch) for ch in text))


# Three-column controller row and its two-equation control manifest
EX_C = mat([[x**2 - x, x - 1, -1]])
EX_P = mat([[x, x, 1], [x + 1, x, 0]])


class TestSearchStrings(unittest.TestCase):
    """Test the ordering and navigation of index strings"""

    def test_listing_for_three_symbols(self):
        """Test S = {e, 1, 12, 123, 13, 2, 23, 3}"""
        expected = [EPSILON, S("1"), S("12"), S("123"), S("13"), S("2"), S("23"), S("3")]
        self.assertEqual(all_strings(3), expected)

    def test_terminal_strings(self):
        """Test T = {123, 13, 23, 3}"""
        self.assertEqual(terminal_strings(3), [S("123"), S("13"), S("23"), S("3")])

    def test_order(self):
        """Test prefix-first comparison"""
        self.assertEqual(string_order(EPSILON, S("3")), -1)
        self.assertEqual(string_order(S("123"), S("13")), -1)
        self.assertEqual(string_order(S("2"), S("13")), 1)
        self.assertEqual(string_order(S("23"), S("23")), 0)

    def test_increasing_symbols_only(self):
        """Test that non-increasing strings are refused"""
        with self.assertRaises(ValueError):
            SearchString((2, 1))

    def test_navigation(self):
        """Test the navigation operators for c = 3"""
        self.assertEqual(next_terminal(S("1"), 1, 3), S("123"))
        self.assertEqual(skip_subtree(S("12"), 3), S("13"))
        self.assertEqual(first_new_prefix(S("1"), S("13")), S("13"))
        self.assertEqual(prefixes(S("13")), (EPSILON, S("1"), S("13")))
        self.assertIsNone(first_new_prefix(S("13"), S("1")))
        self.assertIsNone(skip_subtree(S("3"), 3))
        self.assertEqual(next_terminal(S("3"), 0, 3), EPSILON)

    def test_dispatch(self):
        """Test the operator table"""
        self.assertEqual(string_nav("plus", S("13")), 3)
        self.assertEqual(string_nav("minus", S("13")), S("1"))
        self.assertEqual(string_nav("ket", S("1"), 1, c=3), S("123"))
        self.assertEqual(string_nav("ceil", S("12"), c=3), S("13"))
        self.assertEqual(string_nav("down", S("1"), S("13")), S("13"))
        with self.assertRaises(ValueError):
            string_nav("ket", S("1"), 1)
        with self.assertRaises(ValueError):
            string_nav("sideways", S("1"))


class TestNullify(unittest.TestCase):
    """Test single column nullification"""

    def test_first_column(self):
        """Test nullifying column 0 of the three-column controller"""
        result = nullify(EX_C, EX_P, 0)
        self.assertFalse(result.fail)
        self.assertFalse(result.skip)
        self.assertEqual(result.C_tilde.col(0), (Poly.zero(),))
        self.assertEqual(result.C_tilde, mat([[0, x - 1, x**2 - x - 1]]))
        self.assertEqual(result.V1_tilde, mat([[x - x**2]]))
        self.assertTrue(check_nullify(EX_C, EX_P, 0, result))

    def test_printed_tuple(self):
        """Test the hand-computed tuple satisfies every postcondition"""
        printed = NullifyResult(
            C_tilde=mat([[0, x - 1, x**2 - x - 1]]),
            P2_tilde=mat([[0, -x, -x - 1]]),
            V1_tilde=mat([[x - x**2]]),
            U=mat([[-1, 1], [-x - 1, x]]),
            fail=False,
            skip=False,
        )
        self.assertTrue(check_nullify(EX_C, EX_P, 0, printed))
        tampered = NullifyResult(printed.C_tilde, printed.P2_tilde, mat([[x]]), printed.U, False, False)
        self.assertFalse(check_nullify(EX_C, EX_P, 0, tampered))

    def test_second_column_fails(self):
        """Test gcd x does not divide x - 1"""
        result = nullify(mat([[0, x - 1, x**2 - x - 1]]), mat([[0, -x, -x - 1]]), 1)
        self.assertTrue(result.fail)
        pi, _ = col_gcd_bezout(mat([[0, -x, -x - 1]]).col(1))
        self.assertEqual(pi, Poly.from_expr(x))

    def test_zero_column_skips(self):
        """Test an already-zero column comes back unchanged"""
        C = mat([[0, 1]])
        P = mat([[x, 1]])
        result = nullify(C, P, 0)
        self.assertTrue(result.skip)
        self.assertFalse(result.fail)
        self.assertEqual(result.C_tilde, C)
        self.assertEqual(result.P2_tilde, P)
        self.assertEqual(result.U, PolyMatrix.identity(1))

    def test_bad_column(self):
        """Test an out-of-range column"""
        with self.assertRaises(DimensionError):
            nullify(EX_C, EX_P, 3)

    def test_residual_identity(self):
        """Test C + ([V1 V2] U) P = C~ + V2 P~2 for random V2"""
        rng = random.Random(31)
        checked = 0
        while checked < 40:
            C = random_matrix(rng, rng.randint(1, 2), 3, max_degree=2)
            P = random_matrix(rng, rng.randint(1, 3), 3, max_degree=2)
            col = rng.randrange(3)
            result = nullify(C, P, col)
            if result.fail or result.skip:
                continue
            V2 = random_matrix(rng, C.rows, result.P2_tilde.rows, max_degree=1)
            V = PolyMatrix.hstack(result.V1_tilde, V2) @ result.U
            self.assertEqual(C + V @ P, result.C_tilde + V2 @ result.P2_tilde)
            checked += 1

    def test_divisibility_criterion(self):
        """Test failure matches unsolvability of the single-column equation"""
        rng = random.Random(37)
        for _ in range(60):
            C = random_matrix(rng, rng.randint(1, 2), 3, max_degree=2)
            P = random_matrix(rng, rng.randint(1, 2), 3, max_degree=2)
            col = rng.randrange(3)
            result = nullify(C, P, col)
            if result.skip:
                continue
            self.assertEqual(result.fail, not subset_is_nullifiable(C, P, [col]))


class TestSearch(unittest.TestCase):
    """Test the search for a maximal set of zero columns"""

    def test_three_column_controller(self):
        """Test exactly the first column can be nullified"""
        V, zero_cols = compute_v(EX_C, EX_P)
        self.assertEqual(zero_cols, (0,))
        self.assertEqual((EX_C + V @ EX_P).zero_columns(), (0,))
        for pair in [(0, 1), (0, 2), (1, 2)]:
            self.assertFalse(subset_is_nullifiable(EX_C, EX_P, pair))
        self.assertTrue(subset_is_nullifiable(EX_C, EX_P, [2]))

    def test_oracle_on_three_column_controller(self):
        """Test exhaustive search agrees"""
        self.assertEqual(oracle_max_nullifiable(EX_C, EX_P), (1, (0,)))

    def test_existing_zero_columns(self):
        """Test V = 0 when only the existing zero column survives"""
        V, zero_cols = compute_v(mat([[0, 1]]), mat([[0, x]]))
        self.assertEqual(zero_cols, (0,))
        self.assertEqual(V, PolyMatrix.zeros(1, 1))

    def test_zero_controller(self):
        """Test every column of a zero controller stays zero"""
        C = PolyMatrix.zeros(1, 3)
        _, zero_cols = compute_v(C, EX_P)
        self.assertEqual(zero_cols, (0, 1, 2))
        self.assertEqual(oracle_max_nullifiable(C, EX_P)[0], 3)

    def test_unreachable_column(self):
        """Test a zero column of P blocks a nonzero column of C"""
        C = mat([[1, 1]])
        P = mat([[0, 1]])
        count, witness = oracle_max_nullifiable(C, P)
        self.assertEqual(count, 1)
        self.assertNotIn(0, witness)
        self.assertEqual(compute_v(C, P)[1], (1,))

    def test_oracle_column_limit(self):
        """Test the oracle refuses wide instances"""
        with self.assertRaises(DimensionError):
            oracle_max_nullifiable(PolyMatrix.zeros(1, 4), PolyMatrix.zeros(1, 4), max_columns=3)

    def test_agrees_with_oracle(self):
        """Test search and exhaustive search on random instances"""
        rng = random.Random(41)
        for _ in range(200):
            c = rng.randint(1, 4)
            C = random_matrix(rng, rng.randint(1, 2), c, max_degree=2)
            P = random_matrix(rng, rng.randint(0, 2), c, max_degree=2)
            V, zero_cols = compute_v(C, P)
            count, witness = oracle_max_nullifiable(C, P)
            self.assertEqual(len(zero_cols), count)
            self.assertEqual(zero_cols, witness)
            self.assertTrue(subset_is_nullifiable(C, P, zero_cols))
            self.assertEqual((C + V @ P).zero_columns(), zero_cols)
            self.assertLessEqual(count, max_nullifiable_bound(C, P))

    def test_bound_for_regular_pairs(self):
        """Test newly zero columns never exceed c - rank C"""
        rng = random.Random(43)
        checked = 0
        for _ in range(80):
            p = random_problem(rng, max_c=3)
            C0 = bootstrap_regular_controller(p)
            if C0 is None or C0.rep.rows == 0:
                continue
            Pc = control_manifest(p)
            _, zero_cols = compute_v(C0.rep, Pc.rep)
            already = len(C0.rep.zero_columns())
            self.assertLessEqual(len(zero_cols) - already, len(p.c_vars) - rank(C0.rep))
            self.assertEqual(max_nullifiable_bound(C0.rep, Pc.rep), len(p.c_vars) - rank(C0.rep))
            checked += 1
        self.assertGreater(checked, 0)


class TestMinimizeInteraction(unittest.TestCase):
    """Test the end-to-end minimal interaction synthesis"""

    def test_demo_problem(self):
        """Test that the first control variable is disconnected"""
        p = load_problem(PROBLEMS / "min_interaction_demo.json").to_problem()
        result = minimize_interaction(p, oracle=True)
        self.assertEqual(result.status, STATUS_SOLVED)
        self.assertEqual(result.irrelevant, ("c1",))
        self.assertEqual(result.details["zero_columns"], ["c1"])
        self.assertTrue(result.details["oracle_agrees"])
        self.assertTrue(result.certificate.passed)

    def test_free_specification(self):
        """Test S = P leaves every control variable irrelevant"""
        p = load_problem(PROBLEMS / "water_tank.json").to_problem()
        result = minimize_interaction(p)
        self.assertEqual(result.irrelevant, ("u", "d"))
        self.assertEqual(result.controller.rep.rows, 0)

    def test_not_regularly_implementable(self):
        """Test the autonomous plant has no solution"""
        p = load_problem(PROBLEMS / "autonomous_plant.json").to_problem()
        self.assertEqual(minimize_interaction(p).status, STATUS_NOT_REGULARLY_IMPLEMENTABLE)

    def test_irrelevance_grows(self):
        """Test the result frees at least as many variables as the bootstrap"""
        rng = random.Random(47)
        for _ in range(30):
            p = random_problem(rng, max_c=3)
            C0 = bootstrap_regular_controller(p)
            result = minimize_interaction(p)
            if C0 is None:
                self.assertFalse(result.solved)
                continue
            self.assertGreaterEqual(len(result.irrelevant), len(irrelevant_columns(C0)))
            self.assertEqual(result.irrelevant, irrelevant_columns(result.controller))
            self.assertTrue(result.certificate.regular)
            self.assertTrue(result.certificate.equivalent_to_canonical)


def run_tests():
    """Run all tests and print results"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestSearchStrings))
    suite.addTests(loader.loadTestsFromTestCase(TestNullify))
    suite.addTests(loader.loadTestsFromTestCase(TestSearch))
    suite.addTests(loader.loadTestsFromTestCase(TestMinimizeInteraction))

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
