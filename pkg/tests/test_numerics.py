"""Tests for the numerical kernels."""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import AccuracyError, NumericError, SingularMatrixError
from src.numerics import (
    QuadResult,
    QuadSpec,
    bracketed_root,
    central_derivative,
    det_solve_4x4,
    gauss_kronrod,
    gradient_hessian,
    svd_complex,
    tensor_quad_4d,
)


class TestQuadSpec(unittest.TestCase):
    """Tolerance validation"""

    def test_defaults(self):
        quad = QuadSpec()
        self.assertEqual(quad.rel_tol, 1e-4)
        self.assertEqual(quad.orders, (16, 24, 32))

    def test_rel_tol_range(self):
        for bad in (0.0, -1e-3, 0.5):
            with self.assertRaises(ValueError):
                QuadSpec(rel_tol=bad)
        QuadSpec(rel_tol=0.1)

    def test_orders_must_ascend(self):
        with self.assertRaises(ValueError):
            QuadSpec(orders=(24, 16))
        with self.assertRaises(ValueError):
            QuadSpec(orders=())

    def test_with_abs_tol(self):
        quad = QuadSpec(rel_tol=1e-3).with_abs_tol(1e-9)
        self.assertEqual(quad.abs_tol, 1e-9)
        self.assertEqual(quad.rel_tol, 1e-3)
        self.assertEqual(quad.to_dict()["orders"], [16, 24, 32])

    def test_accepted(self):
        quad = QuadSpec(rel_tol=1e-3)
        self.assertTrue(QuadResult(1.0, 5e-4).accepted(quad))
        self.assertFalse(QuadResult(1.0, 5e-3).accepted(quad))


class TestGaussKronrod(unittest.TestCase):
    """Adaptive 1-D quadrature"""

    def test_gaussian(self):
        result = gauss_kronrod(lambda x: np.exp(-x * x), -10, 10, QuadSpec(rel_tol=1e-10))
        self.assertAlmostEqual(result.value.real, math.sqrt(math.pi), places=10)

    def test_polynomial_exact(self):
        # K15 integrates degree-22 polynomials exactly
        result = gauss_kronrod(lambda x: x ** 8, 0, 2, QuadSpec(rel_tol=1e-12))
        self.assertAlmostEqual(result.value.real, 2 ** 9 / 9, places=10)

    def test_complex_integrand(self):
        result = gauss_kronrod(lambda x: np.exp(1j * x), 0, math.pi, QuadSpec(rel_tol=1e-10))
        self.assertAlmostEqual(result.value.real, 0.0, places=10)
        self.assertAlmostEqual(result.value.imag, 2.0, places=10)

    def test_reversed_and_empty_interval(self):
        quad = QuadSpec(rel_tol=1e-10)
        forward = gauss_kronrod(np.cos, 0, 1, quad).value
        backward = gauss_kronrod(np.cos, 1, 0, quad).value
        self.assertAlmostEqual(forward, -backward, places=12)
        self.assertEqual(gauss_kronrod(np.cos, 1, 1, quad).value, 0.0)

    def test_deterministic(self):
        quad = QuadSpec(rel_tol=1e-8)
        f = lambda x: np.exp(-x * x) * np.cos(3 * x)  # noqa: E731
        self.assertEqual(gauss_kronrod(f, -5, 5, quad), gauss_kronrod(f, -5, 5, quad))

    def test_gives_up_with_estimate(self):
        with self.assertRaises(AccuracyError) as ctx:
            gauss_kronrod(lambda x: np.sign(x - 0.3), -1, 1, QuadSpec(rel_tol=1e-10, max_depth=3))
        self.assertTrue(math.isfinite(ctx.exception.estimate))

    @settings(max_examples=60, deadline=None)
    @given(
        width=st.floats(0.3, 3.0),
        freq=st.floats(0.0, 4.0),
        power=st.integers(0, 4),
    )
    def test_error_estimate_is_honest(self, width, freq, power):
        # Gaussian x polynomial x cosine against scipy's reference.
        from scipy.integrate import quad as scipy_quad

        def f(x):
            return np.exp(-(x / width) ** 2) * x ** power * np.cos(freq * x)

        spec = QuadSpec(rel_tol=1e-6, abs_tol=1e-9)
        result = gauss_kronrod(f, -8 * width, 8 * width, spec)
        reference = scipy_quad(f, -8 * width, 8 * width, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        tolerance = spec.rel_tol * max(abs(reference), abs(result.value)) + spec.abs_tol
        self.assertLessEqual(abs(result.value - reference), 3 * max(result.error, tolerance))


class TestTensorQuad(unittest.TestCase):
    """4-D tensor Gauss-Legendre"""

    def test_four_dimensional_gaussian(self):
        def f(a, b, c, d):
            return np.exp(-(a * a + b * b + c * c + d * d))

        result = tensor_quad_4d(f, [(-5, 5)] * 4, QuadSpec(rel_tol=1e-10, orders=(24, 32, 40)))
        self.assertAlmostEqual(result.value.real, math.pi ** 2, places=7)
        self.assertGreater(result.evaluations, 0)

    def test_wrong_dimension(self):
        with self.assertRaises(ValueError):
            tensor_quad_4d(lambda a, b, c: a, [(0, 1)] * 3)

    def test_not_converged(self):
        def f(a, b, c, d):
            return np.cos(40 * a) * np.ones_like(b) * np.ones_like(c) * np.ones_like(d)

        quad = QuadSpec(rel_tol=1e-8, orders=(4, 6))
        with self.assertLogs("src.numerics", level="WARNING"):
            result = tensor_quad_4d(f, [(0, 3)] * 4, quad)
        self.assertFalse(result.accepted(quad))
        self.assertTrue(math.isfinite(result.error))
        self.assertGreater(result.error, 0)


class TestLinearAlgebra(unittest.TestCase):
    """SVD and determinant/solve"""

    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_svd_descending_nonnegative(self):
        matrix = self.rng.normal(size=(6, 5)) + 1j * self.rng.normal(size=(6, 5))
        svd = svd_complex(matrix)
        s = svd.singular_values
        self.assertTrue(np.all(s >= 0))
        self.assertTrue(np.all(np.diff(s) <= 0))
        self.assertAlmostEqual(float(np.sum(s ** 2)), float(np.sum(np.abs(matrix) ** 2)), places=10)

    def test_svd_factors_reconstruct(self):
        matrix = self.rng.normal(size=(4, 4)) + 1j * self.rng.normal(size=(4, 4))
        svd = svd_complex(matrix, compute_factors=True)
        rebuilt = svd.u @ np.diag(svd.singular_values) @ svd.vh
        np.testing.assert_allclose(rebuilt, matrix, atol=1e-12)

    def test_svd_rejects_empty(self):
        with self.assertRaises(ValueError):
            svd_complex(np.zeros((0, 3)))

    def test_det_solve(self):
        matrix = self.rng.normal(size=(4, 4)) + 4 * np.eye(4)
        rhs = self.rng.normal(size=(4, 2))
        result = det_solve_4x4(matrix, rhs)
        self.assertAlmostEqual(result.det, np.linalg.det(matrix), places=9)
        np.testing.assert_allclose(matrix @ result.solution, rhs, atol=1e-12)
        self.assertGreaterEqual(result.condition, 1.0)

    def test_det_sign_with_pivoting(self):
        permutation = np.eye(4)[[1, 0, 2, 3]]
        self.assertAlmostEqual(det_solve_4x4(permutation).det, -1.0)

    def test_complex_system(self):
        matrix = self.rng.normal(size=(4, 4)) + 1j * self.rng.normal(size=(4, 4)) + 3 * np.eye(4)
        rhs = self.rng.normal(size=4) + 0j
        result = det_solve_4x4(matrix, rhs)
        np.testing.assert_allclose(matrix @ result.solution, rhs, atol=1e-12)
        self.assertAlmostEqual(complex(result.det), complex(np.linalg.det(matrix)), places=9)

    def test_singular(self):
        matrix = np.diag([1.0, 2.0, 3.0, 0.0])
        with self.assertRaises(SingularMatrixError) as ctx:
            det_solve_4x4(matrix)
        self.assertGreater(ctx.exception.condition, 1e15)

    def test_not_square(self):
        with self.assertRaises(ValueError):
            det_solve_4x4(np.ones((3, 4)))


class TestRootsAndDifferences(unittest.TestCase):
    """Brent root finding and central differences"""

    def test_root(self):
        self.assertAlmostEqual(bracketed_root(lambda x: x * x - 2, 0, 2), math.sqrt(2), places=13)

    def test_root_at_bracket_end(self):
        self.assertEqual(bracketed_root(lambda x: x - 1.0, 1.0, 2.0), 1.0)

    def test_no_sign_change(self):
        with self.assertRaises(NumericError):
            bracketed_root(lambda x: x * x + 1, -1, 1)

    def test_gradient_hessian_quadratic(self):
        a = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]])
        b = np.array([1.0, -2.0, 0.5])

        def f(points):
            return np.einsum("mi,ij,mj->m", points, a, points) + points @ b + 4.0

        f0, grad, hess = gradient_hessian(f, np.zeros(3), 1e-3)
        self.assertAlmostEqual(f0, 4.0)
        np.testing.assert_allclose(grad, b, atol=1e-9)
        np.testing.assert_allclose(hess, 2 * a, atol=1e-6)

    def test_central_derivative(self):
        self.assertAlmostEqual(central_derivative(np.sin, 0.3, 1e-5), math.cos(0.3), places=9)


if __name__ == "__main__":
    unittest.main()
