"""Numerical kernels: adaptive Gauss-Kronrod, tensor Gauss-Legendre,
small dense linear algebra and finite-difference stencils.

Everything here is physics-agnostic. Integrands are vectorized: they
receive numpy arrays of nodes and must return arrays of the same shape
(complex values are fine).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from .errors import AccuracyError, NumericError, SingularMatrixError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature tolerances shared by every numerical method.

    rel_tol / abs_tol: a result is accepted when its error estimate is
    below ``rel_tol * |value| + abs_tol``.
    max_depth: maximum number of interval bisections in the adaptive
    Gauss-Kronrod rule.
    orders: refinement ladder of the 4-D tensor Gauss-Legendre rule.
    box_sigmas: half-width of the transverse integration box, in units
    of the inverse mode waist on each axis.
    """

    rel_tol: float = 1e-4
    abs_tol: float = 0.0
    max_depth: int = 200
    orders: Tuple[int, ...] = (16, 24, 32)
    box_sigmas: float = 4.5

    def __post_init__(self):
        if not 0 < self.rel_tol <= 0.1:
            raise ValueError(f"rel_tol must lie in (0, 0.1], got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not self.orders or any(n < 2 for n in self.orders):
            raise ValueError("orders must be a non-empty ladder of integers >= 2")
        if any(b <= a for a, b in zip(self.orders, self.orders[1:])):
            raise ValueError(f"orders must be strictly ascending, got {self.orders}")
        if self.box_sigmas <= 0:
            raise ValueError("box_sigmas must be positive")

    def with_abs_tol(self, abs_tol: float) -> "QuadSpec":
        return QuadSpec(self.rel_tol, abs_tol, self.max_depth, self.orders, self.box_sigmas)

    def to_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_depth": self.max_depth,
            "orders": list(self.orders),
            "box_sigmas": self.box_sigmas,
        }


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    evaluations: int = 0

    def accepted(self, quad: QuadSpec) -> bool:
        return self.error <= quad.rel_tol * abs(self.value) + quad.abs_tol


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (7-point Gauss embedded in 15-point Kronrod)
# ---------------------------------------------------------------------------

# node, weight Gauss, weight Kronrod (positive half; the rule is symmetric)
_GAUSS_KRONROD = (
    (0.991455371120812639206854697526329, 0.0, 0.022935322010529224963732008058970),
    (0.949107912342758524526189684047851, 0.129484966168869693270611432679082,
     0.063092092629978553290700663189204),
    (0.864864423359769072789712788640926, 0.0, 0.104790010322250183839876322541518),
    (0.741531185599394439863864773280788, 0.279705391489276667901467771423780,
     0.140653259715525918745189590510238),
    (0.586087235467691130294144845693013, 0.0, 0.169004726639267902826583426598550),
    (0.405845151377397166906606412076961, 0.381830050505118944950369775488975,
     0.190350578064785409913256402421014),
    (0.207784955007898467600689403773245, 0.0, 0.204432940075298892414161999234649),
)
_CENTER_GAUSS = 0.417959183673469387755102040816327
_CENTER_KRONROD = 0.209482141084727828012999174891714

_GK_NODES = np.array([-x for x, _, _ in _GAUSS_KRONROD] + [0.0]
                     + [x for x, _, _ in reversed(_GAUSS_KRONROD)])
_G7_WEIGHTS = np.array([g for _, g, _ in _GAUSS_KRONROD] + [_CENTER_GAUSS]
                       + [g for _, g, _ in reversed(_GAUSS_KRONROD)])
_K15_WEIGHTS = np.array([k for _, _, k in _GAUSS_KRONROD] + [_CENTER_KRONROD]
                        + [k for _, _, k in reversed(_GAUSS_KRONROD)])


def _gk15(f: Integrand, a: float, b: float) -> Tuple[complex, float]:
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    values = np.asarray(f(center + half * _GK_NODES))
    k15 = half * np.dot(_K15_WEIGHTS, values)
    g7 = half * np.dot(_G7_WEIGHTS, values)
    return k15, float(abs(k15 - g7))


def gauss_kronrod(f: Integrand, a: float, b: float, quad: Optional[QuadSpec] = None) -> QuadResult:
    """Adaptive G7/K15 integration of a vectorized integrand over [a, b].

    The interval with the largest error estimate is bisected until the
    summed estimate satisfies the tolerance of ``quad``. Ties go to the
    lowest index, so the subdivision sequence is deterministic.

    Raises AccuracyError (carrying the best estimate) when ``max_depth``
    bisections were not enough.
    """
    quad = quad or QuadSpec()
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = gauss_kronrod(f, b, a, quad)
        return QuadResult(-res.value, res.error, res.evaluations)

    value, error = _gk15(f, a, b)
    intervals = [(a, b, value, error)]
    evaluations = 15

    for _ in range(quad.max_depth):
        total = sum(iv[2] for iv in intervals)
        total_err = sum(iv[3] for iv in intervals)
        if total_err <= quad.rel_tol * abs(total) + quad.abs_tol:
            return QuadResult(total, float(total_err), evaluations)

        worst = int(np.argmax([iv[3] for iv in intervals]))
        left, right, _, _ = intervals[worst]
        mid = 0.5 * (left + right)
        v_left, e_left = _gk15(f, left, mid)
        v_right, e_right = _gk15(f, mid, right)
        evaluations += 30
        intervals[worst] = (left, mid, v_left, e_left)
        intervals.append((mid, right, v_right, e_right))

    total = sum(iv[2] for iv in intervals)
    total_err = sum(iv[3] for iv in intervals)
    if total_err <= quad.rel_tol * abs(total) + quad.abs_tol:
        return QuadResult(total, float(total_err), evaluations)
    raise AccuracyError(f"Gauss-Kronrod did not converge after {quad.max_depth} bisections",
                        value=complex(total), estimate=float(total_err))


# ---------------------------------------------------------------------------
# Tensor-product Gauss-Legendre in four dimensions
# ---------------------------------------------------------------------------

def tensor_quad_4d(f: Callable[..., np.ndarray], box: Sequence[Tuple[float, float]],
                   quad: Optional[QuadSpec] = None) -> QuadResult:
    """Integrate ``f(x0, x1, x2, x3)`` over a 4-D box with a tensor
    Gauss-Legendre rule, stepping through ``quad.orders``.

    ``f`` receives four broadcastable axis arrays of shapes (n,1,1,1),
    (1,n,1,1), (1,1,n,1) and (1,1,1,n), so separable factors cost O(n)
    each. The error estimate is the change between the last two orders;
    the ladder stops early once that change meets the tolerance. A ladder
    that ends unconverged still returns its last value and estimate;
    callers decide with ``QuadResult.accepted``.
    """
    quad = quad or QuadSpec()
    if len(box) != 4:
        raise ValueError(f"tensor_quad_4d needs 4 axis bounds, got {len(box)}")

    previous = None
    error = float("inf")
    evaluations = 0
    for order in quad.orders:
        nodes, weights = leggauss(order)
        axes = []
        axis_weights = []
        for dim, (lo, hi) in enumerate(box):
            half = 0.5 * (hi - lo)
            shape = [1, 1, 1, 1]
            shape[dim] = order
            axes.append((0.5 * (hi + lo) + half * nodes).reshape(shape))
            axis_weights.append(half * weights)

        values = np.broadcast_to(f(*axes), (order,) * 4)
        value = np.einsum("ijkl,i,j,k,l->", values, *axis_weights)
        evaluations += order ** 4

        if previous is not None:
            error = float(abs(value - previous))
            if error <= quad.rel_tol * abs(value) + quad.abs_tol:
                return QuadResult(value, error, evaluations)
        previous = value

    if len(quad.orders) > 1:
        logger.warning("tensor Gauss-Legendre not converged at order %d (estimate %.2e)",
                       quad.orders[-1], error)
    return QuadResult(previous, error, evaluations)


# ---------------------------------------------------------------------------
# Small dense linear algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SVDResult:
    singular_values: np.ndarray
    u: Optional[np.ndarray] = None
    vh: Optional[np.ndarray] = None


def svd_complex(matrix: np.ndarray, compute_factors: bool = False) -> SVDResult:
    """Singular values (descending, non-negative) of a complex matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise ValueError(f"svd_complex needs a non-empty 2-D matrix, got shape {matrix.shape}")
    if compute_factors:
        u, s, vh = np.linalg.svd(matrix, full_matrices=False)
        return SVDResult(s, u, vh)
    return SVDResult(np.linalg.svd(matrix, compute_uv=False))


@dataclass(frozen=True)
class DetSolveResult:
    det: complex
    solution: Optional[np.ndarray]
    condition: float


# Condition numbers beyond this mean the solve carries no correct digits.
SINGULAR_CONDITION = 1.0 / np.finfo(float).eps


def det_solve_4x4(matrix: np.ndarray, rhs: Optional[np.ndarray] = None) -> DetSolveResult:
    """Determinant and (optionally) solution of a small linear system by
    LU with partial pivoting.

    ``rhs`` may be a vector or a matrix of right-hand sides. Raises
    SingularMatrixError when the matrix is singular to working precision.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"det_solve_4x4 needs a square matrix, got shape {matrix.shape}")

    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > SINGULAR_CONDITION:
        raise SingularMatrixError("matrix is singular to working precision", condition)

    lu, piv = lu_factor(matrix, check_finite=True)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    det = np.prod(np.diag(lu)) * (-1) ** swaps

    solution = None
    if rhs is not None:
        solution = lu_solve((lu, piv), np.asarray(rhs))
    return DetSolveResult(det, solution, condition)


# ---------------------------------------------------------------------------
# Root finding and finite differences
# ---------------------------------------------------------------------------

def bracketed_root(f: Callable[[float], float], lo: float, hi: float,
                   xtol: float = 1e-14) -> float:
    """Root of ``f`` in [lo, hi] by Brent's method. The bracket must
    contain a sign change."""
    f_lo, f_hi = f(lo), f(hi)
    if np.sign(f_lo) == np.sign(f_hi) and f_lo != 0 and f_hi != 0:
        raise NumericError(f"no sign change in [{lo}, {hi}]: f = {f_lo:.3e}, {f_hi:.3e}")
    root, info = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, full_output=True)
    logger.debug("brentq converged in %d iterations: root=%.15g", info.iterations, root)
    return root


def gradient_hessian(f: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                     step: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of a scalar field by central differences.

    ``f`` maps an (m, n) array of points to m values. All stencil points
    are passed in one call.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    eye = np.eye(n) * step

    points = [x0]
    for i in range(n):
        points.extend([x0 + eye[i], x0 - eye[i]])
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        points.extend([x0 + eye[i] + eye[j], x0 + eye[i] - eye[j],
                       x0 - eye[i] + eye[j], x0 - eye[i] - eye[j]])

    values = np.asarray(f(np.array(points)), dtype=float)
    f0 = values[0]
    plus = values[1:2 * n + 1:2]
    minus = values[2:2 * n + 1:2]

    grad = (plus - minus) / (2 * step)
    hess = np.diag((plus - 2 * f0 + minus) / step ** 2)
    mixed = values[2 * n + 1:].reshape(-1, 4)
    for (i, j), (pp, pm, mp, mm) in zip(pairs, mixed):
        hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4 * step ** 2)
    return float(f0), grad, hess


def central_derivative(f: Callable[[np.ndarray], np.ndarray], x: float, step: float) -> float:
    """First derivative of a scalar function by a central difference."""
    values = np.asarray(f(np.array([x + step, x - step])), dtype=float)
    return float((values[0] - values[1]) / (2 * step))
