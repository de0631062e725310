"""Effective phase-matching function Theta(w_s, w_i) for the collected modes.

Four evaluators of increasing approximation:

* ``theta_direct``   4-D transverse integral of the exact mismatch (sinc form)
* ``theta_paraxial`` quadratic mismatch, transverse integral in closed form,
                     1-D integral over the crystal length
* ``theta_cga``      sinc replaced by exp(-xi x^2) cos(zeta x), fully closed form
                     (the Gaussian approximation is the same code with (1/5, 0))
* ``theta_perfect``  perfect phase matching across the collected modes

The biphoton amplitude is Psi = pump_temporal(w_s + w_i) * Theta; that product
is formed in ``metrics``. The overall coupling constant is fixed to |N| = 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.linalg import eigh

from .beams import (
    beam_prefactor,
    beam_quadratic,
    fiber_mode,
    idler_center,
    mean_waist,
    pump_spatial,
    pump_temporal,
    signal_center,
)
from .crystal import C_LIGHT, TransverseWaveVector, delta_kz
from .errors import AccuracyError
from .expansion import TaylorExpansion, expand_mismatch
from .numerics import QuadResult, QuadSpec, det_solve_4x4, gauss_kronrod, tensor_quad_4d

if TYPE_CHECKING:
    from .beams import BeamQuadratic
    from .config import SetupConfig

logger = logging.getLogger(__name__)

PI_SQUARED = math.pi ** 2


@dataclass(frozen=True)
class Method:
    """Evaluation method; ``xi`` and ``zeta`` only matter for the
    cosine-Gaussian family."""

    kind: str
    xi: float = 0.0
    zeta: float = 0.0

    KINDS = ("direct", "paraxial", "cga", "ga", "perfect")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"Unknown method '{self.kind}'. Use one of {self.KINDS}")
        if self.kind in ("cga", "ga"):
            if not self.xi > 0:
                raise ValueError(f"xi must be positive, got {self.xi}")
            if self.zeta < 0:
                raise ValueError(f"zeta must be non-negative, got {self.zeta}")

    @classmethod
    def direct(cls) -> "Method":
        return cls("direct")

    @classmethod
    def paraxial(cls) -> "Method":
        return cls("paraxial")

    @classmethod
    def cga(cls, xi: float = 1 / 20, zeta: float = 1 / 2) -> "Method":
        return cls("cga", xi, zeta)

    @classmethod
    def ga(cls) -> "Method":
        return cls("ga", 1 / 5, 0.0)

    @classmethod
    def perfect(cls) -> "Method":
        return cls("perfect")

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().lower().replace("_", "-")
        aliases = {"ppm": "perfect", "perfectpm": "perfect", "perfect-pm": "perfect"}
        key = aliases.get(key, key)
        factories = {
            "direct": cls.direct,
            "paraxial": cls.paraxial,
            "cga": cls.cga,
            "ga": cls.ga,
            "perfect": cls.perfect,
        }
        if key not in factories:
            raise ValueError(f"Unknown method '{name}'. Use one of {cls.KINDS}")
        return factories[key]()

    @property
    def label(self) -> str:
        if self.kind == "cga" and (self.xi, self.zeta) != (1 / 20, 1 / 2):
            return f"cga(xi={self.xi:g},zeta={self.zeta:g})"
        return self.kind

    def __str__(self) -> str:
        return self.label


def sinc_approx(x, xi: float, zeta: float):
    """exp(-xi x^2) cos(zeta x), the closed-form stand-in for sin(x)/x."""
    x = np.asarray(x, dtype=float)
    return np.exp(-xi * x * x) * np.cos(zeta * x)


# ---------------------------------------------------------------------------
# Direct integration
# ---------------------------------------------------------------------------

def theta_direct(setup: "SetupConfig", omega_s: float, omega_i: float,
                 quad: Optional[QuadSpec] = None) -> QuadResult:
    """Exact-mismatch amplitude, L * int u_s u_i A_p sinc(L dk_z / 2) d^4k.

    Tensor Gauss-Legendre over a box of +-box_sigmas/w around each mode
    centre, refined along ``quad.orders``; the returned error is the change
    between the last two orders.
    """
    quad = quad or setup.quad
    col, pump, crystal = setup.collection, setup.pump, setup.crystal
    length = crystal.length
    ks0 = signal_center(omega_s, col)
    ki0 = idler_center(omega_i, col)
    half_s = quad.box_sigmas / col.w_s
    half_i = quad.box_sigmas / col.w_i
    box = [(-half_s, half_s), (-half_s, half_s), (-half_i, half_i), (-half_i, half_i)]

    def integrand(sx, sy, ix, iy):
        ks = TransverseWaveVector(ks0.kx + sx, ks0.ky + sy)
        ki = TransverseWaveVector(ki0.kx + ix, ki0.ky + iy)
        modes = (fiber_mode(ks, omega_s, col.w_s, col.alpha_s, +1)
                 * fiber_mode(ki, omega_i, col.w_i, col.alpha_i, -1))
        phase = 0.5 * length * delta_kz(ks, omega_s, ki, omega_i, crystal)
        return length * modes * pump_spatial(ks + ki, pump) * np.sinc(phase / math.pi)

    result = tensor_quad_4d(integrand, box, quad)
    if len(quad.orders) > 1 and not result.accepted(quad):
        raise AccuracyError(f"direct amplitude at ({omega_s:.5f}, {omega_i:.5f}) not converged "
                            f"at order {quad.orders[-1]}", value=complex(result.value), estimate=result.error)
    logger.debug("direct (%.6f, %.6f): %.6e +- %.1e", omega_s, omega_i, result.value, result.error)
    return result


# ---------------------------------------------------------------------------
# Paraxial method
# ---------------------------------------------------------------------------

def paraxial_integrand(setup: "SetupConfig", omega_s: float, omega_i: float,
                       taylor: Optional[TaylorExpansion] = None,
                       beam: Optional["BeamQuadratic"] = None) -> Callable[[np.ndarray], np.ndarray]:
    """Integrand over z of the paraxial amplitude (without the constant
    prefactor w_s w_i w_p sqrt(pi)).

    M2(z) = B2 - i z D2 is diagonalised once through the generalised
    eigenproblem D2 v = mu B2 v, so that det M2(z) = det B2 * prod(1 - i z mu)
    and every factor has positive real part. Taking the square root factor
    by factor keeps sqrt(det M2) on one continuous branch along z.
    """
    taylor = taylor or expand_mismatch(setup, omega_s, omega_i)
    beam = beam or beam_quadratic(setup, omega_s, omega_i)
    mu, vecs = eigh(taylor.D2, beam.B2)
    b = vecs.T @ beam.B1
    d = vecs.T @ taylor.D1
    sqrt_det_b2 = math.sqrt(np.linalg.det(beam.B2))

    def integrand(z):
        z = np.asarray(z, dtype=float)
        zc = z[..., None]
        factors = 1.0 - 1j * zc * mu
        completed = np.sum(np.square(b - 1j * zc * d) / factors, axis=-1)
        sqrt_det = sqrt_det_b2 * np.prod(np.sqrt(factors), axis=-1)
        return np.exp(-beam.B0 + 1j * z * taylor.D0 + 0.25 * completed) / sqrt_det

    return integrand


def theta_paraxial(setup: "SetupConfig", omega_s: float, omega_i: float,
                   quad: Optional[QuadSpec] = None) -> QuadResult:
    quad = quad or setup.quad
    half = 0.5 * setup.crystal.length
    prefactor = beam_prefactor(setup) * PI_SQUARED
    result = gauss_kronrod(paraxial_integrand(setup, omega_s, omega_i), -half, half, quad)
    return QuadResult(prefactor * result.value, prefactor * result.error, result.evaluations)


# ---------------------------------------------------------------------------
# Cosine-Gaussian / Gaussian approximations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CgaTerms:
    """Theta = gamma * exp(-f) * cos(g)"""

    gamma: float
    f: float
    g: float
    condition: float

    @property
    def value(self) -> float:
        return self.gamma * math.exp(-self.f) * math.cos(self.g)


def cga_terms(setup: "SetupConfig", omega_s: float, omega_i: float, method: Method) -> CgaTerms:
    taylor = expand_mismatch(setup, omega_s, omega_i)
    beam = beam_quadratic(setup, omega_s, omega_i)
    length = setup.crystal.length
    xi, zeta = method.xi, method.zeta
    d0, d1 = taylor.D0, taylor.D1

    k = beam.B2 + 0.25 * xi * length ** 2 * np.outer(d1, d1)
    a = beam.B1 + 0.5 * xi * length ** 2 * d0 * d1
    d = 0.5 * zeta * length * d1
    solved = det_solve_4x4(k, np.column_stack([a, d]))
    k_inv_a, k_inv_d = solved.solution[:, 0], solved.solution[:, 1]

    f = beam.B0 + 0.25 * xi * (length * d0) ** 2 - 0.25 * a @ k_inv_a + 0.25 * d @ k_inv_d
    g = 0.5 * zeta * length * d0 - 0.5 * d @ k_inv_a
    gamma = length * beam_prefactor(setup) * PI_SQUARED / math.sqrt(solved.det.real)
    return CgaTerms(float(gamma), float(f), float(g), solved.condition)


def theta_cga(setup: "SetupConfig", omega_s: float, omega_i: float,
              method: Optional[Method] = None) -> float:
    method = method or Method.cga()
    if method.kind not in ("cga", "ga"):
        raise ValueError(f"theta_cga needs a cga or ga method, got {method.kind}")
    return cga_terms(setup, omega_s, omega_i, method).value


def theta_ga(setup: "SetupConfig", omega_s: float, omega_i: float) -> float:
    return theta_cga(setup, omega_s, omega_i, Method.ga())


# ---------------------------------------------------------------------------
# Perfect phase matching
# ---------------------------------------------------------------------------

def internal_angle(alpha: float, n: float) -> float:
    """Refraction at the crystal face: n * sin(alpha_int) = sin(alpha_ext)."""
    return math.asin(math.sin(alpha) / n)


def theta_perfect(setup: "SetupConfig", omega_s, omega_i):
    """Closed-form Theta when dk_z vanishes over the collected modes."""
    col, pump = setup.collection, setup.pump
    n0 = float(setup.crystal.n_ordinary(pump.omega0))
    a_s = internal_angle(col.alpha_s, n0)
    a_i = internal_angle(col.alpha_i, n0)
    wbar = mean_waist(col.w_s, col.w_i, pump.w_p)
    prefactor = 4 * math.sqrt(math.pi) * setup.crystal.length * wbar ** 2 / (col.w_s * col.w_i * pump.w_p)
    transverse = np.asarray(omega_s) * a_s - np.asarray(omega_i) * a_i
    return prefactor * np.exp(-0.5 * (n0 * wbar / C_LIGHT) ** 2 * np.square(transverse))


def psi_perfect(setup: "SetupConfig", omega_s, omega_i):
    return pump_temporal(np.add(omega_s, omega_i), setup.pump) * theta_perfect(setup, omega_s, omega_i)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def evaluate_theta(setup: "SetupConfig", omega_s: float, omega_i: float, method: Method,
                   quad: Optional[QuadSpec] = None) -> complex:
    """Theta at one frequency pair by any method."""
    if method.kind == "direct":
        return complex(theta_direct(setup, omega_s, omega_i, quad).value)
    if method.kind == "paraxial":
        return complex(theta_paraxial(setup, omega_s, omega_i, quad).value)
    if method.kind in ("cga", "ga"):
        return complex(theta_cga(setup, omega_s, omega_i, method))
    return complex(theta_perfect(setup, omega_s, omega_i))
