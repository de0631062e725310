"""Pump and collection-mode amplitudes and the Gaussian quadratic form of
their product.

The transverse offset vector is kappa = (k_s - k_s0, k_i - k_i0), laid
out as (sx, sy, ix, iy). With this layout

    A_p(k_s + k_i) * u_s(k_s) * u_i(k_i)
        = beam_prefactor(...) * exp(-B0 - B1 . kappa - kappa . B2 . kappa)
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .crystal import ArrayLike, TransverseWaveVector, central_kperp

if TYPE_CHECKING:
    from .config import SetupConfig

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class PumpSpec:
    tau_p: float
    w_p: float
    omega0: float

    def __post_init__(self):
        for name in ("tau_p", "w_p", "omega0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pump {name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class CollectionSpec:
    alpha_s: float
    alpha_i: float
    w_s: float
    w_i: float

    def __post_init__(self):
        for name in ("w_s", "w_i"):
            if not getattr(self, name) > 0:
                raise ValueError(f"collection {name} must be positive, got {getattr(self, name)}")
        for name in ("alpha_s", "alpha_i"):
            if not 0 <= getattr(self, name) < math.pi / 2:
                raise ValueError(f"collection {name} must lie in [0, pi/2), got {getattr(self, name)}")

    @property
    def symmetric(self) -> bool:
        return self.alpha_s == self.alpha_i and self.w_s == self.w_i


@dataclass(frozen=True)
class BeamQuadratic:
    B0: float
    B1: np.ndarray
    B2: np.ndarray


def pump_temporal(omega: ArrayLike, pump: PumpSpec) -> ArrayLike:
    """Gaussian pulse spectrum centred at 2*omega0, unit L2 norm."""
    return (math.sqrt(pump.tau_p) / math.pi ** 0.25
            * np.exp(-0.5 * pump.tau_p ** 2 * np.square(np.asarray(omega) - 2 * pump.omega0)))


def pump_spatial(kperp: TransverseWaveVector, pump: PumpSpec) -> ArrayLike:
    return pump.w_p / SQRT_PI * np.exp(-0.5 * pump.w_p ** 2 * kperp.norm2())


def fiber_mode(kperp: TransverseWaveVector, omega: ArrayLike, waist: float,
               alpha: float, sign: int) -> ArrayLike:
    """Single-mode fiber collection mode, a Gaussian centred on the
    frequency-dependent direction sign * x * omega * sin(alpha) / c."""
    offset = kperp - central_kperp(omega, alpha, sign)
    return waist / SQRT_PI * np.exp(-0.5 * waist ** 2 * offset.norm2())


def signal_center(omega_s: ArrayLike, collection: CollectionSpec) -> TransverseWaveVector:
    return central_kperp(omega_s, collection.alpha_s, +1)


def idler_center(omega_i: ArrayLike, collection: CollectionSpec) -> TransverseWaveVector:
    return central_kperp(omega_i, collection.alpha_i, -1)


def mean_waist(w_s: float, w_i: float, w_p: float) -> float:
    """w_bar = (1/w_s^2 + 1/w_i^2 + 1/w_p^2) ** -1/2"""
    return (w_s ** -2 + w_i ** -2 + w_p ** -2) ** -0.5


def beam_prefactor(setup: "SetupConfig") -> float:
    """Normalisation w_s * w_i * w_p / pi^(3/2) kept outside the quadratic form."""
    return setup.collection.w_s * setup.collection.w_i * setup.pump.w_p / math.pi ** 1.5


def beam_quadratic(setup: "SetupConfig", omega_s: float, omega_i: float) -> BeamQuadratic:
    pump, collection = setup.pump, setup.collection
    s = signal_center(omega_s, collection) + idler_center(omega_i, collection)
    sum_center = np.array([float(s.kx), float(s.ky)])
    wp2 = pump.w_p ** 2

    b0 = 0.5 * wp2 * float(sum_center @ sum_center)
    b1 = wp2 * np.concatenate([sum_center, sum_center])

    eye = np.eye(2)
    b2 = 0.5 * np.block([
        [(wp2 + collection.w_s ** 2) * eye, wp2 * eye],
        [wp2 * eye, (wp2 + collection.w_i ** 2) * eye],
    ])
    return BeamQuadratic(b0, b1, b2)


def optimal_pump_waist(w_s: float, w_i: float) -> float:
    """Pump waist maximising the fiber-coupled pair rate."""
    if w_s <= 0 or w_i <= 0:
        raise ValueError("waists must be positive")
    if math.isinf(w_i):
        return w_s / math.sqrt(2)
    if math.isinf(w_s):
        return w_i / math.sqrt(2)
    return w_s * w_i / math.sqrt(2 * (w_s ** 2 + w_i ** 2))
