"""Uniaxial-crystal dispersion for type-I (e -> o + o) down-conversion.

Internal units: micrometres, femtoseconds, rad/fs, rad/um.
Transverse wave vectors are in the lab frame; the optic axis lies in the
x-z plane at ``cut_angle`` from z.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, EvanescentWaveError, GeometryError, NoPhaseMatchingError
from .numerics import bracketed_root

logger = logging.getLogger(__name__)

# Speed of light in um/fs.
C_LIGHT = 0.299792458

# Wavelength band (um) where the shipped dispersion fits are valid.
BAND_UM = (0.35, 1.1)

# Bracket for the opening-angle search (external angle, rad).
ANGLE_BRACKET = (0.0, math.radians(15.0))

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Sellmeier:
    """n^2 = a + b / (lambda^2 - c) - d * lambda^2, lambda in um."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_list(cls, coefficients: Sequence[float]) -> "Sellmeier":
        if not 1 <= len(coefficients) <= 4:
            raise ValueError(f"Sellmeier needs 1 to 4 coefficients, got {len(coefficients)}")
        return cls(*[float(x) for x in coefficients])

    @classmethod
    def constant(cls, n: float) -> "Sellmeier":
        return cls(n * n)

    def index(self, wavelength_um: ArrayLike) -> ArrayLike:
        lam2 = np.square(wavelength_um)
        return np.sqrt(self.a + self.b / (lam2 - self.c) - self.d * lam2)

    def to_list(self):
        return [self.a, self.b, self.c, self.d]


# Built-in dispersion data: (ordinary, extraordinary) principal indices.
SELLMEIER_SETS: Dict[str, Tuple[Sellmeier, Sellmeier]] = {
    # beta-barium borate, Kato (1986)
    "BBO": (Sellmeier(2.7405, 0.0184, 0.0179, 0.0155),
            Sellmeier(2.3730, 0.0128, 0.0156, 0.0044)),
    # beta-barium borate, Eimerl et al. (1987)
    "BBO-Eimerl": (Sellmeier(2.7359, 0.01878, 0.01822, 0.01354),
                   Sellmeier(2.3753, 0.01224, 0.01667, 0.01516)),
}


@dataclass(frozen=True)
class TransverseWaveVector:
    """Transverse wave vector (rad/um). Components may be numpy arrays."""

    kx: ArrayLike = 0.0
    ky: ArrayLike = 0.0

    def __add__(self, other: "TransverseWaveVector") -> "TransverseWaveVector":
        return TransverseWaveVector(self.kx + other.kx, self.ky + other.ky)

    def __sub__(self, other: "TransverseWaveVector") -> "TransverseWaveVector":
        return TransverseWaveVector(self.kx - other.kx, self.ky - other.ky)

    def norm2(self) -> ArrayLike:
        return np.square(self.kx) + np.square(self.ky)


@dataclass(frozen=True)
class CrystalSpec:
    length: float
    cut_angle: float
    sellmeier_o: Sellmeier
    sellmeier_e: Sellmeier
    name: str = "custom"

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"crystal length must be positive, got {self.length}")
        if not 0 < self.cut_angle < math.pi / 2:
            raise ValueError(f"cut angle must lie in (0, pi/2), got {self.cut_angle}")
        band = np.linspace(*BAND_UM, 64)
        for label, fit in (("ordinary", self.sellmeier_o), ("extraordinary", self.sellmeier_e)):
            with np.errstate(invalid="ignore"):
                n = fit.index(band)
            if not np.all(np.isfinite(n)) or np.any(n <= 1):
                raise ValueError(f"{label} Sellmeier fit is not real and > 1 over {BAND_UM} um")

    @classmethod
    def named(cls, name: str, length: float, cut_angle: float) -> "CrystalSpec":
        try:
            o, e = SELLMEIER_SETS[name]
        except KeyError:
            raise ValueError(f"Unknown crystal '{name}'. Available: {sorted(SELLMEIER_SETS)}")
        return cls(length, cut_angle, o, e, name)

    def with_length(self, length: float) -> "CrystalSpec":
        return replace(self, length=length)

    def n_ordinary(self, omega: ArrayLike) -> ArrayLike:
        return self.sellmeier_o.index(_wavelength(omega))

    def n_extraordinary_principal(self, omega: ArrayLike) -> ArrayLike:
        return self.sellmeier_e.index(_wavelength(omega))


def _wavelength(omega: ArrayLike) -> ArrayLike:
    lam = 2 * math.pi * C_LIGHT / np.asarray(omega, dtype=float)
    if np.any(lam < BAND_UM[0]) or np.any(lam > BAND_UM[1]):
        lo, hi = float(np.min(lam)), float(np.max(lam))
        raise DomainError(f"wavelength {lo:.4f}-{hi:.4f} um outside the supported band "
                          f"{BAND_UM[0]}-{BAND_UM[1]} um")
    return lam if lam.ndim else float(lam)


def n_ordinary(omega: ArrayLike, crystal: CrystalSpec) -> ArrayLike:
    return crystal.n_ordinary(omega)


def kz_ordinary(kperp: TransverseWaveVector, omega: ArrayLike, crystal: CrystalSpec) -> ArrayLike:
    k = crystal.n_ordinary(omega) * np.asarray(omega) / C_LIGHT
    radicand = np.square(k) - kperp.norm2()
    if np.any(radicand < 0):
        raise EvanescentWaveError("ordinary wave is evanescent: |k_perp| exceeds n_o * omega / c")
    return np.sqrt(radicand)


def extraordinary_coefficients(kperp: TransverseWaveVector, omega: ArrayLike,
                               crystal: CrystalSpec, theta_c: float):
    """Coefficients (A, B, C) of A*kz^2 + B*kz + C = 0, the extraordinary
    normal surface written in lab-frame kz."""
    a = 1.0 / np.square(crystal.n_extraordinary_principal(omega))
    b = 1.0 / np.square(crystal.n_ordinary(omega))
    s, c = math.sin(theta_c), math.cos(theta_c)
    kx, ky = np.asarray(kperp.kx), np.asarray(kperp.ky)
    quad_a = a + (b - a) * c * c
    quad_b = 2 * (b - a) * s * c * kx
    quad_c = a * (kx * kx + ky * ky) + (b - a) * s * s * kx * kx - np.square(np.asarray(omega) / C_LIGHT)
    return quad_a, quad_b, quad_c


def kz_extraordinary(kperp: TransverseWaveVector, omega: ArrayLike, crystal: CrystalSpec,
                     theta_c: Optional[float] = None) -> ArrayLike:
    """Forward root of the extraordinary normal surface.

    The root taken is (-B + sqrt(B^2 - 4AC)) / 2A, whose group velocity
    along z (proportional to 2A*kz + B) is non-negative. It is evaluated
    in the cancellation-free form.
    """
    theta_c = crystal.cut_angle if theta_c is None else theta_c
    qa, qb, qc = extraordinary_coefficients(kperp, omega, crystal, theta_c)
    disc = qb * qb - 4 * qa * qc
    if np.any(disc < 0):
        raise EvanescentWaveError("extraordinary wave is evanescent: no real kz")
    root = np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        kz = np.where(qb >= 0, 2 * qc / (-qb - root), (root - qb) / (2 * qa))
    kz = np.where(np.isfinite(kz), kz, (root - qb) / (2 * qa))
    if np.any(kz <= 0):
        raise GeometryError("extraordinary wave has no forward-propagating solution")
    return kz if np.ndim(kz) else float(kz)


def delta_kz(kperp_s: TransverseWaveVector, omega_s: ArrayLike,
             kperp_i: TransverseWaveVector, omega_i: ArrayLike,
             crystal: CrystalSpec) -> ArrayLike:
    """Longitudinal mismatch k_pz(k_s + k_i, w_s + w_i) - k_sz - k_iz."""
    pump = kz_extraordinary(kperp_s + kperp_i, np.add(omega_s, omega_i), crystal)
    return pump - kz_ordinary(kperp_s, omega_s, crystal) - kz_ordinary(kperp_i, omega_i, crystal)


def central_kperp(omega: ArrayLike, alpha: float, sign: int) -> TransverseWaveVector:
    """Center of a collection mode: sign * x * omega * sin(alpha) / c."""
    return TransverseWaveVector(sign * np.asarray(omega) * math.sin(alpha) / C_LIGHT, 0.0)


def solve_opening_angle(crystal: CrystalSpec, omega0: float) -> float:
    """External half-opening angle of the degenerate emission cone."""

    def mismatch(alpha: float) -> float:
        return float(delta_kz(central_kperp(omega0, alpha, +1), omega0,
                              central_kperp(omega0, alpha, -1), omega0, crystal))

    lo, hi = ANGLE_BRACKET
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0:
        return lo
    if f_lo * f_hi > 0:
        raise NoPhaseMatchingError(
            f"no phase matching for cut angle {math.degrees(crystal.cut_angle):.3f} deg at "
            f"{2 * math.pi * C_LIGHT / omega0 * 1e3:.1f} nm: mismatch keeps the sign of "
            f"{f_lo:+.3e} rad/um over 0-15 deg")

    alpha = bracketed_root(mismatch, lo, hi, xtol=1e-15)
    logger.debug("opening angle %.6f deg (residual %.2e rad/um)", math.degrees(alpha), mismatch(alpha))
    return alpha
