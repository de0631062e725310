"""Second-order expansion of the phase mismatch in the transverse offsets.

    dk_z(kappa) ~ D0 + D1 . kappa + kappa . D2 . kappa

with kappa laid out as in ``beams``. Derivatives come from central
differences of ``crystal.delta_kz``; the ordinary blocks are checked
against the closed-form derivatives in the tests.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict

import numpy as np

from .beams import idler_center, signal_center
from .crystal import TransverseWaveVector, delta_kz, kz_extraordinary, kz_ordinary
from .numerics import central_derivative, gradient_hessian

if TYPE_CHECKING:
    from .config import SetupConfig

logger = logging.getLogger(__name__)

# Central-difference steps: transverse (rad/um) and frequency (rad/fs).
KPERP_STEP = 1e-3
OMEGA_STEP = 1e-4


@dataclass(frozen=True)
class TaylorExpansion:
    D0: float
    D1: np.ndarray
    D2: np.ndarray
    omega_s: float
    omega_i: float

    def evaluate(self, kappa: np.ndarray) -> np.ndarray:
        """Quadratic model at offsets of shape (..., 4)."""
        kappa = np.asarray(kappa, dtype=float)
        return self.D0 + kappa @ self.D1 + np.einsum("...i,ij,...j->...", kappa, self.D2, kappa)


@dataclass(frozen=True)
class ValidityReport:
    tau_margin: float
    waist_margin: float

    @property
    def tau_ok(self) -> bool:
        return self.tau_margin >= 1.0

    @property
    def waist_ok(self) -> bool:
        return self.waist_margin >= 1.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "tau_margin": self.tau_margin,
            "waist_margin": self.waist_margin,
            "tau_ok": self.tau_ok,
            "waist_ok": self.waist_ok,
        }


def mismatch_at_offsets(setup: "SetupConfig", omega_s: float, omega_i: float):
    """Return kappa -> dk_z for offsets of shape (m, 4) around the mode centres."""
    ks0 = signal_center(omega_s, setup.collection)
    ki0 = idler_center(omega_i, setup.collection)

    def mismatch(kappa: np.ndarray) -> np.ndarray:
        kappa = np.atleast_2d(kappa)
        ks = TransverseWaveVector(ks0.kx + kappa[:, 0], ks0.ky + kappa[:, 1])
        ki = TransverseWaveVector(ki0.kx + kappa[:, 2], ki0.ky + kappa[:, 3])
        return delta_kz(ks, omega_s, ki, omega_i, setup.crystal)

    return mismatch


def expand_mismatch(setup: "SetupConfig", omega_s: float, omega_i: float,
                    step: float = KPERP_STEP) -> TaylorExpansion:
    d0, d1, hessian = gradient_hessian(mismatch_at_offsets(setup, omega_s, omega_i),
                                       np.zeros(4), step)
    d2 = 0.25 * (hessian + hessian.T)
    return TaylorExpansion(d0, d1, d2, omega_s, omega_i)


def group_mismatch_beta(setup: "SetupConfig", step: float = OMEGA_STEP) -> float:
    """beta = dk_pz/dw at 2*w0 minus dk_sz/dw at w0, transverse vectors held
    at their central values."""
    omega0 = setup.pump.omega0
    ks0 = signal_center(omega0, setup.collection)
    kp0 = ks0 + idler_center(omega0, setup.collection)

    def pump_kz(omega):
        return kz_extraordinary(kp0, omega, setup.crystal)

    def signal_kz(omega):
        return kz_ordinary(ks0, omega, setup.crystal)

    return (central_derivative(pump_kz, 2 * omega0, step)
            - central_derivative(signal_kz, omega0, step))


def cga_validity(setup: "SetupConfig") -> ValidityReport:
    """Margins tau_p / (beta L) and w_s / (L |D1|); the cosine-Gaussian
    replacement is trusted when both are at least 1."""
    length = setup.crystal.length
    omega0 = setup.pump.omega0
    beta = abs(group_mismatch_beta(setup))
    d1 = float(np.linalg.norm(expand_mismatch(setup, omega0, omega0).D1))

    tau_margin = setup.pump.tau_p / (beta * length) if beta > 0 else math.inf
    waist_margin = setup.collection.w_s / (length * d1) if d1 > 0 else math.inf
    report = ValidityReport(tau_margin, waist_margin)
    if not (report.tau_ok and report.waist_ok):
        logger.warning("cosine-Gaussian validity margins below 1: tau %.3g, waist %.3g",
                       tau_margin, waist_margin)
    return report
