"""Fiber-coupled biphoton amplitude on a frequency grid and its figures
of merit: brightness, Schmidt spectrum and purity, overlaps, spectral
filters, and the closed-form decorrelation / brightness results.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eigh

from .beams import mean_waist, optimal_pump_waist, pump_temporal
from .crystal import BAND_UM, C_LIGHT
from .epmf import Method, cga_terms, evaluate_theta, internal_angle, psi_perfect, theta_perfect
from .errors import (
    DegenerateInputError,
    DomainError,
    GeometryError,
    NoPhaseMatchingError,
    ShapeError,
    ValidityError,
    WindowError,
)
from .numerics import QuadSpec, bracketed_root, gauss_kronrod, gradient_hessian, svd_complex

if TYPE_CHECKING:
    from .config import SetupConfig

logger = logging.getLogger(__name__)

__all__ = [
    "AmplitudeGrid", "FilterSpec", "SchmidtSpectrum", "FilterOptimum",
    "build_grid", "amplitude_widths", "auto_window", "apply_filters", "brightness", "pair_rate",
    "pump_reach", "pump_live",
    "brightness_ppm_analytic",
    "brightness_cga_analytic", "optimal_pump_waist", "schmidt", "purity", "overlap",
    "marginal_spectra", "decorrelation_tau_ppm", "decorrelation_tau_ga", "max_filter_bandwidth",
]

# Window = WINDOW_FACTOR x the 1/e half-width of |Psi| (diagonal and anti-diagonal).
WINDOW_FACTOR = 4.0
# |Psi| on the grid edge must stay below this fraction of its maximum.
EDGE_DECAY = 1e-3
# Below this fraction of the central value a sample only needs absolute accuracy.
TAIL_FRACTION = 1e-2
# Frequency step (rad/fs) for expanding f and g of the closed-form brightness.
ANALYTIC_STEP = 1e-4
# Samples whose pump amplitude is below this fraction of its peak are left at zero.
PUMP_CUTOFF = 1e-12


@dataclass(frozen=True)
class FilterSpec:
    """Gaussian amplitude transmissions exp(-(w - w0)^2 / 2 sigma^2).
    A missing width means no filter on that arm."""

    sigma_s: Optional[float]
    sigma_i: Optional[float]
    omega0: float

    def __post_init__(self):
        for name in ("sigma_s", "sigma_i"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"filter {name} must be positive, got {value}")

    @classmethod
    def from_nm(cls, sigma_s_nm: Optional[float], sigma_i_nm: Optional[float], omega0: float) -> "FilterSpec":
        """Widths given in nm at the degenerate wavelength 2 pi c / omega0."""
        scale = omega0 ** 2 / (2 * math.pi * C_LIGHT) * 1e-3

        def convert(value):
            return None if value is None else float(value) * scale

        return cls(convert(sigma_s_nm), convert(sigma_i_nm), omega0)

    @staticmethod
    def _transmission(omega, sigma: Optional[float], omega0: float):
        if sigma is None:
            return np.ones_like(np.asarray(omega, dtype=float))
        return np.exp(-0.5 * np.square((np.asarray(omega) - omega0) / sigma))

    def signal(self, omega):
        return self._transmission(omega, self.sigma_s, self.omega0)

    def idler(self, omega):
        return self._transmission(omega, self.sigma_i, self.omega0)


@dataclass(frozen=True)
class AmplitudeGrid:
    """Samples values[j, k] = Psi(omega_s[j], omega_i[k]) on a uniform grid."""

    omega_s: np.ndarray
    omega_i: np.ndarray
    values: np.ndarray
    method: str
    config_hash: str
    omega0: float
    quantity: str = "psi"

    def __post_init__(self):
        for name in ("omega_s", "omega_i"):
            axis = getattr(self, name)
            steps = np.diff(axis)
            if axis.ndim != 1 or axis.size < 2 or np.any(steps <= 0) \
                    or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ShapeError(f"{name} must be a strictly increasing uniform axis")
        if self.values.shape != (self.omega_s.size, self.omega_i.size):
            raise ShapeError(f"values shape {self.values.shape} does not match axes "
                             f"({self.omega_s.size}, {self.omega_i.size})")

    @property
    def n(self) -> int:
        return self.omega_s.size

    @property
    def spacing(self) -> Tuple[float, float]:
        return float(self.omega_s[1] - self.omega_s[0]), float(self.omega_i[1] - self.omega_i[0])

    @property
    def window(self) -> float:
        return 0.5 * float(self.omega_s[-1] - self.omega_s[0])

    def wavelengths_nm(self) -> Tuple[np.ndarray, np.ndarray]:
        return 2e3 * math.pi * C_LIGHT / self.omega_s, 2e3 * math.pi * C_LIGHT / self.omega_i

    def same_axes(self, other: "AmplitudeGrid") -> bool:
        """Equal shapes and samples agreeing to 1e-6 of the grid spacing."""
        if self.omega_s.shape != other.omega_s.shape or self.omega_i.shape != other.omega_i.shape:
            return False
        step_s, step_i = self.spacing
        return (np.allclose(self.omega_s, other.omega_s, rtol=0, atol=1e-6 * step_s)
                and np.allclose(self.omega_i, other.omega_i, rtol=0, atol=1e-6 * step_i))

    def swapped(self) -> "AmplitudeGrid":
        """Signal and idler exchanged."""
        return replace(self, omega_s=self.omega_i, omega_i=self.omega_s, values=self.values.T)


@dataclass(frozen=True)
class SchmidtSpectrum:
    coefficients: np.ndarray
    purity: float
    signal_modes: Optional[np.ndarray] = None
    idler_modes: Optional[np.ndarray] = None

    @property
    def cooperativity(self) -> float:
        return 1.0 / self.purity

    def head(self, k: int = 5):
        return [float(x) for x in self.coefficients[:k]]


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------

def _psi_function(setup: "SetupConfig", method: Method, quad: Optional[QuadSpec] = None,
                  filtered: bool = False) -> Callable[[float, float], complex]:
    filters = setup.filters if filtered else None

    def psi(omega_s: float, omega_i: float) -> complex:
        if not pump_live(setup, omega_s + omega_i):
            return 0j
        value = pump_temporal(omega_s + omega_i, setup.pump) * evaluate_theta(setup, omega_s, omega_i, method, quad)
        if filters is not None:
            value *= float(filters.signal(omega_s) * filters.idler(omega_i))
        return complex(value)

    return psi


def pump_reach(setup: "SetupConfig") -> float:
    """Pump detuning (rad/fs) beyond which its envelope drops below
    PUMP_CUTOFF of the peak."""
    return math.sqrt(-2 * math.log(PUMP_CUTOFF)) / setup.pump.tau_p


def pump_live(setup: "SetupConfig", omega_sum):
    """True where w_s + w_i lies within ``pump_reach`` of 2 w0."""
    return np.abs(np.asarray(omega_sum) - 2 * setup.pump.omega0) < pump_reach(setup)


def _band_limit(setup: "SetupConfig", gated: bool = True) -> float:
    """Largest detuning keeping the signal, the idler and every evaluated
    pump frequency w_s + w_i inside the dispersion band.

    With ``gated`` the samples outside ``pump_reach`` are never evaluated,
    so the pump only limits the window when its reach leaves the band.
    """
    omega0 = setup.pump.omega0
    omega_min = 2 * math.pi * C_LIGHT / BAND_UM[1]
    omega_max = 2 * math.pi * C_LIGHT / BAND_UM[0]
    pump_room = omega_max - 2 * omega0
    if pump_room <= 0:
        raise DomainError(f"pump frequency {2 * omega0:.4f} rad/fs lies above the supported band "
                          f"({BAND_UM[0]}-{BAND_UM[1]} um)")
    limit = min(omega0 - omega_min, omega_max - omega0)
    if not gated or pump_reach(setup) >= 0.98 * pump_room:
        limit = min(limit, 0.5 * pump_room)
    return 0.98 * limit


def _half_width(profile: Callable[[float], float], peak: float, start: float, limit: float) -> Optional[float]:
    """1/e half-width of a profile symmetric-ish about 0, by doubling then bisection."""
    threshold = math.exp(-1) * peak
    nu = min(start, limit)
    for _ in range(60):
        if profile(nu) >= threshold:
            break
        nu *= 0.5
    lo = nu
    hi = None
    while nu < limit:
        nu = min(2 * nu, limit)
        if profile(nu) < threshold:
            hi = nu
            break
        lo = nu
    if hi is None:
        return None
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        if profile(mid) < threshold:
            hi = mid
        else:
            lo = mid
    return hi


def amplitude_widths(setup: "SetupConfig", method: Method) -> Tuple[float, float]:
    """1/e half-widths (rad/fs) of the filtered |Psi| along the diagonal
    (w0 + nu, w0 + nu) and the anti-diagonal (w0 + nu, w0 - nu).

    A direction along which |Psi| does not decay inside the dispersion
    band reports the band limit.
    """
    omega0 = setup.pump.omega0
    sampled = Method.paraxial() if method.kind == "direct" else method
    psi = _psi_function(setup, sampled, filtered=True)
    peak = abs(psi(omega0, omega0))
    if peak == 0:
        raise DegenerateInputError("amplitude vanishes at the degenerate point")
    limit = _band_limit(setup)
    start = 0.5 / setup.pump.tau_p

    def diagonal(nu):
        return max(abs(psi(omega0 + nu, omega0 + nu)), abs(psi(omega0 - nu, omega0 - nu)))

    def anti_diagonal(nu):
        return max(abs(psi(omega0 + nu, omega0 - nu)), abs(psi(omega0 - nu, omega0 + nu)))

    widths = []
    for label, profile in (("diagonal", diagonal), ("anti-diagonal", anti_diagonal)):
        width = _half_width(profile, peak, start, limit)
        if width is None:
            logger.warning("amplitude does not decay along the %s inside the dispersion band", label)
            width = limit
        widths.append(width)
    return widths[0], widths[1]


def auto_window(setup: "SetupConfig", method: Method) -> float:
    """Half-width (rad/fs) covering WINDOW_FACTOR times the 1/e extent of
    |Psi| along the diagonal and anti-diagonal through (w0, w0), filters
    included."""
    diagonal, anti_diagonal = amplitude_widths(setup, method)
    window = min(WINDOW_FACTOR * max(diagonal, anti_diagonal), _band_limit(setup))
    logger.debug("auto window %.5f rad/fs (diagonal %.5f, anti-diagonal %.5f)", window, diagonal, anti_diagonal)
    return window


def _point_quad(setup: "SetupConfig", method: Method) -> QuadSpec:
    """Per-point tolerance: relative near the peak, absolute in the tails."""
    quad = setup.quad
    if method.kind in ("direct", "paraxial"):
        omega0 = setup.pump.omega0
        center = abs(evaluate_theta(setup, omega0, omega0, method, quad))
        quad = quad.with_abs_tol(quad.rel_tol * TAIL_FRACTION * center)
    return quad


def _check_edges(values: np.ndarray, half: float):
    magnitude = np.abs(values)
    peak = magnitude.max()
    edge = max(magnitude[0, :].max(), magnitude[-1, :].max(), magnitude[:, 0].max(), magnitude[:, -1].max())
    if peak == 0:
        raise DegenerateInputError("amplitude grid is identically zero")
    if edge >= EDGE_DECAY * peak:
        raise WindowError(f"|Psi| at the grid edge is {edge / peak:.2e} of its peak "
                          f"(limit {EDGE_DECAY:g}); enlarge the window beyond {half:.4g} rad/fs")


def build_grid(setup: "SetupConfig", method: Method, n: Optional[int] = None,
               window: Optional[float] = None, threads: int = 1, quantity: str = "psi",
               verify: bool = True, axis: Optional[np.ndarray] = None) -> AmplitudeGrid:
    """Sample Psi = pump_temporal(w_s + w_i) * Theta (or Theta alone with
    ``quantity="theta"``) on an n x n grid centred at (w0, w0).

    Window: explicit argument, else the config's, else ``auto_window``.
    An explicit ``axis`` overrides all three and ``n``; it is used as is
    for both photons, so two grids built from one axis compare exactly.
    Psi samples beyond ``pump_reach`` are left at zero without evaluating
    Theta. Points are independent, so ``threads`` only changes wall time.
    The edge check is done on the filtered amplitude when the config
    carries filters, since that is what gets integrated.
    """
    if quantity not in ("psi", "theta"):
        raise ValueError(f"quantity must be 'psi' or 'theta', got {quantity!r}")
    omega0 = setup.pump.omega0
    gated = quantity == "psi"
    if axis is not None:
        axis = np.asarray(axis, dtype=float)
        n = axis.size
        half = 0.5 * float(axis[-1] - axis[0])
    else:
        n = n or setup.grid_n
        half = window or setup.window
    if n < 8:
        raise ValueError(f"grid size must be >= 8, got {n}")
    if not half:
        widths = amplitude_widths(setup, method)
        half = min(WINDOW_FACTOR * max(widths), _band_limit(setup, gated))
        spacing = 2 * half / (n - 1)
        if spacing > min(widths):
            logger.warning("grid spacing %.4g rad/fs exceeds the narrowest amplitude width %.4g rad/fs; "
                           "grid brightness and purity are unreliable (raise grid.n)", spacing, min(widths))
    elif method.kind != "perfect" and half > _band_limit(setup, gated) * (1 + 1e-9):
        raise DomainError(f"window half-width {half:.4g} rad/fs reaches outside the supported band; "
                          f"the largest usable {quantity} window here is {_band_limit(setup, gated):.4g} rad/fs")
    if axis is None:
        axis = omega0 + np.linspace(-half, half, n)

    if method.kind == "perfect":
        ws, wi = np.meshgrid(axis, axis, indexing="ij")
        values = (psi_perfect(setup, ws, wi) if quantity == "psi" else theta_perfect(setup, ws, wi)) + 0j
    else:
        quad = _point_quad(setup, method)

        def row(j: int) -> np.ndarray:
            out = np.zeros(n, dtype=complex)
            live = pump_live(setup, axis[j] + axis) if gated else np.ones(n, dtype=bool)
            for k in np.flatnonzero(live):
                out[k] = evaluate_theta(setup, axis[j], axis[k], method, quad)
            if gated:
                out *= pump_temporal(axis[j] + axis, setup.pump)
            return out

        values = np.empty((n, n), dtype=complex)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(row, j): j for j in range(n)}
                for future in as_completed(futures):
                    values[futures[future]] = future.result()
        else:
            for j in range(n):
                values[j] = row(j)

    grid = AmplitudeGrid(axis, axis.copy(), values, method.label, setup.hash(), omega0, quantity)
    if verify and quantity == "psi":
        checked = apply_filters(grid, setup.filters) if setup.filters else grid
        _check_edges(checked.values, half)
    logger.debug("built %dx%d %s grid, half-width %.5f rad/fs", n, n, method.label, half)
    return grid


def apply_filters(grid: AmplitudeGrid, filters: Optional[FilterSpec]) -> AmplitudeGrid:
    """Multiply by the signal and idler amplitude transmissions."""
    if filters is None:
        return grid
    if not math.isclose(filters.omega0, grid.omega0, rel_tol=1e-12):
        raise ValueError("filters and grid are centred on different frequencies")
    envelope = np.outer(filters.signal(grid.omega_s), filters.idler(grid.omega_i))
    return replace(grid, values=grid.values * envelope)


# ---------------------------------------------------------------------------
# Figures of merit
# ---------------------------------------------------------------------------

def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    step = axis[1] - axis[0]
    weights = np.full(axis.size, step)
    weights[[0, -1]] = 0.5 * step
    return weights


def brightness(grid: AmplitudeGrid) -> float:
    """Pair-production probability per pulse, the integral of |Psi|^2."""
    density = np.abs(grid.values) ** 2
    return float(trapezoid(trapezoid(density, grid.omega_i, axis=1), grid.omega_s))


def pair_rate(setup: "SetupConfig", method: Method, quad: Optional[QuadSpec] = None) -> float:
    """Brightness of ``setup`` (filters applied) without a grid.

    Integrates |Psi|^2 over u = nu_s + nu_i and v = nu_s - nu_i with
    adaptive Gauss-Kronrod, each range sized to the amplitude's own
    extent. Narrow pump ridges that a uniform grid would alias are
    resolved this way.
    """
    quad = quad or setup.quad
    omega0 = setup.pump.omega0
    diagonal, anti_diagonal = amplitude_widths(setup, method)
    limit = _band_limit(setup)
    u_half = min(2 * WINDOW_FACTOR * diagonal, limit)
    v_half = min(2 * WINDOW_FACTOR * anti_diagonal, 2 * limit - u_half)

    if method.kind == "perfect":
        def density(u: float, v: np.ndarray) -> np.ndarray:
            ws, wi = omega0 + 0.5 * (u + v), omega0 + 0.5 * (u - v)
            value = psi_perfect(setup, ws, wi)
            if setup.filters is not None:
                value = value * setup.filters.signal(ws) * setup.filters.idler(wi)
            return np.abs(value) ** 2
    else:
        psi = _psi_function(setup, method, _point_quad(setup, method), filtered=True)

        def density(u: float, v: np.ndarray) -> np.ndarray:
            return np.array([abs(psi(omega0 + 0.5 * (u + x), omega0 + 0.5 * (u - x))) ** 2 for x in v])

    inner_quad = replace(quad, rel_tol=0.1 * quad.rel_tol)

    def inner(us: np.ndarray) -> np.ndarray:
        return np.array([gauss_kronrod(lambda v: density(u, v), -v_half, v_half, inner_quad).value for u in us])

    # d(nu_s) d(nu_i) = du dv / 2
    return 0.5 * float(np.real(gauss_kronrod(inner, -u_half, u_half, quad).value))


def marginal_spectra(grid: AmplitudeGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Signal and idler single-photon spectral densities."""
    density = np.abs(grid.values) ** 2
    return trapezoid(density, grid.omega_i, axis=1), trapezoid(density, grid.omega_s, axis=0)


def schmidt(grid: AmplitudeGrid, modes: int = 0) -> SchmidtSpectrum:
    """Schmidt coefficients from the singular values of the sample matrix.

    Uniform grids make the quadrature weight a common factor, which the
    normalisation removes. With ``modes > 0`` the first mode functions are
    returned, normalised to sum(|phi|^2) * d_omega = 1.
    """
    if not np.any(grid.values):
        raise DegenerateInputError("cannot decompose an all-zero amplitude grid")
    svd = svd_complex(grid.values, compute_factors=modes > 0)
    weights = svd.singular_values ** 2
    coefficients = weights / weights.sum()
    spectrum_purity = float(np.sum(coefficients ** 2))

    if modes > 0:
        d_s, d_i = grid.spacing
        return SchmidtSpectrum(coefficients, spectrum_purity,
                               svd.u[:, :modes].T / math.sqrt(d_s),
                               svd.vh[:modes, :] / math.sqrt(d_i))
    return SchmidtSpectrum(coefficients, spectrum_purity)


def purity(spectrum: SchmidtSpectrum) -> float:
    return float(np.sum(np.square(spectrum.coefficients)))


def overlap(a: AmplitudeGrid, b: AmplitudeGrid) -> complex:
    """<a|b> / (|a| |b|) with trapezoid weights on the shared axes."""
    if not a.same_axes(b):
        raise ShapeError("overlap needs grids on identical axes")
    weights = np.outer(_trapezoid_weights(a.omega_s), _trapezoid_weights(a.omega_i))
    norm_a = math.sqrt(float(np.sum(weights * np.abs(a.values) ** 2)))
    norm_b = math.sqrt(float(np.sum(weights * np.abs(b.values) ** 2)))
    if norm_a == 0 or norm_b == 0:
        raise DegenerateInputError("overlap with an all-zero grid")
    return complex(np.sum(weights * np.conj(a.values) * b.values) / (norm_a * norm_b))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _internal_angles(setup: "SetupConfig") -> Tuple[float, float, float]:
    n0 = float(setup.crystal.n_ordinary(setup.pump.omega0))
    return (n0, internal_angle(setup.collection.alpha_s, n0),
            internal_angle(setup.collection.alpha_i, n0))


def brightness_ppm_analytic(setup: "SetupConfig") -> float:
    """Brightness in the perfect-phase-matching limit."""
    col, pump = setup.collection, setup.pump
    n0, a_s, a_i = _internal_angles(setup)
    if a_s + a_i <= 0:
        raise GeometryError("collinear collection: the perfect-phase-matching rate diverges")
    wbar = mean_waist(col.w_s, col.w_i, pump.w_p)
    return (16 * math.pi ** 1.5 * C_LIGHT * setup.crystal.length ** 2 * wbar ** 3
            / (n0 * (a_s + a_i) * col.w_s ** 2 * col.w_i ** 2 * pump.w_p ** 2))


def decorrelation_tau_ppm(setup: "SetupConfig") -> float:
    """Pulse parameter tau_p removing the frequency cross-term of the
    perfect-phase-matching amplitude."""
    n0, a_s, a_i = _internal_angles(setup)
    if a_s == 0 or a_i == 0:
        logger.warning("collinear collection: no geometric decorrelation, returning 0")
        return 0.0
    wbar = mean_waist(setup.collection.w_s, setup.collection.w_i, setup.pump.w_p)
    return n0 * wbar * math.sqrt(a_s * a_i) / C_LIGHT


def _ga_exponent(setup: "SetupConfig"):
    method = Method.ga()
    omega0 = setup.pump.omega0

    def f(points: np.ndarray) -> np.ndarray:
        return np.array([cga_terms(setup, omega0 + p[0], omega0 + p[1], method).f for p in points])

    return f


def decorrelation_tau_ga(setup: "SetupConfig", step: Optional[float] = None) -> float:
    """tau_p from the Gaussian approximation: tau_p^2 = -d^2 f / dw_s dw_i.

    The mixed derivative is taken at step h and h/2 and Richardson
    extrapolated.
    """
    h = step or 1e-3 / setup.pump.tau_p
    f = _ga_exponent(setup)
    mixed = gradient_hessian(f, np.zeros(2), h)[2][0, 1]
    mixed_half = gradient_hessian(f, np.zeros(2), 0.5 * h)[2][0, 1]
    if mixed_half != 0 and abs(mixed - mixed_half) > 1e-4 * abs(mixed_half):
        logger.warning("mixed derivative not step-stable: %.6e vs %.6e", mixed, mixed_half)
    extrapolated = (4 * mixed_half - mixed) / 3
    if extrapolated >= 0:
        raise NoPhaseMatchingError(
            f"Gaussian-approximation exponent has mixed derivative {extrapolated:.4e} fs^2 >= 0: "
            "no pulse duration removes the spectral correlation")
    return math.sqrt(-extrapolated)


def _complex_gaussian_integral(quad: np.ndarray, imag: np.ndarray, linear: np.ndarray) -> complex:
    """int exp(-v.(Q - iG).v - b.v) d^2v = pi / sqrt(det(Q - iG)) * exp(b.(Q - iG)^-1.b / 4)

    Q must be positive definite; the square root is taken factor by
    factor on the generalised eigenbasis of (G, Q).
    """
    mu, vecs = eigh(imag, quad)
    factors = 1.0 - 1j * mu
    projected = vecs.T @ linear
    sqrt_det = math.sqrt(np.linalg.det(quad)) * np.prod(np.sqrt(factors))
    return math.pi / sqrt_det * np.exp(0.25 * np.sum(projected ** 2 / factors))


def brightness_cga_analytic(setup: "SetupConfig", method: Optional[Method] = None) -> float:
    """Brightness with f and g of the cosine-Gaussian form expanded to
    second order in the detunings and the prefactor frozen at (w0, w0).
    cos^2 g = 1/2 + e^{2ig}/4 + e^{-2ig}/4 turns |Psi|^2 into three
    Gaussians, each integrated in closed form."""
    method = method or Method.cga()
    if method.kind not in ("cga", "ga"):
        raise ValueError(f"analytic brightness needs a cga or ga method, got {method.kind}")
    omega0 = setup.pump.omega0
    tau = setup.pump.tau_p

    def term(name):
        def evaluate(points):
            return np.array([getattr(cga_terms(setup, omega0 + p[0], omega0 + p[1], method), name)
                             for p in points])
        return evaluate

    gamma = cga_terms(setup, omega0, omega0, method).gamma
    f0, f1, f2 = gradient_hessian(term("f"), np.zeros(2), ANALYTIC_STEP)
    g0, g1, g2 = gradient_hessian(term("g"), np.zeros(2), ANALYTIC_STEP)

    quad = f2 + tau ** 2 * np.ones((2, 2))
    if np.any(np.linalg.eigvalsh(quad) <= 0):
        raise ValidityError("second-order exponent is not positive definite; "
                            "the analytic cosine-Gaussian brightness does not apply")

    prefactor = gamma ** 2 * tau / math.sqrt(math.pi) * math.exp(-2 * f0)
    plain = _complex_gaussian_integral(quad, np.zeros((2, 2)), 2 * f1).real
    oscillating = np.exp(2j * g0) * _complex_gaussian_integral(quad, g2, 2 * f1 - 2j * g1)
    return float(prefactor * (0.5 * plain + 0.5 * oscillating.real))


# ---------------------------------------------------------------------------
# Filter bandwidth for a target purity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterOptimum:
    sigma_nm: float
    sigma_rad_fs: float
    purity: float
    brightness: float
    saturated: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "sigma_nm": self.sigma_nm,
            "sigma_rad_fs": self.sigma_rad_fs,
            "purity": self.purity,
            "Rc": self.brightness,
            "saturated": self.saturated,
        }


def filtered_purity(setup: "SetupConfig", method: Method, threads: int = 1) -> float:
    grid = apply_filters(build_grid(setup, method, threads=threads), setup.filters)
    return schmidt(grid).purity


def max_filter_bandwidth(setup: "SetupConfig", method: Method, target: float = 0.99,
                         bracket_nm: Tuple[float, float] = (0.2, 30.0), threads: int = 1) -> FilterOptimum:
    """Widest equal signal/idler filter keeping the purity at ``target``."""
    cache: Dict[float, float] = {}

    def evaluate(sigma_nm: float) -> float:
        if sigma_nm not in cache:
            cache[sigma_nm] = filtered_purity(setup.replace_path("filters.sigma_nm", sigma_nm), method, threads)
        return cache[sigma_nm]

    lo, hi = bracket_nm
    if evaluate(lo) < target:
        raise ValidityError(f"purity {evaluate(lo):.4f} below {target} even at {lo} nm")
    if evaluate(hi) >= target:
        sigma_nm, saturated = hi, True
    else:
        sigma_nm = bracketed_root(lambda s: evaluate(s) - target, lo, hi, xtol=1e-2)
        saturated = False
    sigma = FilterSpec.from_nm(sigma_nm, None, setup.pump.omega0).sigma_s
    rate = pair_rate(setup.replace_path("filters.sigma_nm", sigma_nm), method)
    return FilterOptimum(sigma_nm, sigma, evaluate(sigma_nm), rate, saturated)
