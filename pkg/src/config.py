"""Configuration management for spdc-fiber.

``config.yaml`` describes one source setup in interface units (um, fs,
degrees, nm) plus named scan recipes. ``Config`` finds and reads the file;
``SetupConfig`` is the immutable, resolved description every physics
routine takes.
"""

import copy
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv

from .beams import CollectionSpec, PumpSpec, optimal_pump_waist
from .crystal import C_LIGHT, CrystalSpec, Sellmeier, solve_opening_angle
from .errors import ConfigError, SpdcError
from .metrics import FilterSpec
from .numerics import QuadSpec

DEFAULT_GRID_N = 32

# Defaults filled in when a section or key is missing.
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "crystal": {"name": "BBO", "length_um": 1000.0, "cut_angle_deg": 30.0},
    "pump": {"wavelength_nm": 780.0, "tau_fwhm_fs": 100.0, "w_um": "optimal"},
    "collection": {"alpha_deg": "auto", "w_s_um": 70.0},
    "filters": {},
    "quad": {"rel_tol": 1e-3, "max_depth": 200, "orders": [16, 24, 32], "box_sigmas": 4.5},
    "grid": {"n": DEFAULT_GRID_N, "window": "auto"},
}

SETUP_SECTIONS = tuple(DEFAULTS)

# Keys that lose their meaning when another key for the same quantity is set.
_SHADOWED_BY: Dict[str, Tuple[str, ...]] = {
    "pump.tau_fwhm_fs": ("tau_p_fs",),
    "pump.tau_p_fs": ("tau_fwhm_fs",),
    "pump.wavelength_nm": ("omega0_rad_fs",),
    "collection.alpha_deg": ("alpha_s_deg", "alpha_i_deg"),
    "filters.sigma_nm": ("sigma_s_nm", "sigma_i_nm"),
}


def _number(section: Dict[str, Any], key: str, path: str, positive: bool = True) -> float:
    value = section.get(key)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", f"{path}.{key}")
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"expected a positive finite number, got {value!r}", f"{path}.{key}")
    return value


def _is_auto(value: Any) -> bool:
    return isinstance(value, str) and value.strip().lower() == "auto"


@dataclass(frozen=True)
class SetupConfig:
    """Complete physical description of one photon-pair source."""

    crystal: CrystalSpec
    pump: PumpSpec
    collection: CollectionSpec
    filters: Optional[FilterSpec] = None
    quad: QuadSpec = field(default_factory=QuadSpec)
    grid_n: int = DEFAULT_GRID_N
    window: Optional[float] = None
    source: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.grid_n < 8:
            raise ConfigError(f"grid size must be >= 8, got {self.grid_n}", "grid.n")
        if self.window is not None and not self.window > 0:
            raise ConfigError(f"window must be positive, got {self.window}", "grid.window")
        if self.filters is not None and self.filters.omega0 != self.pump.omega0:
            raise ConfigError("filter centre differs from the degenerate frequency", "filters")

    # ---- Construction ----

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "SetupConfig":
        """Build from the interface-unit mapping (the YAML sections)."""
        data = copy.deepcopy(raw or {})
        unknown = set(data) - set(SETUP_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown section(s) {sorted(unknown)}")
        for name, defaults in DEFAULTS.items():
            section = data.get(name)
            if section is None:
                section = {}
            if not isinstance(section, dict):
                raise ConfigError("expected a mapping", name)
            data[name] = {**defaults, **section}

        try:
            crystal = cls._build_crystal(data["crystal"])
            omega0 = cls._omega0(data["pump"])
            collection = cls._build_collection(data["collection"], crystal, omega0)
            pump = cls._build_pump(data["pump"], collection, omega0)
            filters = cls._build_filters(data["filters"], omega0)
            quad = QuadSpec(
                rel_tol=_number(data["quad"], "rel_tol", "quad"),
                abs_tol=0.0,
                max_depth=int(data["quad"]["max_depth"]),
                orders=tuple(int(n) for n in data["quad"]["orders"]),
                box_sigmas=_number(data["quad"], "box_sigmas", "quad"),
            )
        except SpdcError:
            raise
        except ValueError as e:
            raise ConfigError(str(e))

        grid = data["grid"]
        window = None if _is_auto(grid.get("window")) or grid.get("window") is None \
            else _number(grid, "window", "grid")
        grid_n = _number(grid, "n", "grid")
        if grid_n != int(grid_n):
            raise ConfigError(f"expected an integer, got {grid_n!r}", "grid.n")
        return cls(crystal, pump, collection, filters, quad, int(grid_n), window, data)

    @staticmethod
    def _build_crystal(section: Dict[str, Any]) -> CrystalSpec:
        length = _number(section, "length_um", "crystal")
        cut = math.radians(_number(section, "cut_angle_deg", "crystal"))
        if "sellmeier_o" in section or "sellmeier_e" in section:
            if "sellmeier_o" not in section or "sellmeier_e" not in section:
                raise ConfigError("both sellmeier_o and sellmeier_e are required", "crystal")
            return CrystalSpec(length, cut, Sellmeier.from_list(section["sellmeier_o"]),
                               Sellmeier.from_list(section["sellmeier_e"]),
                               str(section.get("name", "custom")))
        return CrystalSpec.named(str(section["name"]), length, cut)

    @staticmethod
    def _omega0(section: Dict[str, Any]) -> float:
        if section.get("omega0_rad_fs") is not None:
            return _number(section, "omega0_rad_fs", "pump")
        wavelength_um = _number(section, "wavelength_nm", "pump") * 1e-3
        return 2 * math.pi * C_LIGHT / wavelength_um

    @staticmethod
    def _build_collection(section: Dict[str, Any], crystal: CrystalSpec, omega0: float) -> CollectionSpec:
        w_s = _number(section, "w_s_um", "collection")
        w_i = _number(section, "w_i_um", "collection") if section.get("w_i_um") is not None else w_s

        def angle(key: str) -> float:
            value = section.get(key, section.get("alpha_deg"))
            if _is_auto(value):
                return solve_opening_angle(crystal, omega0)
            return math.radians(_number({key: value}, key, "collection", positive=False))

        return CollectionSpec(angle("alpha_s_deg"), angle("alpha_i_deg"), w_s, w_i)

    @staticmethod
    def _build_pump(section: Dict[str, Any], collection: CollectionSpec, omega0: float) -> PumpSpec:
        if section.get("tau_p_fs") is not None:
            tau_p = _number(section, "tau_p_fs", "pump")
        else:
            tau_p = _number(section, "tau_fwhm_fs", "pump") / math.sqrt(math.log(2))
        w = section.get("w_um")
        if isinstance(w, str) and w.strip().lower() == "optimal":
            w_p = optimal_pump_waist(collection.w_s, collection.w_i)
        else:
            w_p = _number(section, "w_um", "pump")
        return PumpSpec(tau_p, w_p, omega0)

    @staticmethod
    def _build_filters(section: Dict[str, Any], omega0: float) -> Optional[FilterSpec]:
        sigma = section.get("sigma_nm")
        sigma_s = section.get("sigma_s_nm", sigma)
        sigma_i = section.get("sigma_i_nm", sigma)
        if sigma_s is None and sigma_i is None:
            return None
        for key, value in (("sigma_s_nm", sigma_s), ("sigma_i_nm", sigma_i)):
            if value is not None:
                _number({key: value}, key, "filters")
        return FilterSpec.from_nm(sigma_s, sigma_i, omega0)

    # ---- Echo, hash, replacement ----

    def to_dict(self) -> Dict[str, Any]:
        """Canonical echo: the interface mapping plus resolved internal values."""
        return {
            **self.source,
            "resolved": {
                "length_um": self.crystal.length,
                "cut_angle_rad": self.crystal.cut_angle,
                "sellmeier_o": self.crystal.sellmeier_o.to_list(),
                "sellmeier_e": self.crystal.sellmeier_e.to_list(),
                "omega0_rad_fs": self.pump.omega0,
                "tau_p_fs": self.pump.tau_p,
                "w_p_um": self.pump.w_p,
                "alpha_s_rad": self.collection.alpha_s,
                "alpha_i_rad": self.collection.alpha_i,
                "w_s_um": self.collection.w_s,
                "w_i_um": self.collection.w_i,
                "sigma_s_rad_fs": self.filters.sigma_s if self.filters else None,
                "sigma_i_rad_fs": self.filters.sigma_i if self.filters else None,
                "quad": self.quad.to_dict(),
                "grid_n": self.grid_n,
                "window_rad_fs": self.window,
            },
        }

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def get_path(self, path: str) -> Any:
        section, _, key = path.partition(".")
        if section not in self.source or not key:
            raise ConfigError("unknown parameter path", path)
        return self.source[section].get(key)

    def replace_path(self, path: str, value: Any) -> "SetupConfig":
        """New config with one interface-level parameter replaced."""
        return self.replace_paths({path: value})

    def replace_paths(self, values: Dict[str, Any]) -> "SetupConfig":
        data = copy.deepcopy(self.source)
        for path, value in values.items():
            section, _, key = path.partition(".")
            if section not in SETUP_SECTIONS or not key:
                raise ConfigError("unknown parameter path", path)
            if isinstance(value, np.generic):
                value = value.item()
            target = data.setdefault(section, {})
            for other in _SHADOWED_BY.get(path, ()):
                target.pop(other, None)
            target[key] = value
        return SetupConfig.from_dict(data)

    def without_filters(self) -> "SetupConfig":
        data = copy.deepcopy(self.source)
        data["filters"] = {}
        return SetupConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Scan recipes
# ---------------------------------------------------------------------------

SCAN_QUANTITIES = ("Rc", "purity", "cooperativity", "overlap", "ratio", "margins",
                   "Rc_ppm", "Rc_analytic", "Rc_ga_analytic", "tau_ppm", "tau_ga", "sigma_max")

_CONSTRAINT = re.compile(
    r"^\s*(?P<target>[a-z_]+\.[a-z_0-9]+)\s*=\s*"
    r"(?:(?P<factor>[-+0-9.eE]+)\s*\*\s*)?(?P<source>[a-z_]+\.[a-z_0-9]+)"
    r"(?:\s*/\s*(?P<divisor>[-+0-9.eE]+))?\s*$"
)


@dataclass(frozen=True)
class ScanAxis:
    path: str
    values: Tuple[float, ...]

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], name: str) -> "ScanAxis":
        if not isinstance(raw, dict) or "path" not in raw:
            raise ConfigError("axis needs a 'path'", name)
        if "values" in raw:
            values = tuple(float(v) for v in raw["values"])
        else:
            try:
                start, stop, num = float(raw["start"]), float(raw["stop"]), int(raw["num"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError("axis needs 'values' or start/stop/num", name)
            spacing = raw.get("spacing", "linear")
            if spacing == "log":
                if start <= 0 or stop <= 0:
                    raise ConfigError("log spacing needs positive bounds", name)
                values = tuple(np.geomspace(start, stop, num).tolist())
            elif spacing == "linear":
                values = tuple(np.linspace(start, stop, num).tolist())
            else:
                raise ConfigError(f"spacing must be 'linear' or 'log', got {spacing!r}", name)
        if not values:
            raise ConfigError("axis range is empty", name)
        return cls(str(raw["path"]), values)


@dataclass(frozen=True)
class Constraint:
    """target = factor * source (proportional constraints only)."""

    target: str
    source: str
    factor: float = 1.0

    @classmethod
    def parse(cls, text: str) -> "Constraint":
        match = _CONSTRAINT.match(text)
        if not match:
            raise ConfigError(f"cannot parse constraint {text!r}; use 'a.b = k * c.d' or 'a.b = c.d / k'",
                              "constraints")
        factor = float(match["factor"]) if match["factor"] else 1.0
        if match["divisor"]:
            factor /= float(match["divisor"])
        return cls(match["target"], match["source"], factor)

    def __str__(self) -> str:
        return f"{self.target} = {self.factor:g} * {self.source}"


@dataclass(frozen=True)
class ScanSpec:
    name: str
    axes: Tuple[ScanAxis, ...]
    quantities: Tuple[str, ...]
    methods: Tuple[str, ...] = ("paraxial",)
    reference_method: str = "direct"
    constraints: Tuple[Constraint, ...] = ()
    overrides: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, name: str, raw: Dict[str, Any]) -> "ScanSpec":
        if not isinstance(raw, dict):
            raise ConfigError("scan recipe must be a mapping", f"scans.{name}")
        axes = [ScanAxis.from_dict(raw.get("axis1"), f"scans.{name}.axis1")]
        if raw.get("axis2") is not None:
            axes.append(ScanAxis.from_dict(raw["axis2"], f"scans.{name}.axis2"))
        quantities = tuple(raw.get("quantities", ["Rc"]))
        bad = [q for q in quantities if q not in SCAN_QUANTITIES]
        if bad:
            raise ConfigError(f"unknown quantities {bad}; choose from {SCAN_QUANTITIES}",
                              f"scans.{name}.quantities")
        methods = tuple(raw.get("methods", [raw.get("method", "paraxial")]))
        constraints = tuple(Constraint.parse(c) for c in raw.get("constraints", []))
        overrides = dict(raw.get("overrides", {}))
        return cls(name, tuple(axes), quantities, methods,
                   str(raw.get("reference_method", "direct")), constraints, overrides)

    def validate(self, setup: SetupConfig):
        """Every axis, override and constraint must name a known parameter."""
        assigned = {axis.path for axis in self.axes} | set(self.overrides) | {c.target for c in self.constraints}
        for path in assigned | {c.source for c in self.constraints}:
            section, _, key = path.partition(".")
            if section not in SETUP_SECTIONS or not key:
                raise ConfigError("unknown parameter path", path)
        for c in self.constraints:
            if c.source not in assigned and setup.get_path(c.source) is None:
                raise ConfigError("constraint source is not set in the configuration", c.source)

    def points(self) -> List[Tuple[float, ...]]:
        """Axis-major list of coordinates."""
        if len(self.axes) == 1:
            return [(v,) for v in self.axes[0].values]
        return [(a, b) for a in self.axes[0].values for b in self.axes[1].values]

    def setup_at(self, base: SetupConfig, coords: Sequence[float]) -> SetupConfig:
        values: Dict[str, Any] = dict(self.overrides)
        for axis, value in zip(self.axes, coords):
            values[axis.path] = value
        provisional = dict(values)
        for c in self.constraints:
            source = provisional.get(c.source, base.get_path(c.source))
            if source is None or _is_auto(source) or isinstance(source, str):
                raise ConfigError("constraint source has no numeric value", c.source)
            provisional[c.target] = c.factor * float(source)
        return base.replace_paths(provisional)


class Config:
    """Configuration manager for spdc-fiber"""

    def __init__(self, config_path: Optional[str] = None):
        """Load config from YAML + environment. Searches cwd if no path given."""
        load_dotenv()

        if config_path is None:
            config_path = os.getenv("SPDC_CONFIG") or self._find_config_file()

        self.config_path = Path(config_path)
        self._config = self._load_config()

    def _find_config_file(self) -> str:
        """Find config.yaml in current or parent directories"""
        search_paths = [
            Path.cwd() / "config.yaml",
            Path.cwd().parent / "config.yaml",
            Path(__file__).parent.parent / "config.yaml",
        ]

        for path in search_paths:
            if path.exists():
                return str(path)

        raise ConfigError("config.yaml not found (pass --config or set SPDC_CONFIG)")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file"""
        if not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        with open(self.config_path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"invalid YAML in {self.config_path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{self.config_path} must contain a mapping")
        return data

    @property
    def raw(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def setup(self) -> SetupConfig:
        """Resolved setup built from the physical sections of the file."""
        return SetupConfig.from_dict({k: v for k, v in self._config.items() if k in SETUP_SECTIONS})

    @property
    def scan_names(self) -> List[str]:
        return sorted(self._config.get("scans", {}) or {})

    def scan(self, name: str) -> ScanSpec:
        scans = self._config.get("scans", {}) or {}
        if name not in scans:
            raise ConfigError(f"scan '{name}' not found; available: {self.scan_names}", "scans")
        return ScanSpec.from_dict(name, scans[name])

    @property
    def threads(self) -> int:
        """Worker threads: SPDC_THREADS takes precedence over the file."""
        value = os.getenv("SPDC_THREADS") or self._config.get("threads", 1)
        try:
            threads = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"expected an integer, got {value!r}", "threads")
        return max(1, threads)

    @property
    def output_config(self) -> Dict[str, Any]:
        """Get output configuration"""
        return self._config.get("output", {
            "directory": "output",
        })

    def __repr__(self) -> str:
        return f"Config(config_path={self.config_path})"


def get_config(config_path: Optional[str] = None) -> Config:
    """Get a Config instance"""
    return Config(config_path)
