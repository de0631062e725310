"""Shared setups for the test modules."""

import copy
import os
import sys
from pathlib import Path
from typing import Any, Dict

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import SetupConfig

SLOW = bool(os.getenv("SPDC_SLOW_TESTS"))
SLOW_REASON = "set SPDC_SLOW_TESTS=1 to run full-scale reproductions"

# Thin crystal with wide waists: well inside the cosine-Gaussian validity
# margins and quick to evaluate by every method.
THIN: Dict[str, Any] = {
    "crystal": {"name": "BBO", "length_um": 100, "cut_angle_deg": 30},
    "pump": {"wavelength_nm": 780, "tau_fwhm_fs": 100, "w_um": 35},
    "collection": {"alpha_deg": "auto", "w_s_um": 70},
    "quad": {"rel_tol": 1.0e-4},
    "grid": {"n": 16},
}


def make_setup(base: Dict[str, Any] = THIN, **paths: Any) -> SetupConfig:
    """SetupConfig from ``base`` with dotted-path overrides.

    ``make_setup(crystal__length_um=20)`` sets ``crystal.length_um``.
    """
    data = copy.deepcopy(base)
    for key, value in paths.items():
        section, _, name = key.partition("__")
        data.setdefault(section, {})[name] = value
    return SetupConfig.from_dict(data)


def config_yaml(base: Dict[str, Any] = THIN, **extra: Any) -> Dict[str, Any]:
    data = copy.deepcopy(base)
    data.update(extra)
    return data
