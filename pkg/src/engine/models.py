"""Data structures returned by the spdc-fiber engine API."""

from typing import Any, Dict, List, Optional, TypedDict


class Margins(TypedDict):
    """Cosine-Gaussian validity margins (trusted when both are >= 1)."""

    tau_margin: float
    waist_margin: float
    tau_ok: bool
    waist_ok: bool


class MetricsResult(TypedDict):
    """Figures of merit of one source configuration."""

    method: str
    config_hash: str
    Rc: float
    Rc_grid: float
    purity: float
    cooperativity: float
    schmidt_head: List[float]
    margins: Margins
    filtered: bool
    n: int
    window_rad_fs: float


class CompareResult(TypedDict):
    """Two methods evaluated on identical axes."""

    method_a: str
    method_b: str
    config_hash: str
    overlap_deficit: float   # 1 - |<a|b>|
    ratio: float             # Rc_a / Rc_b
    Rc_a: float
    Rc_b: float
    seconds_a: float
    seconds_b: float
    speedup: float           # seconds_a / seconds_b


class ScanRow(TypedDict):
    index: int
    coords: Dict[str, float]
    values: Dict[str, float]
    error: Optional[str]


class ScanResult(TypedDict):
    """Top-level dict returned by :func:`run_scan`."""

    name: str
    columns: List[str]
    rows: List[ScanRow]
    failed: int
    total: int
    skipped: int
    meta: Dict[str, Any]
