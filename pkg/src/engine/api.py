"""Public entrypoints for the spdc-fiber engine API.

Usage::

    from src.config import Config
    from src.engine import evaluate_metrics, run_scan

    cfg = Config("config.yaml")
    result = evaluate_metrics(cfg.setup(), "paraxial")
    print(result["purity"])
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Union

from ..config import ScanSpec, SetupConfig
from ..epmf import Method
from ..errors import ScanFailedError, SpdcError
from ..expansion import cga_validity
from ..metrics import (
    AmplitudeGrid,
    apply_filters,
    brightness,
    brightness_cga_analytic,
    brightness_ppm_analytic,
    build_grid,
    decorrelation_tau_ga,
    decorrelation_tau_ppm,
    max_filter_bandwidth,
    overlap,
    pair_rate,
    schmidt,
)
from ..report_generator import ScanWriter
from .models import CompareResult, MetricsResult, ScanResult, ScanRow

try:
    from src import __version__ as _spdc_version
except Exception:  # pragma: no cover
    _spdc_version = "dev"

logger = logging.getLogger(__name__)

MethodLike = Union[str, Method]

# A scan exits cleanly when at least this share of its points succeeds.
SCAN_SUCCESS_FRACTION = 0.9

# Quantities computed once per method listed in the scan.
_PER_METHOD = ("Rc", "purity", "cooperativity", "overlap", "ratio")


def _method(value: MethodLike) -> Method:
    return value if isinstance(value, Method) else Method.parse(value)


# ---------------------------------------------------------------------------
# Single evaluations
# ---------------------------------------------------------------------------

def evaluate_metrics(setup: SetupConfig, method: MethodLike = "paraxial", *,
                     threads: int = 1, schmidt_head: int = 5) -> MetricsResult:
    """Brightness, purity and Schmidt head of ``setup`` (filters applied).

    Parameters
    ----------
    setup:
        Resolved source configuration.
    method:
        Method name (``direct``, ``paraxial``, ``cga``, ``ga``, ``perfect``) or instance.
    threads:
        Worker threads for the grid rows.

    Returns
    -------
    dict
        A :class:`~src.engine.models.MetricsResult` compatible dict.
    """
    method = _method(method)
    grid = apply_filters(build_grid(setup, method, threads=threads), setup.filters)
    spectrum = schmidt(grid)
    return MetricsResult(
        method=method.label,
        config_hash=setup.hash(),
        Rc=pair_rate(setup, method),
        Rc_grid=brightness(grid),
        purity=spectrum.purity,
        cooperativity=spectrum.cooperativity,
        schmidt_head=spectrum.head(schmidt_head),
        margins=cga_validity(setup).to_dict(),
        filtered=setup.filters is not None,
        n=grid.n,
        window_rad_fs=grid.window,
    )


def compare_methods(setup: SetupConfig, method_a: MethodLike, method_b: MethodLike, *,
                    threads: int = 1) -> CompareResult:
    """Overlap deficit and brightness ratio of two methods on identical axes.

    The window is chosen for ``method_a``; ``method_b`` is sampled on the
    same axis array.
    """
    method_a, method_b = _method(method_a), _method(method_b)

    start = time.perf_counter()
    grid_a = build_grid(setup, method_a, threads=threads)
    seconds_a = time.perf_counter() - start

    start = time.perf_counter()
    grid_b = build_grid(setup, method_b, axis=grid_a.omega_s, threads=threads)
    seconds_b = time.perf_counter() - start

    grid_a = apply_filters(grid_a, setup.filters)
    grid_b = apply_filters(grid_b, setup.filters)
    rate_a, rate_b = brightness(grid_a), brightness(grid_b)
    return CompareResult(
        method_a=method_a.label,
        method_b=method_b.label,
        config_hash=setup.hash(),
        overlap_deficit=1.0 - abs(overlap(grid_a, grid_b)),
        ratio=rate_a / rate_b,
        Rc_a=rate_a,
        Rc_b=rate_b,
        seconds_a=seconds_a,
        seconds_b=seconds_b,
        speedup=seconds_a / seconds_b if seconds_b > 0 else math.inf,
    )


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

def _suffix(scan: ScanSpec, method: str) -> str:
    return "" if len(scan.methods) == 1 else f"_{Method.parse(method).label}"


def scan_columns(scan: ScanSpec) -> List[str]:
    """Axis paths followed by one column per requested value."""
    columns = [axis.path for axis in scan.axes]
    for quantity in scan.quantities:
        if quantity == "margins":
            columns += ["tau_margin", "waist_margin"]
        elif quantity == "sigma_max":
            for m in scan.methods:
                columns += [f"sigma_max_nm{_suffix(scan, m)}", f"Rc_at_sigma_max{_suffix(scan, m)}"]
        elif quantity in _PER_METHOD:
            columns += [f"{quantity}{_suffix(scan, m)}" for m in scan.methods]
        else:
            columns.append(quantity)
    return columns


def evaluate_point(setup: SetupConfig, scan: ScanSpec) -> Dict[str, float]:
    """All requested quantities of one scan point."""
    values: Dict[str, float] = {}
    wanted = set(scan.quantities)

    for name in scan.methods:
        method = Method.parse(name)
        sfx = _suffix(scan, name)
        if "Rc" in wanted:
            values[f"Rc{sfx}"] = pair_rate(setup, method)
        if wanted & {"purity", "cooperativity", "overlap", "ratio"}:
            grid = apply_filters(build_grid(setup, method), setup.filters)
            if wanted & {"purity", "cooperativity"}:
                spectrum = schmidt(grid)
                values[f"purity{sfx}"] = spectrum.purity
                values[f"cooperativity{sfx}"] = spectrum.cooperativity
            if wanted & {"overlap", "ratio"}:
                reference = _reference_grid(setup, scan, grid)
                values[f"overlap{sfx}"] = abs(overlap(grid, reference))
                values[f"ratio{sfx}"] = brightness(grid) / brightness(reference)
        if "sigma_max" in wanted:
            best = max_filter_bandwidth(setup.without_filters(), method)
            values[f"sigma_max_nm{sfx}"] = best.sigma_nm
            values[f"Rc_at_sigma_max{sfx}"] = best.brightness

    if "margins" in wanted:
        margins = cga_validity(setup)
        values["tau_margin"] = margins.tau_margin
        values["waist_margin"] = margins.waist_margin
    if "Rc_ppm" in wanted:
        values["Rc_ppm"] = brightness_ppm_analytic(setup)
    if "Rc_analytic" in wanted:
        values["Rc_analytic"] = brightness_cga_analytic(setup, Method.cga())
    if "Rc_ga_analytic" in wanted:
        values["Rc_ga_analytic"] = brightness_cga_analytic(setup, Method.ga())
    if "tau_ppm" in wanted:
        values["tau_ppm"] = decorrelation_tau_ppm(setup)
    if "tau_ga" in wanted:
        values["tau_ga"] = decorrelation_tau_ga(setup)
    return values


def _reference_grid(setup: SetupConfig, scan: ScanSpec, grid: AmplitudeGrid) -> AmplitudeGrid:
    reference = build_grid(setup, Method.parse(scan.reference_method), axis=grid.omega_s)
    return apply_filters(reference, setup.filters)


def run_scan(setup: SetupConfig, scan: ScanSpec, *, threads: int = 1,
             writer: Optional[ScanWriter] = None,
             progress_callback: Optional[Callable[[int], None]] = None) -> ScanResult:
    """Evaluate every scan point, ``threads`` points at a time.

    Rows reach ``writer`` in index order regardless of completion order.
    Points already present in a resumed writer are skipped. A point that
    raises is recorded with NaN values and its error message; fewer than
    90 % successes raises :class:`ScanFailedError` after all rows are written.
    """
    scan.validate(setup)
    columns = scan_columns(scan)
    points = scan.points()
    done = writer.completed if writer else set()
    todo = [i for i in range(len(points)) if i not in done]

    def work(index: int) -> ScanRow:
        coords = {axis.path: value for axis, value in zip(scan.axes, points[index])}
        try:
            values = evaluate_point(scan.setup_at(setup, points[index]), scan)
            return ScanRow(index=index, coords=coords, values={**coords, **values}, error=None)
        except (SpdcError, ArithmeticError, ValueError) as e:
            logger.warning("scan %s point %d failed: %s", scan.name, index, e)
            return ScanRow(index=index, coords=coords, values=dict(coords), error=f"{type(e).__name__}: {e}")

    finished: Dict[int, ScanRow] = {}
    rows: List[ScanRow] = []
    cursor = 0

    def flush():
        nonlocal cursor
        while cursor < len(todo) and todo[cursor] in finished:
            row = finished.pop(todo[cursor])
            if writer is not None:
                writer.write_row(row["index"], row["values"], row["error"] or "")
            rows.append(row)
            cursor += 1

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = {pool.submit(work, i): i for i in todo}
        for future in as_completed(futures):
            row = future.result()
            finished[row["index"]] = row
            flush()
            if progress_callback:
                progress_callback(row["index"])

    failed = sum(1 for row in rows if row["error"])
    result = ScanResult(
        name=scan.name,
        columns=columns,
        rows=rows,
        failed=failed,
        total=len(rows),
        skipped=len(points) - len(todo),
        meta={"version": _spdc_version, "config_hash": setup.hash(), "threads": threads},
    )
    if rows and (len(rows) - failed) < SCAN_SUCCESS_FRACTION * len(rows):
        raise ScanFailedError(failed, len(rows))
    return result
