"""Report generation: grid CSV + JSON sidecar, incremental scan tables,
and rich console summaries."""

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set

try:
    from rich import box
    from rich.console import Console
    from rich.panel import Panel
    from rich.table import Table
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False


from src import __version__

from .metrics import AmplitudeGrid

GRID_HEADER = ("omega_s", "omega_i", "lambda_s_nm", "lambda_i_nm", "re", "im", "abs")


def format_float(value: Any) -> str:
    """9 significant digits; NaN and infinities spelled the way Python parses them back."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return f"{value:.9g}"
    return str(value)


@dataclass
class ReportMetadata:
    """Metadata for an output file"""
    title: str
    command: str
    method: str
    config_hash: str
    timestamp: datetime = field(default_factory=datetime.now)
    version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "command": self.command,
            "method": self.method,
            "timestamp": self.timestamp.isoformat(),
            "version": self.version,
            "config_hash": self.config_hash,
        }


class ReportGenerator:
    """Writes grids and summaries under an output directory"""

    def __init__(self, output_dir: str = "output"):
        """Create output directory if it doesn't exist."""
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        if RICH_AVAILABLE:
            self.console = Console()
        else:
            self.console = None

    def default_path(self, metadata: ReportMetadata, suffix: str = "csv") -> Path:
        stamp = metadata.timestamp.strftime('%Y%m%d_%H%M%S')
        return self.output_dir / f"spdc_{metadata.command}_{metadata.method}_{metadata.config_hash[:8]}_{stamp}.{suffix}"

    # ---- Grids ----

    def write_grid(self, grid: AmplitudeGrid, config_echo: Dict[str, Any], metadata: ReportMetadata,
                   path: Optional[str] = None) -> str:
        """Write the grid CSV and its ``.json`` sidecar; return the CSV path.

        Rows run over omega_s first, then omega_i. Neither file is left
        behind if writing fails.
        """
        csv_path = Path(path) if path else self.default_path(metadata)
        sidecar = csv_path.with_name(csv_path.name + ".json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        lam_s, lam_i = grid.wavelengths_nm()

        try:
            with open(csv_path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(GRID_HEADER)
                for j, omega_s in enumerate(grid.omega_s):
                    for k, omega_i in enumerate(grid.omega_i):
                        value = grid.values[j, k]
                        writer.writerow([format_float(x) for x in (
                            omega_s, omega_i, lam_s[j], lam_i[k], value.real, value.imag, abs(value))])

            sidecar_data = {
                "metadata": metadata.to_dict(),
                "config": config_echo,
                "grid": {
                    "n": grid.n,
                    "quantity": grid.quantity,
                    "method": grid.method,
                    "window_rad_fs": grid.window,
                    "omega_s_range": [float(grid.omega_s[0]), float(grid.omega_s[-1])],
                    "omega_i_range": [float(grid.omega_i[0]), float(grid.omega_i[-1])],
                    "config_hash": grid.config_hash,
                },
            }
            self.write_json(sidecar_data, sidecar)
        except BaseException:
            remove_partial(csv_path, sidecar)
            raise
        return str(csv_path)

    @staticmethod
    def write_json(data: Dict[str, Any], path) -> str:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, default=_json_default)
        return str(path)

    # ---- Console ----

    def print_summary(self, values: Dict[str, Any], metadata: ReportMetadata):
        """Print a metric table to the console using Rich"""
        if not RICH_AVAILABLE:
            print(f"{metadata.title} [{metadata.method}]")
            for key, value in values.items():
                print(f"  {key}: {_display(value)}")
            return

        table = Table(title=metadata.title, box=box.ROUNDED)
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="white")
        for key, value in values.items():
            table.add_row(key, _display(value))

        self.console.print(Panel(
            f"method [bold]{metadata.method}[/bold]   config {metadata.config_hash}",
            title=f"[bold]{metadata.command}[/bold]",
            border_style="blue",
        ))
        self.console.print(table)


def remove_partial(*paths: Path):
    for p in paths:
        try:
            Path(p).unlink()
        except FileNotFoundError:
            pass


def _json_default(value: Any):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, datetime):
        return value.isoformat()
    return str(value)


def _display(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, complex):
        return f"{abs(value):.6g} (arg {math.atan2(value.imag, value.real):+.3f})"
    if isinstance(value, (list, tuple)):
        return ", ".join(_display(v) for v in value)
    if isinstance(value, dict):
        return ", ".join(f"{k}={_display(v)}" for k, v in value.items())
    return str(value)


class ScanWriter:
    """Scan table written one row at a time, in index order.

    Opening an existing file with the same header resumes it: rows already
    present are reported by ``completed`` and never rewritten.
    """

    def __init__(self, path, columns: Sequence[str], resume: bool = False):
        self.path = Path(path)
        self.header = ["index", *columns, "error"]
        self.completed: Set[int] = set()
        self.path.parent.mkdir(parents=True, exist_ok=True)

        if resume and self.path.exists():
            self.completed = self._read_completed()
            self._file = open(self.path, "a", encoding="utf-8", newline="")
            self._writer = csv.writer(self._file)
        else:
            self._file = open(self.path, "w", encoding="utf-8", newline="")
            self._writer = csv.writer(self._file)
            self._writer.writerow(self.header)
            self._file.flush()

    def _read_completed(self) -> Set[int]:
        with open(self.path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        if not rows or rows[0] != self.header:
            raise ValueError(f"cannot resume {self.path}: header differs from this scan")
        return {int(row[0]) for row in rows[1:] if row}

    def write_row(self, index: int, values: Dict[str, Any], error: str = ""):
        row = [str(index)]
        row.extend(format_float(values.get(column, math.nan)) for column in self.header[1:-1])
        row.append(error)
        self._writer.writerow(row)
        self._file.flush()

    def close(self):
        self._file.close()

    def __enter__(self) -> "ScanWriter":
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_scan(path) -> List[Dict[str, str]]:
    """Rows of a scan table as dicts (strings), in file order."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def iter_columns(rows: Iterable[Dict[str, str]], column: str) -> List[float]:
    return [float(row[column]) if row[column] != "" else math.nan for row in rows]
