"""Command-line interface for spdc-fiber."""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import click

from src import __version__

try:
    from rich.console import Console
    from rich.logging import RichHandler
    from rich.markup import escape
    from rich.panel import Panel
    from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
    from rich.table import Table
    RICH_AVAILABLE = True
    console = Console()
except ImportError:
    RICH_AVAILABLE = False
    console = None

from .config import Config
from .crystal import solve_opening_angle
from .engine import compare_methods, evaluate_metrics, run_scan, scan_columns
from .epmf import Method
from .errors import SpdcError
from .metrics import build_grid
from .report_generator import ReportGenerator, ReportMetadata, ScanWriter

METHOD_CHOICES = ["direct", "paraxial", "cga", "ga", "perfect"]


@click.group()
@click.version_option(version=__version__, prog_name="spdc")
def cli():
    """spdc - fiber-coupled photon-pair source modelling."""
    pass


# ---- Helpers ----

def config_option(f):
    return click.option('--config', '-f', default=None, help='Path to config.yaml')(f)


def common_options(f):
    f = click.option('--verbose', '-v', is_flag=True, help='Debug logging and tracebacks')(f)
    f = click.option('--json', 'as_json', is_flag=True, help='Machine-readable JSON on stdout')(f)
    return config_option(f)


def _configure_logging(verbose: bool):
    root = logging.getLogger("src")
    root.handlers.clear()
    if RICH_AVAILABLE:
        handler = RichHandler(console=Console(stderr=True), show_path=False)
    else:
        handler = logging.StreamHandler(sys.stderr)
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _emit_json(data: Dict[str, Any]):
    click.echo(json.dumps(data, indent=2, default=_json_value))


def _json_value(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


def _fail(e: Exception, verbose: bool):
    """Report ``e``; library errors exit with their own code."""
    if RICH_AVAILABLE:
        console.print(f"[red]Error:[/red] {escape(str(e))}")
        if verbose:
            import traceback
            console.print(f"[dim]{traceback.format_exc()}[/dim]")
    else:
        click.echo(f"Error: {str(e)}", err=True)
        if verbose:
            import traceback
            click.echo(traceback.format_exc(), err=True)
    if isinstance(e, SpdcError):
        sys.exit(e.exit_code)
    raise click.Abort()


def _threads(cfg: Config, threads: Optional[int]) -> int:
    return threads if threads else cfg.threads


# ---- Commands ----

@cli.command()
@common_options
def angle(config: Optional[str], as_json: bool, verbose: bool):
    """
    Cone half-opening angle for degenerate type-I phase matching.

    Example:
        spdc angle --config config.yaml
    """
    _configure_logging(verbose)
    try:
        cfg = Config(config)
        setup = cfg.setup()
        alpha = solve_opening_angle(setup.crystal, setup.pump.omega0)
        result = {
            "crystal": setup.crystal.name,
            "cut_angle_deg": math.degrees(setup.crystal.cut_angle),
            "omega0_rad_fs": setup.pump.omega0,
            "alpha_deg": math.degrees(alpha),
            "alpha_rad": alpha,
        }

        if as_json:
            _emit_json(result)
        elif RICH_AVAILABLE:
            console.print(Panel(
                f"α = [bold cyan]{result['alpha_deg']:.4f}°[/bold cyan]  ({alpha:.6e} rad)",
                title=f"[bold]{setup.crystal.name}, θc = {result['cut_angle_deg']:g}°[/bold]",
                border_style="blue",
            ))
        else:
            click.echo(f"alpha = {result['alpha_deg']:.4f} deg ({alpha:.6e} rad)")

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@common_options
@click.option('--method', '-m', default='paraxial', type=click.Choice(METHOD_CHOICES), help='Evaluation method')
@click.option('--quantity', '-q', default='theta', type=click.Choice(['theta', 'psi']),
              help='Phase-matching function alone or the full biphoton amplitude')
@click.option('--n', 'grid_n', default=None, type=int, help='Grid points per axis (default: config)')
@click.option('--window', '-w', default=None, type=float, help='Half-width in rad/fs (default: config / auto)')
@click.option('--out', '-o', default=None, help='Output CSV path')
@click.option('--threads', '-t', default=None, type=int, help='Worker threads (default: SPDC_THREADS / config)')
def epmf(config: Optional[str], as_json: bool, verbose: bool, method: str, quantity: str,
         grid_n: Optional[int], window: Optional[float], out: Optional[str], threads: Optional[int]):
    """
    Write the phase-matching function (or amplitude) on a frequency grid.

    Examples:
        spdc epmf --method cga --out theta_cga.csv
        spdc epmf --method direct --quantity psi --threads 8
    """
    _configure_logging(verbose)
    try:
        cfg = Config(config)
        setup = cfg.setup()
        chosen = Method.parse(method)
        grid = build_grid(setup, chosen, n=grid_n, window=window,
                          threads=_threads(cfg, threads), quantity=quantity)

        report_gen = ReportGenerator(cfg.output_config.get("directory", "output"))
        metadata = ReportMetadata(
            title=f"{quantity} grid ({chosen.label})",
            command="epmf",
            method=chosen.label,
            config_hash=setup.hash(),
        )
        csv_path = report_gen.write_grid(grid, setup.to_dict(), metadata, out)

        if as_json:
            _emit_json({"csv": csv_path, "sidecar": csv_path + ".json", "config_hash": setup.hash(),
                        "n": grid.n, "window_rad_fs": grid.window})
        elif RICH_AVAILABLE:
            console.print(f"[green]✓ Grid saved to:[/green] {csv_path}")
        else:
            click.echo(f"Grid saved to: {csv_path}")

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@common_options
@click.option('--method', '-m', default='paraxial', type=click.Choice(METHOD_CHOICES), help='Evaluation method')
@click.option('--threads', '-t', default=None, type=int, help='Worker threads')
def metrics(config: Optional[str], as_json: bool, verbose: bool, method: str, threads: Optional[int]):
    """
    Brightness, purity, Schmidt head and validity margins.

    Example:
        spdc metrics --method cga --json
    """
    _configure_logging(verbose)
    try:
        cfg = Config(config)
        setup = cfg.setup()
        result = evaluate_metrics(setup, method, threads=_threads(cfg, threads))

        if as_json:
            _emit_json(dict(result))
        else:
            report_gen = ReportGenerator(cfg.output_config.get("directory", "output"))
            metadata = ReportMetadata(title="Source metrics", command="metrics",
                                      method=result["method"], config_hash=result["config_hash"])
            report_gen.print_summary({k: v for k, v in result.items() if k not in ("method", "config_hash")},
                                     metadata)

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@common_options
@click.option('--method-a', '-a', default='paraxial', type=click.Choice(METHOD_CHOICES), help='First method')
@click.option('--method-b', '-b', default='cga', type=click.Choice(METHOD_CHOICES), help='Second method')
@click.option('--threads', '-t', default=None, type=int, help='Worker threads')
def compare(config: Optional[str], as_json: bool, verbose: bool, method_a: str, method_b: str,
            threads: Optional[int]):
    """
    Compare two methods on identical axes: 1 - |overlap| and the rate ratio.

    Example:
        spdc compare -a direct -b paraxial --threads 8
    """
    _configure_logging(verbose)
    try:
        cfg = Config(config)
        setup = cfg.setup()
        result = compare_methods(setup, method_a, method_b, threads=_threads(cfg, threads))

        if as_json:
            _emit_json(dict(result))
        else:
            report_gen = ReportGenerator(cfg.output_config.get("directory", "output"))
            metadata = ReportMetadata(title="Method comparison", command="compare",
                                      method=f"{result['method_a']} vs {result['method_b']}",
                                      config_hash=result["config_hash"])
            report_gen.print_summary({k: v for k, v in result.items() if k != "config_hash"}, metadata)

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@common_options
@click.argument('name', required=False)
@click.option('--out', '-o', default=None, help='Output CSV path')
@click.option('--resume', is_flag=True, help='Continue an interrupted scan file')
@click.option('--threads', '-t', default=None, type=int, help='Points evaluated concurrently')
@click.option('--list', 'list_scans', is_flag=True, help='List the scan recipes in the config')
def scan(config: Optional[str], as_json: bool, verbose: bool, name: Optional[str], out: Optional[str],
         resume: bool, threads: Optional[int], list_scans: bool):
    """
    Run a named scan recipe from the config file.

    Examples:
        spdc scan --list
        spdc scan thin_crystal --out thin.csv
        spdc scan purity_map --threads 8 --resume --out purity.csv
    """
    _configure_logging(verbose)
    try:
        cfg = Config(config)
        if list_scans or not name:
            if as_json:
                _emit_json({"scans": cfg.scan_names})
            else:
                for scan_name in cfg.scan_names:
                    click.echo(scan_name)
            return

        setup = cfg.setup()
        spec = cfg.scan(name)
        n_threads = _threads(cfg, threads)
        output_dir = Path(cfg.output_config.get("directory", "output"))
        csv_path = Path(out) if out else output_dir / f"scan_{name}_{setup.hash()[:8]}.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        metadata = ReportMetadata(title=f"scan {name}", command="scan",
                                  method=",".join(spec.methods), config_hash=setup.hash())
        ReportGenerator.write_json({
            "metadata": metadata.to_dict(),
            "config": setup.to_dict(),
            "scan": cfg.raw.get("scans", {}).get(name),
        }, csv_path.with_name(csv_path.name + ".json"))

        total = len(spec.points())
        with ScanWriter(csv_path, scan_columns(spec), resume=resume) as writer:
            if RICH_AVAILABLE and not as_json:
                with Progress(
                    SpinnerColumn(),
                    TextColumn("[progress.description]{task.description}"),
                    BarColumn(bar_width=30),
                    MofNCompleteColumn(),
                    console=console,
                ) as progress:
                    task = progress.add_task(f"Scan {name}", total=total - len(writer.completed))
                    result = run_scan(setup, spec, threads=n_threads, writer=writer,
                                      progress_callback=lambda _: progress.advance(task))
            else:
                result = run_scan(setup, spec, threads=n_threads, writer=writer)

        summary = {"csv": str(csv_path), "points": result["total"], "failed": result["failed"],
                   "skipped": result["skipped"], "config_hash": setup.hash()}
        if as_json:
            _emit_json(summary)
        elif RICH_AVAILABLE:
            table = Table(show_header=False, box=None, padding=(0, 2))
            table.add_column(style="bold white")
            table.add_column(style="cyan")
            for key, value in summary.items():
                table.add_row(key, str(value))
            console.print(Panel(table, title=f"[bold]Scan {name}[/bold]", border_style="blue"))
        else:
            click.echo(f"Scan {name}: {result['total']} points, {result['failed']} failed -> {csv_path}")

    except Exception as e:
        _fail(e, verbose)


def main():
    """Main entry point"""
    cli()


if __name__ == "__main__":
    main()
