#!/usr/bin/env python3
"""
Demo script for spdc-fiber: walks one source configuration through the
angle solver, the validity check, the amplitude grid and the metrics.

Usage:
    python run_demo.py                      # config.yaml, paraxial method
    python run_demo.py --method cga         # closed-form cosine-Gaussian method
    python run_demo.py --quick              # thin crystal, 16x16 grid
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from dotenv import load_dotenv

load_dotenv()


BANNER = """
\033[36m
  ███████╗██████╗ ██████╗  ██████╗
  ██╔════╝██╔══██╗██╔══██╗██╔════╝
  ███████╗██████╔╝██║  ██║██║
  ╚════██║██╔═══╝ ██║  ██║██║
  ███████║██║     ██████╔╝╚██████╗
  ╚══════╝╚═╝     ╚═════╝  ╚═════╝
\033[0m
  Fiber-coupled photon-pair source modelling
"""

QUICK_OVERRIDES = {"crystal.length_um": 100, "grid.n": 16}


def print_banner():
    print(BANNER)


def run_demo(method_name: str = "paraxial", config_path: str = None, quick: bool = False, threads: int = 0):
    """Evaluate one source end to end and write its amplitude grid."""
    print_banner()

    try:
        from src.config import Config
        from src.crystal import solve_opening_angle
        from src.engine import compare_methods, evaluate_metrics
        from src.epmf import Method
        from src.expansion import cga_validity
        from src.metrics import brightness_ppm_analytic, build_grid, decorrelation_tau_ppm
        from src.report_generator import ReportGenerator, ReportMetadata
    except ImportError as e:
        print(f"Import error: {e}")
        print("Make sure you've installed requirements: pip install -r requirements.txt")
        return

    try:
        from rich.console import Console
        console = Console()
        use_rich = True
    except ImportError:
        console = None
        use_rich = False
        print("Note: Install 'rich' for better output formatting")

    print("\nLoading configuration...")
    try:
        config = Config(config_path)
        setup = config.setup()
        if quick:
            setup = setup.replace_paths(QUICK_OVERRIDES)
        n_threads = threads or config.threads
        print(f"   ✓ Config loaded from: {config.config_path}")
        print(f"   ✓ Setup hash: {setup.hash()}")
    except Exception as e:
        print(f"   Error loading config: {e}")
        return

    crystal, pump, collection = setup.crystal, setup.pump, setup.collection
    print(f"\nSource: {crystal.name}, L = {crystal.length:g} um, cut {math.degrees(crystal.cut_angle):g} deg")
    print(f"   pump tau_p = {pump.tau_p:.1f} fs, w_p = {pump.w_p:g} um")
    print(f"   fibers w_s = {collection.w_s:g} um, w_i = {collection.w_i:g} um")

    print("\nSolving the opening angle...")
    try:
        alpha = solve_opening_angle(crystal, pump.omega0)
        print(f"   ✓ alpha = {math.degrees(alpha):.4f} deg")
    except Exception as e:
        print(f"   Error: {e}")
        return

    print("\nChecking the cosine-Gaussian validity margins...")
    margins = cga_validity(setup)
    for label, value, ok in (("pulse", margins.tau_margin, margins.tau_ok),
                             ("waist", margins.waist_margin, margins.waist_ok)):
        print(f"   {'✓' if ok else '!'} {label} margin {value:.3g}")

    print("\nPerfect-phase-matching estimates...")
    try:
        print(f"   ✓ R_c(0) = {brightness_ppm_analytic(setup):.6g}")
        print(f"   ✓ decorrelating tau_p = {decorrelation_tau_ppm(setup):.2f} fs")
    except Exception as e:
        print(f"   {e}")

    method = Method.parse(method_name)
    print(f"\nBuilding the {setup.grid_n}x{setup.grid_n} amplitude grid ({method.label}, {n_threads} threads)...")
    try:
        grid = build_grid(setup, method, threads=n_threads)
        print(f"   ✓ half-width {grid.window:.4g} rad/fs")
    except Exception as e:
        print(f"   Error building grid: {e}")
        return

    print("\nWriting grid...")
    report_gen = ReportGenerator(config.output_config.get("directory", "output"))
    metadata = ReportMetadata(title=f"psi grid ({method.label})", command="demo",
                              method=method.label, config_hash=setup.hash())
    try:
        csv_path = report_gen.write_grid(grid, setup.to_dict(), metadata)
        print(f"   CSV: {csv_path}")
        print(f"   JSON: {csv_path}.json")
    except Exception as e:
        print(f"   Error writing grid: {e}")

    print("\nComputing metrics...")
    try:
        result = evaluate_metrics(setup, method, threads=n_threads)
    except Exception as e:
        print(f"   Error: {e}")
        return

    summary = {k: v for k, v in result.items() if k not in ("method", "config_hash")}
    if method.kind != "perfect":
        try:
            comparison = compare_methods(setup, method, Method.perfect(), threads=n_threads)
            summary["overlap with perfect PM"] = 1.0 - comparison["overlap_deficit"]
        except Exception as e:
            print(f"   Comparison skipped: {e}")

    if use_rich:
        console.print("\n")
        report_gen.print_summary(summary, ReportMetadata(title="Source metrics", command="demo",
                                                         method=method.label, config_hash=setup.hash()))
    else:
        for key, value in summary.items():
            print(f"   {key}: {value}")

    print("\n" + "=" * 60)
    print("Done.")
    print("=" * 60)
    print()


if __name__ == "__main__":
    import argparse

    arg_parser = argparse.ArgumentParser(description="spdc-fiber demo")
    arg_parser.add_argument("--method", type=str, default="paraxial",
                            choices=["direct", "paraxial", "cga", "ga", "perfect"],
                            help="Evaluation method (default: paraxial)")
    arg_parser.add_argument("--config", type=str, default=None, help="Path to config.yaml")
    arg_parser.add_argument("--quick", action="store_true", help="Thin crystal and a coarse grid")
    arg_parser.add_argument("--threads", type=int, default=0, help="Worker threads (default: config)")
    args = arg_parser.parse_args()

    run_demo(method_name=args.method, config_path=args.config, quick=args.quick, threads=args.threads)
