"""spdc-fiber engine: programmatic API for metrics, comparisons and scans."""

from .api import compare_methods, evaluate_metrics, evaluate_point, run_scan, scan_columns

__all__ = ["compare_methods", "evaluate_metrics", "evaluate_point", "run_scan", "scan_columns"]
