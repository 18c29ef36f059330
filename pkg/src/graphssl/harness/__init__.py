"""Benchmark harness: fold plans, tuning, orchestration, rank statistics, reports."""

from .bench import BenchConfig, DatasetConfig, EvalReport, load_config, run_benchmark
from .cv import CvPlan, make_cv_plan
from .report import emit_report, summarize
from .stats import friedman_test, nemenyi_cd
from .tuning import DEFAULT_GRIDS, MODE_DEFAULTS, grid_search

__all__ = ["BenchConfig", "DatasetConfig", "EvalReport", "load_config", "run_benchmark",
           "CvPlan", "make_cv_plan", "emit_report", "summarize", "friedman_test",
           "nemenyi_cd", "DEFAULT_GRIDS", "MODE_DEFAULTS", "grid_search"]
