"""Permutation-based multiple testing with simultaneous false discovery
exceedance control, maxT, and a simulation lab."""

from .core import AnalysisConfig, RejectionSet, StatMatrix, count_exceed, fdp_of, upper_quantile
from .fdx_seq import SequentialResult, sequential_approx, sequential_exact, s_g_subset_grid
from .fdx_single import SingleStepResult, s_g_grid, single_step, single_step_pvalues
from .maxt import MaxTResult, coincidence_check, maxt_sequential, maxt_single
from .report import ZoomTable, render_report, zoom_table
from .resampling import Dataset, ResamplePlan, build_stat_matrix, draw_transforms
from .stats import StatisticPlugin

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "Dataset", "MaxTResult", "RejectionSet", "ResamplePlan",
    "SequentialResult", "SingleStepResult", "StatMatrix", "StatisticPlugin", "ZoomTable",
    "build_stat_matrix", "coincidence_check", "count_exceed", "draw_transforms", "fdp_of",
    "maxt_sequential", "maxt_single", "render_report", "s_g_grid", "s_g_subset_grid",
    "sequential_approx", "sequential_exact", "single_step", "single_step_pvalues",
    "upper_quantile", "zoom_table",
]
