"""Latency and cost of parallel jobs with stragglers under redundancy and relaunch."""
from .analytic import UnsupportedCombination, evaluate, opt_relaunch
from .distributions import Empirical, Pareto, ShiftedExp
from .plan import Metrics, Mode, RedundancyPlan
from .simulator import BACKEND, estimate, simulate

__all__ = [
    "BACKEND", "Empirical", "Metrics", "Mode", "Pareto", "RedundancyPlan", "ShiftedExp",
    "UnsupportedCombination", "estimate", "evaluate", "opt_relaunch", "simulate",
]
__version__ = "0.1.0"
