"""Two-tier heterogeneous-network coverage, rate, and planning toolkit.

Closed-form outage/load/rate analysis for a two-tier Poisson cellular
deployment with frequency reuse and micro-first SIR association, a
Monte Carlo simulator validating the closed forms, and a cell-planning
optimizer over the reuse factor and the tier density ratio.
"""

__version__ = "1.0.0"

from . import analytic, params, planner, simulator
from ._kernels import backend_name
from .analytic import (CoverageReport, RateReport, coverage_report,
                       mean_rate, outage, rate_coverage, rate_report)
from .params import SystemParams, from_config, load_config
from .planner import (InfeasiblePlan, PlanningRequest, PlanningSolution,
                      solve)
from .simulator import SCHEMES, MonteCarloEstimate, monte_carlo

__all__ = [
    "__version__", "analytic", "params", "planner", "simulator",
    "backend_name",
    "CoverageReport", "RateReport", "coverage_report", "mean_rate",
    "outage", "rate_coverage", "rate_report",
    "SystemParams", "from_config", "load_config",
    "InfeasiblePlan", "PlanningRequest", "PlanningSolution", "solve",
    "SCHEMES", "MonteCarloEstimate", "monte_carlo",
]
