"""Joint recommendation-policy and tax design for a queue with unobservable backlog."""

from .incentives import (IncentiveReport, allocations, build_taxes, outside_option_revenue,
                         revenue, verify_dsic, verify_ir)
from .lp_builder import (DesignSolution, OccupationMeasure, assemble_solution, build_lp,
                         recover_marginals, recover_policy, solve_design)
from .model import (ModelConfig, Policy, RewardFn, TaxSchedule, expected_utility_report,
                    outside_option, reference_config, reward_at, sign_threshold)
from .simplex import LpProblem, LpSolution, SolverOptions, check_solution
from .simplex import solve as solve_lp
from .simulator import SimStats, empirical_revenue, simulate
from .stationary import StationaryDist, expected_reward, stationary_distribution
from .structure import StructureReport, classify, find_xtilde, solve_exceptional_system

__version__ = "0.1.0"
