"""Newcomb's problem as a pair of Bayes net games, with exact arithmetic."""

__version__ = "0.1.0"

from .consistency import (  # noqa: E402
    ConsistencyReport,
    ExtendedGame,
    FeasibleSet,
    NoSolution,
    Table2Param,
    accuracy_violation_witness,
    check_profile,
    feasible_g_independent,
    feasible_g_independent_oracle,
    induced_prediction_marginal,
)
from .netgame import (  # noqa: E402
    BayesNet,
    Game,
    Joint,
    NetNode,
    PayoffTable,
    best_response,
    expected_payoff,
    extract_conditional,
    joint_from_net,
    marginal,
)
from .newcomb import (  # noqa: E402
    Scenario,
    canonical_scenario,
    simulate,
    solve_combined_constrained,
    solve_fearful,
    solve_realist,
    solve_variant_choose_game,
    time_reverse,
)
from .prob import Cpd, Dist, OutcomeSpace, alpha_accurate_cpd, delta, make_dist, total_variation  # noqa: E402
