"""Deterministic workbench for evolving discrete synaptic plasticity rules.

Binary-activation feed-forward agents learn two seasonal grid-world tasks
(item foraging and pursuit-evasion) during their lifetime via ternary
reward-modulated Hebbian rules; a genetic algorithm searches the rule
space, with hill-climbing and a hand-coded agent as baselines. Everything
is reproducible from a single seed, serial or parallel.
"""

from .errors import ConfigurationError
from .network import ActivationRecord, Network, forward, init_network
from .rules import (
    NAMED_RULES,
    PlasticityRule,
    apply_update,
    format_rule,
    lookup,
    outcome_index,
    parse_rule,
    random_rule,
)
from .foraging import (
    ForagingTrialResult,
    ForagingWorld,
    SeasonSchedule,
    SeasonStats,
    foraging_fitness,
    init_foraging_world,
    run_foraging_trial,
)
from .preypredator import (
    EncounterStats,
    PPTrialResult,
    PreyPredatorWorld,
    init_pp_world,
    pp_fitness,
    run_pp_trial,
)
from .evolution import GAConfig, GAResult, Individual, next_generation, run_ga
from .baselines import HCResult, run_hill_climbing, run_perfect_agent
from .analysis import (
    DistinctRuleRow,
    aggregate_distinct_rules,
    hidden_sweep,
    run_validation_protocol,
    wilcoxon_rank_sum,
)
from .harness import ExperimentConfig, load_config, parse_config
from .seeding import as_seed_sequence, derive

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "Network",
    "ActivationRecord",
    "init_network",
    "forward",
    "PlasticityRule",
    "NAMED_RULES",
    "outcome_index",
    "lookup",
    "apply_update",
    "parse_rule",
    "format_rule",
    "random_rule",
    "ForagingWorld",
    "SeasonSchedule",
    "SeasonStats",
    "ForagingTrialResult",
    "init_foraging_world",
    "run_foraging_trial",
    "foraging_fitness",
    "PreyPredatorWorld",
    "EncounterStats",
    "PPTrialResult",
    "init_pp_world",
    "run_pp_trial",
    "pp_fitness",
    "GAConfig",
    "GAResult",
    "Individual",
    "next_generation",
    "run_ga",
    "HCResult",
    "run_hill_climbing",
    "run_perfect_agent",
    "DistinctRuleRow",
    "aggregate_distinct_rules",
    "hidden_sweep",
    "run_validation_protocol",
    "wilcoxon_rank_sum",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "as_seed_sequence",
    "derive",
    "__version__",
]
