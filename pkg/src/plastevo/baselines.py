"""Non-plastic reference agents: weight-space hill climbing and a hand-coded
greedy forager.

Hill climbing searches directly over network weights with frozen-weight
evaluations: every candidate runs a short episode with plasticity disabled.
All evaluations within one run replay the same seeded world, so an episode's
score is a deterministic function of the weights; a seasonal switch flips
only the scoring, which is why the incumbent's re-evaluated fitness at a
boundary is (for foraging) the exact negation of its previous score.

The perfect agent is the hand-coded upper-bound policy for the foraging
task; it never walks into a wall on purpose and only suffers the 2%
random-action noise shared with learning agents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .foraging import (
    SUMMER,
    ForagingTrialResult,
    SeasonSchedule,
    init_foraging_world,
    run_foraging_steps,
    run_foraging_trial,
)
from .network import Network, init_network
from .preypredator import init_pp_world, run_pp_steps
from .seeding import as_seed_sequence, derive, derive_rng

FORAGING_SEASONS = 4
PP_SEASONS = 2


@dataclass
class HCResult:
    best_net: Network
    best_fitness: float
    # Incumbent fitness after each iteration; length = seasons * iterations.
    trace: np.ndarray
    trace_seasons: np.ndarray
    # Incumbent fitness re-evaluated at the start of each season (index 0 is
    # the initial evaluation); the seasonal dip shows up here.
    boundary_fitness: list
    # Total plastic updates seen across all evaluations; must stay 0.
    updates: int


def _season_sequence(seasons: int) -> list:
    return [k % 2 for k in range(seasons)]


def _hc_eval_foraging(net, season, world_seed, steps, explore_prob, env):
    rng = np.random.default_rng(world_seed)
    world = init_foraging_world(
        rng,
        env.get("width", 100),
        env.get("height", 100),
        env.get("n_green", 50),
        env.get("n_blue", 50),
        season,
    )
    greens, blues, _, upd, _ = run_foraging_steps(
        world, net, None, steps, rng, explore_prob=explore_prob, plasticity=False
    )
    correct, incorrect = (greens, blues) if season == SUMMER else (blues, greens)
    return float(correct - incorrect), upd


def _hc_eval_pp(net, season, world_seed, steps, explore_prob, env):
    rng = np.random.default_rng(world_seed)
    world = init_pp_world(
        rng,
        env.get("width", 100),
        env.get("height", 100),
        env.get("n_green", 10),
        env.get("n_blue", 10),
        season,
        env.get("threshold", 5.0),
        env.get("bias_prob", 0.9),
    )
    collected, caught, _, upd, _ = run_pp_steps(
        world, net, None, steps, rng, explore_prob=explore_prob, plasticity=False
    )
    return float(env.get("alpha", 3.0) * collected - caught), upd


def _perturb(net: Network, sigma: float, rng: np.random.Generator) -> Network:
    return Network(
        net.w_hidden + rng.normal(0.0, sigma, net.w_hidden.shape),
        net.w_out + rng.normal(0.0, sigma, net.w_out.shape),
    )


def run_hill_climbing(
    task: str = "foraging",
    seasons: int | None = None,
    seed=None,
    steps_per_eval: int = 1000,
    iterations_per_season: int = 1000,
    perturb_sigma: float = 0.1,
    explore_prob: float = 0.0,
    n_hidden: int | None = None,
    season_length: int | None = None,
    **env,
) -> HCResult:
    """Greedy (1+1) search over weights under a fixed seeded world.

    Per iteration: perturb every weight by N(0, sigma), evaluate the
    candidate on the current season for ``steps_per_eval`` frozen steps,
    keep it when not worse than the incumbent. Ties must be accepted:
    constant-turn policies trace a tiny closed loop that touches nothing,
    so the zero-fitness plateau they sit on is absorbing under
    strictly-better acceptance, while accepting ties lets the incumbent
    drift across the plateau until a candidate breaks out of the loop.
    At each season boundary the incumbent is re-evaluated under the new
    season before any candidate is compared; on the replayed world that
    re-evaluation is the exact negation of its previous score.

    Fitness is reported in per-season units: the short-episode count is
    scaled by season_length / steps_per_eval (5000-step seasons for
    foraging, 4000 for pursuit-evasion) so traces are comparable with
    full-protocol results.
    """
    if task == "foraging":
        n_in, evaluate = 6, _hc_eval_foraging
        seasons = FORAGING_SEASONS if seasons is None else seasons
        n_hidden = 20 if n_hidden is None else n_hidden
        season_length = 5000 if season_length is None else season_length
    elif task == "prey-predator":
        n_in, evaluate = 88, _hc_eval_pp
        seasons = PP_SEASONS if seasons is None else seasons
        n_hidden = 50 if n_hidden is None else n_hidden
        season_length = 4000 if season_length is None else season_length
    else:
        raise ValueError(f"unknown task {task!r}")
    scale = season_length / steps_per_eval
    master = as_seed_sequence(seed)
    # A single world seed per run: evaluations are comparable because every
    # candidate replays the identical episode.
    world_ss = derive(master, "hc-world")
    net = init_network(n_in, n_hidden, 3, derive_rng(master, "hc-net"))
    mut_rng = derive_rng(master, "hc-mutate")

    sequence = _season_sequence(seasons)
    trace = np.empty(seasons * iterations_per_season, dtype=np.float64)
    trace_seasons = np.empty(seasons * iterations_per_season, dtype=np.int8)
    boundary = []
    updates = 0
    best_fitness = None
    idx = 0
    for season in sequence:
        best_fitness, upd = evaluate(net, season, world_ss, steps_per_eval,
                                     explore_prob, env)
        updates += upd
        boundary.append(best_fitness * scale)
        for _ in range(iterations_per_season):
            candidate = _perturb(net, perturb_sigma, mut_rng)
            fit, upd = evaluate(candidate, season, world_ss, steps_per_eval,
                                explore_prob, env)
            updates += upd
            if fit >= best_fitness:
                net, best_fitness = candidate, fit
            trace[idx] = best_fitness * scale
            trace_seasons[idx] = season
            idx += 1
    return HCResult(net, float(best_fitness * scale), trace, trace_seasons,
                    boundary, updates)


def run_perfect_agent(
    seed,
    schedule: SeasonSchedule | None = None,
    explore_prob: float = 0.02,
    collect_log: bool = False,
    **env,
) -> ForagingTrialResult:
    """Full foraging protocol under the hand-coded greedy policy.

    The policy prefers, in order: a step onto the season-correct item
    (Straight, then Left, then Right); turning away from walls; a step onto
    an empty cell; and only as a last resort a step onto the incorrect item.
    The usual exploration noise still applies.
    """
    master = as_seed_sequence(seed)
    return run_foraging_trial(
        None,
        derive(master, "pa-net"),
        derive(master, "pa-world"),
        schedule=schedule,
        explore_prob=explore_prob,
        plasticity=False,
        perfect=True,
        collect_log=collect_log,
        **env,
    )
