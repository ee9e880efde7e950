"""Genetic search over plasticity-rule genotypes.

A genotype is the 9-vector (eta, o1..o8): one real learning rate in [0, 1)
plus eight ternary outcomes.  The GA is elitist: the top ``elite_count``
individuals survive unchanged with cached fitness, the rest of the next
generation is bred by fitness-proportionate (roulette) selection, per-gene
uniform crossover and mixed-type mutation.  A run stops once the best fitness
has not strictly improved for ``stagnation_limit`` consecutive generations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .foraging import run_foraging_trial
from .preypredator import run_pp_trial
from .rules import PlasticityRule, format_rule, random_rule
from .seeding import as_seed_sequence, derive, derive_rng

_ETA_MAX = math.nextafter(1.0, 0.0)
_ROULETTE_EPS = 1e-9

TASKS = ("foraging", "prey-predator")


@dataclass
class Individual:
    """A candidate rule with its cached evaluation result."""

    rule: PlasticityRule
    fitness: float | None = None
    # (generation, slot) key identifying the seed set the fitness came from.
    eval_key: tuple = ()


@dataclass
class GAConfig:
    pop_size: int = 30
    elite_count: int = 10
    crossover_prob: float = 0.5
    eta_mut_sigma: float = 0.1
    discrete_resample_prob: float = 0.15
    stagnation_limit: int = 30
    trials_per_eval: int = 5
    task: str = "foraging"
    alpha: float = 3.0
    # Optional hard cap on generations (0 = none); stagnation is the paper
    # criterion, the cap only guards runaway configurations.
    max_generations: int = 0
    # Extra keyword arguments forwarded to the trial runner (world size,
    # schedule, hidden-layer size, ...).
    trial_kwargs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be at least 2")
        if not 0 < self.elite_count < self.pop_size:
            raise ValueError("elite_count must be in (0, pop_size)")
        for name in ("crossover_prob", "discrete_resample_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.eta_mut_sigma < 0.0:
            raise ValueError("eta_mut_sigma must be non-negative")
        if self.stagnation_limit < 1:
            raise ValueError("stagnation_limit must be positive")
        if self.trials_per_eval < 1:
            raise ValueError("trials_per_eval must be positive")
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}, expected one of {TASKS}")


@dataclass
class GAResult:
    best: list  # top elite_count of the final population, fitness descending
    history: list  # (generation, best, mean, std, best rule text) per generation
    population: list  # full final population
    generations: int


def init_population(cfg: GAConfig, rng: np.random.Generator) -> list:
    """Uniformly random initial population of ``cfg.pop_size`` individuals."""
    return [Individual(random_rule(rng)) for _ in range(cfg.pop_size)]


def eval_seed_pairs(master, generation: int, slot: int, n_trials: int) -> list:
    """(net seed, world seed) pairs for one individual's evaluation."""
    master = as_seed_sequence(master)
    return [
        (derive(master, "ga-net", generation, slot, t),
         derive(master, "ga-world", generation, slot, t))
        for t in range(n_trials)
    ]


def evaluate_rule(rule: PlasticityRule, cfg: GAConfig, seed_pairs) -> float:
    """Mean fitness of ``rule`` over one trial per (net, world) seed pair."""
    scores = []
    for net_seed, world_seed in seed_pairs:
        if cfg.task == "foraging":
            res = run_foraging_trial(rule, net_seed, world_seed, **cfg.trial_kwargs)
            scores.append(res.fitness)
        else:
            res = run_pp_trial(rule, net_seed, world_seed, **cfg.trial_kwargs)
            scores.append(res.score(cfg.alpha))
    return float(np.mean(scores))


def _eval_task(args):
    rule, cfg, seed_pairs = args
    return evaluate_rule(rule, cfg, seed_pairs)


def evaluate(ind: Individual, cfg: GAConfig, master, generation: int, slot: int) -> Individual:
    """Evaluate one individual on its derived seed set; returns a new Individual."""
    pairs = eval_seed_pairs(master, generation, slot, cfg.trials_per_eval)
    fit = evaluate_rule(ind.rule, cfg, pairs)
    return replace(ind, fitness=fit, eval_key=(generation, slot))


def selection_weights(fitnesses) -> np.ndarray:
    """Roulette weights: fitness shifted by (min - eps) so all are positive.

    The shift preserves ordering, and for all-equal fitness every weight
    collapses to eps, i.e. uniform selection.
    """
    fits = np.asarray(fitnesses, dtype=np.float64)
    return fits - (fits.min() - _ROULETTE_EPS)


def _roulette_pick(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random() * cumulative[-1]
    return int(np.searchsorted(cumulative, u, side="right"))


def _breed(parent_a: PlasticityRule, parent_b: PlasticityRule,
           cfg: GAConfig, rng: np.random.Generator) -> PlasticityRule:
    """Uniform crossover of the 9 genes followed by mutation."""
    eta = parent_a.eta if rng.random() < cfg.crossover_prob else parent_b.eta
    outcomes = [
        a if rng.random() < cfg.crossover_prob else b
        for a, b in zip(parent_a.outcomes, parent_b.outcomes)
    ]
    eta = eta + rng.normal(0.0, cfg.eta_mut_sigma)
    eta = min(max(eta, 0.0), _ETA_MAX)
    for g in range(8):
        if rng.random() < cfg.discrete_resample_prob:
            outcomes[g] = int(rng.random() * 3.0) - 1
    return PlasticityRule(float(eta), tuple(outcomes))


def rank_order(population) -> list:
    """Indices sorted by fitness descending, stable in original order."""
    return sorted(range(len(population)),
                  key=lambda i: (-population[i].fitness, i))


def next_generation(population, cfg: GAConfig, rng: np.random.Generator) -> list:
    """Elites carried over verbatim, the rest bred by roulette + crossover."""
    if any(ind.fitness is None for ind in population):
        raise ValueError("cannot breed from an unevaluated population")
    order = rank_order(population)
    elites = [replace(population[i]) for i in order[: cfg.elite_count]]

    weights = selection_weights([ind.fitness for ind in population])
    cumulative = np.cumsum(weights)
    children = []
    for _ in range(cfg.pop_size - cfg.elite_count):
        pa = population[_roulette_pick(cumulative, rng)]
        pb = population[_roulette_pick(cumulative, rng)]
        children.append(Individual(_breed(pa.rule, pb.rule, cfg, rng)))
    return elites + children


def run_ga(cfg: GAConfig, master_seed, map_fn=map, on_generation=None) -> GAResult:
    """Run the GA to stagnation; reproducible given (cfg, master_seed).

    ``map_fn`` evaluates a list of (rule, cfg, seed_pairs) tasks and may be a
    process-pool map; results are deterministic either way because every
    evaluation's seeds are derived from (generation, slot, trial) alone.
    """
    master = as_seed_sequence(master_seed)
    rng = derive_rng(master, "ga-ops")
    population = init_population(cfg, rng)

    history = []
    best_so_far = -math.inf
    stall = 0
    generation = 0
    while True:
        pending = [(slot, ind) for slot, ind in enumerate(population)
                   if ind.fitness is None]
        tasks = [
            (ind.rule, cfg, eval_seed_pairs(master, generation, slot, cfg.trials_per_eval))
            for slot, ind in pending
        ]
        for (slot, ind), fit in zip(pending, map_fn(_eval_task, tasks)):
            population[slot] = replace(ind, fitness=float(fit),
                                       eval_key=(generation, slot))

        fits = np.array([ind.fitness for ind in population])
        best_slot = rank_order(population)[0]
        best = population[best_slot]
        history.append((generation, float(fits.max()), float(fits.mean()),
                        float(fits.std()), format_rule(best.rule)))
        if on_generation is not None:
            on_generation(generation, population)

        if best.fitness > best_so_far:
            best_so_far = best.fitness
            stall = 0
        else:
            stall += 1
        if stall >= cfg.stagnation_limit:
            break
        if cfg.max_generations and generation + 1 >= cfg.max_generations:
            break
        population = next_generation(population, cfg, rng)
        generation += 1

    order = rank_order(population)
    top = [population[i] for i in order[: cfg.elite_count]]
    return GAResult(best=top, history=history, population=population,
                    generations=generation + 1)
