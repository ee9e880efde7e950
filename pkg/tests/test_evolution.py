"""Genetic-algorithm tests: operators, selection statistics, elitism and a
miniature end-to-end run on a tiny world."""

import numpy as np
import pytest

from plastevo.evolution import (
    GAConfig,
    Individual,
    _breed,
    _roulette_pick,
    eval_seed_pairs,
    evaluate_rule,
    init_population,
    next_generation,
    rank_order,
    run_ga,
    selection_weights,
)
from plastevo.foraging import SUMMER, WINTER, SeasonSchedule
from plastevo.rules import PlasticityRule
from plastevo.seeding import derive

TINY = GAConfig(
    pop_size=6,
    elite_count=2,
    trials_per_eval=1,
    stagnation_limit=3,
    max_generations=4,
    task="foraging",
    trial_kwargs=dict(
        schedule=SeasonSchedule(150, (SUMMER, WINTER)),
        width=6,
        height=6,
        n_green=2,
        n_blue=2,
        n_hidden=5,
    ),
)


class TestConfig:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            GAConfig(pop_size=1)
        with pytest.raises(ValueError):
            GAConfig(elite_count=0)
        with pytest.raises(ValueError):
            GAConfig(elite_count=30, pop_size=30)
        with pytest.raises(ValueError):
            GAConfig(crossover_prob=1.5)
        with pytest.raises(ValueError):
            GAConfig(stagnation_limit=0)
        with pytest.raises(ValueError):
            GAConfig(trials_per_eval=0)
        with pytest.raises(ValueError):
            GAConfig(task="pursuit")


class TestPopulation:
    def test_init_population_size_and_gene_ranges(self):
        pop = init_population(GAConfig(), np.random.default_rng(0))
        assert len(pop) == 30
        for ind in pop:
            assert ind.fitness is None
            assert 0.0 <= ind.rule.eta < 1.0
            assert all(o in (-1, 0, 1) for o in ind.rule.outcomes)

    def test_init_population_is_reproducible(self):
        a = init_population(GAConfig(), np.random.default_rng(5))
        b = init_population(GAConfig(), np.random.default_rng(5))
        assert [ind.rule for ind in a] == [ind.rule for ind in b]

    def test_rank_order_is_descending_and_stable(self):
        pop = [
            Individual(PlasticityRule(0.1, (0,) * 8), fitness=f)
            for f in (1.0, 3.0, 3.0, -2.0)
        ]
        assert rank_order(pop) == [1, 2, 0, 3]


class TestSelection:
    def test_weights_are_positive_and_order_preserving(self):
        w = selection_weights([-5.0, 0.0, 2.5])
        assert (w > 0).all()
        assert w[0] < w[1] < w[2]

    def test_equal_fitness_collapses_to_uniform(self):
        w = selection_weights([4.2, 4.2, 4.2])
        assert np.allclose(w, w[0])

    def test_roulette_frequencies_match_the_weights(self):
        weights = np.array([1.0, 2.0, 3.0, 4.0])
        cumulative = np.cumsum(weights)
        rng = np.random.default_rng(31)
        n = 20000
        counts = np.zeros(4)
        for _ in range(n):
            counts[_roulette_pick(cumulative, rng)] += 1
        for i, w in enumerate(weights):
            p = w / weights.sum()
            sigma = (p * (1 - p) / n) ** 0.5
            assert abs(counts[i] / n - p) < 3.5 * sigma, i


class TestBreeding:
    def test_identical_parents_without_mutation_breed_a_clone(self):
        cfg = GAConfig(eta_mut_sigma=0.0, discrete_resample_prob=0.0)
        parent = PlasticityRule(0.25, (1, 0, -1, 0, 1, -1, 0, 0))
        child = _breed(parent, parent, cfg, np.random.default_rng(8))
        assert child == parent

    def test_crossover_extremes_pick_one_parent(self):
        a = PlasticityRule(0.1, (1,) * 8)
        b = PlasticityRule(0.9, (-1,) * 8)
        no_mut = dict(eta_mut_sigma=0.0, discrete_resample_prob=0.0)
        child = _breed(a, b, GAConfig(crossover_prob=1.0, **no_mut), np.random.default_rng(0))
        assert child == a
        child = _breed(a, b, GAConfig(crossover_prob=0.0, **no_mut), np.random.default_rng(0))
        assert child == b

    def test_mutation_keeps_genes_in_range(self):
        cfg = GAConfig(eta_mut_sigma=5.0, discrete_resample_prob=1.0)
        rng = np.random.default_rng(12)
        a = PlasticityRule(0.5, (0,) * 8)
        for _ in range(200):
            child = _breed(a, a, cfg, rng)
            assert 0.0 <= child.eta < 1.0
            assert all(o in (-1, 0, 1) for o in child.outcomes)

    def test_next_generation_keeps_the_elites_verbatim(self):
        rng = np.random.default_rng(3)
        pop = init_population(TINY, rng)
        pop = [
            Individual(ind.rule, fitness=float(i), eval_key=(0, i))
            for i, ind in enumerate(pop)
        ]
        nxt = next_generation(pop, TINY, rng)
        assert len(nxt) == TINY.pop_size
        # Highest fitness first, carried over with the cached score.
        assert nxt[0].rule == pop[5].rule and nxt[0].fitness == 5.0
        assert nxt[1].rule == pop[4].rule and nxt[1].fitness == 4.0
        for child in nxt[TINY.elite_count :]:
            assert child.fitness is None

    def test_next_generation_requires_evaluated_parents(self):
        pop = init_population(TINY, np.random.default_rng(0))
        with pytest.raises(ValueError):
            next_generation(pop, TINY, np.random.default_rng(0))


class TestEvaluationSeeds:
    def test_seed_pairs_are_reproducible_and_distinct(self):
        a = eval_seed_pairs(7, 2, 3, 4)
        b = eval_seed_pairs(7, 2, 3, 4)
        assert [(n.spawn_key, w.spawn_key) for n, w in a] == [
            (n.spawn_key, w.spawn_key) for n, w in b
        ]
        assert a[0][0].spawn_key == derive(7, "ga-net", 2, 3, 0).spawn_key
        keys = {n.spawn_key for n, _ in a} | {w.spawn_key for _, w in a}
        assert len(keys) == 8

    def test_evaluate_rule_means_over_the_seed_pairs(self):
        rule = PlasticityRule(0.05, (0, 0, 1, -1, 0, 0, 0, 0))
        pairs = eval_seed_pairs(11, 0, 0, 3)
        fit = evaluate_rule(rule, TINY, pairs)
        singles = [evaluate_rule(rule, TINY, [p]) for p in pairs]
        assert fit == pytest.approx(float(np.mean(singles)))


class TestRunGA:
    def test_tiny_run_is_deterministic_and_monotone(self):
        a = run_ga(TINY, 11)
        b = run_ga(TINY, 11)
        assert a.history == b.history
        assert a.generations == len(a.history) <= TINY.max_generations
        assert len(a.best) == TINY.elite_count
        assert len(a.population) == TINY.pop_size
        bests = [row[1] for row in a.history]
        assert bests == sorted(bests)  # elites make the best non-decreasing
        fits = [ind.fitness for ind in a.best]
        assert fits == sorted(fits, reverse=True)
        assert a.best[0].fitness == bests[-1]

    def test_custom_map_matches_builtin_map(self):
        calls = []

        def recording_map(fn, tasks):
            tasks = list(tasks)
            calls.append(len(tasks))
            return [fn(t) for t in tasks]

        a = run_ga(TINY, 4, map_fn=recording_map)
        b = run_ga(TINY, 4)
        assert a.history == b.history
        assert calls[0] == TINY.pop_size
        # Later generations only evaluate the bred children.
        assert all(c == TINY.pop_size - TINY.elite_count for c in calls[1:])

    def test_generation_callback_sees_every_generation(self):
        seen = []
        run_ga(TINY, 2, on_generation=lambda g, pop: seen.append((g, len(pop))))
        assert seen == [(g, TINY.pop_size) for g in range(len(seen))]
        assert len(seen) >= 1
