"""Analysis-layer tests: rank-sum statistics against a brute-force
reference, distinct-rule aggregation, the frozen-test validation protocol
and the hidden-layer sweep."""

import math

import numpy as np
import pytest

from plastevo.analysis import (
    DEFAULT_SWEEP_SIZES,
    EXACT_LIMIT,
    aggregate_distinct_rules,
    brute_force_rank_sum_p,
    export_weight_snapshots,
    hidden_sweep,
    run_validation_protocol,
    sweep_tasks,
    wilcoxon_rank_sum,
)
from plastevo.foraging import SUMMER, WINTER, SeasonSchedule, run_foraging_trial
from plastevo.rules import NAMED_RULES, PlasticityRule

SMALL_ENV = dict(width=12, height=12, n_green=4, n_blue=4, n_hidden=8)


class TestWilcoxonRankSum:
    def test_fully_tied_samples_give_one(self):
        assert wilcoxon_rank_sum([3.0], [3.0]) == 1.0
        assert wilcoxon_rank_sum([2, 2, 2, 2], [2, 2, 2]) == 1.0
        assert wilcoxon_rank_sum([5.0] * 10, [5.0] * 10) == 1.0

    def test_separated_triples(self):
        # Complete separation of 3 vs 3: the two most extreme of the
        # C(6,3)=20 assignments.
        assert wilcoxon_rank_sum([1, 2, 3], [4, 5, 6]) == pytest.approx(2 / 20)

    def test_separated_sixes(self):
        assert wilcoxon_rank_sum(range(6), range(10, 16)) == pytest.approx(
            2 / math.comb(12, 6)
        )

    def test_symmetric_in_the_sample_order(self):
        a, b = [1.0, 5.0, 2.0], [4.0, 4.0]
        assert wilcoxon_rank_sum(a, b) == pytest.approx(wilcoxon_rank_sum(b, a))
        big_a, big_b = list(range(9)), list(range(4, 13))
        assert wilcoxon_rank_sum(big_a, big_b) == pytest.approx(
            wilcoxon_rank_sum(big_b, big_a)
        )

    def test_matches_brute_force_enumeration_with_ties(self):
        rng = np.random.default_rng(123)
        for _ in range(150):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 6))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 4, size=m).tolist()
            expected = brute_force_rank_sum_p(a, b)
            assert wilcoxon_rank_sum(a, b) == pytest.approx(expected, abs=1e-9), (a, b)

    def test_normal_branch_behaves_sensibly(self):
        far = wilcoxon_rank_sum(range(10), range(100, 110))
        near = wilcoxon_rank_sum(range(10), range(5, 15))
        assert 0.0 < far < 1e-3
        assert far < near <= 1.0
        assert len(list(range(10))) * 2 > EXACT_LIMIT

    def test_rejects_empty_or_non_finite_samples(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([], [1.0])
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([1.0], [float("nan")])


class TestAggregateDistinctRules:
    def test_groups_by_outcome_pattern_only(self):
        pat_a = (0, 0, 1, -1, 0, 0, 0, 0)
        pat_b = (1, 0, 0, 0, 0, 0, 0, 1)
        pairs = [
            (PlasticityRule(0.1, pat_a), 10.0),
            (PlasticityRule(0.3, pat_a), 20.0),
            (PlasticityRule(0.5, pat_a), 30.0),
            (PlasticityRule(0.2, pat_b), 25.0),
        ]
        rows = aggregate_distinct_rules(pairs)
        assert [r.pattern for r in rows] == [pat_b, pat_a]  # medians 25 vs 20
        a_row = rows[1]
        assert a_row.count == 3
        assert a_row.fitness_median == pytest.approx(20.0)
        assert a_row.fitness_max == pytest.approx(30.0)
        assert a_row.fitness_min == pytest.approx(10.0)
        assert a_row.fitness_std == pytest.approx(np.std([10.0, 20.0, 30.0]))
        assert a_row.eta_mean == pytest.approx(0.3)
        b_row = rows[0]
        assert b_row.count == 1
        assert b_row.fitness_std == 0.0

    def test_median_ties_break_by_count(self):
        pat_a = (0,) * 8
        pat_b = (1,) * 8
        pairs = [
            (PlasticityRule(0.1, pat_a), 5.0),
            (PlasticityRule(0.1, pat_a), 5.0),
            (PlasticityRule(0.1, pat_b), 5.0),
        ]
        rows = aggregate_distinct_rules(pairs)
        assert rows[0].pattern == pat_a and rows[0].count == 2

    def test_empty_input_raises(self):
        with pytest.raises(ValueError):
            aggregate_distinct_rules([])


class TestValidationProtocol:
    RULE = NAMED_RULES["foraging-best"]

    def test_checkpoint_grid_covers_the_whole_trial(self):
        sched = SeasonSchedule(60, (SUMMER, WINTER))
        val = run_validation_protocol(
            self.RULE, 3, 4, 5, sched, interval=20, test_steps=30, **SMALL_ENV
        )
        assert val.steps.tolist() == [20, 40, 60, 80, 100, 120]
        assert val.seasons.tolist() == [SUMMER] * 3 + [WINTER] * 3
        assert val.fitnesses.shape == (6,)
        assert np.isfinite(val.fitnesses).all()
        assert len(val.stats) == 2

    def test_off_grid_interval_still_checkpoints_on_global_multiples(self):
        sched = SeasonSchedule(50, (SUMMER, WINTER))
        val = run_validation_protocol(
            self.RULE, 3, 4, 5, sched, interval=40, test_steps=20, **SMALL_ENV
        )
        assert val.steps.tolist() == [40, 80]
        assert val.seasons.tolist() == [SUMMER, WINTER]

    def test_validation_does_not_disturb_the_learning_trial(self):
        sched = SeasonSchedule(50, (SUMMER, WINTER))
        val = run_validation_protocol(
            self.RULE, 7, 8, 9, sched, interval=25, test_steps=20,
            collect_log=True, **SMALL_ENV
        )
        plain = run_foraging_trial(
            self.RULE, 7, 8, sched, collect_log=True, **SMALL_ENV
        )
        assert val.log == plain.log
        assert val.stats == plain.stats

    def test_checkpoints_are_reproducible(self):
        sched = SeasonSchedule(40, (SUMMER,))
        a = run_validation_protocol(self.RULE, 1, 2, 3, sched, interval=10,
                                    test_steps=15, **SMALL_ENV)
        b = run_validation_protocol(self.RULE, 1, 2, 3, sched, interval=10,
                                    test_steps=15, **SMALL_ENV)
        assert np.array_equal(a.fitnesses, b.fitnesses)

    def test_rejects_a_nonpositive_interval(self):
        with pytest.raises(ValueError):
            run_validation_protocol(self.RULE, 1, 2, 3, interval=0)


class TestHiddenSweep:
    RULE = NAMED_RULES["foraging-best"]
    KW = dict(
        schedule=SeasonSchedule(60, (SUMMER, WINTER)),
        width=12, height=12, n_green=4, n_blue=4,
    )

    def test_default_grid(self):
        assert DEFAULT_SWEEP_SIZES == (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)

    def test_rows_follow_the_requested_sizes(self):
        rows = hidden_sweep(self.RULE, 5, sizes=(3, 6), trials=3, trial_kwargs=self.KW)
        assert [r[0] for r in rows] == [3, 6]
        for _, mean, std in rows:
            assert math.isfinite(mean) and std >= 0.0
        again = hidden_sweep(self.RULE, 5, sizes=(3, 6), trials=3, trial_kwargs=self.KW)
        assert rows == again

    def test_world_seeds_are_paired_across_sizes(self):
        tasks = sweep_tasks(self.RULE, 5, (3, 6), 2, self.KW)
        assert len(tasks) == 4
        worlds = [t[3].spawn_key for t in tasks]
        assert worlds[0] == worlds[2] and worlds[1] == worlds[3]
        nets = [t[2].spawn_key for t in tasks]
        assert len(set(nets)) == 4


class TestWeightSnapshots:
    def test_labels_ranges_and_normalization(self):
        sched = SeasonSchedule(150, (SUMMER, WINTER))
        snaps = export_weight_snapshots(
            NAMED_RULES["foraging-best"], 3, 4, sched, **SMALL_ENV
        )
        assert [label for label, _, _ in snaps] == ["init", "season1", "season2"]
        _, init_h, init_o = snaps[0]
        assert init_h.shape == (8, 7) and init_o.shape == (3, 9)
        assert (np.abs(init_h) <= 1.0).all() and (np.abs(init_o) <= 1.0).all()
        for _, w_hidden, w_out in snaps[1:]:
            np.testing.assert_allclose(np.linalg.norm(w_hidden, axis=1), 1.0, atol=1e-9)
            np.testing.assert_allclose(np.linalg.norm(w_out, axis=1), 1.0, atol=1e-9)
        assert not np.array_equal(snaps[1][1], init_h)

    def test_snapshots_are_copies(self):
        sched = SeasonSchedule(50, (SUMMER, SUMMER))
        snaps = export_weight_snapshots(
            NAMED_RULES["foraging-best"], 1, 2, sched, **SMALL_ENV
        )
        snaps[1][1][:] = 99.0
        assert not np.array_equal(snaps[1][1], snaps[2][1])
