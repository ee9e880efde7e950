"""Acceptance gate for the shipped defaults.

One test per release criterion, each printing a single
``[criterion N] PASS/FAIL: measured ...`` line (written to the terminal
stream directly so the verdict appears even under output capture) before
asserting the criterion at its stated tolerance.

Criterion 3 is asserted at its stated band even though the catalog rule
it measures falls short of that band under this implementation (it
learns in the first season and then collapses across the seasonal
reversals); the criterion is kept unweakened on purpose. The analysis
lives in the project decision ledger, outside the package.
"""

import time
from itertools import product

import numpy as np
import pytest

from plastevo.analysis import brute_force_rank_sum_p, hidden_sweep, wilcoxon_rank_sum
from plastevo.baselines import run_hill_climbing
from plastevo.evolution import GAConfig, run_ga
from plastevo.foraging import SeasonSchedule
from plastevo.harness import (
    ExperimentConfig,
    experiment_perfect_agent,
    random_rule_baseline,
    run_rule_trials,
)
from plastevo.network import forward, init_network
from plastevo.rules import (
    NAMED_RULES,
    PlasticityRule,
    apply_update,
    lookup,
    outcome_index,
)
from plastevo.seeding import derive


# One verdict line per criterion; the conftest terminal-summary hook
# prints these after the run, outside pytest's output capture.
VERDICTS: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> str:
    line = f"[{criterion}] {'PASS' if passed else 'FAIL'}: {detail}"
    VERDICTS.append(line)
    print(line, flush=True)
    return line


def mean_fitness_and_walls(rule_name: str, n_trials: int, seed: int) -> tuple[float, float]:
    cfg = ExperimentConfig(task="foraging", seed=seed)
    results = run_rule_trials(cfg, NAMED_RULES[rule_name], n_trials)
    fits = [r.fitness for r in results]
    walls = [sum(s.wall_hits for s in r.stats) for r in results]
    return float(np.mean(fits)), float(np.mean(walls))


@pytest.fixture(scope="session")
def mini_ga():
    """Full-parameter GA (population 30, stagnation 30) on a miniature
    world: 20x20 grid, 10+10 items, four 500-step seasons. Shared by the
    termination criterion and the monotonicity property."""
    cfg = GAConfig(
        pop_size=30,
        elite_count=10,
        stagnation_limit=30,
        trials_per_eval=5,
        task="foraging",
        trial_kwargs=dict(
            schedule=SeasonSchedule(500, (0, 1, 0, 1)),
            width=20,
            height=20,
            n_green=10,
            n_blue=10,
            n_hidden=20,
        ),
    )
    t0 = time.perf_counter()
    result = run_ga(cfg, 1)
    elapsed = time.perf_counter() - t0
    return result, elapsed


def test_criterion_1_best_foraging_rule_mean_fitness():
    t0 = time.perf_counter()
    mean, _ = mean_fitness_and_walls("foraging-best", 100, seed=1)
    elapsed = time.perf_counter() - t0
    ok = mean >= 40.0 and elapsed < 300.0
    line = report(
        "criterion 1",
        ok,
        f"100-trial mean fitness {mean:.2f} (need >= 40) in {elapsed:.1f}s (need < 300s)",
    )
    assert ok, line


def test_criterion_2_hebbian_rule_is_unfit_and_wall_prone():
    mean, walls = mean_fitness_and_walls("hebbian", 100, seed=2)
    ok = abs(mean) <= 10.0 and walls > 300.0
    line = report(
        "criterion 2",
        ok,
        f"100-trial mean fitness {mean:.2f} (need |mean| <= 10), "
        f"mean wall hits {walls:.1f} (need > 300)",
    )
    assert ok, line


def test_criterion_3_punish_coactive_rule_band():
    mean16, _ = mean_fitness_and_walls("foraging-punish-coactive", 100, seed=3)
    mean17, _ = mean_fitness_and_walls("hebbian-extended", 100, seed=3)
    ok = 25.0 <= mean16 <= 55.0 and mean16 > mean17
    line = report(
        "criterion 3",
        ok,
        f"100-trial mean fitness {mean16:.2f} (need in [25, 55]) vs "
        f"extended-hebbian mean {mean17:.2f} (need strictly above)",
    )
    assert ok, line


def test_criterion_4_perfect_agent_upper_bound():
    cfg = ExperimentConfig(task="foraging", seed=4, runs=100)
    summary = experiment_perfect_agent(cfg)
    mean = summary["fitness"]["mean"]
    ok = mean >= 55.0
    line = report("criterion 4", ok, f"100-run mean fitness {mean:.2f} (need >= 55)")
    assert ok, line


def test_criterion_5_hill_climbing_learns_and_dips():
    results = [
        run_hill_climbing(task="foraging", seed=derive(1, "hc-run", r))
        for r in range(20)
    ]
    s1_end = float(np.mean([r.trace[999] for r in results]))
    w1_iter10 = float(np.mean([r.trace[1009] for r in results]))
    dip = float(np.mean([r.boundary_fitness[1] for r in results]))
    ok = s1_end >= 45.0 and w1_iter10 < 20.0 and dip < 0.0
    line = report(
        "criterion 5",
        ok,
        f"20-run means: end of season 1 {s1_end:.2f} (need >= 45), "
        f"iteration 10 after the flip {w1_iter10:.2f} (need < 20), "
        f"boundary re-evaluation {dip:.2f} (need < 0)",
    )
    assert ok, line


def test_criterion_6_ga_terminates_and_finds_the_quiet_reward_family(mini_ga):
    result, elapsed = mini_ga
    top10 = result.best
    quiet = [ind for ind in top10 if ind.rule.outcomes[4:] == (0, 0, 0, 0)]
    ok = elapsed < 600.0 and len(quiet) >= 1
    line = report(
        "criterion 6",
        ok,
        f"GA stopped after {result.generations} generations in {elapsed:.1f}s "
        f"(need < 600s); {len(quiet)}/10 top rules have all-zero reward outcomes "
        f"(need >= 1)",
    )
    assert ok, line


def test_criterion_7_evolved_pursuit_rule_beats_random_rules():
    cfg = ExperimentConfig(task="prey-predator", seed=7)
    baseline = random_rule_baseline(cfg, n_rules=20, trials_per_rule=5)
    best = run_rule_trials(cfg, NAMED_RULES["pp-best"], 5)
    best_scores = [r.score(cfg.alpha) for r in best]
    random_means = baseline["per_rule_mean"]
    median_random = float(np.median(random_means))
    p = wilcoxon_rank_sum(best_scores, random_means)
    ok = float(np.mean(best_scores)) > median_random and p < 0.05
    line = report(
        "criterion 7",
        ok,
        f"evolved-rule mean {np.mean(best_scores):.2f} vs random-rule median "
        f"{median_random:.2f}, rank-sum p = {p:.4g} (need mean above median, p < 0.05)",
    )
    assert ok, line


def test_criterion_8a_updates_keep_unit_row_norms():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(50):
        net = init_network(6, int(rng.integers(2, 30)), 3, rng)
        rule = PlasticityRule(float(rng.random()),
                              tuple(int(v) - 1 for v in rng.integers(0, 3, 8)))
        acts = forward(net, rng.integers(0, 2, 6))
        updated, _ = apply_update(net, acts, int(rng.choice((-1, 1))), rule)
        for matrix in (updated.w_hidden, updated.w_out):
            worst = max(worst, float(np.abs(np.linalg.norm(matrix, axis=1) - 1.0).max()))
    ok = worst <= 1e-9
    line = report("criterion 8a", ok,
                  f"max |row norm - 1| = {worst:.2e} over 50 random updates (need <= 1e-9)")
    assert ok, line


def test_criterion_8b_rule_lookups_match_every_genotype():
    mismatches = 0
    for outcomes in product((-1, 0, 1), repeat=8):
        rule = PlasticityRule(0.1, outcomes)
        for m in (-1, 1):
            for pre in (0, 1):
                for post in (0, 1):
                    idx = outcome_index(m, pre, post)
                    if lookup(rule, m, pre, post) != outcomes[idx]:
                        mismatches += 1
    ok = mismatches == 0
    line = report("criterion 8b", ok,
                  f"{mismatches} mismatches in 8 x 6561 exhaustive lookups (need 0)")
    assert ok, line


def test_criterion_8c_trial_logs_identical_serial_and_parallel():
    base = dict(
        task="foraging", width=30, height=30, n_green=10, n_blue=10,
        n_hidden=10, season_length=300, seasons=2, seed=8, rule="foraging-best",
    )
    rule = NAMED_RULES["foraging-best"]
    serial_1 = run_rule_trials(ExperimentConfig(**base, jobs=1), rule, 3, collect_logs=True)
    serial_2 = run_rule_trials(ExperimentConfig(**base, jobs=1), rule, 3, collect_logs=True)
    parallel = run_rule_trials(ExperimentConfig(**base, jobs=2), rule, 3, collect_logs=True)
    identical = all(
        a.log == b.log == c.log
        and a.log.sensors.tobytes() == b.log.sensors.tobytes() == c.log.sensors.tobytes()
        and a.log.actions.tobytes() == b.log.actions.tobytes() == c.log.actions.tobytes()
        and a.log.m.tobytes() == b.log.m.tobytes() == c.log.m.tobytes()
        and a.log.events.tobytes() == b.log.events.tobytes() == c.log.events.tobytes()
        for a, b, c in zip(serial_1, serial_2, parallel)
    )
    line = report("criterion 8c", identical,
                  "trial logs byte-identical across repeated serial and parallel runs"
                  if identical else "trial logs differ between serial and parallel runs")
    assert identical, line


def test_criterion_8d_ga_best_fitness_never_decreases(mini_ga):
    result, _ = mini_ga
    bests = [row[1] for row in result.history]
    drops = sum(1 for a, b in zip(bests, bests[1:]) if b < a)
    ok = drops == 0
    line = report("criterion 8d", ok,
                  f"{drops} decreases in the recorded best across "
                  f"{len(bests)} generations (need 0)")
    assert ok, line


def test_criterion_8e_exact_rank_sum_matches_brute_force():
    rng = np.random.default_rng(85)
    worst = 0.0
    cases = 0
    for n in range(1, 10):
        for m in range(1, 11 - n):
            for _ in range(3):
                a = rng.integers(0, 4, n).tolist()
                b = rng.integers(0, 4, m).tolist()
                worst = max(worst, abs(wilcoxon_rank_sum(a, b) - brute_force_rank_sum_p(a, b)))
                cases += 1
    ok = worst <= 1e-9
    line = report("criterion 8e", ok,
                  f"max |exact - brute force| = {worst:.2e} over {cases} "
                  f"sample pairs with n+m <= 10 (need <= 1e-9)")
    assert ok, line


def test_criterion_9_hidden_layer_sweep_gain():
    rows = hidden_sweep(NAMED_RULES["foraging-best"], 9, sizes=(5, 20), trials=100)
    means = {size: mean for size, mean, _ in rows}
    gain = means[20] - means[5]
    ok = 8.0 <= gain <= 18.0
    line = report(
        "criterion 9",
        ok,
        f"mean fitness {means[5]:.2f} at 5 hidden vs {means[20]:.2f} at 20; "
        f"gain {gain:.2f} (need 13 +/- 5)",
    )
    assert ok, line
