"""Post-hoc analyses: distinct-rule tables, mid-trial validation episodes,
hidden-layer sweeps, weight snapshots and a Wilcoxon rank-sum test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .foraging import (
    SUMMER,
    SeasonSchedule,
    SeasonStats,
    init_foraging_world,
    run_foraging_steps,
    run_foraging_trial,
)
from .network import init_network
from .rules import PlasticityRule
from .seeding import as_seed_sequence, derive
from .trialio import TrialLog, empty_trial_log


@dataclass
class DistinctRuleRow:
    """One discrete outcome pattern aggregated over harvested instances."""

    pattern: tuple
    count: int
    fitness_median: float
    fitness_std: float
    fitness_max: float
    fitness_min: float
    eta_mean: float
    eta_std: float


def aggregate_distinct_rules(rules_with_fitness) -> list:
    """Group (rule, fitness) pairs by the 8 discrete outcomes only.

    Rows are sorted by median fitness descending (count, then pattern, as
    tie-breaks). The learning rate is excluded from the grouping key and
    summarized per group instead.
    """
    groups: dict = {}
    for rule, fitness in rules_with_fitness:
        groups.setdefault(rule.outcomes, []).append((rule.eta, float(fitness)))
    if not groups:
        raise ValueError("need at least one harvested rule")
    rows = []
    for pattern, entries in groups.items():
        etas = np.array([e for e, _ in entries])
        fits = np.array([f for _, f in entries])
        rows.append(
            DistinctRuleRow(
                pattern=pattern,
                count=len(entries),
                fitness_median=float(np.median(fits)),
                fitness_std=float(fits.std()),
                fitness_max=float(fits.max()),
                fitness_min=float(fits.min()),
                eta_mean=float(etas.mean()),
                eta_std=float(etas.std()),
            )
        )
    rows.sort(key=lambda r: (-r.fitness_median, -r.count, r.pattern))
    return rows


@dataclass
class ValidationResult:
    steps: np.ndarray  # learning-trial step at each checkpoint
    seasons: np.ndarray  # season active at each checkpoint
    fitnesses: np.ndarray  # frozen-episode fitness per checkpoint
    stats: list  # per-season stats of the learning trial itself
    log: TrialLog | None = None


def run_validation_protocol(
    rule: PlasticityRule,
    net_seed,
    world_seed,
    val_seed,
    schedule: SeasonSchedule | None = None,
    interval: int = 20,
    test_steps: int | None = None,
    explore_prob: float = 0.02,
    n_hidden: int = 20,
    width: int = 100,
    height: int = 100,
    n_green: int = 50,
    n_blue: int = 50,
    collect_log: bool = False,
) -> ValidationResult:
    """Foraging trial with periodic frozen-weight test episodes.

    Every ``interval`` learning steps the current network is cloned and run
    for ``test_steps`` (default: one season length) on a fresh world under
    the current season, with plasticity and exploration off. Test episodes
    draw from their own seed streams, so the learning trial is bit-identical
    to one run without validation.
    """
    if schedule is None:
        schedule = SeasonSchedule()
    if interval < 1:
        raise ValueError("interval must be positive")
    if test_steps is None:
        test_steps = schedule.season_length
    master_val = as_seed_sequence(val_seed)
    net = init_network(6, n_hidden, 3, np.random.default_rng(net_seed))
    rng = np.random.default_rng(world_seed)
    world = init_foraging_world(rng, width, height, n_green, n_blue, schedule.sequence[0])
    log = empty_trial_log(schedule.total_steps, 6) if collect_log else None

    steps, seasons, fits, stats = [], [], [], []
    step = 0
    checkpoint = 0
    for i, season in enumerate(schedule.sequence):
        world.season = season
        done = 0
        greens = blues = walls = 0
        while done < schedule.season_length:
            next_cp = (step // interval + 1) * interval
            chunk = min(next_cp - step, schedule.season_length - done)
            g, b, w, _, _ = run_foraging_steps(
                world, net, rule, chunk, rng,
                explore_prob=explore_prob, log=log,
                log_offset=i * schedule.season_length + done,
            )
            greens += g
            blues += b
            walls += w
            done += chunk
            step += chunk
            if step % interval == 0:
                test_net = net.copy()
                test_rng = np.random.default_rng(derive(master_val, "val-world", checkpoint))
                test_world = init_foraging_world(
                    test_rng, width, height, n_green, n_blue, season
                )
                tg, tb, _, _, _ = run_foraging_steps(
                    test_world, test_net, None, test_steps, test_rng,
                    explore_prob=0.0, plasticity=False,
                )
                correct, incorrect = (tg, tb) if season == SUMMER else (tb, tg)
                steps.append(step)
                seasons.append(season)
                fits.append(float(correct - incorrect))
                checkpoint += 1
        correct, incorrect = (greens, blues) if season == SUMMER else (blues, greens)
        stats.append(SeasonStats(season, correct, incorrect, walls, greens, blues))
    return ValidationResult(
        np.array(steps, dtype=np.int64),
        np.array(seasons, dtype=np.int8),
        np.array(fits, dtype=np.float64),
        stats,
        log,
    )


DEFAULT_SWEEP_SIZES = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)


def _sweep_task(args):
    rule, size, net_seed, world_seed, trial_kwargs = args
    res = run_foraging_trial(rule, net_seed, world_seed, n_hidden=size, **trial_kwargs)
    return res.fitness


def sweep_tasks(rule, master, sizes, trials, trial_kwargs=None):
    """Task list for hidden_sweep; world seeds are shared across sizes so
    each size faces the same sequence of worlds."""
    master = as_seed_sequence(master)
    trial_kwargs = dict(trial_kwargs or {})
    return [
        (rule, size, derive(master, "sweep-net", size, t),
         derive(master, "sweep-world", t), trial_kwargs)
        for size in sizes
        for t in range(trials)
    ]


def hidden_sweep(
    rule: PlasticityRule,
    master_seed,
    sizes=DEFAULT_SWEEP_SIZES,
    trials: int = 100,
    map_fn=map,
    trial_kwargs=None,
) -> list:
    """Mean/std foraging fitness per hidden-layer size.

    Returns (size, mean, std) tuples in the order of ``sizes``.
    """
    sizes = tuple(int(s) for s in sizes)
    tasks = sweep_tasks(rule, master_seed, sizes, trials, trial_kwargs)
    scores = np.fromiter(map_fn(_sweep_task, tasks), dtype=np.float64,
                         count=len(tasks)).reshape(len(sizes), trials)
    return [
        (size, float(row.mean()), float(row.std()))
        for size, row in zip(sizes, scores)
    ]


def export_weight_snapshots(
    rule: PlasticityRule,
    net_seed,
    world_seed,
    schedule: SeasonSchedule | None = None,
    explore_prob: float = 0.02,
    n_hidden: int = 20,
    width: int = 100,
    height: int = 100,
    n_green: int = 50,
    n_blue: int = 50,
) -> list:
    """Weight matrices at initialization and after each season.

    Returns (label, w_hidden, w_out) tuples with copied arrays; labels are
    "init", "season1", "season2", ...
    """
    if schedule is None:
        schedule = SeasonSchedule()
    net = init_network(6, n_hidden, 3, np.random.default_rng(net_seed))
    rng = np.random.default_rng(world_seed)
    world = init_foraging_world(rng, width, height, n_green, n_blue, schedule.sequence[0])
    snaps = [("init", net.w_hidden.copy(), net.w_out.copy())]
    for i, season in enumerate(schedule.sequence):
        world.season = season
        run_foraging_steps(world, net, rule, schedule.season_length, rng,
                           explore_prob=explore_prob)
        snaps.append((f"season{i + 1}", net.w_hidden.copy(), net.w_out.copy()))
    return snaps


EXACT_LIMIT = 12


def _midranks(values) -> list:
    """1-based average ranks with ties sharing their mean rank."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _exact_rank_sum_p(doubled: list, n: int, w2_obs: int) -> float:
    """Exact two-sided p: fraction of n-subsets of the doubled midranks whose
    sum deviates from the mean at least as much as the observed one."""
    total = len(doubled)
    mu2 = n * (total + 1)  # doubled expectation of the rank sum
    target = abs(w2_obs - mu2)
    max_sum = sum(doubled)
    # dp[k][s]: number of k-subsets with doubled-rank sum s.
    dp = np.zeros((n + 1, max_sum + 1), dtype=np.float64)
    dp[0][0] = 1.0
    for d in doubled:
        for k in range(n - 1, -1, -1):
            dp[k + 1, d:] += dp[k, : max_sum + 1 - d]
    counts = dp[n]
    sums = np.arange(max_sum + 1)
    extreme = np.abs(sums - mu2) >= target
    return float(counts[extreme].sum() / math.comb(total, n))


def _normal_rank_sum_p(ranks: list, n: int) -> float:
    """Two-sided normal approximation with tie correction."""
    total = len(ranks)
    m = total - n
    w = sum(ranks[:n])
    mu = n * (total + 1) / 2.0
    tie_term = 0.0
    seen: dict = {}
    for r in ranks:
        seen[r] = seen.get(r, 0) + 1
    for t in seen.values():
        tie_term += t**3 - t
    var = n * m / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if var <= 0.0:
        return 1.0
    z = (w - mu) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon_rank_sum(sample_a, sample_b) -> float:
    """Two-sided Wilcoxon rank-sum p-value.

    Exact enumeration (over midranks, ties included) when n + m <= 12,
    normal approximation with tie correction otherwise. Fully tied samples
    give p = 1.
    """
    a = [float(v) for v in sample_a]
    b = [float(v) for v in sample_b]
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    for v in a + b:
        if not math.isfinite(v):
            raise ValueError("samples must be finite")
    ranks = _midranks(a + b)
    n, total = len(a), len(a) + len(b)
    if len(set(a + b)) == 1:
        return 1.0
    if total <= EXACT_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        w2_obs = sum(doubled[:n])
        return _exact_rank_sum_p(doubled, n, w2_obs)
    return _normal_rank_sum_p(ranks, n)


def brute_force_rank_sum_p(sample_a, sample_b) -> float:
    """Reference implementation: enumerate every assignment of the pooled
    values to group A. Exponential; for tests on tiny samples only."""
    a = [float(v) for v in sample_a]
    b = [float(v) for v in sample_b]
    ranks = _midranks(a + b)
    n, total = len(a), len(a) + len(b)
    mu = n * (total + 1) / 2.0
    obs = abs(sum(ranks[:n]) - mu)
    hits = 0
    count = 0
    for subset in combinations(range(total), n):
        count += 1
        if abs(sum(ranks[i] for i in subset) - mu) >= obs - 1e-12:
            hits += 1
    return hits / count
