"""Experiment configuration, seeding glue, worker-pool plumbing and the
orchestration behind each CLI subcommand.

A full experiment is a pure function of its ExperimentConfig (master seed
included): per-trial and per-individual seeds are derived from the master
seed by (tag, indices) alone, so serial runs, repeated runs and process-pool
runs all produce identical artifacts.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    DEFAULT_SWEEP_SIZES,
    aggregate_distinct_rules,
    hidden_sweep,
    run_validation_protocol,
    wilcoxon_rank_sum,
)
from .baselines import run_hill_climbing, run_perfect_agent
from .errors import ConfigurationError
from .evolution import GAConfig, run_ga
from .foraging import SUMMER, WINTER, SeasonSchedule, run_foraging_trial
from .preypredator import run_pp_trial
from .rules import NAMED_RULES, PlasticityRule, format_rule, parse_rule, random_rule
from .seeding import as_seed_sequence, derive
from . import trialio

TASK_DEFAULTS = {
    "foraging": dict(n_hidden=20, n_green=50, n_blue=50, season_length=5000, seasons=4),
    "prey-predator": dict(n_hidden=50, n_green=10, n_blue=10, season_length=4000, seasons=2),
}


@dataclass
class ExperimentConfig:
    """Flat experiment settings; zero means "task default" where noted."""

    task: str = "foraging"
    n_hidden: int = 0  # 0 -> 20 (foraging) or 50 (prey-predator)
    width: int = 100
    height: int = 100
    n_green: int = 0  # 0 -> 50 items or 10 mobiles
    n_blue: int = 0
    season_length: int = 0  # 0 -> 5000 or 4000 steps
    seasons: int = 0  # 0 -> 4 or 2, alternating summer first
    explore_prob: float = 0.02
    alpha: float = 3.0
    proximity_threshold: float = 5.0
    bias_prob: float = 0.9
    # genetic algorithm
    pop_size: int = 30
    elite_count: int = 10
    crossover_prob: float = 0.5
    eta_mut_sigma: float = 0.1
    discrete_resample_prob: float = 0.15
    stagnation_limit: int = 30
    trials_per_eval: int = 5
    max_generations: int = 0  # 0 -> stagnation only
    # hill climbing
    hc_iterations: int = 1000
    hc_steps: int = 1000
    hc_sigma: float = 0.1
    hc_explore: float = 0.0
    # analysis
    validation_interval: int = 20
    validation_steps: int = 0  # 0 -> one season length
    sweep_sizes: str = ",".join(str(s) for s in DEFAULT_SWEEP_SIZES)
    random_baseline_rules: int = 20
    # orchestration
    rule: str = ""
    trials: int = 100
    runs: int = 20
    seed: int = 1
    out: str = ""
    jobs: int = 1

    def __post_init__(self):
        if self.task not in TASK_DEFAULTS:
            raise ConfigurationError(
                f"unknown task {self.task!r}, expected one of {tuple(TASK_DEFAULTS)}"
            )

    def resolved(self, name: str) -> int:
        """Field value with 0 replaced by the task default."""
        value = getattr(self, name)
        return value if value else TASK_DEFAULTS[self.task][name]

    @property
    def schedule(self) -> SeasonSchedule:
        sequence = tuple(k % 2 for k in range(self.resolved("seasons")))
        return SeasonSchedule(self.resolved("season_length"), sequence)

    def trial_kwargs(self) -> dict:
        """Keyword arguments for the task's trial runner."""
        kwargs = dict(
            schedule=self.schedule,
            explore_prob=self.explore_prob,
            n_hidden=self.resolved("n_hidden"),
            width=self.width,
            height=self.height,
            n_green=self.resolved("n_green"),
            n_blue=self.resolved("n_blue"),
        )
        if self.task == "prey-predator":
            kwargs["threshold"] = self.proximity_threshold
            kwargs["bias_prob"] = self.bias_prob
        return kwargs


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment line."""
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in fields:
            raise ConfigurationError(f"line {lineno}: unknown config key {key!r}")
        ftype = fields[key].type
        try:
            if ftype == "int":
                values[key] = int(value)
            elif ftype == "float":
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return values


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    values = parse_config(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**values)


def resolve_rule(spec: str) -> PlasticityRule:
    """A rule by catalog name or in the ``eta=...;m-1=...;m+1=...`` format."""
    if spec in NAMED_RULES:
        return NAMED_RULES[spec]
    if spec.startswith("eta="):
        return parse_rule(spec)
    raise ConfigurationError(
        f"unknown rule {spec!r}; use one of {sorted(NAMED_RULES)} or the "
        "'eta=...;m-1=...;m+1=...' format"
    )


def parallel_map(fn, tasks, jobs: int = 1):
    """Order-preserving map, optionally over a process pool."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _trial_task(args):
    task, rule, net_seed, world_seed, kwargs, collect_log = args
    if task == "foraging":
        return run_foraging_trial(rule, net_seed, world_seed,
                                  collect_log=collect_log, **kwargs)
    return run_pp_trial(rule, net_seed, world_seed,
                        collect_log=collect_log, **kwargs)


def run_rule_trials(cfg: ExperimentConfig, rule: PlasticityRule | None,
                    n_trials: int, collect_logs: bool = False) -> list:
    """n seeded lifetime trials of one rule; parallel across trials."""
    master = as_seed_sequence(cfg.seed)
    kwargs = cfg.trial_kwargs()
    tasks = [
        (cfg.task, rule, derive(master, "net", t), derive(master, "world", t),
         kwargs, collect_logs)
        for t in range(n_trials)
    ]
    return parallel_map(_trial_task, tasks, cfg.jobs)


def _trial_fitness(cfg: ExperimentConfig, result) -> float:
    if cfg.task == "foraging":
        return result.fitness
    return result.score(cfg.alpha)


def _stats_summary(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std()),
        "median": float(np.median(arr)),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "n": int(arr.size),
    }


def _out_dir(cfg: ExperimentConfig) -> Path | None:
    if not cfg.out:
        return None
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def experiment_run_rule(cfg: ExperimentConfig, write_logs: bool = False) -> dict:
    rule = resolve_rule(cfg.rule)
    results = run_rule_trials(cfg, rule, cfg.trials, collect_logs=write_logs)
    fits = [_trial_fitness(cfg, r) for r in results]
    walls = [sum(s.wall_hits for s in r.stats) for r in results]
    summary = {
        "command": "run-rule",
        "task": cfg.task,
        "rule": format_rule(rule),
        "fitness": _stats_summary(fits),
        "wall_hits": _stats_summary(walls),
    }
    out = _out_dir(cfg)
    if out:
        rows = [(t, fits[t], walls[t]) for t in range(len(results))]
        trialio.write_table(out / "trials.csv", ["trial", "fitness", "wall_hits"], rows)
        if write_logs:
            for t, r in enumerate(results):
                trialio.write_trial_log(out / f"trial_{t:03d}_log.csv", r.log)
        trialio.write_summary(out / "summary.json", summary)
    return summary


def experiment_evolve(cfg: ExperimentConfig) -> dict:
    ga_cfg = GAConfig(
        pop_size=cfg.pop_size,
        elite_count=cfg.elite_count,
        crossover_prob=cfg.crossover_prob,
        eta_mut_sigma=cfg.eta_mut_sigma,
        discrete_resample_prob=cfg.discrete_resample_prob,
        stagnation_limit=cfg.stagnation_limit,
        trials_per_eval=cfg.trials_per_eval,
        task=cfg.task,
        alpha=cfg.alpha,
        max_generations=cfg.max_generations,
        trial_kwargs=cfg.trial_kwargs(),
    )
    map_fn = (lambda fn, tasks: parallel_map(fn, tasks, cfg.jobs)) if cfg.jobs > 1 else map
    result = run_ga(ga_cfg, as_seed_sequence(cfg.seed), map_fn=map_fn)
    harvest = [(format_rule(ind.rule), ind.fitness) for ind in result.best]
    summary = {
        "command": "evolve",
        "task": cfg.task,
        "generations": result.generations,
        "best_fitness": result.best[0].fitness,
        "best_rule": format_rule(result.best[0].rule),
        "harvest": harvest,
    }
    out = _out_dir(cfg)
    if out:
        trialio.write_generation_history(out / "history.csv", result.history)
        trialio.write_rule_harvest(out / "harvest.tsv", harvest)
        trialio.write_summary(out / "summary.json", summary)
    return summary


def _hc_task(args):
    cfg, run_index = args
    return run_hill_climbing(
        task=cfg.task,
        seasons=cfg.seasons or None,
        seed=derive(as_seed_sequence(cfg.seed), "hc-run", run_index),
        steps_per_eval=cfg.hc_steps,
        iterations_per_season=cfg.hc_iterations,
        perturb_sigma=cfg.hc_sigma,
        explore_prob=cfg.hc_explore,
        n_hidden=cfg.n_hidden or None,
        width=cfg.width,
        height=cfg.height,
        n_green=cfg.resolved("n_green"),
        n_blue=cfg.resolved("n_blue"),
        threshold=cfg.proximity_threshold,
        bias_prob=cfg.bias_prob,
        alpha=cfg.alpha,
    )


def experiment_hillclimb(cfg: ExperimentConfig) -> dict:
    results = parallel_map(_hc_task, [(cfg, r) for r in range(cfg.runs)], cfg.jobs)
    iters = cfg.hc_iterations
    final = [float(r.trace[-1]) for r in results]
    end_first_season = [float(r.trace[iters - 1]) for r in results]
    boundaries = [list(map(float, r.boundary_fitness)) for r in results]
    summary = {
        "command": "hillclimb",
        "task": cfg.task,
        "runs": cfg.runs,
        "final_fitness": _stats_summary(final),
        "end_of_first_season": _stats_summary(end_first_season),
        "mean_boundary_fitness": [
            float(np.mean([b[k] for b in boundaries]))
            for k in range(len(boundaries[0]))
        ],
    }
    out = _out_dir(cfg)
    if out:
        for r, res in enumerate(results):
            rows = [
                (i + 1, int(res.trace_seasons[i]), float(res.trace[i]))
                for i in range(len(res.trace))
            ]
            trialio.write_hc_trace(out / f"hc_run_{r:03d}.csv", rows)
        trialio.write_table(
            out / "hc_summary.csv",
            ["run", "final_fitness", "end_of_first_season"]
            + [f"boundary_{k}" for k in range(len(boundaries[0]))],
            [(r, final[r], end_first_season[r], *boundaries[r]) for r in range(cfg.runs)],
        )
        trialio.write_summary(out / "summary.json", summary)
    return summary


def _pa_task(args):
    cfg, run_index = args
    return run_perfect_agent(
        derive(as_seed_sequence(cfg.seed), "pa-run", run_index),
        schedule=cfg.schedule,
        explore_prob=cfg.explore_prob,
        width=cfg.width,
        height=cfg.height,
        n_green=cfg.resolved("n_green"),
        n_blue=cfg.resolved("n_blue"),
    )


def experiment_perfect_agent(cfg: ExperimentConfig) -> dict:
    if cfg.task != "foraging":
        raise ConfigurationError("the hand-coded agent is defined for foraging only")
    results = parallel_map(_pa_task, [(cfg, r) for r in range(cfg.runs)], cfg.jobs)
    fits = [r.fitness for r in results]
    walls = [sum(s.wall_hits for s in r.stats) for r in results]
    summary = {
        "command": "perfect-agent",
        "runs": cfg.runs,
        "fitness": _stats_summary(fits),
        "wall_hits": _stats_summary(walls),
    }
    out = _out_dir(cfg)
    if out:
        trialio.write_table(out / "runs.csv", ["run", "fitness", "wall_hits"],
                            [(r, fits[r], walls[r]) for r in range(cfg.runs)])
        trialio.write_summary(out / "summary.json", summary)
    return summary


def _validation_task(args):
    cfg, rule, trial_index = args
    master = as_seed_sequence(cfg.seed)
    return run_validation_protocol(
        rule,
        derive(master, "val-net", trial_index),
        derive(master, "val-learn-world", trial_index),
        derive(master, "val-tests", trial_index),
        schedule=cfg.schedule,
        interval=cfg.validation_interval,
        test_steps=cfg.validation_steps or None,
        explore_prob=cfg.explore_prob,
        n_hidden=cfg.resolved("n_hidden"),
        width=cfg.width,
        height=cfg.height,
        n_green=cfg.resolved("n_green"),
        n_blue=cfg.resolved("n_blue"),
    )


def experiment_validate(cfg: ExperimentConfig) -> dict:
    if cfg.task != "foraging":
        raise ConfigurationError("the validation protocol is defined for foraging only")
    rule = resolve_rule(cfg.rule)
    results = parallel_map(
        _validation_task, [(cfg, rule, t) for t in range(cfg.trials)], cfg.jobs
    )
    per_season = {SUMMER: [], WINTER: []}
    for res in results:
        for season in (SUMMER, WINTER):
            sel = res.fitnesses[res.seasons == season]
            if sel.size:
                per_season[season].append(float(sel.max()))
    summary = {
        "command": "validate",
        "rule": format_rule(rule),
        "trials": cfg.trials,
        "best_validated_summer": _stats_summary(per_season[SUMMER]),
        "best_validated_winter": _stats_summary(per_season[WINTER]),
    }
    out = _out_dir(cfg)
    if out:
        for t, res in enumerate(results):
            rows = list(zip(res.steps.tolist(), res.seasons.tolist(),
                            res.fitnesses.tolist()))
            trialio.write_table(out / f"validation_{t:03d}.csv",
                                ["step", "season", "fitness"], rows)
        trialio.write_summary(out / "summary.json", summary)
    return summary


def experiment_sweep_hidden(cfg: ExperimentConfig) -> dict:
    if cfg.task != "foraging":
        raise ConfigurationError("the hidden-layer sweep is defined for foraging only")
    rule = resolve_rule(cfg.rule)
    try:
        sizes = tuple(int(s) for s in cfg.sweep_sizes.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigurationError(f"bad sweep_sizes: {cfg.sweep_sizes!r}") from exc
    kwargs = cfg.trial_kwargs()
    kwargs.pop("n_hidden")
    rows = hidden_sweep(
        rule,
        as_seed_sequence(cfg.seed),
        sizes=sizes,
        trials=cfg.trials,
        map_fn=lambda fn, tasks: parallel_map(fn, tasks, cfg.jobs),
        trial_kwargs=kwargs,
    )
    summary = {
        "command": "sweep-hidden",
        "rule": format_rule(rule),
        "trials": cfg.trials,
        "sweep": [{"hidden": s, "mean": m, "std": d} for s, m, d in rows],
    }
    out = _out_dir(cfg)
    if out:
        trialio.write_table(out / "sweep.csv", ["hidden", "mean", "std"], rows)
        trialio.write_summary(out / "summary.json", summary)
    return summary


def experiment_analyze(cfg: ExperimentConfig, harvest_paths) -> dict:
    pairs = []
    for path in harvest_paths:
        for text, fit in trialio.read_rule_harvest(path):
            pairs.append((parse_rule(text), fit))
    rows = aggregate_distinct_rules(pairs)
    table = [
        (i + 1, ",".join(str(o) for o in r.pattern), r.count, r.fitness_median,
         r.fitness_std, r.fitness_max, r.fitness_min, r.eta_mean, r.eta_std)
        for i, r in enumerate(rows)
    ]
    summary = {
        "command": "analyze",
        "total_rules": len(pairs),
        "distinct_patterns": len(rows),
        "top_pattern": ",".join(str(o) for o in rows[0].pattern),
        "top_median_fitness": rows[0].fitness_median,
    }
    out = _out_dir(cfg)
    if out:
        trialio.write_table(
            out / "distinct_rules.csv",
            ["rank", "pattern", "count", "median", "std", "max", "min",
             "eta_mean", "eta_std"],
            table,
        )
        trialio.write_summary(out / "summary.json", summary)
    return summary


def read_sample(path) -> list:
    """Floats from a text file: last comma-separated field of each line,
    skipping non-numeric header lines."""
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        field = line.split(",")[-1]
        try:
            values.append(float(field))
        except ValueError:
            continue
    return values


def experiment_wilcoxon(cfg: ExperimentConfig, path_a, path_b) -> dict:
    a = read_sample(path_a)
    b = read_sample(path_b)
    p = wilcoxon_rank_sum(a, b)
    summary = {
        "command": "wilcoxon",
        "n_a": len(a),
        "n_b": len(b),
        "p_value": p,
        "significant_at_0.05": bool(p < 0.05),
    }
    out = _out_dir(cfg)
    if out:
        trialio.write_summary(out / "summary.json", summary)
    return summary


def random_rule_baseline(cfg: ExperimentConfig, n_rules: int | None = None,
                         trials_per_rule: int | None = None) -> dict:
    """Fitness of uniformly random rules, the reference population for
    judging an evolved rule. Returns per-rule mean fitnesses."""
    master = as_seed_sequence(cfg.seed)
    n_rules = cfg.random_baseline_rules if n_rules is None else n_rules
    trials_per_rule = cfg.trials_per_eval if trials_per_rule is None else trials_per_rule
    kwargs = cfg.trial_kwargs()
    rule_rng = np.random.default_rng(derive(master, "baseline-rules"))
    rules = [random_rule(rule_rng) for _ in range(n_rules)]
    tasks = [
        (cfg.task, rule, derive(master, "baseline-net", k, t),
         derive(master, "baseline-world", k, t), kwargs, False)
        for k, rule in enumerate(rules)
        for t in range(trials_per_rule)
    ]
    results = parallel_map(_trial_task, tasks, cfg.jobs)
    fits = np.array([_trial_fitness(cfg, r) for r in results])
    per_rule = fits.reshape(n_rules, trials_per_rule)
    return {
        "rules": [format_rule(r) for r in rules],
        "per_rule_mean": [float(v) for v in per_rule.mean(axis=1)],
        "per_trial": [[float(v) for v in row] for row in per_rule],
    }


def experiment_bench(cfg: ExperimentConfig, repeats: int = 3) -> dict:
    """Wall-clock comparison of the compiled and pure step kernels."""
    from . import backend

    rule = resolve_rule(cfg.rule) if cfg.rule else NAMED_RULES["foraging-best"]
    master = as_seed_sequence(cfg.seed)
    timings = {}
    for name in backend.available():
        with backend.using(name):
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                if cfg.task == "foraging":
                    run_foraging_trial(rule, derive(master, "bench-net"),
                                       derive(master, "bench-world"),
                                       **cfg.trial_kwargs())
                else:
                    run_pp_trial(rule, derive(master, "bench-net"),
                                 derive(master, "bench-world"),
                                 **cfg.trial_kwargs())
                best = min(best, time.perf_counter() - t0)
            timings[name] = best
    summary = {
        "command": "bench",
        "task": cfg.task,
        "steps_per_trial": cfg.schedule.total_steps,
        "seconds": timings,
    }
    if "compiled" in timings and "pure" in timings:
        summary["speedup"] = timings["pure"] / timings["compiled"]
    out = _out_dir(cfg)
    if out:
        trialio.write_summary(out / "summary.json", summary)
    return summary
