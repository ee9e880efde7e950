"""Trial logs and the on-disk formats for every artifact the tools emit.

All tabular artifacts are plain CSV with a header row; floats are written
with repr so that parsing returns the exact same float64. Every writer
here has a matching reader and parse(emit(x)) == x holds field for field
(tested).

Trial log schema (one row per action step):
    step, s0..s{k-1}, action, m, event, season
where s0.. are the sensor bits fed to the network that step (6 bits in
foraging, 88 in pursuit), action is 0=Left 1=Straight 2=Right, m is the
reinforcement in {-1,0,+1}, and event encodes what the step did to the
world. Foraging events: 0 none, 1 wall hit, 2 collected green,
3 collected blue. Pursuit events are a bitmask: 1 wall hit, 2 collected
a prey, 4 caught by a predator (a single step can raise several).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TrialLog",
    "write_trial_log",
    "read_trial_log",
    "write_rule_harvest",
    "read_rule_harvest",
    "write_generation_history",
    "read_generation_history",
    "write_hc_trace",
    "read_hc_trace",
    "write_matrix",
    "read_matrix",
    "write_table",
    "read_table",
    "write_summary",
    "read_summary",
]


@dataclass
class TrialLog:
    """Per-step record of one trial; all arrays share the same length."""

    sensors: np.ndarray  # uint8, shape (n_steps, n_bits)
    actions: np.ndarray  # int8, shape (n_steps,)
    m: np.ndarray        # int8, shape (n_steps,)
    events: np.ndarray   # int8, shape (n_steps,)
    seasons: np.ndarray  # int8, shape (n_steps,)

    def __post_init__(self):
        n = self.sensors.shape[0]
        for arr in (self.actions, self.m, self.events, self.seasons):
            if arr.shape != (n,):
                raise ValueError("trial log arrays must share one length")

    def __len__(self) -> int:
        return self.sensors.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrialLog):
            return NotImplemented
        return (
            self.sensors.shape == other.sensors.shape
            and np.array_equal(self.sensors, other.sensors)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.m, other.m)
            and np.array_equal(self.events, other.events)
            and np.array_equal(self.seasons, other.seasons)
        )


def empty_trial_log(n_steps: int, n_bits: int) -> TrialLog:
    """Preallocate a log the step kernels fill in place."""
    return TrialLog(
        sensors=np.zeros((n_steps, n_bits), dtype=np.uint8),
        actions=np.zeros(n_steps, dtype=np.int8),
        m=np.zeros(n_steps, dtype=np.int8),
        events=np.zeros(n_steps, dtype=np.int8),
        seasons=np.zeros(n_steps, dtype=np.int8),
    )


def write_trial_log(path, log: TrialLog) -> None:
    n_bits = log.sensors.shape[1]
    header = ["step"] + [f"s{i}" for i in range(n_bits)] + ["action", "m", "event", "season"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(log)):
            row = [i]
            row.extend(int(b) for b in log.sensors[i])
            row.extend(
                (int(log.actions[i]), int(log.m[i]), int(log.events[i]), int(log.seasons[i]))
            )
            w.writerow(row)


def read_trial_log(path) -> TrialLog:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        n_bits = len(header) - 5
        sensors, actions, ms, events, seasons = [], [], [], [], []
        for row in r:
            vals = [int(v) for v in row]
            sensors.append(vals[1 : 1 + n_bits])
            actions.append(vals[1 + n_bits])
            ms.append(vals[2 + n_bits])
            events.append(vals[3 + n_bits])
            seasons.append(vals[4 + n_bits])
    return TrialLog(
        sensors=np.array(sensors, dtype=np.uint8).reshape(len(actions), n_bits),
        actions=np.array(actions, dtype=np.int8),
        m=np.array(ms, dtype=np.int8),
        events=np.array(events, dtype=np.int8),
        seasons=np.array(seasons, dtype=np.int8),
    )


def write_rule_harvest(path, rules_with_fitness: Iterable[tuple[str, float]]) -> None:
    """Tab-separated ``<rule text>\\t<fitness>`` lines under a header."""
    with open(path, "w") as fh:
        fh.write("rule\tfitness\n")
        for text, fit in rules_with_fitness:
            fh.write(f"{text}\t{float(fit)!r}\n")


def read_rule_harvest(path) -> list[tuple[str, float]]:
    out = []
    with open(path) as fh:
        next(fh)
        for line in fh:
            text, fit = line.rstrip("\n").split("\t")
            out.append((text, float(fit)))
    return out


def write_generation_history(path, history: Sequence[tuple[int, float, float, float, str]]) -> None:
    """Rows of (generation, best, mean, std, best rule text)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best", "mean", "std", "best_rule"])
        for gen, best, mean, std, rule_text in history:
            w.writerow([gen, repr(float(best)), repr(float(mean)), repr(float(std)), rule_text])


def read_generation_history(path) -> list[tuple[int, float, float, float, str]]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for gen, best, mean, std, rule_text in r:
            out.append((int(gen), float(best), float(mean), float(std), rule_text))
    return out


def write_hc_trace(path, trace: Sequence[tuple[int, int, float]]) -> None:
    """Rows of (iteration, season index, incumbent fitness)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "season", "fitness"])
        for it, season, fit in trace:
            w.writerow([it, season, repr(float(fit))])


def read_hc_trace(path) -> list[tuple[int, int, float]]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for it, season, fit in r:
            out.append((int(it), int(season), float(fit)))
    return out


def write_matrix(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"c{i}" for i in range(m.shape[1])])
        for row in m:
            w.writerow([repr(float(v)) for v in row])


def read_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        rows = [[float(v) for v in row] for row in r]
    return np.array(rows, dtype=np.float64)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Generic results table; floats via repr, everything else via str."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else str(v) for v in row])


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [row for row in r]
    return header, rows


def write_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def read_summary(path) -> dict:
    return json.loads(Path(path).read_text())
