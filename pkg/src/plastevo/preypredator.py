"""Seasonal pursuit-evasion grid world.

The agent shares a walled grid with 10 green and 10 blue mobiles. In
Summer green mobiles are prey (they flee the agent) and blue are
predators (they chase); Winter swaps the roles. The agent sees a 9-wide,
5-deep rectangle in front of it (44 cells, 2 bits each, own cell
excluded) and is reinforced by whether its move increased or decreased
the Euclidean distance to the closest visible object. Stepping onto a
prey collects it (the prey respawns elsewhere); a predator reaching the
agent's cell scores a catch and the run continues.

Movement, headings and coordinates are shared with the foraging world.
Mobiles move to one of their 8 (Moore) neighboring free cells: within
proximity_threshold of the agent they pick the distance-extremizing free
neighbor with probability bias_prob (max for prey, min for predators)
and a uniform free neighbor otherwise; beyond the threshold they always
move uniformly. A mobile with no free neighbor stays put. The agent's
cell counts as free for mobiles, which is how catches happen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .foraging import (
    BLUE,
    DIR_DELTAS,
    EMPTY,
    GREEN,
    LEFT,
    RIGHT,
    STRAIGHT,
    SUMMER,
    WALL,
    WINTER,
    SeasonSchedule,
)
from .network import Network, init_network
from .rules import PlasticityRule
from .trialio import TrialLog, empty_trial_log

__all__ = [
    "EV_WALL_BIT",
    "EV_COLLECTED_BIT",
    "EV_CAUGHT_BIT",
    "VISION_DEPTH",
    "VISION_HALF_WIDTH",
    "VISION_BITS",
    "PreyPredatorWorld",
    "EncounterStats",
    "PPTrialResult",
    "init_pp_world",
    "is_prey",
    "vision_offsets",
    "sense_vision",
    "closest_visible",
    "step_mobiles",
    "resolve_encounters",
    "reinforce_prey_predator",
    "run_pp_steps",
    "run_pp_trial",
    "pp_fitness",
    "default_pp_schedule",
]

# Event bits; one step can set several (e.g. blocked by a wall while a
# predator steps in).
EV_WALL_BIT, EV_COLLECTED_BIT, EV_CAUGHT_BIT = 1, 2, 4

VISION_DEPTH = 4        # rows ahead of the agent
VISION_HALF_WIDTH = 4   # columns to each side
VISION_BITS = 88

_CELL_BITS = {EMPTY: (0, 0), WALL: (1, 1), GREEN: (1, 0), BLUE: (0, 1)}

# Moore neighborhood in fixed scan order; this order also breaks ties in
# the biased distance-extremizing pick and indexes the uniform pick.
NEIGHBOR_DELTAS = (
    (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1),
)


def is_prey(color: int, season: int) -> bool:
    return (color == GREEN) == (season == SUMMER)


def vision_offsets() -> tuple[tuple[int, int], ...]:
    """(depth, lateral) cell offsets in scan order: far row first, each row
    left to right; the agent's own cell (0, 0) is excluded."""
    out = []
    for depth in range(VISION_DEPTH, -1, -1):
        for lat in range(-VISION_HALF_WIDTH, VISION_HALF_WIDTH + 1):
            if depth == 0 and lat == 0:
                continue
            out.append((depth, lat))
    return tuple(out)


_VISION_OFFSETS = vision_offsets()


@dataclass
class PreyPredatorWorld:
    width: int
    height: int
    grid: np.ndarray        # uint8 (height + 2, width + 2): wall ring + mobile codes
    mobile_xy: np.ndarray   # int64 (n_mobiles, 2); greens first
    n_green: int
    agent_x: int
    agent_y: int
    agent_dir: int
    step_count: int = 0
    season: int = SUMMER
    threshold: float = 5.0
    bias_prob: float = 0.9

    def mobile_color(self, idx: int) -> int:
        return GREEN if idx < self.n_green else BLUE

    @property
    def n_mobiles(self) -> int:
        return self.mobile_xy.shape[0]

    def mobile_counts(self) -> tuple[int, int]:
        return self.n_green, self.n_mobiles - self.n_green


def _free_cell(grid, width, height, avoid_x, avoid_y, rng) -> tuple[int, int]:
    while True:
        x = 1 + int(rng.random() * width)
        y = 1 + int(rng.random() * height)
        if grid[y, x] == EMPTY and not (x == avoid_x and y == avoid_y):
            return x, y


def init_pp_world(
    rng: np.random.Generator,
    width: int = 100,
    height: int = 100,
    n_green: int = 10,
    n_blue: int = 10,
    season: int = SUMMER,
    threshold: float = 5.0,
    bias_prob: float = 0.9,
) -> PreyPredatorWorld:
    if width < 2 or height < 2:
        raise ConfigurationError("interior must be at least 2x2")
    if n_green < 0 or n_blue < 0 or n_green + n_blue + 1 > width * height:
        raise ConfigurationError("mobiles plus the agent do not fit the interior")
    if not (0.0 <= bias_prob <= 1.0) or threshold < 0.0:
        raise ConfigurationError("need bias_prob in [0,1] and threshold >= 0")
    grid = np.zeros((height + 2, width + 2), dtype=np.uint8)
    grid[0, :] = WALL
    grid[-1, :] = WALL
    grid[:, 0] = WALL
    grid[:, -1] = WALL
    agent_x = 1 + int(rng.random() * width)
    agent_y = 1 + int(rng.random() * height)
    agent_dir = int(rng.random() * 4)
    n = n_green + n_blue
    mobile_xy = np.zeros((n, 2), dtype=np.int64)
    for i in range(n):
        x, y = _free_cell(grid, width, height, agent_x, agent_y, rng)
        grid[y, x] = GREEN if i < n_green else BLUE
        mobile_xy[i] = (x, y)
    return PreyPredatorWorld(
        width, height, grid, mobile_xy, n_green, agent_x, agent_y, agent_dir,
        0, season, threshold, bias_prob,
    )


def _cell_code(world: PreyPredatorWorld, x: int, y: int) -> int:
    # Anything beyond the stored grid (possible within the vision range)
    # reads as wall, like the ring itself.
    if x < 0 or y < 0 or y >= world.grid.shape[0] or x >= world.grid.shape[1]:
        return WALL
    return int(world.grid[y, x])


def sense_vision(world: PreyPredatorWorld) -> tuple[int, ...]:
    """88 bits: 2-bit codes for the 44 rectangle cells in scan order."""
    fx, fy = DIR_DELTAS[world.agent_dir]
    rx, ry = DIR_DELTAS[(world.agent_dir + 1) % 4]
    bits = []
    for depth, lat in _VISION_OFFSETS:
        x = world.agent_x + depth * fx + lat * rx
        y = world.agent_y + depth * fy + lat * ry
        bits.extend(_CELL_BITS[_cell_code(world, x, y)])
    return tuple(bits)


def closest_visible(world: PreyPredatorWorld) -> tuple[int, int, int] | None:
    """(x, y, code) of the nearest non-empty visible cell, or None.

    Distance is Euclidean from the agent's cell; ties go to the earlier
    cell in the vision scan order.
    """
    fx, fy = DIR_DELTAS[world.agent_dir]
    rx, ry = DIR_DELTAS[(world.agent_dir + 1) % 4]
    best = None
    best_d2 = None
    for depth, lat in _VISION_OFFSETS:
        x = world.agent_x + depth * fx + lat * rx
        y = world.agent_y + depth * fy + lat * ry
        code = _cell_code(world, x, y)
        if code == EMPTY:
            continue
        d2 = (x - world.agent_x) ** 2 + (y - world.agent_y) ** 2
        if best_d2 is None or d2 < best_d2:
            best, best_d2 = (x, y, code), d2
    return best


def step_mobiles(world: PreyPredatorWorld, rng: np.random.Generator) -> None:
    """Move every mobile once, in index order (greens first).

    Draw protocol per mobile with at least one free neighbor: within the
    proximity threshold one uniform draw decides bias vs uniform, and the
    uniform branch consumes a second draw; beyond the threshold a single
    draw picks among free neighbors. Blocked mobiles draw nothing.
    """
    grid = world.grid
    ax, ay = world.agent_x, world.agent_y
    thr2 = world.threshold * world.threshold
    for i in range(world.n_mobiles):
        mx, my = int(world.mobile_xy[i, 0]), int(world.mobile_xy[i, 1])
        free = []
        for dx, dy in NEIGHBOR_DELTAS:
            nx, ny = mx + dx, my + dy
            if grid[ny, nx] == EMPTY:
                free.append((nx, ny))
        if not free:
            continue
        d2 = (mx - ax) ** 2 + (my - ay) ** 2
        choice = None
        if d2 <= thr2:
            u = rng.random()
            if u < world.bias_prob:
                prey = is_prey(world.mobile_color(i), world.season)
                best_d2 = None
                for nx, ny in free:
                    nd2 = (nx - ax) ** 2 + (ny - ay) ** 2
                    if (
                        best_d2 is None
                        or (prey and nd2 > best_d2)
                        or (not prey and nd2 < best_d2)
                    ):
                        best_d2 = nd2
                        choice = (nx, ny)
        if choice is None:
            choice = free[int(rng.random() * len(free))]
        nx, ny = choice
        grid[my, mx] = EMPTY
        grid[ny, nx] = world.mobile_color(i)
        world.mobile_xy[i] = (nx, ny)


def resolve_encounters(world: PreyPredatorWorld, rng: np.random.Generator) -> tuple[int, int]:
    """Settle agent/mobile co-locations; returns (collected, caught).

    A co-located prey is collected and relocated to a random free cell; a
    co-located predator scores a catch and both stay where they are.
    """
    collected = caught = 0
    for i in range(world.n_mobiles):
        if (
            int(world.mobile_xy[i, 0]) == world.agent_x
            and int(world.mobile_xy[i, 1]) == world.agent_y
        ):
            if is_prey(world.mobile_color(i), world.season):
                world.grid[world.agent_y, world.agent_x] = EMPTY
                x, y = _free_cell(
                    world.grid, world.width, world.height, world.agent_x, world.agent_y, rng
                )
                world.grid[y, x] = world.mobile_color(i)
                world.mobile_xy[i] = (x, y)
                collected += 1
            else:
                caught += 1
    return collected, caught


def reinforce_prey_predator(
    closest: tuple[int, int, int] | None,
    pre_pos: tuple[int, int],
    post_pos: tuple[int, int],
    action: int,
    season: int,
) -> int:
    """Reinforcement from how the move changed the distance to the closest
    visible object (sensed before the move).

    Nothing visible: Straight earns +1, turns earn -1, both seasons.
    Otherwise the move counts as Avoid if the distance became strictly
    larger and Move-towards if strictly smaller; an unchanged distance
    (including wall-blocked moves) is neutral. Walls: Avoid +1 / Towards
    -1 in both seasons. Green: Towards +1 in Summer, -1 in Winter (Avoid
    mirrored). Blue: the reverse.
    """
    if closest is None:
        return 1 if action == STRAIGHT else -1
    cx, cy, code = closest
    d_pre = (pre_pos[0] - cx) ** 2 + (pre_pos[1] - cy) ** 2
    d_post = (post_pos[0] - cx) ** 2 + (post_pos[1] - cy) ** 2
    if d_post == d_pre:
        return 0
    avoided = d_post > d_pre
    if code == WALL:
        return 1 if avoided else -1
    toward_sign = 1 if (code == GREEN) == (season == SUMMER) else -1
    return -toward_sign if avoided else toward_sign


@dataclass
class EncounterStats:
    season: int
    collected: int
    caught: int
    wall_hits: int


def pp_fitness(trials: Sequence[Sequence[EncounterStats]], alpha: float = 3.0) -> float:
    """Mean over trials of (alpha * collected - caught), counts summed over
    the trial's seasons."""
    if not trials:
        raise ValueError("fitness needs at least one trial")
    total = 0.0
    for trial in trials:
        collected = sum(s.collected for s in trial)
        caught = sum(s.caught for s in trial)
        total += alpha * collected - caught
    return total / len(trials)


def default_pp_schedule() -> SeasonSchedule:
    return SeasonSchedule(season_length=4000, sequence=(SUMMER, WINTER))


def run_pp_steps(
    world: PreyPredatorWorld,
    net: Network,
    rule: PlasticityRule | None,
    n_steps: int,
    rng: np.random.Generator,
    explore_prob: float = 0.0,
    plasticity: bool = True,
    log: TrialLog | None = None,
    log_offset: int = 0,
) -> tuple[int, int, int, int, int]:
    """Advance n_steps via the active kernel; returns the chunk's
    (collected, caught, wall hits, plastic updates, degenerate rows)."""
    from . import backend

    if rule is None:
        rule = PlasticityRule(0.0, (0,) * 8)
        plasticity = False
    agent_state = np.array([world.agent_x, world.agent_y, world.agent_dir], dtype=np.int64)
    stats = np.zeros(5, dtype=np.int64)
    outcomes = np.array(rule.outcomes, dtype=np.int8)
    kern = backend.active()
    kern.pp_steps(
        world.grid,
        agent_state,
        world.mobile_xy,
        int(world.n_green),
        net.w_hidden,
        net.w_out,
        float(rule.eta),
        outcomes,
        int(world.season),
        int(n_steps),
        float(explore_prob),
        bool(plasticity),
        float(world.threshold),
        float(world.bias_prob),
        rng,
        stats,
        None if log is None else log.sensors,
        None if log is None else log.actions,
        None if log is None else log.m,
        None if log is None else log.events,
        int(log_offset),
    )
    world.agent_x, world.agent_y, world.agent_dir = (
        int(agent_state[0]),
        int(agent_state[1]),
        int(agent_state[2]),
    )
    world.step_count += int(n_steps)
    if log is not None:
        log.seasons[log_offset : log_offset + n_steps] = world.season
    return tuple(int(v) for v in stats)


@dataclass
class PPTrialResult:
    stats: list[EncounterStats]
    net: Network
    updates: int
    degenerate: int
    log: TrialLog | None = None

    def score(self, alpha: float = 3.0) -> float:
        return pp_fitness([self.stats], alpha)


def run_pp_trial(
    rule: PlasticityRule | None,
    net_seed,
    world_seed,
    schedule: SeasonSchedule | None = None,
    explore_prob: float = 0.02,
    n_hidden: int = 50,
    width: int = 100,
    height: int = 100,
    n_green: int = 10,
    n_blue: int = 10,
    threshold: float = 5.0,
    bias_prob: float = 0.9,
    plasticity: bool = True,
    collect_log: bool = False,
    net: Network | None = None,
) -> PPTrialResult:
    """One pursuit-evasion trial (default two 4000-step seasons).

    Step order: sense, pick action (with exploration as in foraging), move
    the agent, settle any prey/predator on the agent's cell, reinforce
    against the pre-move closest object, update weights, move the mobiles,
    settle co-locations again.
    """
    if schedule is None:
        schedule = default_pp_schedule()
    if net is None:
        net = init_network(VISION_BITS, n_hidden, 3, np.random.default_rng(net_seed))
    rng = np.random.default_rng(world_seed)
    world = init_pp_world(
        rng, width, height, n_green, n_blue, schedule.sequence[0], threshold, bias_prob
    )
    log = empty_trial_log(schedule.total_steps, VISION_BITS) if collect_log else None
    stats = []
    updates = degenerate = 0
    for i, season in enumerate(schedule.sequence):
        world.season = season
        collected, caught, walls, upd, deg = run_pp_steps(
            world,
            net,
            rule,
            schedule.season_length,
            rng,
            explore_prob=explore_prob,
            plasticity=plasticity,
            log=log,
            log_offset=i * schedule.season_length,
        )
        stats.append(EncounterStats(season, collected, caught, walls))
        updates += upd
        degenerate += deg
    return PPTrialResult(stats, net, updates, degenerate, log)
