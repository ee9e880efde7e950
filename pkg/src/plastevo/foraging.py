"""Seasonal foraging grid world.

A single agent lives on a walled width x height grid scattered with green
and blue items (collected items respawn, so counts are conserved). It
senses the three cells adjacent to its heading as 2-bit codes, acts by
Left/Straight/Right, and is reinforced by a fixed table of
sensor-behavior associations whose item entries flip sign between the two
seasons: collect green in Summer, blue in Winter. Fitness is the mean
over season records of (correctly - incorrectly) collected items.

Coordinates are (x, y) with x growing east and y growing south, so a
north move decreases y. The wall is a one-cell ring around the interior;
interior cells are 1..width and 1..height inclusive.

The per-step loop lives in a swappable kernel (see backend); this module
owns world construction, single-step reference semantics, the
reinforcement table, and the trial runner that chunks a trial into
per-season kernel calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .network import Network, init_network
from .rules import PlasticityRule
from .trialio import TrialLog, empty_trial_log

__all__ = [
    "SUMMER",
    "WINTER",
    "EMPTY",
    "WALL",
    "GREEN",
    "BLUE",
    "LEFT",
    "STRAIGHT",
    "RIGHT",
    "EV_NONE",
    "EV_WALL_HIT",
    "EV_COLLECT_GREEN",
    "EV_COLLECT_BLUE",
    "DIR_DELTAS",
    "ForagingWorld",
    "SeasonSchedule",
    "SeasonStats",
    "ForagingTrialResult",
    "init_foraging_world",
    "sense",
    "act",
    "reinforce_foraging",
    "build_reinforcement_table",
    "run_foraging_steps",
    "run_foraging_trial",
    "foraging_fitness",
]

SUMMER, WINTER = 0, 1

# Grid cell codes; GREEN/BLUE double as collection event codes below.
EMPTY, WALL, GREEN, BLUE = 0, 1, 2, 3

LEFT, STRAIGHT, RIGHT = 0, 1, 2

EV_NONE, EV_WALL_HIT, EV_COLLECT_GREEN, EV_COLLECT_BLUE = 0, 1, 2, 3

# Headings 0=N 1=E 2=S 3=W; Left/Right rotate -/+1 mod 4.
DIR_DELTAS = ((0, -1), (1, 0), (0, 1), (-1, 0))

# 2-bit sensor code per cell content, as (first bit, second bit).
_CELL_BITS = {EMPTY: (0, 0), WALL: (1, 1), GREEN: (1, 0), BLUE: (0, 1)}


@dataclass
class ForagingWorld:
    width: int
    height: int
    grid: np.ndarray  # uint8, shape (height + 2, width + 2), wall ring included
    agent_x: int
    agent_y: int
    agent_dir: int
    step_count: int = 0
    season: int = SUMMER

    def item_cells(self) -> dict[tuple[int, int], int]:
        out = {}
        ys, xs = np.nonzero(self.grid >= GREEN)
        for y, x in zip(ys, xs):
            out[(int(x), int(y))] = int(self.grid[y, x])
        return out

    def item_counts(self) -> tuple[int, int]:
        return int(np.count_nonzero(self.grid == GREEN)), int(
            np.count_nonzero(self.grid == BLUE)
        )

    def in_interior(self, x: int, y: int) -> bool:
        return 1 <= x <= self.width and 1 <= y <= self.height


def _place_on_free_cell(grid, width, height, avoid_x, avoid_y, rng) -> tuple[int, int]:
    # Rejection sampling; two uniform draws (x then y) per attempt.
    while True:
        x = 1 + int(rng.random() * width)
        y = 1 + int(rng.random() * height)
        if grid[y, x] == EMPTY and not (x == avoid_x and y == avoid_y):
            return x, y


def init_foraging_world(
    rng: np.random.Generator,
    width: int = 100,
    height: int = 100,
    n_green: int = 50,
    n_blue: int = 50,
    season: int = SUMMER,
) -> ForagingWorld:
    """Wall ring, random agent pose, then greens and blues on distinct cells.

    Draw order is fixed (agent x, y, heading; then per item x, y with
    rejection) so one seeded stream reproduces the world exactly.
    """
    if width < 2 or height < 2:
        raise ConfigurationError("interior must be at least 2x2")
    if n_green < 0 or n_blue < 0 or n_green + n_blue + 1 > width * height:
        raise ConfigurationError(
            f"{n_green}+{n_blue} items plus the agent do not fit {width}x{height}"
        )
    grid = np.zeros((height + 2, width + 2), dtype=np.uint8)
    grid[0, :] = WALL
    grid[-1, :] = WALL
    grid[:, 0] = WALL
    grid[:, -1] = WALL
    agent_x = 1 + int(rng.random() * width)
    agent_y = 1 + int(rng.random() * height)
    agent_dir = int(rng.random() * 4)
    for color, count in ((GREEN, n_green), (BLUE, n_blue)):
        for _ in range(count):
            x, y = _place_on_free_cell(grid, width, height, agent_x, agent_y, rng)
            grid[y, x] = color
    return ForagingWorld(width, height, grid, agent_x, agent_y, agent_dir, 0, season)


def sense(world: ForagingWorld) -> tuple[int, int, int, int, int, int]:
    """Six bits: 2-bit codes for the left, front and right cells."""
    d = world.agent_dir
    bits = []
    for heading in ((d + 3) % 4, d, (d + 1) % 4):
        dx, dy = DIR_DELTAS[heading]
        code = int(world.grid[world.agent_y + dy, world.agent_x + dx])
        bits.extend(_CELL_BITS[code])
    return tuple(bits)


def act(world: ForagingWorld, action: int, rng: np.random.Generator) -> int:
    """Rotate (Left/Right) then move one cell; mutates the world.

    A wall destination leaves the position unchanged (heading keeps the
    rotation) and returns a wall-hit event. Stepping onto an item removes
    it, respawns one of the same color on a random free cell, and returns
    the collection event.
    """
    if action == LEFT:
        world.agent_dir = (world.agent_dir + 3) % 4
    elif action == RIGHT:
        world.agent_dir = (world.agent_dir + 1) % 4
    elif action != STRAIGHT:
        raise ValueError(f"unknown action {action}")
    dx, dy = DIR_DELTAS[world.agent_dir]
    nx, ny = world.agent_x + dx, world.agent_y + dy
    cell = int(world.grid[ny, nx])
    world.step_count += 1
    if cell == WALL:
        return EV_WALL_HIT
    world.agent_x, world.agent_y = nx, ny
    if cell == EMPTY:
        return EV_NONE
    world.grid[ny, nx] = EMPTY
    rx, ry = _place_on_free_cell(
        world.grid, world.width, world.height, world.agent_x, world.agent_y, rng
    )
    world.grid[ry, rx] = cell
    return EV_COLLECT_GREEN if cell == GREEN else EV_COLLECT_BLUE


# Sensor-behavior associations: (id, slot, cell code, actions, m summer,
# m winter). slot is the sensed position ("nothing" means all three cells
# empty). When several associations could fire, item rows beat wall rows
# beat the exploration rows, and the lowest id wins within a class; a
# matched row returns its value even when that value is 0.
_NOTHING, _SLOT_LEFT, _SLOT_FRONT, _SLOT_RIGHT = -1, 0, 1, 2

_ASSOCIATIONS = (
    (1, _NOTHING, EMPTY, (STRAIGHT,), 1, 1),
    (2, _NOTHING, EMPTY, (LEFT, RIGHT), -1, -1),
    (3, _SLOT_FRONT, WALL, (LEFT, RIGHT), 1, 1),
    (4, _SLOT_FRONT, WALL, (STRAIGHT,), -1, -1),
    (5, _SLOT_LEFT, WALL, (RIGHT,), 1, 1),
    (6, _SLOT_LEFT, WALL, (LEFT, STRAIGHT), -1, -1),
    (7, _SLOT_RIGHT, WALL, (LEFT,), 1, 1),
    (8, _SLOT_RIGHT, WALL, (RIGHT, STRAIGHT), -1, -1),
    (9, _SLOT_FRONT, GREEN, (STRAIGHT,), 1, -1),
    (10, _SLOT_FRONT, GREEN, (LEFT, RIGHT), -1, 0),
    (11, _SLOT_LEFT, GREEN, (LEFT,), 1, -1),
    (12, _SLOT_LEFT, GREEN, (STRAIGHT, RIGHT), -1, 0),
    (13, _SLOT_RIGHT, GREEN, (RIGHT,), 1, -1),
    (14, _SLOT_RIGHT, GREEN, (STRAIGHT, LEFT), -1, 0),
    (15, _SLOT_FRONT, BLUE, (STRAIGHT,), -1, 1),
    (16, _SLOT_FRONT, BLUE, (LEFT, RIGHT), 0, -1),
    (17, _SLOT_LEFT, BLUE, (LEFT,), -1, 1),
    (18, _SLOT_LEFT, BLUE, (STRAIGHT, RIGHT), 0, -1),
    (19, _SLOT_RIGHT, BLUE, (RIGHT,), -1, 1),
    (20, _SLOT_RIGHT, BLUE, (STRAIGHT, LEFT), 0, -1),
)

def _class_rank(assoc_id: int) -> int:
    if assoc_id >= 9:
        return 0  # item rows first
    if assoc_id >= 3:
        return 1  # then wall rows
    return 2      # exploration rows last

_PRIORITY_ORDER = sorted(_ASSOCIATIONS, key=lambda a: (_class_rank(a[0]), a[0]))


def _decode_sensor(sensor: Sequence[int]) -> tuple[int, int, int]:
    codes = []
    for i in (0, 2, 4):
        pair = (int(sensor[i]), int(sensor[i + 1]))
        for code, bits in _CELL_BITS.items():
            if bits == pair:
                codes.append(code)
                break
    return tuple(codes)


def reinforce_foraging(sensor: Sequence[int], action: int, season: int) -> int:
    """Reinforcement for the (sensed state, action) pair under the season."""
    left, front, right = _decode_sensor(sensor)
    slots = (left, front, right)
    for assoc_id, slot, code, actions, m_summer, m_winter in _PRIORITY_ORDER:
        if action not in actions:
            continue
        if slot == _NOTHING:
            if slots != (EMPTY, EMPTY, EMPTY):
                continue
        elif slots[slot] != code:
            continue
        return m_summer if season == SUMMER else m_winter
    return 0


def build_reinforcement_table() -> np.ndarray:
    """Dense int8 lookup m = table[left*16 + front*4 + right, action, season].

    The index packs the three 2-bit sensor codes (as integers b0*2 + b1)
    in left, front, right order; kernels use this instead of re-deriving
    the association scan per step.
    """
    table = np.zeros((64, 3, 2), dtype=np.int8)
    for left in (EMPTY, WALL, GREEN, BLUE):
        for front in (EMPTY, WALL, GREEN, BLUE):
            for right in (EMPTY, WALL, GREEN, BLUE):
                sensor = _CELL_BITS[left] + _CELL_BITS[front] + _CELL_BITS[right]
                lb, fb, rb = (
                    2 * sensor[0] + sensor[1],
                    2 * sensor[2] + sensor[3],
                    2 * sensor[4] + sensor[5],
                )
                idx = lb * 16 + fb * 4 + rb
                for action in (LEFT, STRAIGHT, RIGHT):
                    for season in (SUMMER, WINTER):
                        table[idx, action, season] = reinforce_foraging(
                            sensor, action, season
                        )
    return table


@dataclass(frozen=True)
class SeasonSchedule:
    season_length: int = 5000
    sequence: tuple[int, ...] = (SUMMER, WINTER, SUMMER, WINTER)

    def __post_init__(self):
        if self.season_length < 1 or not self.sequence:
            raise ConfigurationError("schedule needs >= 1 season of >= 1 step")
        if any(s not in (SUMMER, WINTER) for s in self.sequence):
            raise ConfigurationError("seasons must be Summer (0) or Winter (1)")

    @property
    def total_steps(self) -> int:
        return self.season_length * len(self.sequence)


@dataclass
class SeasonStats:
    season: int
    correct: int
    incorrect: int
    wall_hits: int
    green_collected: int
    blue_collected: int


def foraging_fitness(stats: Sequence[SeasonStats]) -> float:
    """Mean of (correct - incorrect) over all season records (Eq. for the task)."""
    if not stats:
        raise ValueError("fitness needs at least one season record")
    return sum(s.correct - s.incorrect for s in stats) / len(stats)


def run_foraging_steps(
    world: ForagingWorld,
    net: Network,
    rule: PlasticityRule | None,
    n_steps: int,
    rng: np.random.Generator,
    explore_prob: float = 0.0,
    plasticity: bool = True,
    perfect: bool = False,
    log: TrialLog | None = None,
    log_offset: int = 0,
) -> tuple[int, int, int, int, int]:
    """Advance the world/network n_steps via the active step kernel.

    Mutates world, net and the rng stream in place and returns the chunk's
    (greens, blues, wall hits, plastic updates, degenerate rows). The
    season is taken from world.season for the whole chunk.
    """
    from . import backend

    if rule is None:
        rule = PlasticityRule(0.0, (0,) * 8)
        plasticity = False
    agent_state = np.array([world.agent_x, world.agent_y, world.agent_dir], dtype=np.int64)
    stats = np.zeros(5, dtype=np.int64)
    outcomes = np.array(rule.outcomes, dtype=np.int8)
    kern = backend.active()
    kern.foraging_steps(
        world.grid,
        agent_state,
        net.w_hidden,
        net.w_out,
        float(rule.eta),
        outcomes,
        int(world.season),
        int(n_steps),
        float(explore_prob),
        bool(plasticity),
        bool(perfect),
        _REINFORCEMENT_TABLE,
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


_REINFORCEMENT_TABLE = build_reinforcement_table()


@dataclass
class ForagingTrialResult:
    stats: list[SeasonStats]
    net: Network
    updates: int
    degenerate: int
    log: TrialLog | None = None

    @property
    def fitness(self) -> float:
        return foraging_fitness(self.stats)


def run_foraging_trial(
    rule: PlasticityRule | None,
    net_seed,
    world_seed,
    schedule: SeasonSchedule | None = None,
    explore_prob: float = 0.02,
    n_hidden: int = 20,
    width: int = 100,
    height: int = 100,
    n_green: int = 50,
    n_blue: int = 50,
    plasticity: bool = True,
    perfect: bool = False,
    collect_log: bool = False,
    net: Network | None = None,
) -> ForagingTrialResult:
    """One lifetime-learning trial: fresh network and world, seasons in order.

    Each step: sense, pick an action (network, or a uniform random one
    with probability explore_prob, which also skips that step's plasticity
    update), act, reinforce, update weights when m is nonzero. Pass an
    explicit net to evaluate a fixed network (e.g. frozen-weight tests).
    """
    if schedule is None:
        schedule = SeasonSchedule()
    if net is None:
        net = init_network(6, n_hidden, 3, np.random.default_rng(net_seed))
    rng = np.random.default_rng(world_seed)
    world = init_foraging_world(rng, width, height, n_green, n_blue, schedule.sequence[0])
    log = empty_trial_log(schedule.total_steps, 6) if collect_log else None
    stats = []
    updates = degenerate = 0
    for i, season in enumerate(schedule.sequence):
        world.season = season
        greens, blues, walls, upd, deg = run_foraging_steps(
            world,
            net,
            rule,
            schedule.season_length,
            rng,
            explore_prob=explore_prob,
            plasticity=plasticity,
            perfect=perfect,
            log=log,
            log_offset=i * schedule.season_length,
        )
        correct, incorrect = (greens, blues) if season == SUMMER else (blues, greens)
        stats.append(SeasonStats(season, correct, incorrect, walls, greens, blues))
        updates += upd
        degenerate += deg
    return ForagingTrialResult(stats, net, updates, degenerate, log)
