"""Pure-Python step kernels (fallback backend).

These two functions advance a foraging or pursuit world by n steps,
mutating the grid, agent state, weights, RNG stream, stats and optional
log arrays in place. The compiled extension implements the same entry
points; the two must stay bit-for-bit interchangeable, which pins down
some otherwise arbitrary choices:

- One uniform draw per step for the exploration coin, always taken; a
  second draw picks the exploration action. Respawns take two draws
  (x then y) per rejection attempt. Mobiles draw as documented in
  step_mobiles. Bounded ints come from int(u * n).
- Accumulations are strictly sequential in index order and use the
  multiply form (s += w * bit); normalization divides by the norm
  (never multiplies by its reciprocal).
- Weights are handled as Python floats here, which are the same IEEE
  doubles the C kernel uses.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

__all__ = ["foraging_steps", "pp_steps"]

_DIRS = ((0, -1), (1, 0), (0, 1), (-1, 0))
_CODE_BITS = ((0, 0), (1, 1), (1, 0), (0, 1))  # grid code -> sensor bit pair
_SCODE = (0, 3, 2, 1)  # grid code -> packed 2-bit sensor code
_NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

# Vision rectangle scan order: far row first, each row left to right,
# own cell excluded. Must match preypredator.vision_offsets().
_VISION = tuple(
    (depth, lat)
    for depth in range(4, -1, -1)
    for lat in range(-4, 5)
    if not (depth == 0 and lat == 0)
)


def _forward(wh, wo, bits, n_hidden, n_out):
    n_in = len(bits)
    hidden = []
    for i in range(n_hidden):
        row = wh[i]
        s = 0.0
        for j in range(n_in):
            s += row[j] * bits[j]
        s += row[n_in]
        hidden.append(1 if s > 0.0 else 0)
    action = 0
    best = None
    for k in range(n_out):
        row = wo[k]
        s = 0.0
        for j in range(n_hidden):
            s += row[j] * hidden[j]
        s += row[n_hidden]
        if best is None or s > best:
            best = s
            action = k
    return hidden, action


def _update(wh, wo, eta, outc, bits, hidden, action, m, n_hidden, n_out):
    base = 0 if m == -1 else 4
    n_in = len(bits)
    for i in range(n_hidden):
        post = hidden[i]
        row = wh[i]
        for j in range(n_in):
            row[j] += eta * outc[base + 2 * bits[j] + post]
        row[n_in] += eta * outc[base + 2 + post]
    for k in range(n_out):
        post = 1 if k == action else 0
        row = wo[k]
        for j in range(n_hidden):
            row[j] += eta * outc[base + 2 * hidden[j] + post]
        row[n_hidden] += eta * outc[base + 2 + post]
    degen = 0
    for mat in (wh, wo):
        for row in mat:
            s = 0.0
            for v in row:
                s += v * v
            if s == 0.0:
                degen += 1
                continue
            norm = sqrt(s)
            for j in range(len(row)):
                row[j] = row[j] / norm
    return degen


def _perfect_action(cl, cf, cr, season):
    # Tiers: season-correct item (front, left, right order), wall-avoid
    # turns per the reinforcement table, first empty cell, then the
    # incorrect item. A wall destination is never chosen while any other
    # destination exists.
    correct = 2 if season == 0 else 3
    incorrect = 5 - correct
    if cf == correct:
        return 1
    if cl == correct:
        return 0
    if cr == correct:
        return 2
    if cf == 1 or cl == 1 or cr == 1:
        if cf == 1:
            if cl == 1:
                return 2
            if cr == 1:
                return 0
            if cl == incorrect and cr != incorrect:
                return 2
            return 0
        if cl == 1:
            return 2
        return 0
    if cf == 0:
        return 1
    if cl == 0:
        return 0
    if cr == 0:
        return 2
    return 1


def foraging_steps(
    grid,
    agent_state,
    w_hidden,
    w_out,
    eta,
    outcomes,
    season,
    n_steps,
    explore_prob,
    plasticity_on,
    perfect_on,
    reinforcement_table,
    rng,
    stats,
    log_sensors,
    log_actions,
    log_m,
    log_events,
    log_offset,
):
    g = [[int(v) for v in row] for row in grid]
    wh = [[float(v) for v in row] for row in w_hidden]
    wo = [[float(v) for v in row] for row in w_out]
    n_hidden = len(wh)
    n_out = len(wo)
    height = len(g) - 2
    width = len(g[0]) - 2
    ax, ay, adir = (int(v) for v in agent_state)
    tab = [int(v) for v in reinforcement_table.ravel()]
    outc = [int(v) for v in outcomes]
    eta = float(eta)
    rnd = rng.random
    greens = blues = walls = updates = degen = 0

    for i in range(n_steps):
        dlx, dly = _DIRS[(adir + 3) & 3]
        dfx, dfy = _DIRS[adir]
        drx, dry = _DIRS[(adir + 1) & 3]
        cl = g[ay + dly][ax + dlx]
        cf = g[ay + dfy][ax + dfx]
        cr = g[ay + dry][ax + drx]
        bits = _CODE_BITS[cl] + _CODE_BITS[cf] + _CODE_BITS[cr]

        explored = rnd() < explore_prob
        hidden = None
        if explored:
            action = int(rnd() * 3.0)
        elif perfect_on:
            action = _perfect_action(cl, cf, cr, season)
        else:
            hidden, action = _forward(wh, wo, bits, n_hidden, n_out)

        if action == 0:
            adir = (adir + 3) & 3
        elif action == 2:
            adir = (adir + 1) & 3
        dx, dy = _DIRS[adir]
        nx, ny = ax + dx, ay + dy
        cell = g[ny][nx]
        if cell == 1:
            event = 1
            walls += 1
        else:
            ax, ay = nx, ny
            if cell == 0:
                event = 0
            else:
                g[ny][nx] = 0
                while True:
                    x = 1 + int(rnd() * width)
                    y = 1 + int(rnd() * height)
                    if g[y][x] == 0 and not (x == ax and y == ay):
                        break
                g[y][x] = cell
                if cell == 2:
                    greens += 1
                    event = 2
                else:
                    blues += 1
                    event = 3

        code = _SCODE[cl] * 16 + _SCODE[cf] * 4 + _SCODE[cr]
        m = tab[(code * 3 + action) * 2 + season]

        if plasticity_on and not explored and hidden is not None and m != 0:
            degen += _update(wh, wo, eta, outc, bits, hidden, action, m, n_hidden, n_out)
            updates += 1

        if log_actions is not None:
            row = log_offset + i
            log_sensors[row] = bits
            log_actions[row] = action
            log_m[row] = m
            log_events[row] = event

    grid[...] = np.asarray(g, dtype=np.uint8)
    w_hidden[...] = wh
    w_out[...] = wo
    agent_state[0] = ax
    agent_state[1] = ay
    agent_state[2] = adir
    stats[0] += greens
    stats[1] += blues
    stats[2] += walls
    stats[3] += updates
    stats[4] += degen


def pp_steps(
    grid,
    agent_state,
    mobile_xy,
    n_green,
    w_hidden,
    w_out,
    eta,
    outcomes,
    season,
    n_steps,
    explore_prob,
    plasticity_on,
    threshold,
    bias_prob,
    rng,
    stats,
    log_sensors,
    log_actions,
    log_m,
    log_events,
    log_offset,
):
    g = [[int(v) for v in row] for row in grid]
    wh = [[float(v) for v in row] for row in w_hidden]
    wo = [[float(v) for v in row] for row in w_out]
    n_hidden = len(wh)
    n_out = len(wo)
    h2 = len(g)
    w2 = len(g[0])
    height = h2 - 2
    width = w2 - 2
    ax, ay, adir = (int(v) for v in agent_state)
    mob = [[int(mobile_xy[i, 0]), int(mobile_xy[i, 1])] for i in range(mobile_xy.shape[0])]
    n_mob = len(mob)
    outc = [int(v) for v in outcomes]
    eta = float(eta)
    thr2 = float(threshold) * float(threshold)
    rnd = rng.random
    collected = caught = walls = updates = degen = 0
    summer = season == 0

    for i in range(n_steps):
        fx, fy = _DIRS[adir]
        rx, ry = _DIRS[(adir + 1) & 3]
        bits = []
        best_d2 = -1
        best_cx = best_cy = best_code = 0
        for depth, lat in _VISION:
            x = ax + depth * fx + lat * rx
            y = ay + depth * fy + lat * ry
            if 0 <= x < w2 and 0 <= y < h2:
                c = g[y][x]
            else:
                c = 1
            bits.extend(_CODE_BITS[c])
            if c != 0:
                d2 = (x - ax) * (x - ax) + (y - ay) * (y - ay)
                if best_d2 < 0 or d2 < best_d2:
                    best_d2 = d2
                    best_cx, best_cy, best_code = x, y, c

        explored = rnd() < explore_prob
        hidden = None
        if explored:
            action = int(rnd() * 3.0)
        else:
            hidden, action = _forward(wh, wo, bits, n_hidden, n_out)

        pre_x, pre_y = ax, ay
        if action == 0:
            adir = (adir + 3) & 3
        elif action == 2:
            adir = (adir + 1) & 3
        dx, dy = _DIRS[adir]
        nx, ny = ax + dx, ay + dy
        event = 0
        if g[ny][nx] == 1:
            walls += 1
            event |= 1
        else:
            ax, ay = nx, ny

        # Settle a prey/predator already on the agent's cell (the agent
        # just stepped onto it, or a blocked predator stayed put).
        for k in range(n_mob):
            if mob[k][0] == ax and mob[k][1] == ay:
                prey = (k < n_green) == summer
                if prey:
                    g[ay][ax] = 0
                    while True:
                        x = 1 + int(rnd() * width)
                        y = 1 + int(rnd() * height)
                        if g[y][x] == 0 and not (x == ax and y == ay):
                            break
                    g[y][x] = 2 if k < n_green else 3
                    mob[k] = [x, y]
                    collected += 1
                    event |= 2
                else:
                    caught += 1
                    event |= 4

        if best_d2 < 0:
            m = 1 if action == 1 else -1
        else:
            d_post = (ax - best_cx) * (ax - best_cx) + (ay - best_cy) * (ay - best_cy)
            if d_post == best_d2:
                m = 0
            elif best_code == 1:
                m = 1 if d_post > best_d2 else -1
            else:
                toward = 1 if (best_code == 2) == summer else -1
                m = toward if d_post < best_d2 else -toward

        if plasticity_on and not explored and hidden is not None and m != 0:
            degen += _update(wh, wo, eta, outc, bits, hidden, action, m, n_hidden, n_out)
            updates += 1

        for k in range(n_mob):
            mx, my = mob[k]
            free = []
            for ndx, ndy in _NEIGHBORS:
                tx, ty = mx + ndx, my + ndy
                if g[ty][tx] == 0:
                    free.append((tx, ty))
            if not free:
                continue
            choice = None
            if (mx - ax) * (mx - ax) + (my - ay) * (my - ay) <= thr2:
                if rnd() < bias_prob:
                    prey = (k < n_green) == summer
                    ext = -1
                    for tx, ty in free:
                        nd2 = (tx - ax) * (tx - ax) + (ty - ay) * (ty - ay)
                        if ext < 0 or (nd2 > ext if prey else nd2 < ext):
                            ext = nd2
                            choice = (tx, ty)
            if choice is None:
                choice = free[int(rnd() * len(free))]
            g[my][mx] = 0
            g[choice[1]][choice[0]] = 2 if k < n_green else 3
            mob[k] = [choice[0], choice[1]]

        for k in range(n_mob):
            if mob[k][0] == ax and mob[k][1] == ay:
                prey = (k < n_green) == summer
                if prey:
                    g[ay][ax] = 0
                    while True:
                        x = 1 + int(rnd() * width)
                        y = 1 + int(rnd() * height)
                        if g[y][x] == 0 and not (x == ax and y == ay):
                            break
                    g[y][x] = 2 if k < n_green else 3
                    mob[k] = [x, y]
                    collected += 1
                    event |= 2
                else:
                    caught += 1
                    event |= 4

        if log_actions is not None:
            row = log_offset + i
            log_sensors[row] = bits
            log_actions[row] = action
            log_m[row] = m
            log_events[row] = event

    grid[...] = np.asarray(g, dtype=np.uint8)
    w_hidden[...] = wh
    w_out[...] = wo
    agent_state[0] = ax
    agent_state[1] = ay
    agent_state[2] = adir
    for k in range(n_mob):
        mobile_xy[k, 0] = mob[k][0]
        mobile_xy[k, 1] = mob[k][1]
    stats[0] += collected
    stats[1] += caught
    stats[2] += walls
    stats[3] += updates
    stats[4] += degen
