# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled step kernels.

Twin of _purecore: same entry points, same draw protocol, same
sequential float operations, consuming doubles straight from the
Generator's bit generator so the two backends produce bit-identical
trajectories from one seed. Keep any change here in lockstep with
_purecore (the equivalence tests will catch drift).
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport sqrt
from numpy.random cimport bitgen_t

cnp.import_array()

ctypedef cnp.int8_t i8
ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

cdef int _DX[4]
cdef int _DY[4]
_DX[0] = 0; _DX[1] = 1; _DX[2] = 0; _DX[3] = -1
_DY[0] = -1; _DY[1] = 0; _DY[2] = 1; _DY[3] = 0

# grid code -> sensor bit pair / packed 2-bit code
cdef int _B0[4]
cdef int _B1[4]
cdef int _SC[4]
_B0[0] = 0; _B0[1] = 1; _B0[2] = 1; _B0[3] = 0
_B1[0] = 0; _B1[1] = 1; _B1[2] = 0; _B1[3] = 1
_SC[0] = 0; _SC[1] = 3; _SC[2] = 2; _SC[3] = 1

cdef int _NX[8]
cdef int _NY[8]
_NX[0] = -1; _NX[1] = -1; _NX[2] = -1; _NX[3] = 0; _NX[4] = 0; _NX[5] = 1; _NX[6] = 1; _NX[7] = 1
_NY[0] = -1; _NY[1] = 0; _NY[2] = 1; _NY[3] = -1; _NY[4] = 1; _NY[5] = -1; _NY[6] = 0; _NY[7] = 1


cdef inline bitgen_t* _bitgen(object rng):
    return <bitgen_t*> PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")


cdef int _forward(double[:, :] wh, double[:, :] wo, u8[:] bits, i8[:] hidden) noexcept:
    cdef Py_ssize_t n_in = wh.shape[1] - 1
    cdef Py_ssize_t n_hidden = wh.shape[0]
    cdef Py_ssize_t n_out = wo.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s, best
    cdef int action = 0
    for i in range(n_hidden):
        s = 0.0
        for j in range(n_in):
            s += wh[i, j] * bits[j]
        s += wh[i, n_in]
        hidden[i] = 1 if s > 0.0 else 0
    best = 0.0
    for k in range(n_out):
        s = 0.0
        for j in range(n_hidden):
            s += wo[k, j] * hidden[j]
        s += wo[k, n_hidden]
        if k == 0 or s > best:
            best = s
            action = <int> k
    return action


cdef int _update(double[:, :] wh, double[:, :] wo, double eta, i8[:] outc,
                 u8[:] bits, i8[:] hidden, int action, int m) noexcept:
    cdef Py_ssize_t n_in = wh.shape[1] - 1
    cdef Py_ssize_t n_hidden = wh.shape[0]
    cdef Py_ssize_t n_out = wo.shape[0]
    cdef Py_ssize_t i, j, k
    cdef int base = 0 if m == -1 else 4
    cdef int post
    cdef double s, norm
    cdef int degen = 0
    for i in range(n_hidden):
        post = hidden[i]
        for j in range(n_in):
            wh[i, j] += eta * outc[base + 2 * bits[j] + post]
        wh[i, n_in] += eta * outc[base + 2 + post]
    for k in range(n_out):
        post = 1 if k == action else 0
        for j in range(n_hidden):
            wo[k, j] += eta * outc[base + 2 * hidden[j] + post]
        wo[k, n_hidden] += eta * outc[base + 2 + post]
    for i in range(n_hidden):
        s = 0.0
        for j in range(n_in + 1):
            s += wh[i, j] * wh[i, j]
        if s == 0.0:
            degen += 1
        else:
            norm = sqrt(s)
            for j in range(n_in + 1):
                wh[i, j] = wh[i, j] / norm
    for k in range(n_out):
        s = 0.0
        for j in range(n_hidden + 1):
            s += wo[k, j] * wo[k, j]
        if s == 0.0:
            degen += 1
        else:
            norm = sqrt(s)
            for j in range(n_hidden + 1):
                wo[k, j] = wo[k, j] / norm
    return degen


cdef inline int _perfect_action(int cl, int cf, int cr, int season) noexcept:
    cdef int correct = 2 if season == 0 else 3
    cdef int incorrect = 5 - correct
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


def foraging_steps(object grid_arr, object agent_state_arr, object wh_arr, object wo_arr,
                   double eta, object outcomes_arr, int season, long n_steps,
                   double explore_prob, bint plasticity_on, bint perfect_on,
                   object table_arr, object rng, object stats_arr,
                   object log_sensors, object log_actions, object log_m,
                   object log_events, long log_offset):
    cdef u8[:, :] g = grid_arr
    cdef i64[:] agent = agent_state_arr
    cdef double[:, :] wh = wh_arr
    cdef double[:, :] wo = wo_arr
    cdef i8[:] outc = outcomes_arr
    cdef i8[:, :, :] tab = table_arr
    cdef i64[:] stats = stats_arr
    cdef bitgen_t* bg = _bitgen(rng)

    cdef bint do_log = log_actions is not None
    cdef u8[:, :] lsens
    cdef i8[:] lact, lm, lev
    if do_log:
        lsens = log_sensors
        lact = log_actions
        lm = log_m
        lev = log_events

    cdef Py_ssize_t n_hidden = wh.shape[0]
    cdef int height = <int> g.shape[0] - 2
    cdef int width = <int> g.shape[1] - 2
    cdef int ax = <int> agent[0]
    cdef int ay = <int> agent[1]
    cdef int adir = <int> agent[2]

    sens_buf = np.zeros(6, dtype=np.uint8)
    hid_buf = np.zeros(n_hidden, dtype=np.int8)
    cdef u8[:] bits = sens_buf
    cdef i8[:] hidden = hid_buf

    cdef long greens = 0, blues = 0, walls = 0, updates = 0, degen = 0
    cdef long i
    cdef int cl, cf, cr, action, dx, dy, nx, ny, cell, event, code, m, x, y
    cdef bint explored, have_net

    for i in range(n_steps):
        dx = _DX[(adir + 3) & 3]; dy = _DY[(adir + 3) & 3]
        cl = g[ay + dy, ax + dx]
        dx = _DX[adir]; dy = _DY[adir]
        cf = g[ay + dy, ax + dx]
        dx = _DX[(adir + 1) & 3]; dy = _DY[(adir + 1) & 3]
        cr = g[ay + dy, ax + dx]
        bits[0] = _B0[cl]; bits[1] = _B1[cl]
        bits[2] = _B0[cf]; bits[3] = _B1[cf]
        bits[4] = _B0[cr]; bits[5] = _B1[cr]

        explored = bg.next_double(bg.state) < explore_prob
        have_net = False
        if explored:
            action = <int> (bg.next_double(bg.state) * 3.0)
        elif perfect_on:
            action = _perfect_action(cl, cf, cr, season)
        else:
            action = _forward(wh, wo, bits, hidden)
            have_net = True

        if action == 0:
            adir = (adir + 3) & 3
        elif action == 2:
            adir = (adir + 1) & 3
        nx = ax + _DX[adir]
        ny = ay + _DY[adir]
        cell = g[ny, nx]
        if cell == 1:
            event = 1
            walls += 1
        else:
            ax = nx; ay = ny
            if cell == 0:
                event = 0
            else:
                g[ny, nx] = 0
                while True:
                    x = 1 + <int> (bg.next_double(bg.state) * width)
                    y = 1 + <int> (bg.next_double(bg.state) * height)
                    if g[y, x] == 0 and not (x == ax and y == ay):
                        break
                g[y, x] = <u8> cell
                if cell == 2:
                    greens += 1
                    event = 2
                else:
                    blues += 1
                    event = 3

        code = _SC[cl] * 16 + _SC[cf] * 4 + _SC[cr]
        m = tab[code, action, season]

        if plasticity_on and not explored and have_net and m != 0:
            degen += _update(wh, wo, eta, outc, bits, hidden, action, m)
            updates += 1

        if do_log:
            lsens[log_offset + i, 0] = bits[0]
            lsens[log_offset + i, 1] = bits[1]
            lsens[log_offset + i, 2] = bits[2]
            lsens[log_offset + i, 3] = bits[3]
            lsens[log_offset + i, 4] = bits[4]
            lsens[log_offset + i, 5] = bits[5]
            lact[log_offset + i] = <i8> action
            lm[log_offset + i] = <i8> m
            lev[log_offset + i] = <i8> event

    agent[0] = ax
    agent[1] = ay
    agent[2] = adir
    stats[0] += greens
    stats[1] += blues
    stats[2] += walls
    stats[3] += updates
    stats[4] += degen


def pp_steps(object grid_arr, object agent_state_arr, object mobile_arr, int n_green,
             object wh_arr, object wo_arr, double eta, object outcomes_arr,
             int season, long n_steps, double explore_prob, bint plasticity_on,
             double threshold, double bias_prob, object rng, object stats_arr,
             object log_sensors, object log_actions, object log_m,
             object log_events, long log_offset):
    cdef u8[:, :] g = grid_arr
    cdef i64[:] agent = agent_state_arr
    cdef i64[:, :] mob = mobile_arr
    cdef double[:, :] wh = wh_arr
    cdef double[:, :] wo = wo_arr
    cdef i8[:] outc = outcomes_arr
    cdef i64[:] stats = stats_arr
    cdef bitgen_t* bg = _bitgen(rng)

    cdef bint do_log = log_actions is not None
    cdef u8[:, :] lsens
    cdef i8[:] lact, lm, lev
    if do_log:
        lsens = log_sensors
        lact = log_actions
        lm = log_m
        lev = log_events

    cdef Py_ssize_t n_hidden = wh.shape[0]
    cdef int h2 = <int> g.shape[0]
    cdef int w2 = <int> g.shape[1]
    cdef int height = h2 - 2
    cdef int width = w2 - 2
    cdef int n_mob = <int> mob.shape[0]
    cdef int ax = <int> agent[0]
    cdef int ay = <int> agent[1]
    cdef int adir = <int> agent[2]
    cdef double thr2 = threshold * threshold
    cdef bint summer = season == 0

    sens_buf = np.zeros(88, dtype=np.uint8)
    hid_buf = np.zeros(n_hidden, dtype=np.int8)
    cdef u8[:] bits = sens_buf
    cdef i8[:] hidden = hid_buf

    cdef long collected = 0, caught = 0, walls = 0, updates = 0, degen = 0
    cdef long i
    cdef int fx, fy, rx, ry, depth, lat, x, y, c, kbit, action, m, event
    cdef int pre_x, pre_y, nx, ny, k, mx, my, tx, ty, n_free, d2, nd2, ext
    cdef int best_d2, best_cx, best_cy, best_code, d_post, toward
    cdef int free_x[8]
    cdef int free_y[8]
    cdef bint explored, prey, biased
    cdef double u

    for i in range(n_steps):
        fx = _DX[adir]; fy = _DY[adir]
        rx = _DX[(adir + 1) & 3]; ry = _DY[(adir + 1) & 3]
        kbit = 0
        best_d2 = -1
        best_cx = 0; best_cy = 0; best_code = 0
        for depth in range(4, -1, -1):
            for lat in range(-4, 5):
                if depth == 0 and lat == 0:
                    continue
                x = ax + depth * fx + lat * rx
                y = ay + depth * fy + lat * ry
                if 0 <= x < w2 and 0 <= y < h2:
                    c = g[y, x]
                else:
                    c = 1
                bits[kbit] = _B0[c]; bits[kbit + 1] = _B1[c]
                kbit += 2
                if c != 0:
                    d2 = (x - ax) * (x - ax) + (y - ay) * (y - ay)
                    if best_d2 < 0 or d2 < best_d2:
                        best_d2 = d2
                        best_cx = x; best_cy = y; best_code = c

        explored = bg.next_double(bg.state) < explore_prob
        if explored:
            action = <int> (bg.next_double(bg.state) * 3.0)
        else:
            action = _forward(wh, wo, bits, hidden)

        pre_x = ax; pre_y = ay
        if action == 0:
            adir = (adir + 3) & 3
        elif action == 2:
            adir = (adir + 1) & 3
        nx = ax + _DX[adir]
        ny = ay + _DY[adir]
        event = 0
        if g[ny, nx] == 1:
            walls += 1
            event |= 1
        else:
            ax = nx; ay = ny

        for k in range(n_mob):
            if mob[k, 0] == ax and mob[k, 1] == ay:
                prey = (k < n_green) == summer
                if prey:
                    g[ay, ax] = 0
                    while True:
                        x = 1 + <int> (bg.next_double(bg.state) * width)
                        y = 1 + <int> (bg.next_double(bg.state) * height)
                        if g[y, x] == 0 and not (x == ax and y == ay):
                            break
                    g[y, x] = 2 if k < n_green else 3
                    mob[k, 0] = x; mob[k, 1] = y
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

        if plasticity_on and not explored and m != 0:
            degen += _update(wh, wo, eta, outc, bits, hidden, action, m)
            updates += 1

        for k in range(n_mob):
            mx = <int> mob[k, 0]; my = <int> mob[k, 1]
            n_free = 0
            for c in range(8):
                tx = mx + _NX[c]; ty = my + _NY[c]
                if g[ty, tx] == 0:
                    free_x[n_free] = tx
                    free_y[n_free] = ty
                    n_free += 1
            if n_free == 0:
                continue
            tx = -1
            if (mx - ax) * (mx - ax) + (my - ay) * (my - ay) <= thr2:
                if bg.next_double(bg.state) < bias_prob:
                    prey = (k < n_green) == summer
                    ext = -1
                    for c in range(n_free):
                        nd2 = (free_x[c] - ax) * (free_x[c] - ax) + (free_y[c] - ay) * (free_y[c] - ay)
                        if ext < 0 or (nd2 > ext if prey else nd2 < ext):
                            ext = nd2
                            tx = free_x[c]; ty = free_y[c]
            if tx < 0:
                c = <int> (bg.next_double(bg.state) * n_free)
                tx = free_x[c]; ty = free_y[c]
            g[my, mx] = 0
            g[ty, tx] = 2 if k < n_green else 3
            mob[k, 0] = tx; mob[k, 1] = ty

        for k in range(n_mob):
            if mob[k, 0] == ax and mob[k, 1] == ay:
                prey = (k < n_green) == summer
                if prey:
                    g[ay, ax] = 0
                    while True:
                        x = 1 + <int> (bg.next_double(bg.state) * width)
                        y = 1 + <int> (bg.next_double(bg.state) * height)
                        if g[y, x] == 0 and not (x == ax and y == ay):
                            break
                    g[y, x] = 2 if k < n_green else 3
                    mob[k, 0] = x; mob[k, 1] = y
                    collected += 1
                    event |= 2
                else:
                    caught += 1
                    event |= 4

        if do_log:
            for k in range(88):
                lsens[log_offset + i, k] = bits[k]
            lact[log_offset + i] = <i8> action
            lm[log_offset + i] = <i8> m
            lev[log_offset + i] = <i8> event

    agent[0] = ax
    agent[1] = ay
    agent[2] = adir
    stats[0] += collected
    stats[1] += caught
    stats[2] += walls
    stats[3] += updates
    stats[4] += degen
