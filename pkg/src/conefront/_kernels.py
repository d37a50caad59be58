"""Hot numeric kernels for front propagation.

The reachable set at each time row is a union of closed x-intervals.  A row
transition moves each endpoint by marching in x and spending a time budget
h_t against the local cost integrand tan(edge angle): zero-cost cells are
crossed for free (riding along a horizontal cone edge), near-vertical edges
make the cost blow up (the march stalls at null walls), and an inverse-sqrt
cell rule keeps integrable singularities finite.

Kernels are numba-compiled unless CONEFRONT_NO_NUMBA=1 (see _compat).
"""

import math

import numpy as np

from ._compat import maybe_njit

RIDE_TOL = 1e-12
#: edge angles within this of pi/2 count as a wall (integrand ~ 1/angle gap)
SING_ANG = 1e-5
HALF_PI = 0.5 * math.pi


@maybe_njit()
def _lerp_angle(row0, row1, x, x_min, h_x, n_x):
    """Edge angle at continuous x, averaged between two rows (time midpoint)."""
    fx = (x - x_min) / h_x
    if fx <= 0.0:
        j, ax = 0, 0.0
    elif fx >= n_x - 1:
        j, ax = n_x - 2, 1.0
    else:
        j = int(fx)
        ax = fx - j
    v0 = (1.0 - ax) * row0[j] + ax * row0[j + 1]
    v1 = (1.0 - ax) * row1[j] + ax * row1[j + 1]
    return 0.5 * (v0 + v1)


@maybe_njit()
def _tan_plus(angle):
    """Rightward time cost per unit x: tan(angle) clamped below at 0."""
    if angle <= RIDE_TOL:
        return 0.0
    if angle >= HALF_PI - SING_ANG:
        return 1e18
    return math.tan(angle)


@maybe_njit()
def _node_low(row0, row1, j):
    return 0.5 * (row0[j] + row1[j])


@maybe_njit()
def _march_right(row0, row1, b, budget, max_x, x_min, h_x, n_x):
    """Advance the right endpoint by spending ``budget`` time marching right.

    Cost per cell is the trapezoid of tan+(lower angle).  Cells with a wall
    node (edge angle ~ pi/2) use an inverse-sqrt integrand anchored at the
    wall and calibrated at the opposite node, so integrable singularities
    cost a finite time: a wall behind gives the slow escape x ~ t^2, a wall
    ahead an asymptotic stall.
    """
    x = b
    wall = HALF_PI - SING_ANG
    while budget > 1e-300 and x < max_x - 1e-15:
        fx = (x - x_min) / h_x
        j = int(fx)
        if fx - j > 1.0 - 1e-9:
            j += 1
        if j >= n_x - 1:
            break
        x1 = x_min + (j + 1) * h_x
        if x1 > max_x:
            x1 = max_x
        delta = x1 - x
        if delta <= 1e-15:
            break
        node_l = x_min + j * h_x
        node_r = x_min + (j + 1) * h_x
        ang_l = _node_low(row0, row1, j)
        ang_r = _node_low(row0, row1, j + 1)
        if ang_l >= wall and ang_r >= wall:
            break  # wall region: no rightward motion
        if ang_l >= wall:
            # wall behind at the left node: integrand ~ A / sqrt(u - node_l)
            m_r = _tan_plus(ang_r)
            A = m_r * math.sqrt(node_r - node_l)
            if A <= 0.0:
                A = 1e-300
            root_x = math.sqrt(x - node_l) if x > node_l else 0.0
            root_1 = math.sqrt(x1 - node_l)
            cost = 2.0 * A * (root_1 - root_x)
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                root_y = root_x + budget / (2.0 * A)
                y = node_l + root_y * root_y
                if y > x1:
                    y = x1
                x = y
                budget = 0.0
        elif ang_r >= wall:
            # wall ahead at the right node: integrand ~ A / sqrt(node_r - u)
            m_l = _tan_plus(ang_l)
            A = m_l * math.sqrt(node_r - node_l)
            if A <= 0.0:
                A = 1e-300
            root_x = math.sqrt(node_r - x) if node_r > x else 0.0
            root_1 = math.sqrt(node_r - x1) if node_r > x1 else 0.0
            cost = 2.0 * A * (root_x - root_1)
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                root_y = root_x - budget / (2.0 * A)
                if root_y < 0.0:
                    root_y = 0.0
                y = node_r - root_y * root_y
                if y > x1:
                    y = x1
                if y < x:
                    y = x
                x = y
                budget = 0.0
        else:
            ang0 = _lerp_angle(row0, row1, x, x_min, h_x, n_x)
            ang1 = _lerp_angle(row0, row1, x1, x_min, h_x, n_x)
            m0 = _tan_plus(ang0)
            m1 = _tan_plus(ang1)
            cost = 0.5 * (m0 + m1) * delta
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                # stable quadratic root of m0 s + (m1-m0) s^2 / (2 delta) = budget
                c = 0.5 * (m1 - m0) / delta
                disc = m0 * m0 + 4.0 * c * budget
                if disc < 0.0:
                    disc = 0.0
                den = m0 + math.sqrt(disc)
                s = 2.0 * budget / den if den > 0.0 else delta
                if s < 0.0:
                    s = 0.0
                if s > delta:
                    s = delta
                x += s
                budget = 0.0
    return x


@maybe_njit()
def _march_left(row0u, row1u, a, budget, min_x, x_min, h_x, n_x):
    """Mirror of _march_right: leftward cost is tan+(pi - upper angle)."""
    x = a
    wall = HALF_PI - SING_ANG
    while budget > 1e-300 and x > min_x + 1e-15:
        fx = (x - x_min) / h_x
        j = int(fx)
        if fx - j < 1e-9 and j > 0:
            j -= 1
        if j < 0:
            break
        x1 = x_min + j * h_x
        if x1 < min_x:
            x1 = min_x
        delta = x - x1
        if delta <= 1e-15:
            break
        node_l = x_min + j * h_x
        node_r = x_min + (j + 1) * h_x
        ang_l = math.pi - _node_low(row0u, row1u, j)
        ang_r = math.pi - _node_low(row0u, row1u, j + 1)
        if ang_l >= wall and ang_r >= wall:
            break
        if ang_r >= wall:
            # wall behind at the right node: integrand ~ A / sqrt(node_r - u)
            m_l = _tan_plus(ang_l)
            A = m_l * math.sqrt(node_r - node_l)
            if A <= 0.0:
                A = 1e-300
            root_x = math.sqrt(node_r - x) if node_r > x else 0.0
            root_1 = math.sqrt(node_r - x1)
            cost = 2.0 * A * (root_1 - root_x)
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                root_y = root_x + budget / (2.0 * A)
                y = node_r - root_y * root_y
                if y < x1:
                    y = x1
                x = y
                budget = 0.0
        elif ang_l >= wall:
            # wall ahead at the left node: integrand ~ A / sqrt(u - node_l)
            m_r = _tan_plus(ang_r)
            A = m_r * math.sqrt(node_r - node_l)
            if A <= 0.0:
                A = 1e-300
            root_x = math.sqrt(x - node_l) if x > node_l else 0.0
            root_1 = math.sqrt(x1 - node_l) if x1 > node_l else 0.0
            cost = 2.0 * A * (root_x - root_1)
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                root_y = root_x - budget / (2.0 * A)
                if root_y < 0.0:
                    root_y = 0.0
                y = node_l + root_y * root_y
                if y < x1:
                    y = x1
                if y > x:
                    y = x
                x = y
                budget = 0.0
        else:
            ang0 = math.pi - _lerp_angle(row0u, row1u, x, x_min, h_x, n_x)
            ang1 = math.pi - _lerp_angle(row0u, row1u, x1, x_min, h_x, n_x)
            m0 = _tan_plus(ang0)
            m1 = _tan_plus(ang1)
            cost = 0.5 * (m0 + m1) * delta
            if cost <= budget:
                budget -= cost
                x = x1
            else:
                # stable quadratic root of m0 s + (m1-m0) s^2 / (2 delta) = budget
                c = 0.5 * (m1 - m0) / delta
                disc = m0 * m0 + 4.0 * c * budget
                if disc < 0.0:
                    disc = 0.0
                den = m0 + math.sqrt(disc)
                s = 2.0 * budget / den if den > 0.0 else delta
                if s < 0.0:
                    s = 0.0
                if s > delta:
                    s = delta
                x -= s
                budget = 0.0
    return x


@maybe_njit()
def _retreat_right(row0, row1, b, h_t, min_x, x_min, h_x, n_x):
    """Right endpoint motion when the lower edge tilts past vertical."""
    ang = _lerp_angle(row0, row1, b, x_min, h_x, n_x)
    s1 = math.cos(ang) / math.sin(ang)
    bp = b + h_t * s1
    if bp < min_x:
        bp = min_x
    ang2 = _lerp_angle(row0, row1, bp, x_min, h_x, n_x)
    if ang2 > HALF_PI:
        s2 = math.cos(ang2) / math.sin(ang2)
    else:
        s2 = 0.0
    out = b + 0.5 * h_t * (s1 + s2)
    if out < min_x:
        out = min_x
    return out


@maybe_njit()
def _retreat_left(row0u, row1u, a, h_t, max_x, x_min, h_x, n_x):
    """Left endpoint motion when the upper edge tilts right of vertical."""
    ang = _lerp_angle(row0u, row1u, a, x_min, h_x, n_x)
    s1 = math.cos(ang) / math.sin(ang)
    ap = a + h_t * s1
    if ap > max_x:
        ap = max_x
    ang2 = _lerp_angle(row0u, row1u, ap, x_min, h_x, n_x)
    if ang2 < HALF_PI:
        s2 = math.cos(ang2) / math.sin(ang2)
    else:
        s2 = 0.0
    out = a + 0.5 * h_t * (s1 + s2)
    if out > max_x:
        out = max_x
    return out


@maybe_njit()
def _ride_row(low_row, upp_row, a, b, x_min, h_x, n_x):
    """Zero-cost closure within a single row: extend across cells whose both
    nodes permit horizontal motion (lower <= 0 rightward, upper >= pi left)."""
    fb = (b - x_min) / h_x
    j = int(fb)
    if fb - j > 1.0 - 1e-9:
        j += 1
    while j + 1 < n_x and low_row[j] <= RIDE_TOL and low_row[j + 1] <= RIDE_TOL:
        b = x_min + (j + 1) * h_x
        j += 1
    fa = (a - x_min) / h_x
    j = int(fa)
    if fa - j < 1e-9 and j > 0:
        j -= 1
    while j >= 0 and upp_row[j] >= math.pi - RIDE_TOL and upp_row[j + 1] >= math.pi - RIDE_TOL:
        a = x_min + j * h_x
        j -= 1
    return a, b


@maybe_njit()
def front_sweep(low, upp, t_min, h_t, h_x, x_min, r0, a0, b0, s_cap,
                out_a, out_b, out_n, first_touch):
    """Sweep the reachable intervals forward in t from row ``r0``.

    low/upp: (n_t, n_x) lower/upper cone-edge angle grids.
    out_a/out_b: (n_t, K) interval endpoints, out_n: per-row counts.
    first_touch: (n_x,) earliest reach time per column (+inf if never).
    Returns 0 on success, 1 on interval-capacity overflow.
    """
    n_t, n_x = low.shape
    K = out_a.shape[1]
    x_max = x_min + (n_x - 1) * h_x

    for r in range(n_t):
        out_n[r] = 0

    a_cur = np.empty(K)
    b_cur = np.empty(K)
    a_new = np.empty(K)
    b_new = np.empty(K)

    a, b = _ride_row(low[r0], upp[r0], a0, b0, x_min, h_x, n_x)
    a_cur[0] = a
    b_cur[0] = b
    n_cur = 1

    out_a[r0, 0] = a
    out_b[r0, 0] = b
    out_n[r0] = 1
    _touch(first_touch, a, b, t_min + r0 * h_t, x_min, h_x, n_x)

    max_travel = s_cap * h_t

    for r in range(r0, n_t - 1):
        low0 = low[r]
        low1 = low[r + 1]
        upp0 = upp[r]
        upp1 = upp[r + 1]
        t_row = t_min + r * h_t
        t_next = t_min + (r + 1) * h_t
        n_new = 0
        for i in range(n_cur):
            a = a_cur[i]
            b = b_cur[i]
            ang_b = _lerp_angle(low0, low1, b, x_min, h_x, n_x)
            if ang_b > HALF_PI + 1e-9:
                b2 = _retreat_right(low0, low1, b, h_t, x_min, x_min, h_x, n_x)
            else:
                lim = b + max_travel
                if lim > x_max:
                    lim = x_max
                b2 = _march_right(low0, low1, b, h_t, lim, x_min, h_x, n_x)
            ang_a = _lerp_angle(upp0, upp1, a, x_min, h_x, n_x)
            if ang_a < HALF_PI - 1e-9:
                a2 = _retreat_left(upp0, upp1, a, h_t, x_max, x_min, h_x, n_x)
            else:
                lim = a - max_travel
                if lim < x_min:
                    lim = x_min
                a2 = _march_left(upp0, upp1, a, h_t, lim, x_min, h_x, n_x)
            if a2 > b2:
                continue  # interval vanished
            _touch_swept(first_touch, b, b2, t_row, t_next, x_min, h_x, n_x)
            _touch_swept(first_touch, a, a2, t_row, t_next, x_min, h_x, n_x)
            a_new[n_new] = a2
            b_new[n_new] = b2
            n_new += 1

        # merge overlapping intervals (kept in increasing order)
        n_cur = 0
        for i in range(n_new):
            if n_cur > 0 and a_new[i] <= b_cur[n_cur - 1] + 1e-12:
                if b_new[i] > b_cur[n_cur - 1]:
                    b_cur[n_cur - 1] = b_new[i]
            else:
                if n_cur >= K:
                    return 1
                a_cur[n_cur] = a_new[i]
                b_cur[n_cur] = b_new[i]
                n_cur += 1

        # in-row closure along degenerate edges
        for i in range(n_cur):
            a2, b2 = _ride_row(low1, upp1, a_cur[i], b_cur[i], x_min, h_x, n_x)
            a_cur[i] = a2
            b_cur[i] = b2
        # closure may have glued neighbours
        m = 0
        for i in range(n_cur):
            if m > 0 and a_cur[i] <= b_cur[m - 1] + 1e-12:
                if b_cur[i] > b_cur[m - 1]:
                    b_cur[m - 1] = b_cur[i]
            else:
                a_cur[m] = a_cur[i]
                b_cur[m] = b_cur[i]
                m += 1
        n_cur = m

        if n_cur == 0:
            break

        for i in range(n_cur):
            out_a[r + 1, i] = a_cur[i]
            out_b[r + 1, i] = b_cur[i]
            _touch(first_touch, a_cur[i], b_cur[i], t_next, x_min, h_x, n_x)
        out_n[r + 1] = n_cur

    return 0


@maybe_njit()
def _touch(first_touch, a, b, t, x_min, h_x, n_x):
    j_lo = int(math.ceil((a - x_min) / h_x - 1e-9))
    j_hi = int(math.floor((b - x_min) / h_x + 1e-9))
    if j_lo < 0:
        j_lo = 0
    if j_hi > n_x - 1:
        j_hi = n_x - 1
    for j in range(j_lo, j_hi + 1):
        if first_touch[j] > t:
            first_touch[j] = t


@maybe_njit()
def _touch_swept(first_touch, x_old, x_new, t0, t1, x_min, h_x, n_x):
    """Stamp columns crossed by an endpoint moving x_old -> x_new during
    [t0, t1] with linearly interpolated crossing times."""
    if x_new > x_old:
        j_lo = int(math.ceil((x_old - x_min) / h_x - 1e-9))
        j_hi = int(math.floor((x_new - x_min) / h_x + 1e-9))
        if j_lo < 0:
            j_lo = 0
        if j_hi > n_x - 1:
            j_hi = n_x - 1
        span = x_new - x_old
        for j in range(j_lo, j_hi + 1):
            xj = x_min + j * h_x
            if xj < x_old - 1e-15:
                continue
            t = t0 + (t1 - t0) * (xj - x_old) / span if span > 0 else t1
            if first_touch[j] > t:
                first_touch[j] = t
    elif x_new < x_old:
        j_lo = int(math.ceil((x_new - x_min) / h_x - 1e-9))
        j_hi = int(math.floor((x_old - x_min) / h_x + 1e-9))
        if j_lo < 0:
            j_lo = 0
        if j_hi > n_x - 1:
            j_hi = n_x - 1
        span = x_old - x_new
        for j in range(j_lo, j_hi + 1):
            xj = x_min + j * h_x
            if xj > x_old + 1e-15:
                continue
            t = t0 + (t1 - t0) * (x_old - xj) / span if span > 0 else t1
            if first_touch[j] > t:
                first_touch[j] = t
