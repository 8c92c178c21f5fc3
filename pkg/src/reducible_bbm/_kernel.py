"""Compiled event-driven kernel shared by the single- and two-type simulators.

A particle is processed as a *segment*: it starts at ``(t0, y0)``, lives an
exponential time, and at the end either branches or (type 1 only) emits a
type-2 founder.  Segments are independent given their start, so the tree is
walked depth-first with an explicit stack.  A segment that straddles the
query time contributes a leaf whose position is drawn from the Brownian
bridge between its start and its (virtual) end point, which makes the
realised process consistent across query times.
"""

import math

import numpy as np
from numba import njit

from ._rng import child_lineage, segment_draws, split_draw

TYPE1 = 1
TYPE2 = 2

STATUS_OK = 0
STATUS_OVERFLOW = 1
STATUS_HIT = 2
STATUS_STACK = 3

DEFAULT_STACK = 1 << 14


@njit(cache=True, nogil=True)
def run_segments(
    init_kind, init_t0, init_y0, init_lin,
    key0, key1, run,
    beta, alpha, sigma1, t_end,
    thresholds, max_population, stop_at,
    stack_size, f_kind, f_t0, f_y0, f_lin, f_pos,
):
    """Simulate every segment reachable from the initial stack up to ``t_end``.

    Returns ``(status, max1, max2, n1, n2, counts1, counts2)``.  ``stop_at``
    ends the walk with ``STATUS_HIT`` at the first leaf at or above it (pass
    ``inf`` to disable).  ``STATUS_STACK`` means ``stack_size`` was too small;
    the outcome does not depend on it, so callers retry with a larger one.
    When the ``f_*`` arrays have one slot per leaf, the straddling segments
    and the leaf positions are written there in leaf order; pass empty arrays
    to skip this.
    """
    n_thr = thresholds.shape[0]
    counts1 = np.zeros(n_thr, np.int64)
    counts2 = np.zeros(n_thr, np.int64)
    n_init = init_kind.shape[0]
    cap = max(stack_size, n_init + 2)
    kind = np.empty(cap, np.int8)
    st0 = np.empty(cap, np.float64)
    sy0 = np.empty(cap, np.float64)
    slin = np.empty(cap, np.uint64)
    # reversed so the first initial segment is processed first
    for i in range(n_init):
        kind[n_init - 1 - i] = init_kind[i]
        st0[n_init - 1 - i] = init_t0[i]
        sy0[n_init - 1 - i] = init_y0[i]
        slin[n_init - 1 - i] = init_lin[i]
    top = n_init
    keep = f_kind.shape[0] > 0

    rate1 = beta + alpha
    p_branch = beta / rate1
    max1 = -np.inf
    max2 = -np.inf
    n1 = 0
    n2 = 0
    status = STATUS_OK

    while top > 0:
        if n1 + n2 + top > max_population:
            status = STATUS_OVERFLOW
            break
        top -= 1
        k = kind[top]
        t0 = st0[top]
        y0 = sy0[top]
        lin = slin[top]

        radius, angle, u_clock = segment_draws(key0, key1, run, lin)
        if k == TYPE1:
            life = -math.log(u_clock) / rate1
            sig = sigma1
        else:
            life = -math.log(u_clock)
            sig = 1.0
        tau = t0 + life

        if tau >= t_end:
            dt = t_end - t0
            y = y0
            if dt > 0.0:
                z1 = radius * math.cos(angle)
                z2 = radius * math.sin(angle)
                y += sig * (dt / math.sqrt(life) * z1
                            + math.sqrt(dt * (life - dt) / life) * z2)
            if k == TYPE1:
                n1 += 1
                if y > max1:
                    max1 = y
                for j in range(n_thr):
                    if y >= thresholds[j]:
                        counts1[j] += 1
            else:
                n2 += 1
                if y > max2:
                    max2 = y
                for j in range(n_thr):
                    if y >= thresholds[j]:
                        counts2[j] += 1
            if keep:
                m = n1 + n2 - 1
                f_kind[m] = k
                f_t0[m] = t0
                f_y0[m] = y0
                f_lin[m] = lin
                f_pos[m] = y
            if y >= stop_at:
                status = STATUS_HIT
                break
            continue

        if top + 2 > cap:
            status = STATUS_STACK
            break
        y_tau = y0 + sig * math.sqrt(life) * radius * math.cos(angle)
        if k == TYPE1 and alpha > 0.0 and split_draw(key0, key1, run, lin) > p_branch:
            # emission: the type-1 line continues and a type-2 founder appears
            kind[top] = TYPE2
            kind[top + 1] = TYPE1
            slin[top] = child_lineage(lin, 3)
            slin[top + 1] = child_lineage(lin, 2)
        else:
            kind[top] = k
            kind[top + 1] = k
            slin[top] = child_lineage(lin, 1)
            slin[top + 1] = child_lineage(lin, 0)
        st0[top] = tau
        st0[top + 1] = tau
        sy0[top] = y_tau
        sy0[top + 1] = y_tau
        top += 2

    return status, max1, max2, n1, n2, counts1, counts2


@njit(cache=True, nogil=True)
def run_batch(
    runs, key0, key1, root_lineage,
    beta, alpha, sigma1, t_end,
    thresholds, max_population, stop_at, stack_size,
):
    """Simulate independent runs ``runs[i]`` from a single type-1 root at 0."""
    n = runs.shape[0]
    n_thr = thresholds.shape[0]
    status = np.zeros(n, np.int8)
    max1 = np.empty(n)
    max2 = np.empty(n)
    n1 = np.zeros(n, np.int64)
    n2 = np.zeros(n, np.int64)
    c1 = np.zeros((n, n_thr), np.int64)
    c2 = np.zeros((n, n_thr), np.int64)
    ik = np.full(1, TYPE1, np.int8)
    it = np.zeros(1)
    iy = np.zeros(1)
    il = np.full(1, root_lineage, np.uint64)
    fk = np.empty(0, np.int8)
    ff = np.empty(0)
    fl = np.empty(0, np.uint64)
    for i in range(n):
        s, a, b, p, q, x1, x2 = run_segments(
            ik, it, iy, il, key0, key1, runs[i],
            beta, alpha, sigma1, t_end,
            thresholds, max_population, stop_at, stack_size, fk, ff, ff, fl, ff,
        )
        status[i] = s
        max1[i] = a
        max2[i] = b
        n1[i] = p
        n2[i] = q
        c1[i, :] = x1
        c2[i, :] = x2
    return status, max1, max2, n1, n2, c1, c2
