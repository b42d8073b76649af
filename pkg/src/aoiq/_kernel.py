"""Event-loop kernel for the pushout-buffer simulator.

The same source is compiled with numba (default) or run as plain Python when
numba is missing or ``AOIQ_NO_NUMBA=1`` is set.  Both paths consume the same
generator stream, so results are bit-identical either way.  See
``benchmarks/bench_kernel.py`` for the speed comparison.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

STATUS_OK = 0
STATUS_NO_DATA = 1

# columns of the optional departure log
LOG_TIME, LOG_ARRIVAL, LOG_K, LOG_AOI = 0, 1, 2, 3


def use_jit() -> bool:
    flag = os.environ.get("AOIQ_NO_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag not in ("1", "true", "yes")


def _core_impl(rng, m, horizon, warmup,
               ia_kind, ia_a, ia_b, sv_kind, sv_a, sv_b,
               trans, k_counts, gap_sum, gap_sq, gap_quad,
               aoi_sum, aoi_sq, log_buf, log_cap):
    # Draw order is part of the reproducibility contract: on an arrival that
    # starts service, the service time is drawn before the next interarrival.
    def draw(kind, a, b):
        if kind == 0:
            return a
        elif kind == 1:
            return rng.exponential(a)
        return rng.gamma(a, b)

    t_arr = draw(ia_kind, ia_a, ia_b)
    t_dep = np.inf
    cur_arrival = 0.0
    w = 0                           # waiting messages, newest first
    buf = np.zeros(max(m - 1, 1))
    freshest = -np.inf              # arrival time of the freshest served message
    measuring = False
    meas_start = 0.0
    last_epoch = 0.0
    integral = 0.0
    departures = 0
    arrivals = 0
    drops = 0
    stale = 0
    k_prev = 0
    t_prev_dep = 0.0
    log_n = 0

    while True:
        if t_dep <= t_arr:
            # departure first on exact ties
            t = t_dep
            if t > horizon:
                break
            served = cur_arrival
            if measuring:
                # exact slope-1 integration of age over [last_epoch, t)
                integral += (t - last_epoch) * (0.5 * (last_epoch + t) - freshest)
                last_epoch = t
            is_stale = served < freshest
            if served > freshest:
                freshest = served
            k_after = w
            if not measuring:
                if t >= warmup:
                    measuring = True
                    meas_start = t
                    last_epoch = t
                    departures = 1
                    k_counts[k_after] += 1
                    age = t - freshest
                    aoi_sum[k_after] += age
                    aoi_sq[k_after] += age * age
                    if is_stale:
                        stale += 1
                    if log_cap > 0:
                        log_buf[log_n, 0] = t
                        log_buf[log_n, 1] = served
                        log_buf[log_n, 2] = k_after
                        log_buf[log_n, 3] = age
                        log_n += 1
                    k_prev = k_after
                    t_prev_dep = t
            else:
                departures += 1
                gap = t - t_prev_dep
                trans[k_prev, k_after] += 1
                gap_sum[k_prev] += gap
                gap_sq[k_prev] += gap * gap
                gap_quad[k_prev] += gap * gap * gap * gap
                k_counts[k_after] += 1
                age = t - freshest
                aoi_sum[k_after] += age
                aoi_sq[k_after] += age * age
                if is_stale:
                    stale += 1
                if log_cap > 0 and log_n < log_cap:
                    log_buf[log_n, 0] = t
                    log_buf[log_n, 1] = served
                    log_buf[log_n, 2] = k_after
                    log_buf[log_n, 3] = age
                    log_n += 1
                k_prev = k_after
                t_prev_dep = t
            if w > 0:
                cur_arrival = buf[0]
                for idx in range(w - 1):
                    buf[idx] = buf[idx + 1]
                w -= 1
                t_dep = t + draw(sv_kind, sv_a, sv_b)
            else:
                t_dep = np.inf
        else:
            t = t_arr
            if t > horizon:
                break
            if measuring:
                arrivals += 1
            if t_dep == np.inf:
                cur_arrival = t
                t_dep = t + draw(sv_kind, sv_a, sv_b)
            elif m == 1:
                # single-cell buffer: the new message displaces the one in
                # service, which is dropped and never departs
                cur_arrival = t
                t_dep = t + draw(sv_kind, sv_a, sv_b)
                if measuring:
                    drops += 1
            elif w < m - 1:
                for idx in range(w, 0, -1):
                    buf[idx] = buf[idx - 1]
                buf[0] = t
                w += 1
            else:
                # full buffer: newest takes the front cell, oldest waiting out
                for idx in range(w - 1, 0, -1):
                    buf[idx] = buf[idx - 1]
                buf[0] = t
                if measuring:
                    drops += 1
            t_arr = t + draw(ia_kind, ia_a, ia_b)

    if measuring:
        integral += (horizon - last_epoch) * (0.5 * (last_epoch + horizon) - freshest)
        status = STATUS_OK
    else:
        status = STATUS_NO_DATA
    return (status, meas_start, integral, freshest,
            departures, arrivals, drops, stale, log_n)


if HAVE_NUMBA:
    _core_jit = njit(cache=True, nogil=True)(_core_impl)
else:  # pragma: no cover
    _core_jit = None


def sim_core(*args):
    """Run one replication, dispatching to the jitted or plain kernel."""
    core = _core_jit if use_jit() else _core_impl
    return core(*args)
