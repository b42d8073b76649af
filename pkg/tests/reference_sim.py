"""Slow reference simulator used to cross-check the event-loop kernel.

Drives the pure buffer transition ``aoiq.simulator.step`` with the exact same
generator stream and draw order as the kernel, and accumulates the statistics
with the same floating-point expressions, so every output must match the
kernel bit for bit.
"""

import math

import numpy as np

from aoiq.simulator import Arrival, BufferState, Departure, step


def reference_replication(config, rep):
    from aoiq.simulator import replication_rng

    params = config.params
    m = params.m
    rng = replication_rng(config.seed, rep, config.replications)
    ia = config.resolved_interarrival()
    sv = params.service
    horizon = config.horizon
    warmup = config.resolved_warmup()

    def draw(dist):
        kind, a, b = dist.kernel_params()
        if kind == 0:
            return a
        if kind == 1:
            return rng.exponential(a)
        return rng.gamma(a, b)

    state = BufferState(capacity=m)
    t_arr = draw(ia)
    t_dep = math.inf
    freshest = -math.inf
    measuring = False
    meas_start = 0.0
    last_epoch = 0.0
    integral = 0.0
    departures = arrivals = drops = stale = 0
    trans = np.zeros((m, m), dtype=np.int64)
    k_counts = np.zeros(m, dtype=np.int64)
    gap_sum = np.zeros(m)
    gap_sq = np.zeros(m)
    gap_quad = np.zeros(m)
    aoi_sum = np.zeros(m)
    aoi_sq = np.zeros(m)
    k_prev = 0
    t_prev_dep = 0.0

    while True:
        if t_dep <= t_arr:
            t = t_dep
            if t > horizon:
                break
            served = state.in_service.arrival
            if measuring:
                integral += (t - last_epoch) * (0.5 * (last_epoch + t) - freshest)
                last_epoch = t
            is_stale = served < freshest
            if served > freshest:
                freshest = served
            state = step(state, Departure(time=t))
            k_after = (1 if state.in_service is not None else 0) + len(state.waiting)
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
                    stale += is_stale
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
                stale += is_stale
                k_prev = k_after
                t_prev_dep = t
            if state.in_service is not None:
                t_dep = t + draw(sv)
            else:
                t_dep = math.inf
        else:
            t = t_arr
            if t > horizon:
                break
            if measuring:
                arrivals += 1
            was_idle = state.in_service is None
            will_drop = (not was_idle) and (m == 1 or len(state.waiting) == m - 1)
            state = step(state, Arrival(time=t, service=math.nan))
            if was_idle or m == 1:
                # entering service immediately consumes a service draw first
                t_dep = t + draw(sv)
            if will_drop and measuring:
                drops += 1
            t_arr = t + draw(ia)

    if measuring:
        integral += (horizon - last_epoch) * (0.5 * (last_epoch + horizon) - freshest)
    return {
        "measuring": measuring,
        "meas_start": meas_start,
        "integral": integral,
        "freshest": freshest,
        "departures": departures,
        "arrivals": arrivals,
        "drops": drops,
        "stale": stale,
        "trans": trans,
        "k_counts": k_counts,
        "gap_sum": gap_sum,
        "gap_sq": gap_sq,
        "gap_quad": gap_quad,
        "aoi_sum": aoi_sum,
        "aoi_sq": aoi_sq,
    }
