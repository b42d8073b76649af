"""Discrete-event simulation of the pushout buffer for any size m >= 1.

Semantics: a single non-preemptive server holds cell 1; cells 2..m store
waiting messages in decreasing arrival order; an arrival to a full buffer
displaces the oldest waiting message.  The single-cell system (m = 1) is the
degenerate case where the arrival displaces the message in service itself,
which is what the closed form 1/(lam*G(lam)) describes.

Age accounting uses the freshest-served convention: age(t) = t minus the
largest arrival time among messages that completed service by t.  A departure
therefore only moves the age down when the departing message is fresher than
everything served before it; departures of staler messages leave the age path
untouched (and are counted separately).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as _sstats

from . import _kernel
from .analytic import AoiEstimate, SystemParams
from .distributions import ServiceDistribution, exponential
from .errors import NoDataError, ProtocolViolation

_MIN_CHAIN_DEPARTURES = 10_000


# ---------------------------------------------------------------------------
# single-step buffer transition (reference semantics, also used by tests)

@dataclass(frozen=True)
class Message:
    arrival: float
    service: float


@dataclass(frozen=True)
class Arrival:
    time: float
    service: float


@dataclass(frozen=True)
class Departure:
    time: float


@dataclass(frozen=True)
class BufferState:
    """Snapshot of the buffer: the in-service message plus the waiting cells.

    ``waiting`` is ordered newest-first and never exceeds capacity - 1.
    """

    capacity: int
    in_service: Message | None = None
    waiting: tuple[Message, ...] = ()


def step(state: BufferState, event: Arrival | Departure) -> BufferState:
    """Apply one arrival or departure to the buffer, non-preemptively.

    Arrivals into a full buffer push out the oldest waiting message; with a
    single cell they displace the in-service message instead.  A departure
    promotes the most recently arrived waiting message.
    """
    m = state.capacity
    if isinstance(event, Arrival):
        msg = Message(arrival=event.time, service=event.service)
        if state.in_service is None:
            return replace(state, in_service=msg)
        if m == 1:
            return replace(state, in_service=msg)
        waiting = (msg,) + state.waiting
        if len(waiting) > m - 1:
            waiting = waiting[: m - 1]
        return replace(state, waiting=waiting)
    if state.in_service is None:
        raise ProtocolViolation("departure applied to an empty server")
    if state.waiting:
        return replace(state, in_service=state.waiting[0], waiting=state.waiting[1:])
    return replace(state, in_service=None)


# ---------------------------------------------------------------------------
# whole-run simulation

@dataclass(frozen=True)
class SimConfig:
    """One simulation experiment: system, horizon, seeding, replications.

    ``interarrival`` defaults to exponential(lam), i.e. Poisson arrivals; any
    other law makes this a renewal-arrival run, which has no analytic
    counterpart here.  Replication r uses the child stream
    ``SeedSequence(seed).spawn(replications)[r]``, so each replication's
    result depends only on (seed, r), not on execution order.
    """

    params: SystemParams
    horizon: float
    warmup: float | None = None
    seed: int = 3
    replications: int = 8
    interarrival: ServiceDistribution | None = None

    def __post_init__(self):
        if not (self.horizon > 0.0):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.warmup is not None and not (0.0 <= self.warmup < self.horizon):
            raise ValueError(f"warmup must lie in [0, horizon), got {self.warmup}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")

    def resolved_warmup(self) -> float:
        return 0.05 * self.horizon if self.warmup is None else self.warmup

    def resolved_interarrival(self) -> ServiceDistribution:
        return self.interarrival if self.interarrival is not None else exponential(self.params.lam)

    def is_poisson(self) -> bool:
        ia = self.resolved_interarrival()
        return ia.kind == "exp" and ia.a == self.params.lam


@dataclass
class CycleStats:
    """Per-state sufficient statistics of the departure process.

    Indexed by the occupancy K observed just after departures.  ``transitions``
    counts K -> K' steps; the gap moments are keyed by the state at the cycle
    start, the age moments by the state at the cycle end.
    """

    transitions: np.ndarray   # (m, m) int64
    k_counts: np.ndarray      # (m,)   int64
    gap_sum: np.ndarray       # (m,)
    gap_sq_sum: np.ndarray    # (m,)
    gap_quad_sum: np.ndarray  # (m,)
    aoi_sum: np.ndarray       # (m,)
    aoi_sq_sum: np.ndarray    # (m,)


@dataclass
class SamplePath:
    """Artifacts of one replication over its measurement window."""

    rep: int
    integrated_aoi: float
    measured_time: float
    departures: int
    arrivals: int
    drops: int
    stale_departures: int
    freshest_served_arrival: float
    meas_start: float
    cycle_stats: CycleStats

    @property
    def mean_aoi(self) -> float:
        return self.integrated_aoi / self.measured_time

    @property
    def drop_fraction(self) -> float:
        return self.drops / self.arrivals if self.arrivals else 0.0


@dataclass
class SimResult:
    """All replications of one experiment plus the pooled estimate."""

    config: SimConfig
    paths: list[SamplePath]
    estimate: AoiEstimate
    rep_means: np.ndarray

    @property
    def se(self) -> float:
        """Standard error of the pooled mean over replications."""
        r = len(self.rep_means)
        if r < 2:
            return float("nan")
        return float(np.std(self.rep_means, ddof=1) / math.sqrt(r))

    @property
    def departures(self) -> int:
        return sum(p.departures for p in self.paths)

    @property
    def drop_fraction(self) -> float:
        arrivals = sum(p.arrivals for p in self.paths)
        drops = sum(p.drops for p in self.paths)
        return drops / arrivals if arrivals else 0.0


def replication_rng(seed: int, rep: int, replications: int) -> np.random.Generator:
    """The documented seed-splitting rule: one child stream per replication."""
    children = np.random.SeedSequence(seed).spawn(replications)
    return np.random.default_rng(children[rep])


def _run_replication(config: SimConfig, rep: int, log_cap: int = 0):
    params = config.params
    m = params.m
    rng = replication_rng(config.seed, rep, config.replications)
    ia_kind, ia_a, ia_b = config.resolved_interarrival().kernel_params()
    sv_kind, sv_a, sv_b = params.service.kernel_params()

    trans = np.zeros((m, m), dtype=np.int64)
    k_counts = np.zeros(m, dtype=np.int64)
    gap_sum = np.zeros(m)
    gap_sq = np.zeros(m)
    gap_quad = np.zeros(m)
    aoi_sum = np.zeros(m)
    aoi_sq = np.zeros(m)
    log_buf = np.zeros((max(log_cap, 1), 4))

    (status, meas_start, integral, freshest, departures, arrivals, drops, stale,
     log_n) = _kernel.sim_core(
        rng, m, config.horizon, config.resolved_warmup(),
        ia_kind, ia_a, ia_b, sv_kind, sv_a, sv_b,
        trans, k_counts, gap_sum, gap_sq, gap_quad, aoi_sum, aoi_sq,
        log_buf, log_cap,
    )
    if status != _kernel.STATUS_OK:
        raise NoDataError(
            f"replication {rep}: no departure after warmup within the horizon "
            f"(horizon={config.horizon:g}, warmup={config.resolved_warmup():g})"
        )
    path = SamplePath(
        rep=rep,
        integrated_aoi=integral,
        measured_time=config.horizon - meas_start,
        departures=departures,
        arrivals=arrivals,
        drops=drops,
        stale_departures=stale,
        freshest_served_arrival=freshest,
        meas_start=meas_start,
        cycle_stats=CycleStats(trans, k_counts, gap_sum, gap_sq, gap_quad,
                               aoi_sum, aoi_sq),
    )
    return path, log_buf[:log_n]


def run(config: SimConfig, event_log_path: str | None = None) -> SimResult:
    """Run all replications and pool them into one estimate.

    The pooled mean averages the replication means; the confidence halfwidth
    is Student-t at 95% over replications (0 when there is only one).  With
    ``event_log_path`` set, one JSON record per departure (time, served
    arrival time, occupancy after, age after) is written for debugging.
    """
    log_cap = 0
    if event_log_path is not None:
        ia_mean = config.resolved_interarrival().mean()
        log_cap = int(1.2 * config.horizon / ia_mean) + 10_000

    paths = []
    log_fh = open(event_log_path, "w") if event_log_path is not None else None
    try:
        for rep in range(config.replications):
            path, log_rows = _run_replication(config, rep, log_cap)
            paths.append(path)
            if log_fh is not None:
                for row in log_rows:
                    log_fh.write(json.dumps({
                        "rep": rep,
                        "time": row[_kernel.LOG_TIME],
                        "served_arrival": row[_kernel.LOG_ARRIVAL],
                        "k_after": int(row[_kernel.LOG_K]),
                        "aoi": row[_kernel.LOG_AOI],
                    }) + "\n")
    finally:
        if log_fh is not None:
            log_fh.close()

    rep_means = np.array([p.mean_aoi for p in paths])
    r = len(rep_means)
    if r >= 2:
        half = float(_sstats.t.ppf(0.975, r - 1) * np.std(rep_means, ddof=1) / math.sqrt(r))
    else:
        half = 0.0
    estimate = AoiEstimate(
        mean_aoi=float(np.mean(rep_means)),
        method="simulated",
        ci_halfwidth=half,
        params=config.params,
    )
    return SimResult(config=config, paths=paths, estimate=estimate, rep_means=rep_means)


def _pooled_cycle_stats(result: SimResult) -> CycleStats:
    m = result.config.params.m
    pooled = CycleStats(
        transitions=np.zeros((m, m), dtype=np.int64),
        k_counts=np.zeros(m, dtype=np.int64),
        gap_sum=np.zeros(m),
        gap_sq_sum=np.zeros(m),
        gap_quad_sum=np.zeros(m),
        aoi_sum=np.zeros(m),
        aoi_sq_sum=np.zeros(m),
    )
    for p in result.paths:
        cs = p.cycle_stats
        pooled.transitions += cs.transitions
        pooled.k_counts += cs.k_counts
        pooled.gap_sum += cs.gap_sum
        pooled.gap_sq_sum += cs.gap_sq_sum
        pooled.gap_quad_sum += cs.gap_quad_sum
        pooled.aoi_sum += cs.aoi_sum
        pooled.aoi_sq_sum += cs.aoi_sq_sum
    return pooled


def empirical_chain(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Empirical transition matrix and occupancy frequencies at departures.

    Requires m = 3 so the output is comparable with the analytic chain.
    """
    if config.params.m != 3:
        raise ValueError("the embedded chain comparison is defined for m = 3")
    pooled = _pooled_cycle_stats(run(config))
    n_dep = int(pooled.k_counts.sum())
    if n_dep < _MIN_CHAIN_DEPARTURES:
        raise NoDataError(
            f"only {n_dep} departures; need at least {_MIN_CHAIN_DEPARTURES} "
            f"for a usable chain estimate"
        )
    row_totals = pooled.transitions.sum(axis=1, keepdims=True)
    if np.any(row_totals == 0):
        raise NoDataError(f"some chain states were never visited: {row_totals.ravel()}")
    p_hat = pooled.transitions / row_totals
    pi_hat = pooled.k_counts / n_dep
    return p_hat, pi_hat


@dataclass(frozen=True)
class CycleDiagnostics:
    """Empirical inter-departure moments, overall and by starting occupancy."""

    n: int
    mean_gap: float
    mean_gap_se: float
    gap_second_moment: float
    gap_second_moment_se: float
    mean_gap_by_k: np.ndarray
    mean_gap_by_k_se: np.ndarray
    counts_by_k: np.ndarray


def cycle_diagnostics(config: SimConfig) -> CycleDiagnostics:
    """Inter-departure gap moments for direct comparison with the cycle formulas."""
    if config.params.m != 3:
        raise ValueError("cycle diagnostics compare against the m = 3 formulas")
    pooled = _pooled_cycle_stats(run(config))
    counts = pooled.transitions.sum(axis=1)
    n = int(counts.sum())
    if n < _MIN_CHAIN_DEPARTURES:
        raise NoDataError(f"only {n} measured cycles; need {_MIN_CHAIN_DEPARTURES}")
    total = pooled.gap_sum.sum()
    total_sq = pooled.gap_sq_sum.sum()
    total_quad = pooled.gap_quad_sum.sum()
    mean_gap = total / n
    second = total_sq / n
    var_gap = max(second - mean_gap**2, 0.0)
    var_sq = max(total_quad / n - second**2, 0.0)
    by_k = np.where(counts > 0, pooled.gap_sum / np.maximum(counts, 1), np.nan)
    var_by_k = np.where(
        counts > 0,
        np.maximum(pooled.gap_sq_sum / np.maximum(counts, 1) - by_k**2, 0.0),
        np.nan,
    )
    return CycleDiagnostics(
        n=n,
        mean_gap=mean_gap,
        mean_gap_se=math.sqrt(var_gap / n),
        gap_second_moment=second,
        gap_second_moment_se=math.sqrt(var_sq / n),
        mean_gap_by_k=by_k,
        mean_gap_by_k_se=np.sqrt(var_by_k / np.maximum(counts, 1)),
        counts_by_k=counts,
    )
