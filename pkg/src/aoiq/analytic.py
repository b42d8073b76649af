"""Exact mean age-of-information for buffers of size 1, 2 and 3.

The buffer-3 value is assembled from the embedded occupancy chain observed
just after successful departures.  With G the service transform evaluated at
the arrival rate, the chain on {0, 1, 2} has transition matrix

        [ G   -l*G'   1-G+l*G' ]
        [ G   -l*G'   1-G+l*G' ]
        [ 0    G      1-G      ]

and the stationary mean age follows by Palm inversion over departure cycles:
mean = (E0[age(0) * S1] + E0[S1^2] / 2) / E0[S1], where S1 is the first
departure after time 0 under the departure-conditioned law, and
E0[age(0) * S1] factors through the occupancy state at time 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import ServiceDistribution
from .errors import DegenerateRegimeError, UnsupportedConfigurationError

_ROW_SUM_TOL = 1e-12
_FIXED_POINT_TOL = 1e-12
_SOLVE_TOL = 1e-10
_MIN_DENOM = 1e-300
_MIN_ARRIVAL_MASS = 1e-12  # smallest allowed 1 - G(lam)


@dataclass(frozen=True)
class SystemParams:
    """Arrival rate, buffer size and service law of one system."""

    lam: float
    m: int
    service: ServiceDistribution

    def __post_init__(self):
        if not (self.lam > 0.0):
            raise ValueError(f"arrival rate must be positive, got {self.lam}")
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ValueError(f"buffer size must be an integer >= 1, got {self.m}")


@dataclass(frozen=True)
class AoiEstimate:
    """A mean-AoI value with its provenance.

    ``ci_halfwidth`` is 0 for analytic values and a 95% Student-t halfwidth
    over replication means for simulated ones.
    """

    mean_aoi: float
    method: str  # "analytic" | "simulated"
    ci_halfwidth: float
    params: SystemParams


@dataclass(frozen=True)
class ChainModel:
    """Transition matrix and stationary law of the departure-occupancy chain."""

    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        P, pi = self.P, self.pi
        if P.shape != (3, 3) or pi.shape != (3,):
            raise ValueError("chain model is 3x3 only")
        if np.any(P < 0.0) or np.any(P > 1.0):
            raise ValueError("transition entries must lie in [0, 1]")
        if P[2, 0] != 0.0:
            raise ValueError("transition 2 -> 0 must be structurally zero")
        if not np.array_equal(P[0], P[1]):
            raise ValueError("rows 0 and 1 must be identical")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise ValueError("rows must sum to 1")
        if abs(pi.sum() - 1.0) > _ROW_SUM_TOL:
            raise ValueError("stationary vector must sum to 1")
        if np.max(np.abs(pi @ P - pi)) > _FIXED_POINT_TOL:
            raise ValueError("pi is not a fixed point of P")


class Step1Table(NamedTuple):
    """Elementary conditional expectations over one service interval.

    ``tau`` denotes exponential(lam) arrival gaps, ``sigma`` the service time.
    """

    e_sigma_tau_gt: float    # E(sigma | tau > sigma)
    e_sigma_tau_le: float    # E(sigma | tau <= sigma)
    e_sigma_two_le: float    # E(sigma | tau1 + tau2 <= sigma)
    e_sigma_between: float   # E(sigma | tau1 <= sigma < tau1 + tau2)
    e_tau_two_le: float      # E(tau1 | tau1 + tau2 <= sigma)
    e_tau_between: float     # E(tau1 | tau1 <= sigma < tau1 + tau2)
    q: float                 # P(tau1 + tau2 > sigma | tau1 <= sigma)


class CycleMoments(NamedTuple):
    """Departure-cycle moments: E0[S1 | K0] per state, E0[S1], E0[S1^2]."""

    e0_s1_given_k0: np.ndarray
    e0_s1: float
    e0_s1_sq: float


def _require_m(params: SystemParams, m: int):
    if params.m != m:
        raise UnsupportedConfigurationError(
            f"this closed form is for buffer size {m}, got m={params.m}"
        )


def _transforms(params: SystemParams) -> tuple[float, float, float]:
    lam = params.lam
    return (
        params.service.laplace(lam),
        params.service.laplace_d1(lam),
        params.service.laplace_d2(lam),
    )


def transition_matrix(params: SystemParams) -> np.ndarray:
    """Transition matrix of the occupancy chain at departures, buffer size 3.

    Row entries are the probabilities of 0, exactly 1, and >= 2 arrivals over
    one service interval; from state 2 one waiting message is always carried
    over, which forbids the 2 -> 0 transition.
    """
    _require_m(params, 3)
    g, g1, _ = _transforms(params)
    lam = params.lam
    row = (g, -lam * g1, 1.0 - g + lam * g1)
    return np.array([row, row, (0.0, g, 1.0 - g)])


def stationary_distribution(params: SystemParams) -> np.ndarray:
    """Stationary law of the occupancy chain from its closed form.

    Cross-checks the closed form both as a fixed point of the transition
    matrix and against a direct linear solve; any disagreement is a hard
    failure rather than a warning, since it would poison everything above.
    """
    _require_m(params, 3)
    g, g1, _ = _transforms(params)
    lam = params.lam
    denom = 1.0 + lam * g1
    if denom <= 0.0:
        raise DegenerateRegimeError(
            f"1 + lam*G'(lam) = {denom} is not positive; inputs are out of range"
        )
    pi = np.array([g * g, g * (1.0 - g), 1.0 - g + lam * g1]) / denom
    P = transition_matrix(params)
    if np.max(np.abs(pi @ P - pi)) > _FIXED_POINT_TOL:
        raise RuntimeError("closed-form stationary vector does not satisfy pi P = pi")
    # independent route: solve (P^T - I) pi = 0 with the normalization row
    A = P.T - np.eye(3)
    A[2, :] = 1.0
    pi_solve = np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))
    if np.max(np.abs(pi_solve - pi)) > _SOLVE_TOL:
        raise RuntimeError(
            "closed-form stationary vector disagrees with the linear solve: "
            f"{pi} vs {pi_solve}"
        )
    return pi


def chain_model(params: SystemParams) -> ChainModel:
    return ChainModel(P=transition_matrix(params), pi=stationary_distribution(params))


def step1_table(params: SystemParams) -> Step1Table:
    """Closed forms for the conditional means over one service interval."""
    g, g1, g2 = _transforms(params)
    lam = params.lam
    mu_inv = params.service.mean()
    if 1.0 - g < _MIN_ARRIVAL_MASS:
        raise DegenerateRegimeError(
            f"P(any arrival during a service) = {1.0 - g:.3e} is too small at lam={lam}"
        )
    for name, d in (("G", g), ("-G'", -g1), ("1-G+lam*G'", 1.0 - g + lam * g1)):
        if d < _MIN_DENOM:
            raise DegenerateRegimeError(f"denominator {name} = {d:.3e} underflows at lam={lam}")
    return Step1Table(
        e_sigma_tau_gt=-g1 / g,
        e_sigma_tau_le=(mu_inv + g1) / (1.0 - g),
        e_sigma_two_le=(mu_inv + g1 - lam * g2) / (1.0 - g + lam * g1),
        e_sigma_between=g2 / (-g1),
        e_tau_two_le=(1.0 / lam - g / lam + g1 - 0.5 * lam * g2) / (1.0 - g + lam * g1),
        e_tau_between=g2 / (-2.0 * g1),
        q=-lam * g1 / (1.0 - g),
    )


def cycle_moments(params: SystemParams, pi: np.ndarray) -> CycleMoments:
    """First two moments of the departure cycle S1.

    Under the departure-conditioned law, S1 equals one service time plus an
    idle exponential gap iff the system emptied (state 0).
    """
    _require_m(params, 3)
    lam = params.lam
    mu_inv = params.service.mean()
    given_k0 = np.array([1.0 / lam + mu_inv, mu_inv, mu_inv])
    e0_s1 = float(pi[0] / lam + mu_inv)
    e0_s1_sq = float(params.service.second_moment() + pi[0] * 2.0 * (mu_inv + 1.0 / lam) / lam)
    return CycleMoments(e0_s1_given_k0=given_k0, e0_s1=e0_s1, e0_s1_sq=e0_s1_sq)


def conditional_aoi_table(params: SystemParams) -> np.ndarray:
    """Mean age at a departure given the three last occupancy states.

    Entry (i, j, l) is the expected age just after the departure at time 0,
    given occupancies i two departures back, j one back, and l now.  Cells
    that no history can reach, (i, 2, 0) and (2, 0, l), are NaN so that any
    accidental read poisons the result instead of passing silently.
    """
    _require_m(params, 3)
    s1 = step1_table(params)
    lam = params.lam
    g, g1, _ = _transforms(params)

    # age contributed by the final service interval, by current occupancy l
    tail3 = (s1.e_sigma_tau_gt, s1.e_sigma_between, s1.e_sigma_two_le)

    table = np.full((3, 3, 3), np.nan)

    # j = 0: the system emptied, so the age is just the service time of the
    # next message to arrive, whatever happened before.
    for i in range(3):
        for l in range(3):
            table[i, 0, l] = tail3[l]
    table[2, 0, :] = np.nan  # unreachable: leaving state 2 keeps one message

    # j = 1, i in {0, 1}: the departing message is the lone arrival of its
    # predecessor's service interval; its residual wait is symmetric to the
    # first-arrival time under reversal of the arrival process.
    for i in (0, 1):
        for l in range(3):
            table[i, 1, l] = s1.e_tau_between + tail3[l]

    # j = 1, i = 2: the departing message waited through a run of
    # single-arrival service intervals and is staler than messages served
    # before it.  Given two cells occupied two departures back, the previous
    # interval held exactly one arrival with probability -lam*G' (not q:
    # reaching that state from 0 or 1 forces at least two arrivals there).
    p_single = -lam * g1
    wait = p_single * s1.e_tau_between + (1.0 - p_single) * s1.e_tau_two_le
    for l in range(3):
        table[2, 1, l] = wait + s1.e_sigma_tau_gt + tail3[l]

    # j = 2: at least two (i in {0,1}) or at least one (i = 2) arrivals in
    # the previous interval; the freshest of them departs now.  The system
    # cannot empty from state 2, so l = 0 stays unused.
    tail2 = {1: s1.e_sigma_tau_gt, 2: s1.e_sigma_tau_le}
    e_tau_le = 1.0 / lam + g1 / (1.0 - g)  # E(tau | tau <= sigma)
    for i in (0, 1):
        for l in (1, 2):
            table[i, 2, l] = s1.e_tau_two_le + tail2[l]
    for l in (1, 2):
        table[2, 2, l] = e_tau_le + tail2[l]

    return table


def aoi_given_k0(params: SystemParams) -> np.ndarray:
    """E0[age(0) | K0 = l] for l = 0, 1, 2.

    Averages the conditional table over the two-step history drawn from the
    time-reversed chain: weight(i, j | l) = pi_i P[i,j] P[j,l] / pi_l.  Unused
    table cells only ever meet zero weights, which are skipped outright so a
    marker NaN cannot leak through multiplication by zero.
    """
    _require_m(params, 3)
    model = chain_model(params)
    P, pi = model.P, model.pi
    if np.any(pi <= 0.0):
        raise DegenerateRegimeError(f"stationary law has a vanishing component: {pi}")
    table = conditional_aoi_table(params)
    out = np.empty(3)
    for l in range(3):
        acc = 0.0
        wsum = 0.0
        for i in range(3):
            for j in range(3):
                w = pi[i] * P[i, j] * P[j, l] / pi[l]
                if w == 0.0:
                    continue
                acc += table[i, j, l] * w
                wsum += w
        if abs(wsum - 1.0) > 1e-10:
            raise RuntimeError(f"backward weights for state {l} sum to {wsum}, not 1")
        out[l] = acc
    if not np.all(np.isfinite(out)):
        raise RuntimeError(f"conditional age picked up an unused table cell: {out}")
    return out


def mean_aoi_m3(params: SystemParams) -> AoiEstimate:
    """Stationary mean age for buffer size 3 by Palm inversion.

    E0[age(0) * S1] factors as sum_l E0[age|K0=l] E0[S1|K0=l] pi_l because age
    at a departure and the next cycle length are conditionally independent
    given the occupancy state.
    """
    _require_m(params, 3)
    pi = stationary_distribution(params)
    age_k0 = aoi_given_k0(params)
    cm = cycle_moments(params, pi)
    e0_age_s1 = float(np.sum(age_k0 * cm.e0_s1_given_k0 * pi))
    mean = float((e0_age_s1 + 0.5 * cm.e0_s1_sq) / cm.e0_s1)
    return AoiEstimate(mean_aoi=mean, method="analytic", ci_halfwidth=0.0, params=params)


def mean_aoi_m1(params: SystemParams) -> AoiEstimate:
    """Single-cell buffer: mean age is 1 / (lam * G(lam))."""
    _require_m(params, 1)
    value = 1.0 / (params.lam * params.service.laplace(params.lam))
    return AoiEstimate(mean_aoi=value, method="analytic", ci_halfwidth=0.0, params=params)


def mean_aoi_m2(params: SystemParams) -> AoiEstimate:
    """Two-cell buffer closed form in G, G' and the second service moment."""
    _require_m(params, 2)
    g, g1, _ = _transforms(params)
    lam = params.lam
    mu = 1.0 / params.service.mean()
    sigma2 = params.service.second_moment()  # = G''(0)
    value = (
        1.0 / mu
        + (1.0 - g + lam * g1) / lam
        + (g - lam * g1 + 0.5 * lam**2 * sigma2) / (lam * (lam / mu + g))
    )
    return AoiEstimate(mean_aoi=value, method="analytic", ci_halfwidth=0.0, params=params)


def mean_aoi(params: SystemParams) -> AoiEstimate:
    """Dispatch to the closed form for m in {1, 2, 3}."""
    if params.m == 1:
        return mean_aoi_m1(params)
    if params.m == 2:
        return mean_aoi_m2(params)
    if params.m == 3:
        return mean_aoi_m3(params)
    raise UnsupportedConfigurationError(
        f"no closed form for buffer size {params.m}; use the simulator"
    )
