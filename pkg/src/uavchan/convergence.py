"""Convergence analytics for the distributed sample-exchange learning.

The coverage probability after T rounds follows an absorbing hazard chain:
round i >= l_max succeeds with probability eta^l_max / (1 + N eta)^(i-1).
Both the literal two-term expression and the equivalent complement-product
form are provided, plus the confidence iteration count, wall-clock
convergence time, and an independent Monte Carlo oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import RegimeError

_HAZARD_TOL = 1e-12
_TAIL_EPS = 1e-18


@dataclass(frozen=True)
class ConvergenceParams:
    share_ratio: float     # eta > 0
    in_degree: int         # homogeneous N >= 1
    l_max: int             # >= 1
    local_train_time_s: float = 0.0   # t_c
    deadline_s: float = 0.0           # t_tau
    confidence: float = 0.9           # p_tau in (0, 1)

    def __post_init__(self):
        if not self.share_ratio > 0:
            raise RegimeError("share ratio must be positive")
        if self.in_degree < 1 or self.l_max < 1:
            raise RegimeError("in-degree and l_max must be >= 1")
        if not (0 < self.confidence < 1):
            raise RegimeError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class Unattainable:
    """Confidence level above the infinite-horizon coverage supremum."""

    p_sup: float


def hazard(i, params):
    """Per-round success probability eta^l_max / (1 + N eta)^(i-1)."""
    if i < params.l_max:
        raise RegimeError(f"hazard undefined for round {i} < l_max")
    value = (params.share_ratio ** params.l_max
             / (1.0 + params.in_degree * params.share_ratio) ** (i - 1))
    if value > 1.0 + _HAZARD_TOL:
        raise RegimeError(
            f"hazard {value:.6g} > 1 at round {i}: parameters outside the "
            "valid regime")
    return min(value, 1.0)


def coverage_probability(T, params):
    """P(converged by round T), complement-product form 1 - prod(1 - h_i)."""
    if T < 1:
        raise RegimeError("round count must be >= 1")
    if T < params.l_max:
        return 0.0
    survival = 1.0
    for i in range(params.l_max, T + 1):
        survival *= 1.0 - hazard(i, params)
    return 1.0 - survival


def coverage_probability_literal(T, params):
    """The literal two-term expression: first-success term at l_max plus the
    sum over later rounds of (survive so far) * hazard."""
    if T < 1:
        raise RegimeError("round count must be >= 1")
    total = 0.0
    if T >= params.l_max:
        total += hazard(params.l_max, params)
    if T > params.l_max:
        for i in range(params.l_max + 1, T + 1):
            surv = 1.0
            for j in range(params.l_max, i):
                surv *= 1.0 - hazard(j, params)
            total += surv * hazard(i, params)
    return total


def coverage_supremum(params):
    """Limit of the coverage probability as T -> infinity."""
    survival = 1.0
    i = params.l_max
    while True:
        h = hazard(i, params)
        survival *= 1.0 - h
        if h < _TAIL_EPS or survival == 0.0:
            return 1.0 - survival
        i += 1


def confidence_iteration(params) -> Union[int, Unattainable]:
    """Smallest T with coverage(T) >= confidence, else Unattainable(p_sup).

    Hazards decay geometrically with ratio 1/(1 + N eta), so the remaining
    achievable coverage from round i is bounded by
    survival * h_i / (1 - ratio); once that cannot reach the confidence
    level the supremum is reported instead.
    """
    p_tau = params.confidence
    ratio = 1.0 / (1.0 + params.in_degree * params.share_ratio)
    survival = 1.0
    i = params.l_max
    while True:
        h = hazard(i, params)
        survival *= 1.0 - h
        if 1.0 - survival >= p_tau:
            return i
        h_next = hazard(i + 1, params)
        remaining = survival * h_next / (1.0 - ratio)
        if (1.0 - survival) + remaining < p_tau or h_next < _TAIL_EPS:
            return Unattainable(coverage_supremum(params))
        i += 1


def convergence_time(params):
    """Wall-clock time (t_tau + t_c) * T_G, seconds; Unattainable propagated."""
    t_g = confidence_iteration(params)
    if isinstance(t_g, Unattainable):
        return t_g
    return (params.deadline_s + params.local_train_time_s) * t_g


def ring_params(n_uavs, share_ratio, local_train_time_s=0.0, deadline_s=0.0,
                confidence=0.9):
    """Parameters of a homogeneous I-node ring: N = 1, l_max = I - 1."""
    if n_uavs < 2:
        raise RegimeError("a ring needs at least two UAVs")
    return ConvergenceParams(share_ratio=share_ratio, in_degree=1,
                             l_max=n_uavs - 1,
                             local_train_time_s=local_train_time_s,
                             deadline_s=deadline_s, confidence=confidence)


def mc_coverage_oracle(params, T, trials, seed):
    """Monte Carlo estimate of the coverage probability by round T.

    Simulates the absorbing chain directly (independent of the formula
    path): each trial succeeds at round i >= l_max with probability
    hazard(i). Deterministic given the seed.
    """
    if trials < 10_000:
        raise RegimeError("need at least 10^4 trials")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC0DA]))
    converged = np.zeros(trials, dtype=bool)
    for i in range(params.l_max, T + 1):
        h = hazard(i, params)
        draws = rng.random(trials)
        converged |= ~converged & (draws < h)
    return float(converged.mean())


def export_report(params, t_max, trials, seed, path):
    """CSV: per-round formula and Monte Carlo coverage, plus a summary row."""
    t_g = confidence_iteration(params)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "p_formula", "p_mc"])
        for T in range(1, t_max + 1):
            p_f = coverage_probability(T, params)
            p_mc = mc_coverage_oracle(params, T, trials, seed)
            writer.writerow([T, repr(p_f), repr(p_mc)])
        if isinstance(t_g, Unattainable):
            writer.writerow(["summary", f"unattainable(p_sup={t_g.p_sup!r})", ""])
        else:
            writer.writerow(["summary", f"T_G={t_g}",
                             f"C_s={convergence_time(params)!r}"])
    return t_g
