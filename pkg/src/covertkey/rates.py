"""Closed-form covert throughput formulas.

Throughputs are in bits per ``sqrt(n * tau)`` where ``tau`` is the covertness
budget, never per channel use.  ``beta`` is the fraction of channel uses on
which the warden sets the state to 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .channel import StateDmc, validate_hypotheses
from .errors import DegenerateChannelError, DomainError, PreconditionError
from .probcore import chi2, kl

PAIRINGS = ("derived", "as-stated")
LN2 = math.log(2.0)
# chi-squared values this small come from rounding in marginalization, not signal
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class RatePoint:
    beta: float
    achievable: float
    converse: float
    pairing: str = "derived"


def _check_beta(beta):
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta={beta} outside [0, 1]")


@lru_cache(maxsize=256)
def i_s(ch: StateDmc, s: int) -> float:
    """Secrecy penalty for state ``s``.

    D(Q_1||Q_0) + D(P_1||P_0) - D((PQ)_1||(PQ)_0) + D((PQ)_1||P_1 x Q_1),
    all at state ``s``.  Zero when Bob's and Willie's outputs are
    conditionally independent given the input.  Cached per channel object,
    which is immutable.
    """
    pq1, pq0 = ch.joint_pq(1, s), ch.joint_pq(0, s)
    return (
        kl(ch.marginal_q(1, s), ch.marginal_q(0, s))
        + kl(ch.marginal_p(1, s), ch.marginal_p(0, s))
        - kl(pq1, pq0)
        + kl(pq1, pq1.marginal_product())
    )


def chi2_mix(ch: StateDmc, beta: float) -> float:
    """(1 - beta) chi2(Q_1^0||Q_0^0) + beta chi2(Q_1^1||Q_0^1)."""
    return (1 - beta) * chi2(ch.marginal_q(1, 0), ch.marginal_q(0, 0)) + beta * chi2(
        ch.marginal_q(1, 1), ch.marginal_q(0, 1)
    )


def active_rate(ch: StateDmc, beta: float) -> float:
    """Achievable covert key throughput against a warden of state weight ``beta``."""
    _check_beta(beta)
    p0 = ch.marginal_p(0, 0)
    p1_mix = ch.marginal_p(1, 0).mix(ch.marginal_p(1, 1), beta)
    penalty = (1 - beta) * i_s(ch, 0) + beta * i_s(ch, 1)
    denom = chi2_mix(ch, beta)
    if denom <= DEGENERATE_TOL:
        raise DegenerateChannelError("Willie's channel does not depend on the input")
    return math.sqrt(2.0) * (kl(p1_mix, p0) - penalty) / math.sqrt(denom)


def converse_rate(ch: StateDmc, beta: float, pairing: str = "derived") -> float:
    """Upper bound on the throughput for a warden of state weight ``beta``.

    ``pairing="derived"`` pairs each state's information term with the
    chi-squared divergence of the same state, which is what maximizing the
    per-state input weights actually produces.  ``pairing="as-stated"``
    swaps the two chi-squared terms, reproducing the printed statement.
    """
    _check_beta(beta)
    if pairing not in PAIRINGS:
        raise ValueError(f"pairing must be one of {PAIRINGS}")
    p0 = ch.marginal_p(0, 0)
    gain = [kl(ch.marginal_p(1, s), p0) - i_s(ch, s) for s in (0, 1)]
    c = [chi2(ch.marginal_q(1, s), ch.marginal_q(0, s)) for s in (0, 1)]
    if pairing == "as-stated":
        c = c[::-1]
    weights = (1 - beta, beta)
    total = 0.0
    for s in (0, 1):
        if weights[s] == 0:
            continue
        if c[s] <= DEGENERATE_TOL:
            raise DegenerateChannelError(f"chi2(Q_1||Q_0) vanishes for state {s}")
        total += weights[s] * gain[s] ** 2 / c[s]
    return math.sqrt(2.0) * math.sqrt(total)


def _passive_terms(ch: StateDmc):
    report = validate_hypotheses(ch, 1e-9)
    if not report.passive_ok:
        raise PreconditionError("(PQ)_0 must equal P_0 x Q_0 for the passive bounds")
    c = chi2(ch.marginal_q(1, 0), ch.marginal_q(0, 0))
    if c <= DEGENERATE_TOL:
        raise DegenerateChannelError("chi2(Q_1||Q_0) = 0")
    scale = math.sqrt(2.0 / c)
    pq1, pq0 = ch.joint_pq(1, 0), ch.joint_pq(0, 0)
    return report, scale, pq1, pq0


def passive_bounds(ch: StateDmc) -> tuple:
    """(lower, upper) bounds on the covert secret-key capacity, state fixed to 0."""
    _, scale, pq1, pq0 = _passive_terms(ch)
    upper = scale * (kl(pq1, pq0) - kl(ch.marginal_q(1, 0), ch.marginal_q(0, 0)))
    lower = upper - scale * kl(pq1, pq1.marginal_product())
    return lower, upper


def passive_capacity_independent(ch: StateDmc) -> float:
    """Exact capacity sqrt(2/chi2(Q_1||Q_0)) D(P_1||P_0) when both inputs decouple the outputs."""
    report, scale, _, _ = _passive_terms(ch)
    if not report.one_input_independent[0]:
        raise PreconditionError("(PQ)_1 must equal P_1 x Q_1")
    return scale * kl(ch.marginal_p(1, 0), ch.marginal_p(0, 0))


def rate_curve(ch: StateDmc, grid: Iterable[float], pairing: str = "derived") -> list:
    return [
        RatePoint(float(b), active_rate(ch, b), converse_rate(ch, b, pairing), pairing)
        for b in grid
    ]


def beta_grid(points: int) -> list:
    if points < 1:
        raise ValueError("grid needs at least one point")
    if points == 1:
        return [0.0]
    return [i / (points - 1) for i in range(points)]


def write_rate_csv(points: Iterable[RatePoint], fh) -> None:
    """CSV with header ``beta,achievable,converse,pairing`` and 12 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["beta", "achievable", "converse", "pairing"])
    for p in points:
        w.writerow([f"{p.beta:.12g}", f"{p.achievable:.12g}", f"{p.converse:.12g}", p.pairing])


def covertness_quadratic_check(ch: StateDmc, alpha: float, beta: float) -> tuple:
    """Per-symbol covertness divergence versus its second-order approximation.

    Returns ``(exact, quadratic)`` in bits per channel use.  ``exact`` is the
    state-averaged D(alpha Q_1^s + (1 - alpha) Q_0^s || Q_0^s) and
    ``quadratic`` is alpha^2 chi2(beta) / (2 ln 2), the natural-log expansion
    converted to bits.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    _check_beta(beta)
    exact = 0.0
    for s, w in ((0, 1 - beta), (1, beta)):
        if w == 0:
            continue
        q0 = ch.marginal_q(0, s)
        exact += w * kl(q0.mix(ch.marginal_q(1, s), alpha), q0)
    quadratic = 0.5 * alpha**2 * chi2_mix(ch, beta) / LN2
    return exact, quadratic
