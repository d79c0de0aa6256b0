"""State-weight estimation by secret probing, halting, and code-size selection.

Alice and Bob secretly agree on probe positions; Alice sends ``1`` there and
Bob turns his outputs at those positions into an estimate of the fraction of
uses on which the warden chose state 1.  That estimate drives the choice of
the codebook sizes ``(M1, M2, M3)``.  All logarithms are base 2 and every
``M`` is a power of two, so selections are stored by their integer logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import StateDmc, validate_hypotheses
from .concentration import BoundCheck, _bernoulli_sigma
from .errors import (
    DegenerateChannelError,
    DomainError,
    InfeasibleSelectionError,
    PreconditionError,
)
from .probcore import JointPmf, mutual_information
from .rates import i_s


@dataclass(frozen=True)
class ProbeConstants:
    """Probe symbol and its probability under input 1 in each state."""

    y0: int
    mu0: float
    mu1: float


@lru_cache(maxsize=256)
def probe_constants(ch: StateDmc) -> ProbeConstants:
    """Pick the probe symbol where Bob's input-1 law differs most between states.

    ``mu_s`` is the probability of ``y0`` when ``1`` is sent in state ``s``,
    which makes each normalized probe an unbiased estimate of the state.
    Ties go to the first symbol.
    """
    p10 = ch.marginal_p(1, 0).mass
    p11 = ch.marginal_p(1, 1).mass
    gap = np.abs(p11 - p10)
    y0 = int(np.argmax(gap))
    if gap[y0] <= 0:
        raise DegenerateChannelError("Bob's input-1 law does not depend on the state")
    return ProbeConstants(y0, float(p10[y0]), float(p11[y0]))


def min_budget(n: int, kappa: float, mu: float) -> int:
    """Smallest ``g`` with ``g >= ceil((1 + mu) kappa (n + g))``."""
    if not 0.0 <= kappa < 1.0 / (1.0 + mu):
        raise PreconditionError("need 0 <= kappa < 1/(1+mu) for a finite budget")
    g = math.ceil((1 + mu) * kappa * n)
    while g < math.ceil((1 + mu) * kappa * (n + g)):
        g += 1
    return g


@dataclass(frozen=True)
class EstimatorConfig:
    n: int
    g: int
    kappa: float
    mu: float
    y0: int
    mu0: float
    mu1: float

    def __post_init__(self):
        if self.n < 1 or self.g < 0:
            raise PreconditionError("need n >= 1 and g >= 0")
        if not 0.0 <= self.kappa < 1.0 or self.mu <= 0:
            raise PreconditionError("need 0 <= kappa < 1 and mu > 0")
        if self.mu0 == self.mu1:
            raise DegenerateChannelError("probe probabilities coincide; the state is unobservable")
        if self.g < math.ceil((1 + self.mu) * self.kappa * self.n_prime):
            raise PreconditionError(
                f"budget g={self.g} below ceil((1+mu) kappa n') = "
                f"{math.ceil((1 + self.mu) * self.kappa * self.n_prime)}"
            )

    @property
    def n_prime(self) -> int:
        return self.n + self.g

    @classmethod
    def for_channel(cls, ch: StateDmc, n: int, kappa: float, mu: float, g: int | None = None):
        pc = probe_constants(ch)
        if g is None:
            g = min_budget(n, kappa, mu)
        return cls(n, g, kappa, mu, pc.y0, pc.mu0, pc.mu1)


def select_positions(n_prime: int, kappa: float, rng) -> np.ndarray:
    """Each of ``n_prime`` positions independently with probability ``kappa``, ascending."""
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa={kappa} outside [0, 1]")
    return np.flatnonzero(rng.random(n_prime) < kappa)


def halting_check(L: int, g: int) -> bool:
    """True when more positions were drawn than the budget allows."""
    return L > g


def estimate_beta(probe_outputs, cfg: EstimatorConfig) -> float:
    """Mean of the normalized probe indicators; 1 when there are no probes.

    The raw value may leave [0, 1]; callers clamp where needed.
    """
    probe_outputs = np.asarray(probe_outputs)
    if probe_outputs.size == 0:
        return 1.0
    hits = (probe_outputs == cfg.y0).mean()
    return float((hits - cfg.mu0) / (cfg.mu1 - cfg.mu0))


def deviation_bound(lam: float, ell: int, mu0: float, mu1: float) -> float:
    """Bound on P(|beta_hat - beta| > lam) given ``ell`` probes."""
    if lam <= 0 or ell < 1:
        raise PreconditionError("need lam > 0 and ell >= 1")
    return 2.0 * math.exp(-((mu1 - mu0) ** 2) * lam**2 * ell / 2.0) + 2.0 * math.exp(
        -(lam**2) * ell / 2.0
    )


def halting_bound(mu: float, kappa: float, n_prime: int) -> float:
    """2^(-mu^2 kappa n' / 3), the bound on halting with budget ceil((1+mu) kappa n')."""
    return 2.0 ** (-(mu**2) * kappa * n_prime / 3.0)


# -- code-size selection ------------------------------------------------------


def bob_information(ch: StateDmc, beta: float, alpha: float) -> float:
    """I(X; Y) for X ~ Bern(alpha) through Bob's channel averaged over states with weight beta."""
    py_x = ch.y_given_x(beta)
    joint = np.array([1 - alpha, alpha])[:, None] * py_x
    return mutual_information(JointPmf((0, 1), ch.y_alphabet, joint))


def innocent_floor(ch: StateDmc) -> float:
    """min_y P_0(y), the smallest innocent output probability."""
    return float(ch.innocent_y().mass.min())


@dataclass(frozen=True)
class MSelection:
    log_m1: int
    log_m2: int
    log_m3: int
    zeta: float
    alpha: float
    beta_hat: float
    info: float

    @property
    def m1(self) -> int:
        return 1 << self.log_m1

    @property
    def m2(self) -> int:
        return 1 << self.log_m2

    @property
    def m3(self) -> int:
        return 1 << self.log_m3

    def as_dict(self) -> dict:
        return {
            "log_m1": self.log_m1,
            "log_m2": self.log_m2,
            "log_m3": self.log_m3,
            "beta_hat": self.beta_hat,
        }


# values this close to an integer are treated as that integer before rounding,
# so float residue such as 55.000000000000014 does not cost a whole bit
SNAP_TOL = 1e-9


def _ceil(v: float) -> int:
    r = round(v)
    return int(r) if abs(v - r) < SNAP_TOL else math.ceil(v)


def _floor(v: float) -> int:
    r = round(v)
    return int(r) if abs(v - r) < SNAP_TOL else math.floor(v)


def _selection_targets(ch, beta, zeta, alpha, n, mu0_channel):
    penalty = beta * i_s(ch, 1) + (1 - beta) * i_s(ch, 0)
    info = bob_information(ch, beta, alpha)
    log_m3 = _ceil((1 + zeta) * alpha * (penalty + zeta) * n)
    key_plus_rand = _floor((1 - zeta) * (info - zeta * alpha) * n)
    total = _ceil((1 + zeta) * n * math.log2(1.0 / mu0_channel))
    return log_m3, key_plus_rand, total, info


def choose_m(ch: StateDmc, beta_hat: float, zeta: float, alpha: float, n: int, mu0_channel: float) -> MSelection:
    """Codebook sizes for an estimated state weight.

    ``log M3`` is the smallest value meeting the randomization requirement,
    ``log M1 + log M3`` the largest value meeting the reliability
    requirement, and ``log M2`` the smallest non-negative value bringing the
    total up to the resolvability requirement.  ``beta_hat`` is clamped to
    [0, 1] first.
    """
    if zeta <= 0:
        raise PreconditionError("zeta must be positive")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    if not 0.0 < mu0_channel <= 1.0:
        raise PreconditionError("innocent output law must have full support")
    b = min(1.0, max(0.0, beta_hat))
    log_m3, key_plus_rand, total, info = _selection_targets(ch, b, zeta, alpha, n, mu0_channel)
    log_m1 = key_plus_rand - log_m3
    if log_m1 < 0:
        raise InfeasibleSelectionError(
            f"log M1 = {log_m1} < 0: reliability allows {key_plus_rand} bits, randomization needs {log_m3}"
        )
    log_m2 = max(0, total - log_m1 - log_m3)
    return MSelection(log_m1, log_m2, log_m3, zeta, alpha, b, info)


def selection_satisfied(ch: StateDmc, sel: MSelection, n: int, mu0_channel: float) -> bool:
    """Re-check the three selection inequalities at ``sel.beta_hat`` by substitution."""
    b = sel.beta_hat
    penalty = b * i_s(ch, 1) + (1 - b) * i_s(ch, 0)
    info = bob_information(ch, b, sel.alpha)
    z, a = sel.zeta, sel.alpha
    return (
        sel.log_m1 + sel.log_m2 + sel.log_m3 >= (1 + z) * math.log2(1 / mu0_channel) * n - SNAP_TOL
        and sel.log_m1 + sel.log_m3 <= (1 - z) * (info - z * a) * n + SNAP_TOL
        and sel.log_m3 >= (1 + z) * a * (penalty + z) * n - SNAP_TOL
    )


def s_in_s_set(ch, s, m1, m2, m3, zeta, alpha, mu0_channel, n: int | None = None) -> bool:
    """Whether the state sequence ``s`` lies in the set the code is built for.

    Uses the true weight ``beta = wt(s) / len(s)`` and no slack terms.
    ``n`` is the coding length (default ``len(s)``).
    """
    s = np.asarray(s)
    if s.size == 0 or s.min() < 0 or s.max() > 1:
        raise DomainError("state sequence must be non-empty and binary")
    n = s.size if n is None else n
    beta = float(s.mean())
    lm1, lm2, lm3 = (math.log2(m) for m in (m1, m2, m3))
    penalty = beta * i_s(ch, 1) + (1 - beta) * i_s(ch, 0)
    info = bob_information(ch, beta, alpha)
    tol = 1e-12
    return (
        lm1 + lm2 + lm3 >= math.ceil((1 + zeta) * math.log2(1 / mu0_channel) * n) - tol
        and lm1 + lm3 <= math.floor((1 - zeta) * info * n) + tol
        and lm3 >= math.ceil((1 + zeta) * alpha * penalty * n) - tol
    )


# -- Monte-Carlo checks -----------------------------------------------------


def _probe_counts(s, ell, trials, pc: ProbeConstants, rng):
    """Number of ``y0`` hits among ``ell`` probes at uniformly random distinct positions.

    Draws the number of state-1 probes from the hypergeometric law and the
    hits in each state from binomials, which is the exact joint law of the
    probe outputs given ``L = ell``.
    """
    s = np.asarray(s)
    ones = int(s.sum())
    k1 = rng.hypergeometric(ones, s.size - ones, ell, size=trials)
    return rng.binomial(k1, pc.mu1) + rng.binomial(ell - k1, pc.mu0)


def conditional_deviation_check(ch: StateDmc, s, lam, ell, trials, rng, bound_scale=1.0) -> BoundCheck:
    """Empirical P(|beta_hat - beta| > lam | L = ell) against :func:`deviation_bound`."""
    pc = probe_constants(ch)
    s = np.asarray(s)
    beta = float(s.mean())
    hits = _probe_counts(s, ell, trials, pc, rng)
    beta_hat = (hits / ell - pc.mu0) / (pc.mu1 - pc.mu0)
    f = float(np.mean(np.abs(beta_hat - beta) > lam))
    return BoundCheck(
        "deviation",
        {"lam": lam, "ell": ell, "n_prime": s.size, "beta": beta},
        bound_scale * deviation_bound(lam, ell, pc.mu0, pc.mu1),
        f,
        _bernoulli_sigma(f, trials),
        trials,
    )


def halting_frequency_check(n_prime, kappa, mu, trials, rng, bound_scale=1.0) -> BoundCheck:
    """Empirical halting frequency with budget ceil((1 + mu) kappa n') against :func:`halting_bound`."""
    g = math.ceil((1 + mu) * kappa * n_prime)
    L = rng.binomial(n_prime, kappa, size=trials)
    f = float(np.mean(L > g))
    return BoundCheck(
        "halting",
        {"n_prime": n_prime, "kappa": kappa, "mu": mu, "g": g},
        bound_scale * halting_bound(mu, kappa, n_prime),
        f,
        _bernoulli_sigma(f, trials),
        trials,
    )


def estimator_suite(ch, n_prime=5000, beta=0.3, lams=(0.05, 0.1, 0.2), ells=(100, 1000),
                    trials=4000, halt=(10_000, 0.05, 0.15), seed=0, bound_scale=1.0) -> list:
    """Deviation checks over a (lam, ell) grid plus one halting check."""
    rng = np.random.default_rng(seed)
    s = constant_weight_state(n_prime, beta)
    checks = [
        conditional_deviation_check(ch, s, lam, ell, trials, rng, bound_scale)
        for lam in lams
        for ell in ells
    ]
    n_h, kappa, mu = halt
    checks.append(halting_frequency_check(n_h, kappa, mu, trials, rng, bound_scale))
    return checks


def constant_weight_state(n_prime: int, beta: float) -> np.ndarray:
    """First floor(beta n') positions in state 1, the rest in state 0."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta={beta} outside [0, 1]")
    s = np.zeros(n_prime, dtype=np.int64)
    s[: int(math.floor(beta * n_prime))] = 1
    return s


def membership_frequency(ch, s, cfg: EstimatorConfig, zeta, alpha, trials, rng) -> dict:
    """How often the code sized from the estimate contains the true state sequence.

    Report only: counts halts and infeasible selections separately.
    """
    validate = validate_hypotheses(ch, 1e-9)
    if not validate.active_ok:
        raise PreconditionError("; ".join(validate.failures()))
    s = np.asarray(s)
    pc = ProbeConstants(cfg.y0, cfg.mu0, cfg.mu1)
    mu0c = innocent_floor(ch)
    counts = {"member": 0, "outside": 0, "halted": 0, "infeasible": 0}
    for _ in range(trials):
        L = int(rng.binomial(s.size, cfg.kappa))
        if halting_check(L, cfg.g):
            counts["halted"] += 1
            continue
        beta_hat = 1.0 if L == 0 else float(
            (_probe_counts(s, L, 1, pc, rng)[0] / L - pc.mu0) / (pc.mu1 - pc.mu0)
        )
        try:
            sel = choose_m(ch, beta_hat, zeta, alpha, cfg.n, mu0c)
        except InfeasibleSelectionError:
            counts["infeasible"] += 1
            continue
        inside = s_in_s_set(ch, s, sel.m1, sel.m2, sel.m3, zeta, alpha, mu0c, n=cfg.n)
        counts["member" if inside else "outside"] += 1
    counts["trials"] = trials
    counts["frequency"] = counts["member"] / trials
    return counts
