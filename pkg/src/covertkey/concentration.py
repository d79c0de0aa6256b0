"""Concentration bounds and Monte-Carlo checks against them.

Bounds are returned exactly as their closed forms give them, even when the
value exceeds 1 (a vacuous bound).  Use :func:`clamp` for display only.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError

STYLES = (
    "lemma1_prob",
    "lemma1_exp",
    "chernoff_lower",
    "chernoff_upper",
    "hypergeometric",
    "hoeffding",
)


def _check_lemma1(n, p, eps):
    if n < 1 or not 0.0 < p < 1.0:
        raise PreconditionError(f"need n >= 1 and 0 < p < 1, got n={n}, p={p}")
    if not 2.0 / (n * p) < eps < 1.0:
        raise PreconditionError(f"need 2/(np) = {2.0 / (n * p):.4g} < eps={eps} < 1")


def lemma1_prob_bound(n: int, p: float, eps: float) -> float:
    """Tail bound on the relative deviation of 1/(1 + Binomial(n, p)) from 1/((n+1)p)."""
    _check_lemma1(n, p, eps)
    return 2.0 * math.exp(-n * p * eps**2 / 32.0)


def lemma1_exp_bound(n: int, p: float, eps: float) -> float:
    """Bound on E|1/(1 + Binomial(n, p)) - 1/((n+1)p)|."""
    _check_lemma1(n, p, eps)
    c = 1.0 / ((n + 1) * p)
    return eps * c + (1.0 + c) * math.exp(-n * p * eps**2 / 32.0)


def chernoff_bounds(n: int, p: float, mu: float) -> tuple:
    """(lower_tail, upper_tail) for P(S <= (1-mu)np) and P(S >= (1+mu)np)."""
    if not 0.0 < mu < 1.0:
        raise PreconditionError(f"mu={mu} outside (0, 1)")
    return math.exp(-n * p * mu**2 / 2.0), math.exp(-n * p * mu**2 / 3.0)


def hypergeometric_tail(n_prime: int, successes: int, draws: int, lam: float) -> float:
    """Bound exp(-lam^2 draws / 2) on P(|H/draws - successes/n_prime| >= lam/2)."""
    if not 0 <= successes <= n_prime or not 0 <= draws <= n_prime:
        raise PreconditionError("need 0 <= successes, draws <= population size")
    if lam < 0:
        raise PreconditionError("lam must be non-negative")
    return math.exp(-(lam**2) * draws / 2.0)


def hoeffding_bound(ell: int, t: float, width: float = 1.0) -> float:
    """Two-sided Hoeffding bound for the mean of ``ell`` variables of range ``width``."""
    if ell < 1 or width <= 0 or t < 0:
        raise PreconditionError("need ell >= 1, width > 0, t >= 0")
    return 2.0 * math.exp(-2.0 * ell * t**2 / width**2)


def clamp(bound: float) -> float:
    return min(bound, 1.0)


@dataclass(frozen=True)
class BoundQuery:
    n: int
    p: float
    eps: float
    style: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"unknown bound style {self.style!r}")

    def evaluate(self) -> float:
        if self.style == "lemma1_prob":
            return lemma1_prob_bound(self.n, self.p, self.eps)
        if self.style == "lemma1_exp":
            return lemma1_exp_bound(self.n, self.p, self.eps)
        if self.style == "chernoff_lower":
            return chernoff_bounds(self.n, self.p, self.eps)[0]
        if self.style == "chernoff_upper":
            return chernoff_bounds(self.n, self.p, self.eps)[1]
        if self.style == "hypergeometric":
            return hypergeometric_tail(
                self.extra["population"], self.extra["successes"], self.n, self.eps
            )
        return hoeffding_bound(self.n, self.eps, self.extra.get("width", 1.0))


@dataclass
class BoundCheck:
    """One row of a bound-versus-simulation table."""

    name: str
    params: dict
    bound: float
    empirical: float
    sigma: float
    trials: int
    slack: float = 3.0

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + self.slack * self.sigma

    def row(self) -> dict:
        d = asdict(self)
        d["params"] = ";".join(f"{k}={v}" for k, v in self.params.items())
        d["verdict"] = "pass" if self.passed else "fail"
        return d


def _bernoulli_sigma(freq, trials):
    # floor at one event so a zero count still has a non-degenerate error bar
    f = max(freq, 1.0 / trials)
    return math.sqrt(f * (1.0 - f) / trials)


def _reciprocal_deviation(n, p, sums):
    return np.abs(1.0 / (1.0 + sums) - 1.0 / ((n + 1) * p))


def check_lemma1(n, p, eps, trials, rng, bound_scale=1.0) -> list:
    """Monte-Carlo check of both reciprocal-sum bounds.

    ``sum X_i`` is drawn directly as Binomial(n, p), which has exactly the
    law of the sum of ``n`` iid Bernoulli(p) draws.
    """
    sums = rng.binomial(n, p, size=trials)
    dev = _reciprocal_deviation(n, p, sums)
    params = {"n": n, "p": p, "eps": eps}
    freq = float(np.mean(dev >= eps / ((n + 1) * p)))
    mean = float(dev.mean())
    return [
        BoundCheck(
            "lemma1_prob",
            params,
            bound_scale * lemma1_prob_bound(n, p, eps),
            freq,
            _bernoulli_sigma(freq, trials),
            trials,
        ),
        BoundCheck(
            "lemma1_exp",
            params,
            bound_scale * lemma1_exp_bound(n, p, eps),
            mean,
            float(dev.std(ddof=1) / math.sqrt(trials)),
            trials,
        ),
    ]


def lemma1_exact(n: int, p: float, eps: float) -> tuple:
    """Exact (probability, expectation) for the reciprocal-sum deviation by summing the binomial PMF."""
    from scipy.stats import binom

    k = np.arange(n + 1)
    pmf = binom.pmf(k, n, p)
    dev = _reciprocal_deviation(n, p, k)
    return float(pmf[dev >= eps / ((n + 1) * p)].sum()), float(np.dot(pmf, dev))


def check_chernoff(n, p, mu, trials, rng, bound_scale=1.0) -> list:
    sums = rng.binomial(n, p, size=trials)
    lower, upper = chernoff_bounds(n, p, mu)
    params = {"n": n, "p": p, "mu": mu}
    out = []
    for name, bound, event in (
        ("chernoff_lower", lower, sums <= (1 - mu) * n * p),
        ("chernoff_upper", upper, sums >= (1 + mu) * n * p),
    ):
        f = float(event.mean())
        out.append(BoundCheck(name, params, bound_scale * bound, f, _bernoulli_sigma(f, trials), trials))
    return out


def check_hypergeometric(n_prime, successes, draws, lam, trials, rng, bound_scale=1.0):
    h = rng.hypergeometric(successes, n_prime - successes, draws, size=trials)
    beta = successes / n_prime
    f = float(np.mean(np.abs(h / draws - beta) >= lam / 2.0))
    return BoundCheck(
        "hypergeometric",
        {"population": n_prime, "successes": successes, "draws": draws, "lam": lam},
        bound_scale * hypergeometric_tail(n_prime, successes, draws, lam),
        f,
        _bernoulli_sigma(f, trials),
        trials,
    )


DEFAULT_LEMMA1_GRID = ((1000, 0.1, 0.3), (10_000, 0.5, 0.5), (1000, 0.5, 0.2))


def lemma1_suite(grid=DEFAULT_LEMMA1_GRID, trials=1_000_000, seed=0, bound_scale=1.0):
    rng = np.random.default_rng(seed)
    rows = []
    for n, p, eps in grid:
        rows.extend(check_lemma1(n, p, eps, trials, rng, bound_scale))
    return rows


def write_checks_csv(checks, fh) -> None:
    """Verdict table: name, params, bound, empirical, sigma, trials, verdict."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["name", "params", "bound", "empirical", "sigma", "trials", "verdict"])
    for c in checks:
        r = c.row()
        w.writerow(
            [
                r["name"],
                r["params"],
                f"{c.bound:.12g}",
                f"{c.empirical:.12g}",
                f"{c.sigma:.12g}",
                c.trials,
                r["verdict"],
            ]
        )
