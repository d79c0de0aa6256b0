"""The assembled key-generation protocol, its metrics, and derandomization.

One trial over ``n' = n + g`` channel uses:

1. Alice and Bob share secret probe positions ``J`` (each use independently
   with probability ``kappa``) and halt if ``|J| > g``.  A halted trial sends
   nothing (all-zero input).
2. Alice sends ``1`` on ``J``, Bern(``alpha``) symbols on the first ``n``
   positions outside ``J`` (the coding positions) and ``0`` on the rest.
3. Bob estimates the state weight from the probe outputs and sizes the code.
4. A shared secret index ``K`` picks one of ``U`` random codebooks; Bob runs
   the likelihood encoder on his coding-position outputs, publishes ``W2``,
   and Alice decodes ``W1`` with the MMI decoder.

Shared secrets (``J``, ``K`` and the pad for the estimate) are modeled as a
common seed; their bit cost is accounted in :func:`throughput_report`.

At toy scale the code sizes come from ``ProtocolConfig.m_override``; the
estimate-driven selection is still computed and recorded for diagnostics.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oneshot
from .channel import StateDmc, sample as channel_sample, validate_hypotheses
from .errors import (
    DomainError,
    GuardError,
    InfeasibleSelectionError,
    PreconditionError,
    SearchFailureError,
)
from .estimator import (
    EstimatorConfig,
    choose_m,
    estimate_beta,
    halting_check,
    innocent_floor,
    probe_constants,
    select_positions,
)
from .probcore import binary_entropy
from .rates import active_rate

log = logging.getLogger(__name__)

MODES = ("oracle", "estimated")
MAX_PROBE_SUBSETS = 1 << 16
MAX_Z_TABLE = 1 << 24


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    g: int
    alpha: float
    kappa: float
    zeta: float = 0.1
    mu: float = 0.1
    mode: str = "oracle"
    code_count: int = 1
    seed: int = 0
    m_override: tuple | None = None

    def __post_init__(self):
        if self.n < 1 or self.g < 0:
            raise PreconditionError("need n >= 1 and g >= 0")
        if not 0.0 <= self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} outside [0, 1)")
        if not 0.0 <= self.kappa < 1.0:
            raise DomainError(f"kappa={self.kappa} outside [0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.code_count < 1:
            raise PreconditionError("need at least one code")
        if self.m_override is not None:
            if len(self.m_override) != 3 or min(self.m_override) < 1:
                raise PreconditionError("m_override must be three positive integers")
            object.__setattr__(self, "m_override", tuple(int(m) for m in self.m_override))
        threshold = 2 * self.n**4 * (self.n + 1)
        if self.code_count <= threshold:
            log.warning(
                "code_count=%d is below 2 n^4 (n+1) = %d; toy regime", self.code_count, threshold
            )

    @property
    def n_prime(self) -> int:
        return self.n + self.g

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m_override"] = list(self.m_override) if self.m_override else None
        return d


def coding_positions(n_prime: int, probes, n: int) -> np.ndarray:
    """First ``n`` positions not in ``probes``."""
    mask = np.ones(n_prime, dtype=bool)
    mask[np.asarray(probes, dtype=np.int64)] = False
    return np.flatnonzero(mask)[:n]


def _check_states(s, n_prime):
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (n_prime,):
        raise PreconditionError(f"state sequence has length {s.size}, expected n'={n_prime}")
    if s.size and (s.min() < 0 or s.max() > 1):
        raise DomainError("states must be binary")
    return s


def require_active_hypotheses(ch: StateDmc, tol: float = 1e-9) -> None:
    report = validate_hypotheses(ch, tol)
    if not report.active_ok:
        raise PreconditionError("channel violates: " + "; ".join(report.failures()))


# -- code family ----------------------------------------------------------------


class CodeFamily:
    """``U`` codebooks drawn iid from the innocent output law, each from its own seed."""

    def __init__(self, ch: StateDmc, cfg: ProtocolConfig):
        self.ch = ch
        self.cfg = cfg
        self.qy = ch.innocent_y()
        self._cache: dict = {}

    def __len__(self) -> int:
        return self.cfg.code_count

    def codebook(self, k: int, m: tuple) -> oneshot.Codebook:
        key = (k, tuple(m))
        if key not in self._cache:
            seq = np.random.SeedSequence(self.cfg.seed, spawn_key=(1, k))
            rng = np.random.default_rng(seq)
            self._cache[key] = oneshot.gen_codebook(self.qy, self.cfg.n, *m, rng, seed=(self.cfg.seed, k))
        return self._cache[key]


# -- trials ---------------------------------------------------------------------


@dataclass
class TrialOutcome:
    index: int
    halted: bool
    L: int
    beta_true: float
    reason: str | None = None
    beta_hat: float | None = None
    w1: int | None = None
    w1_hat: int | None = None
    w2: int | None = None
    key_match: bool | None = None
    fallback_used: bool | None = None
    code_index: int | None = None
    m_used: list | None = None
    selection: dict | None = None
    z_code: list | None = None

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(d, sort_keys=True)


def trial_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, t)))


def _selection(ch, cfg, beta):
    try:
        sel = choose_m(ch, beta, cfg.zeta, max(cfg.alpha, 1e-12), cfg.n, innocent_floor(ch))
    except InfeasibleSelectionError as exc:
        return None, str(exc)
    return sel, None


def run_trial(ch: StateDmc, s, cfg: ProtocolConfig, rng, family: CodeFamily | None = None, index: int = 0) -> TrialOutcome:
    """One protocol run against the state sequence ``s`` (length ``n'``)."""
    s = _check_states(s, cfg.n_prime)
    family = family or CodeFamily(ch, cfg)
    beta_true = float(s.mean())
    probes = select_positions(cfg.n_prime, cfg.kappa, rng)
    L = int(probes.size)
    if halting_check(L, cfg.g):
        return TrialOutcome(index, True, L, beta_true, reason="budget")

    x = np.zeros(cfg.n_prime, dtype=np.int64)
    x[probes] = 1
    coding = coding_positions(cfg.n_prime, probes, cfg.n)
    x[coding] = (rng.random(cfg.n) < cfg.alpha).astype(np.int64)
    y, z = channel_sample(ch, x, s, rng)

    pc = probe_constants(ch)
    ecfg = EstimatorConfig(cfg.n, cfg.g, cfg.kappa, cfg.mu, pc.y0, pc.mu0, pc.mu1)
    beta_hat = estimate_beta(y[probes], ecfg)
    driving = beta_true if cfg.mode == "oracle" else beta_hat
    sel, why = _selection(ch, cfg, driving)
    sel_record = sel.as_dict() if sel else {"infeasible": why}
    if cfg.m_override is not None:
        m = cfg.m_override
    elif sel is None:
        return TrialOutcome(index, True, L, beta_true, reason="infeasible", beta_hat=beta_hat,
                            selection=sel_record)
    else:
        m = (sel.m1, sel.m2, sel.m3)
        if cfg.n * m[0] * m[1] * m[2] > oneshot.MAX_CODEBOOK_SYMBOLS:
            raise GuardError(f"selected code sizes {sel.as_dict()} exceed the simulation guard")

    k = int(rng.integers(cfg.code_count))
    cb = family.codebook(k, m)
    y_code, x_code = y[coding], x[coding]
    probs, fallback = oneshot.encoder_distribution(y_code, cb)
    flat = int(rng.choice(probs.size, p=probs.ravel()))
    w1, w2 = divmod(flat, cb.m2)
    w1_hat = oneshot.mmi_decode(x_code, w2, cb)
    return TrialOutcome(
        index,
        False,
        L,
        beta_true,
        beta_hat=beta_hat,
        w1=w1,
        w1_hat=w1_hat,
        w2=w2,
        key_match=w1 == w1_hat,
        fallback_used=fallback,
        code_index=k,
        m_used=list(m),
        selection=sel_record,
        z_code=z[coding].tolist(),
    )


def run_trials(ch, s, cfg: ProtocolConfig, trials: int, family: CodeFamily | None = None):
    """Generator of outcomes; trial ``t`` uses its own stream derived from (seed, t)."""
    require_active_hypotheses(ch)
    family = family or CodeFamily(ch, cfg)
    for t in range(trials):
        yield run_trial(ch, s, cfg, trial_rng(cfg.seed, t), family, index=t)


# -- exact evaluation -------------------------------------------------------------


def _probe_subsets(n_prime, g):
    count = sum(math.comb(n_prime, k) for k in range(g + 1))
    if count > MAX_PROBE_SUBSETS:
        raise GuardError(f"{count} probe subsets exceed the enumeration guard")
    for k in range(g + 1):
        yield from itertools.combinations(range(n_prime), k)


class ExactEvaluator:
    """Exact per-code metrics for one state sequence, conditioned on not halting.

    Probe subsets are enumerated and grouped by the state pattern they leave
    on the coding positions, which is all the key stage depends on.  Willie's
    observation for the key metrics is his output at the coding positions.
    """

    def __init__(self, ch: StateDmc, s, cfg: ProtocolConfig):
        if cfg.m_override is None:
            raise PreconditionError("exact evaluation needs fixed code sizes (m_override)")
        self.ch, self.cfg = ch, cfg
        self.s = _check_states(s, cfg.n_prime)
        kx, ky, kz = 2, ch.ny, ch.nz
        if max(kx * ky, ky * kz) ** cfg.n > oneshot.MAX_PAIR_TABLE:
            raise GuardError(f"pair tables over n={cfg.n} positions are too large to enumerate")
        kap = cfg.kappa
        patterns: dict = {}
        proceed = 0.0
        for J in _probe_subsets(cfg.n_prime, cfg.g):
            w = kap ** len(J) * (1 - kap) ** (cfg.n_prime - len(J))
            if w == 0.0:
                continue
            pat = tuple(self.s[coding_positions(cfg.n_prime, J, cfg.n)].tolist())
            patterns[pat] = patterns.get(pat, 0.0) + w
            proceed += w
        self.p_halt = max(0.0, 1.0 - proceed)
        self.patterns = {p: w / proceed for p, w in patterns.items()}
        px = np.array([1 - cfg.alpha, cfg.alpha])
        self._letter = [px[:, None, None] * ch.tensor[:, st] for st in (0, 1)]
        self._tables = {p: self._pattern_tables(p) for p in self.patterns}
        self._codes: dict = {}

    def _pattern_tables(self, pat):
        letters = [self._letter[st] for st in pat]
        return (
            oneshot.product_table([p.sum(axis=2) for p in letters]),
            oneshot.product_table([p.sum(axis=0) for p in letters]),
        )

    def induced(self, cb: oneshot.Codebook) -> oneshot.InducedJoint:
        enc, fallback = oneshot.encoder_table(cb)
        dec = oneshot.decoder_table(cb, 2)
        joint = conf = None
        fb = 0.0
        for pat, w in self.patterns.items():
            ij = oneshot._induced_from_tables(*self._tables[pat], enc, fallback, dec)
            joint = w * ij.w1w2z if joint is None else joint + w * ij.w1w2z
            conf = w * ij.w1_w1hat if conf is None else conf + w * ij.w1_w1hat
            fb += w * ij.fallback_prob
        return oneshot.InducedJoint(joint, conf, fb)

    def code_metrics(self, family: CodeFamily, k: int) -> dict:
        if k not in self._codes:
            ij = self.induced(family.codebook(k, self.cfg.m_override))
            j = ij.w1w2z
            post = j / np.where(j.sum(axis=0, keepdims=True) > 0, j.sum(axis=0, keepdims=True), 1.0)
            self._codes[k] = {
                "p_error": ij.p_error(),
                "secrecy_tv": ij.secrecy_tv(),
                "independence_tv": ij.independence_tv(),
                "public_uniformity_tv": ij.public_uniformity_tv(),
                "fallback_prob": ij.fallback_prob,
                # tv(P(W1 | w2, z), uniform) for every (w2, z)
                "posterior_tv": 0.5 * np.abs(post - 1.0 / j.shape[0]).sum(axis=0),
            }
        return self._codes[k]

    def family_metrics(self, family: CodeFamily) -> dict:
        rows = [self.code_metrics(family, k) for k in range(len(family))]
        keys = ("p_error", "secrecy_tv", "independence_tv", "public_uniformity_tv", "fallback_prob")
        out = {key: float(np.mean([r[key] for r in rows])) for key in keys}
        out["p_halt"] = self.p_halt
        return out


def _letter_z(ch, alpha, st, role):
    q0 = ch.tensor[0, st].sum(axis=0)
    q1 = ch.tensor[1, st].sum(axis=0)
    return {"probe": q1, "code": alpha * q1 + (1 - alpha) * q0, "idle": q0}[role]


def covertness_kl(ch: StateDmc, s, cfg: ProtocolConfig) -> float:
    """D(P_Z || prod_i Q_0^{s_i}) in bits over all ``n'`` outputs, by enumeration.

    Willie's output law is a mixture over probe subsets of product laws,
    plus the all-zero input law on halted runs.  It does not depend on the
    codebooks since Alice's coding inputs are iid.
    """
    s = _check_states(s, cfg.n_prime)
    nz = ch.nz
    if nz**cfg.n_prime > MAX_Z_TABLE:
        raise GuardError("Willie's output space is too large to enumerate")

    def product(vectors):
        out = np.ones(1)
        for v in vectors:
            out = np.kron(out, v)
        return out

    innocent = product([_letter_z(ch, 0.0, st, "idle") for st in s])
    mix = np.zeros_like(innocent)
    proceed = 0.0
    for J in _probe_subsets(cfg.n_prime, cfg.g):
        w = cfg.kappa ** len(J) * (1 - cfg.kappa) ** (cfg.n_prime - len(J))
        if w == 0.0:
            continue
        roles = ["idle"] * cfg.n_prime
        for j in J:
            roles[j] = "probe"
        for c in coding_positions(cfg.n_prime, J, cfg.n):
            roles[c] = "code"
        mix += w * product([_letter_z(ch, cfg.alpha, st, r) for st, r in zip(s, roles)])
        proceed += w
    mix += max(0.0, 1.0 - proceed) * innocent
    support = mix > 0
    if np.any(innocent[support] == 0):
        return math.inf
    return float(np.sum(mix[support] * np.log2(mix[support] / innocent[support])))


# -- metrics --------------------------------------------------------------------


@dataclass
class MetricsReport:
    trials: int
    halted: int
    completed: int
    p_e: float
    p_e_sigma: float
    fallback_rate: float
    secrecy_tv: float | None = None
    secrecy_tv_mc: float | None = None
    secrecy_sigma: float | None = None
    independence_tv: float | None = None
    public_uniformity_tv: float | None = None
    p_e_exact: float | None = None
    covertness_kl: float | None = None
    throughput: float | None = None
    exact: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(ch: StateDmc, s, cfg: ProtocolConfig, trials: int, family: CodeFamily | None = None,
             sink=None) -> MetricsReport:
    """Monte-Carlo metrics over ``trials`` runs, plus exact metrics when fixed sizes allow.

    ``sink`` (a callable) receives every :class:`TrialOutcome` in order.
    The Monte-Carlo secrecy estimate averages the exact posterior distance
    tv(P(W1 | w2, z), uniform) over the sampled public messages and
    observations, so its mean equals the exact secrecy distance.
    """
    s = _check_states(s, cfg.n_prime)
    family = family or CodeFamily(ch, cfg)
    exact = None
    if cfg.m_override is not None:
        try:
            exact = ExactEvaluator(ch, s, cfg)
        except GuardError:
            exact = None
    halted = errors = fallbacks = 0
    post_tv = []
    for out in run_trials(ch, s, cfg, trials, family):
        if sink is not None:
            sink(out)
        if out.halted:
            halted += 1
            continue
        errors += not out.key_match
        fallbacks += bool(out.fallback_used)
        if exact is not None:
            zc = oneshot.sequence_codes(np.array(out.z_code, dtype=np.int64), ch.nz) if out.z_code else 0
            post_tv.append(exact.code_metrics(family, out.code_index)["posterior_tv"][out.w2, zc])
    done = trials - halted
    p_e = errors / done if done else math.nan
    report = MetricsReport(
        trials=trials,
        halted=halted,
        completed=done,
        p_e=p_e,
        p_e_sigma=math.sqrt(p_e * (1 - p_e) / done) if done else math.nan,
        fallback_rate=fallbacks / done if done else math.nan,
    )
    if exact is not None:
        fm = exact.family_metrics(family)
        report.exact = True
        report.p_e_exact = fm["p_error"]
        report.p_e_sigma = math.sqrt(fm["p_error"] * (1 - fm["p_error"]) / done) if done else math.nan
        report.secrecy_tv = fm["secrecy_tv"]
        report.independence_tv = fm["independence_tv"]
        report.public_uniformity_tv = fm["public_uniformity_tv"]
        report.extra["p_halt_exact"] = fm["p_halt"]
        if post_tv:
            arr = np.asarray(post_tv)
            report.secrecy_tv_mc = float(arr.mean())
            report.secrecy_sigma = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        try:
            report.covertness_kl = covertness_kl(ch, s, cfg)
        except GuardError:
            report.covertness_kl = None
        if report.covertness_kl:
            report.throughput = math.log2(cfg.m_override[0]) / math.sqrt(cfg.n * report.covertness_kl)
    return report


def common_randomness_bits(cfg: ProtocolConfig) -> float:
    """Secret seed cost: code index, probe positions, and a pad for the estimate."""
    pad = math.ceil(math.log2(cfg.n_prime + 1))
    positions = cfg.n_prime * binary_entropy(cfg.kappa)
    return math.log2(cfg.code_count) + positions + pad


def throughput_report(ch: StateDmc, s, cfg: ProtocolConfig, trials: int,
                      family: CodeFamily | None = None) -> dict:
    """Gross and net throughput log2(M1) / sqrt(n * covertness) against the active rate."""
    s = _check_states(s, cfg.n_prime)
    report = evaluate(ch, s, cfg, trials, family)
    if report.completed * 2 < trials:
        raise PreconditionError("most trials halted; throughput is not meaningful")
    if cfg.m_override is None:
        raise PreconditionError("throughput at toy scale needs fixed code sizes")
    beta = float(s.mean())
    key_bits = math.log2(cfg.m_override[0])
    cov = report.covertness_kl
    rate = active_rate(ch, beta)
    out = {
        "beta": beta,
        "key_bits": key_bits,
        "covertness_kl": cov,
        "common_randomness_bits": common_randomness_bits(cfg),
        "active_rate": rate,
        "p_e": report.p_e,
        "degenerate": not cov,
    }
    if not cov:
        out.update(gross=None, net=None, ratio=None)
        return out
    scale = math.sqrt(cfg.n * cov)
    out["gross"] = key_bits / scale
    out["net"] = (key_bits - out["common_randomness_bits"]) / scale
    out["ratio"] = out["gross"] / rate if rate > 0 else None
    return out


def selection_agreement(ch: StateDmc, s, cfg: ProtocolConfig, trials: int) -> dict:
    """How often the estimate-driven code sizes equal the oracle's (report only).

    Runs only the probing stage, so it works at any ``n``.
    """
    s = _check_states(s, cfg.n_prime)
    require_active_hypotheses(ch)
    pc = probe_constants(ch)
    ecfg = EstimatorConfig(cfg.n, cfg.g, cfg.kappa, cfg.mu, pc.y0, pc.mu0, pc.mu1)
    oracle, _ = _selection(ch, cfg, float(s.mean()))
    target = oracle.as_dict() if oracle else None
    if target:
        target.pop("beta_hat")
    agree = halted = 0
    for t in range(trials):
        rng = trial_rng(cfg.seed, t)
        probes = select_positions(cfg.n_prime, cfg.kappa, rng)
        if halting_check(probes.size, cfg.g):
            halted += 1
            continue
        x = np.ones(probes.size, dtype=np.int64)
        y, _ = channel_sample(ch, x, s[probes], rng)
        sel, _ = _selection(ch, cfg, estimate_beta(y, ecfg))
        got = sel.as_dict() if sel else None
        if got:
            got.pop("beta_hat")
        agree += got == target
    done = trials - halted
    f = agree / done if done else math.nan
    half = 1.96 * math.sqrt(f * (1 - f) / done) if done else math.nan
    return {"agreement": f, "ci": (f - half, f + half), "completed": done, "halted": halted}


# -- derandomization ----------------------------------------------------------------


@dataclass
class DerandomizationResult:
    indices: list
    L: int
    eps: float
    eps_prime: float
    attempts: int
    averages: list

    def to_dict(self) -> dict:
        return asdict(self)


def lemma5_min_family(eps_prime: float, n: int) -> int:
    """Smallest integer L with L > (2 / eps') (1 + n)."""
    return math.floor(2.0 / eps_prime * (1 + n)) + 1


def derandomize(family: CodeFamily, state_set, eps_prime: float, rng, L: int | None = None,
                retries: int = 200) -> DerandomizationResult:
    """Sample ``L`` codes from the family whose averages meet ``eps'`` on every state sequence.

    Per-code error probability and secrecy (the distance between the joint
    law of keys and Willie's output and the product of its marginals) are
    evaluated exactly.  ``eps`` is the largest family-average metric over
    the state set.
    """
    cfg = family.cfg
    if not state_set:
        raise PreconditionError("empty state set")
    evaluators = [ExactEvaluator(family.ch, s, cfg) for s in state_set]
    pe = np.array([[ev.code_metrics(family, k)["p_error"] for k in range(len(family))] for ev in evaluators])
    sec = np.array([[ev.code_metrics(family, k)["independence_tv"] for k in range(len(family))] for ev in evaluators])
    eps = float(max(pe.mean(axis=1).max(), sec.mean(axis=1).max()))
    if not eps_prime > 2 * math.log2(1 + eps):
        raise PreconditionError(f"eps'={eps_prime} must exceed 2 log2(1 + eps) = {2 * math.log2(1 + eps):.4g}")
    min_L = lemma5_min_family(eps_prime, cfg.n)
    if L is None:
        L = min_L
    elif L < min_L:
        raise PreconditionError(f"L={L} must exceed (2/eps')(1+n); need L >= {min_L}")
    violations = np.zeros(len(state_set))
    for attempt in range(1, retries + 1):
        idx = rng.integers(len(family), size=L)
        ape, asec = pe[:, idx].mean(axis=1), sec[:, idx].mean(axis=1)
        bad = (ape > eps_prime) | (asec > eps_prime)
        if not bad.any():
            return DerandomizationResult(
                idx.tolist(), L, eps, eps_prime, attempt,
                [{"p_error": float(a), "secrecy": float(b)} for a, b in zip(ape, asec)],
            )
        violations += bad
    raise SearchFailureError(
        f"no admissible family in {retries} attempts", (violations / retries).tolist()
    )


def derandomize_success_rate(family: CodeFamily, state_set, eps_prime: float, L: int,
                             attempts: int, rng) -> float:
    """Fraction of random size-``L`` subfamilies meeting ``eps'`` (report only, any ``L``)."""
    evaluators = [ExactEvaluator(family.ch, s, family.cfg) for s in state_set]
    pe = np.array([[ev.code_metrics(family, k)["p_error"] for k in range(len(family))] for ev in evaluators])
    sec = np.array([[ev.code_metrics(family, k)["independence_tv"] for k in range(len(family))] for ev in evaluators])
    ok = 0
    for _ in range(attempts):
        idx = rng.integers(len(family), size=L)
        ok += bool(np.all(pe[:, idx].mean(axis=1) <= eps_prime) and np.all(sec[:, idx].mean(axis=1) <= eps_prime))
    return ok / attempts


# -- state sequences ----------------------------------------------------------------


def make_states(spec: dict, n_prime: int, rng=None) -> np.ndarray:
    """State sequence from a generator spec.

    ``{"kind": "constant-weight", "beta": b}`` puts ``floor(b n')`` ones first;
    ``{"kind": "iid-bernoulli", "beta": b}`` draws each state independently
    (needs ``rng``); ``{"kind": "explicit", "states": [...]}`` is used as is.
    """
    kind = spec.get("kind")
    if kind == "constant-weight":
        from .estimator import constant_weight_state

        return constant_weight_state(n_prime, float(spec["beta"]))
    if kind == "iid-bernoulli":
        b = float(spec["beta"])
        if not 0.0 <= b <= 1.0:
            raise DomainError(f"beta={b} outside [0, 1]")
        if rng is None:
            raise PreconditionError("iid-bernoulli states need a generator")
        return (rng.random(n_prime) < b).astype(np.int64)
    if kind == "explicit":
        return _check_states(spec["states"], n_prime)
    raise ValueError(f"unknown state generator {kind!r}")
