"""Random codebooks, the likelihood encoder, the MMI decoder and their bounds.

Index conventions: codebook indices ``w1`` (key), ``w2`` (public message) and
``w3`` (extra randomization) are 0-based.  Sequences are arrays of symbol
indices.  Whenever a sequence space is enumerated, sequences are ordered
lexicographically with the first position most significant, matching
``np.kron`` of per-position tables.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import GuardError, PreconditionError, ShapeError
from .probcore import JointPmf, Pmf, tv

MAX_CODEBOOK_SYMBOLS = 1 << 24
MAX_ENUMERATION = 1 << 20
MAX_PAIR_TABLE = 1 << 24
# decoder scores closer than this count as tied; the smallest index wins
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Codebook:
    """Entries ``entries[w1, w2, w3]`` are length-``n`` sequences drawn iid from ``qy``."""

    entries: np.ndarray
    qy: Pmf
    seed: object = None

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int64)
        if e.ndim != 4:
            raise ShapeError("entries must have shape (M1, M2, M3, n)")
        if e.size and (e.min() < 0 or e.max() >= len(self.qy)):
            raise ShapeError("codebook symbol outside the alphabet of qy")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def m1(self) -> int:
        return self.entries.shape[0]

    @property
    def m2(self) -> int:
        return self.entries.shape[1]

    @property
    def m3(self) -> int:
        return self.entries.shape[2]

    @property
    def n(self) -> int:
        return self.entries.shape[3]

    @property
    def ky(self) -> int:
        return len(self.qy)

    @cached_property
    def codes(self) -> np.ndarray:
        """Integer code of every entry, shape (M1, M2, M3)."""
        return sequence_codes(self.entries, self.ky)


def gen_codebook(qy: Pmf, n: int, m1: int, m2: int, m3: int, rng, seed=None) -> Codebook:
    if min(n, m1, m2, m3) < 1:
        raise ValueError("codebook dimensions must be positive")
    total = n * m1 * m2 * m3
    if total > MAX_CODEBOOK_SYMBOLS:
        raise GuardError(f"codebook would hold {total} symbols (limit {MAX_CODEBOOK_SYMBOLS})")
    entries = qy.sample((m1, m2, m3, n), rng)
    return Codebook(entries, qy, seed)


def sequence_codes(seqs: np.ndarray, k: int) -> np.ndarray:
    seqs = np.asarray(seqs, dtype=np.int64)
    n = seqs.shape[-1]
    weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return seqs @ weights


def all_sequences(k: int, n: int) -> np.ndarray:
    """Every sequence in {0..k-1}^n, shape (k**n, n), first position most significant."""
    codes = np.arange(k**n, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % k


# -- encoder -----------------------------------------------------------------


def encoder_distribution(y, cb: Codebook):
    """Likelihood-encoder law of ``(w1, w2)`` given Bob's sequence ``y``.

    Returns ``(probs, fallback)`` where ``probs`` has shape (M1, M2).  Each
    pair is weighted by how many ``w3`` entries equal ``y``; when nothing
    matches, ``fallback`` is True and the law is uniform.
    """
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (cb.n,):
        raise ShapeError(f"sequence length {y.shape} does not match codebook n={cb.n}")
    hits = _kernels.row_matches(y, cb.entries.reshape(-1, cb.n))
    counts = hits.reshape(cb.m1, cb.m2, cb.m3).sum(axis=2).astype(float)
    total = counts.sum()
    if total == 0:
        return np.full((cb.m1, cb.m2), 1.0 / (cb.m1 * cb.m2)), True
    return counts / total, False


def likelihood_encode(y, cb: Codebook, rng) -> tuple:
    """Draw ``(w1, w2)`` from :func:`encoder_distribution`."""
    probs, _ = encoder_distribution(y, cb)
    flat = int(rng.choice(probs.size, p=probs.ravel()))
    return divmod(flat, cb.m2)


def encoder_table(cb: Codebook):
    """Encoder law for every ``y`` in Y^n at once.

    Returns ``(table, fallback)`` with ``table[y_code, w1, w2]`` and a boolean
    mask of the sequences that match no entry.
    """
    size = cb.ky**cb.n
    if size * cb.m1 * cb.m2 * cb.m3 > MAX_ENUMERATION:
        raise GuardError(f"|Y|^n * M1 M2 M3 = {size * cb.m1 * cb.m2 * cb.m3} exceeds {MAX_ENUMERATION}")
    counts = np.zeros((size, cb.m1, cb.m2))
    w1, w2, _ = np.indices(cb.codes.shape)
    np.add.at(counts, (cb.codes.ravel(), w1.ravel(), w2.ravel()), 1.0)
    total = counts.sum(axis=(1, 2))
    fallback = total == 0
    table = np.where(
        fallback[:, None, None],
        1.0 / (cb.m1 * cb.m2),
        counts / np.where(fallback, 1.0, total)[:, None, None],
    )
    return table, fallback


# -- decoder -----------------------------------------------------------------


def _scores(xs: np.ndarray, cands: np.ndarray, ky: int, nu) -> np.ndarray:
    """Score matrix (len(xs), len(cands)); empirical MI when ``nu`` is None."""
    if nu is None:
        kx = int(xs.max()) + 1 if xs.size else 1
        return _kernels.mi_matrix(xs, cands, max(kx, 2), ky)
    if callable(nu):
        return np.array([[float(nu(x, c)) for c in cands] for x in xs])
    nu = np.asarray(nu, dtype=float)
    out = np.zeros((xs.shape[0], cands.shape[0]))
    for t in range(xs.shape[1]):
        out += nu[xs[:, t]][:, cands[:, t]]
    return out


def first_argmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    """Argmax treating values within TIE_TOL of the maximum as ties, lowest index first."""
    best = scores.max(axis=axis, keepdims=True)
    return np.argmax(scores >= best - TIE_TOL, axis=axis)


def decoder_scores(x, w2: int, cb: Codebook, nu=None) -> np.ndarray:
    """Per-``w1`` score: the best score over ``w3`` of the entries at ``(w1, w2)``."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (cb.n,):
        raise ShapeError(f"sequence length {x.shape} does not match codebook n={cb.n}")
    cands = cb.entries[:, w2].reshape(cb.m1 * cb.m3, cb.n)
    s = _scores(x[None, :], cands, cb.ky, nu)[0]
    return s.reshape(cb.m1, cb.m3).max(axis=1)


def mmi_decode(x, w2: int, cb: Codebook, nu=None) -> int:
    """Alice's estimate of ``w1`` from her input sequence and the public ``w2``.

    ``nu=None`` scores candidates by empirical mutual information; otherwise
    ``nu`` is an |X| x |Y| table summed along the sequence, or a callable
    ``nu(x_seq, y_seq)``.
    """
    return int(first_argmax(decoder_scores(x, w2, cb, nu)))


def decoder_table(cb: Codebook, kx: int, nu=None) -> np.ndarray:
    """``table[x_code, w2]`` = decoded ``w1`` for every ``x`` in X^n."""
    size = kx**cb.n
    if size * cb.m1 * cb.m2 * cb.m3 > MAX_PAIR_TABLE:
        raise GuardError("decoder table too large to enumerate")
    xs = all_sequences(kx, cb.n)
    if nu is None:
        s = _kernels.mi_matrix(xs, cb.entries.reshape(-1, cb.n), max(kx, 2), cb.ky)
    else:
        s = _scores(xs, cb.entries.reshape(-1, cb.n), cb.ky, nu)
    s = s.reshape(size, cb.m1, cb.m2, cb.m3).max(axis=3)
    return first_argmax(s, axis=1)


# -- bound evaluators ----------------------------------------------------------


def delta_range(total: int, mu_q: float) -> tuple:
    """Open interval of admissible ``delta``; empty when ``lo >= 1``."""
    if total < 2 or mu_q <= 0:
        return math.inf, 1.0
    return 2.0 / ((total - 1) * mu_q), 1.0


def _check_delta(delta, total, mu_q):
    lo, hi = delta_range(total, mu_q)
    if not lo < delta < hi:
        raise PreconditionError(f"delta={delta} outside ({lo:.4g}, 1)")


def _codebook_term(total, mu_q, delta):
    return (2 + total) * math.exp(-(total - 1) * mu_q * delta**2 / 32.0)


def q_tail(nu, qy: Pmf) -> np.ndarray:
    """q(x, y) = sum_{y'} Q_Y(y') [nu(x, y') >= nu(x, y)] for a score table ``nu``."""
    nu = np.asarray(nu, dtype=float)
    ge = nu[:, None, :] >= nu[:, :, None]  # [x, y, y']
    return ge @ qy.mass


def information_density(p_xy: JointPmf, qy: Pmf) -> np.ndarray:
    """Default one-shot score P_XY(x, y) / (P_X(x) Q_Y(y))."""
    px = p_xy.mass.sum(axis=1)
    denom = px[:, None] * qy.mass[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0, p_xy.mass / np.where(denom > 0, denom, 1.0), 0.0)


def lemma2_rhs(p_xy: JointPmf, qy: Pmf, nu, key_count: int, total: int, delta: float) -> float:
    """Reliability bound with explicit key-index count and total codebook size."""
    mu_q = float(qy.mass.min())
    _check_delta(delta, total, mu_q)
    q = q_tail(nu, qy)
    first = float(np.sum(p_xy.mass * np.minimum(1.0, key_count * q)))
    return first + _codebook_term(total, mu_q, delta) + delta


def lemma3_rhs(p_yz: JointPmf, qy: Pmf, gamma: float, public_count: int, total: int, delta: float) -> float:
    """Secrecy bound with explicit public-index count and total codebook size."""
    if gamma <= 0:
        raise PreconditionError("gamma must be positive")
    mu_q = float(qy.mass.min())
    _check_delta(delta, total, mu_q)
    pz = p_yz.mass.sum(axis=0)
    heavy = p_yz.mass >= gamma * qy.mass[:, None] * pz[None, :]
    first = float(np.sum(p_yz.mass[heavy]))
    return (
        first
        + 0.5 * math.sqrt(gamma / public_count)
        + 0.5 * delta
        + 0.5 * _codebook_term(total, mu_q, delta)
    )


@dataclass(frozen=True)
class OneShotParams:
    m1: int
    m2: int
    m3: int = 1
    gamma: float = 1.0
    delta: float = 0.5
    nu: object = None

    @property
    def total(self) -> int:
        return self.m1 * self.m2 * self.m3

    @property
    def key_count(self) -> int:
        return self.m1 * self.m3


def reliability_bound_rhs(p_xy: JointPmf, params: OneShotParams, qy: Pmf) -> float:
    nu = params.nu if params.nu is not None else information_density(p_xy, qy)
    return lemma2_rhs(p_xy, qy, nu, params.key_count, params.total, params.delta)


def secrecy_bound_rhs(p_yz: JointPmf, params: OneShotParams, qy: Pmf) -> float:
    return lemma3_rhs(p_yz, qy, params.gamma, params.m2, params.total, params.delta)


def best_delta(total: int, mu_q: float) -> float | None:
    """Admissible delta minimizing delta + (2 + total) exp(-(total-1) mu_q delta^2 / 32).

    Both bounds depend on delta only through this expression (up to a
    factor 1/2), so one minimizer serves both.  None if no delta is admissible.
    """
    lo, hi = delta_range(total, mu_q)
    if lo >= hi:
        return None
    f = lambda d: d + _codebook_term(total, mu_q, d)  # noqa: E731
    eps = 1e-9 * (hi - lo)
    res = minimize_scalar(f, bounds=(lo + eps, hi - eps), method="bounded")
    # the objective is often monotone on the interval; keep the better edge
    return float(min((res.x, lo + eps, hi - eps), key=f))


def best_gamma(p_yz: JointPmf, qy: Pmf, public_count: int) -> float:
    """Gamma minimizing the gamma-dependent part of the secrecy bound.

    The indicator sum only changes at the ratios P_YZ / (P_Z Q_Y), and the
    square-root term increases with gamma, so the optimum sits just above
    one of those ratios.
    """
    pz = p_yz.mass.sum(axis=0)
    ratio = p_yz.mass / (qy.mass[:, None] * pz[None, :])
    cands = np.unique(ratio[np.isfinite(ratio) & (ratio > 0)]) * (1 + 1e-9)

    def g(gamma):
        heavy = p_yz.mass >= gamma * qy.mass[:, None] * pz[None, :]
        return p_yz.mass[heavy].sum() + 0.5 * math.sqrt(gamma / public_count)

    return float(min(cands, key=g)) if cands.size else 1.0


# -- exact evaluation --------------------------------------------------------


def product_table(tables: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of per-position 2-d tables."""
    out = np.asarray(tables[0], dtype=float)
    for t in tables[1:]:
        out = np.kron(out, t)
    return out


@dataclass(frozen=True, eq=False)
class InducedJoint:
    """Exact induced distributions of one code on one (product) source."""

    w1w2z: np.ndarray  # [w1, w2, z_code]
    w1_w1hat: np.ndarray  # [w1, w1hat]
    fallback_prob: float = 0.0

    def p_error(self) -> float:
        return float(max(0.0, 1.0 - np.trace(self.w1_w1hat)))

    def _pmf(self, arr):
        arr = np.clip(arr, 0.0, None)
        return Pmf(tuple(range(arr.size)), arr.ravel() / arr.sum())

    def key_leakage_tv(self) -> float:
        """tv(P_{W1 Z}, uniform x P_Z); the public message is not observed."""
        w1z = self.w1w2z.sum(axis=1)
        pz = w1z.sum(axis=0)
        ideal = np.full(w1z.shape[0], 1.0 / w1z.shape[0])[:, None] * pz[None, :]
        return 0.5 * float(np.abs(w1z - ideal).sum())

    def secrecy_tv(self) -> float:
        """tv(P_{W1 W2 Z}, uniform_{W1} x P_{W2 Z})."""
        j = self.w1w2z
        ideal = np.broadcast_to(j.sum(axis=0, keepdims=True) / j.shape[0], j.shape)
        return 0.5 * float(np.abs(j - ideal).sum())

    def independence_tv(self) -> float:
        """tv(P_{W1 W2 Z}, P_{W1 W2} x P_Z)."""
        j = self.w1w2z
        ideal = j.sum(axis=2, keepdims=True) * j.sum(axis=(0, 1), keepdims=True)
        return 0.5 * float(np.abs(j - ideal).sum())

    def public_uniformity_tv(self) -> float:
        pw2 = self.w1w2z.sum(axis=(0, 2))
        return 0.5 * float(np.abs(pw2 - 1.0 / pw2.size).sum())


def exact_induced_joint(cb: Codebook, source: Sequence[np.ndarray], nu=None) -> InducedJoint:
    """Exact induced law of (W1, W2, Z) and (W1, W1hat) by enumeration.

    ``source`` lists one array ``P_t[x, y, z]`` per position (a product
    source of length ``cb.n``); a one-shot source is a one-element list.
    """
    source = [np.asarray(p, dtype=float) for p in source]
    if len(source) != cb.n:
        raise ShapeError(f"source has {len(source)} positions, codebook n={cb.n}")
    kx, ky, kz = source[0].shape
    if ky != cb.ky:
        raise ShapeError("source Y alphabet does not match the codebook")
    if (kx**cb.n) * (ky**cb.n) > MAX_PAIR_TABLE or (ky**cb.n) * (kz**cb.n) > MAX_PAIR_TABLE:
        raise GuardError("sequence tables too large to enumerate")
    enc, fallback = encoder_table(cb)
    dec = decoder_table(cb, kx, nu)
    return _induced_from_tables(
        product_table([p.sum(axis=2) for p in source]),
        product_table([p.sum(axis=0) for p in source]),
        enc,
        fallback,
        dec,
    )


def _induced_from_tables(p_xy, p_yz, enc, fallback, dec) -> InducedJoint:
    m1, m2 = enc.shape[1:]
    w1w2z = np.einsum("yz,yab->abz", p_yz, enc)
    a = np.tensordot(p_xy, enc, axes=(1, 0))  # [x, w1, w2]
    conf = np.zeros((m1, m1))
    w1_idx = np.broadcast_to(np.arange(m1)[None, :, None], a.shape)
    hat_idx = np.broadcast_to(dec[:, None, :], a.shape)
    np.add.at(conf, (w1_idx.ravel(), hat_idx.ravel()), a.ravel())
    fb = float(p_xy.sum(axis=0)[fallback].sum())
    return InducedJoint(w1w2z, conf, fb)


def error_matrix(enc: np.ndarray, dec: np.ndarray) -> np.ndarray:
    """G[x, y] = P(W1hat != W1 | x, y) for one code."""
    m1 = enc.shape[1]
    # wrong[x, w1, w2] = 1 if decoding (x, w2) misses w1
    wrong = (dec[:, None, :] != np.arange(m1)[None, :, None]).astype(float)
    return np.einsum("xab,yab->xy", wrong, enc)


# -- one-shot verification harness ---------------------------------------------


def simulate_oneshot(cb: Codebook, p_xyz: np.ndarray, trials: int, rng, nu=None) -> dict:
    """Monte-Carlo run of encoder and decoder on a one-shot source."""
    p_xyz = np.asarray(p_xyz, dtype=float)
    kx, ky, kz = p_xyz.shape
    draws = rng.choice(p_xyz.size, size=trials, p=p_xyz.ravel())
    xs, rest = np.divmod(draws, ky * kz)
    ys = rest // kz
    errors = 0
    for x, y in zip(xs, ys):
        w1, w2 = likelihood_encode([y], cb, rng)
        errors += mmi_decode([x], w2, cb, nu) != w1
    return {"p_error": errors / trials, "trials": trials}


@dataclass
class OneShotReport:
    params: dict
    codebooks: int
    mean_error: float
    error_se: float
    error_bound: float
    mean_leakage: float
    leakage_se: float
    secrecy_bound: float
    delta: float | None
    gamma: float
    admissible: bool
    slack: float = 3.0
    extra: dict = field(default_factory=dict)

    @property
    def error_ok(self) -> bool:
        return self.mean_error <= self.error_bound + self.slack * self.error_se

    @property
    def secrecy_ok(self) -> bool:
        return self.mean_leakage <= self.secrecy_bound + self.slack * self.leakage_se

    @property
    def passed(self) -> bool:
        return self.error_ok and self.secrecy_ok

    def to_json(self) -> str:
        d = asdict(self)
        d.update(error_ok=self.error_ok, secrecy_ok=self.secrecy_ok, passed=self.passed)
        return json.dumps(d, sort_keys=True)


def verify_oneshot_bounds(
    p_xyz: np.ndarray,
    m1: int,
    m2: int,
    codebook_draws: int,
    rng,
    qy: Pmf | None = None,
    nu=None,
    bound_scale: float = 1.0,
) -> OneShotReport:
    """Average exact error and key leakage over random codebooks against both bounds.

    ``delta`` and ``gamma`` are chosen to minimize the bounds.  When no
    ``delta`` is admissible for these sizes, neither bound applies and the
    report carries the trivial value 1 with ``admissible=False``.
    """
    p_xyz = np.asarray(p_xyz, dtype=float)
    kx, ky, kz = p_xyz.shape
    p_xy = JointPmf(tuple(range(kx)), tuple(range(ky)), p_xyz.sum(axis=2))
    p_yz = JointPmf(tuple(range(ky)), tuple(range(kz)), p_xyz.sum(axis=0))
    if qy is None:
        qy = p_xy.col_marginal()
    if nu is None:
        nu = information_density(p_xy, qy)
    total = m1 * m2
    mu_q = float(qy.mass.min())
    delta = best_delta(total, mu_q)
    gamma = best_gamma(p_yz, qy, m2)
    if delta is None:
        err_bound = sec_bound = 1.0
    else:
        err_bound = lemma2_rhs(p_xy, qy, nu, m1, total, delta)
        sec_bound = lemma3_rhs(p_yz, qy, gamma, m2, total, delta)

    errs = np.empty(codebook_draws)
    leaks = np.empty(codebook_draws)
    for i in range(codebook_draws):
        cb = gen_codebook(qy, 1, m1, m2, 1, rng)
        ij = exact_induced_joint(cb, [p_xyz], nu)
        errs[i] = ij.p_error()
        leaks[i] = ij.key_leakage_tv()
    se = lambda a: float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0  # noqa: E731
    return OneShotReport(
        params={"m1": m1, "m2": m2, "kx": kx, "ky": ky, "kz": kz},
        codebooks=codebook_draws,
        mean_error=float(errs.mean()),
        error_se=se(errs),
        error_bound=bound_scale * err_bound,
        mean_leakage=float(leaks.mean()),
        leakage_se=se(leaks),
        secrecy_bound=bound_scale * sec_bound,
        delta=delta,
        gamma=gamma,
        admissible=delta is not None,
    )


def binary_chain_source(px1: float, flip_y: float, flip_z: float) -> np.ndarray:
    """P[x, y, z] for X ~ Bern(px1), Y = X through BSC(flip_y), Z = Y through BSC(flip_z)."""
    px = np.array([1 - px1, px1])
    bsc = lambda f: np.array([[1 - f, f], [f, 1 - f]])  # noqa: E731
    return px[:, None, None] * bsc(flip_y)[:, :, None] * bsc(flip_z)[None, :, :]
