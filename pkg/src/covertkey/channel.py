"""State-dependent discrete memoryless channels with binary input and state.

A channel is stored as a tensor ``W[x, s, y, z]``: for each input ``x`` and
warden-chosen state ``s`` one joint slice over Bob's output ``y`` and
Willie's output ``z``.  Output sequences are handled as symbol *indices*
into ``y_alphabet`` / ``z_alphabet``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AlphabetError, ChannelParseError, NormalizationError, ShapeError
from .probcore import JointPmf, Pmf, bernoulli

BINARY = (0, 1)
SLICE_KEYS = {(x, s): f"x{x}_s{s}" for x in BINARY for s in BINARY}


@dataclass(frozen=True, eq=False)
class StateDmc:
    """Channel ``W_{YZ|XS}`` with X = S = {0, 1}."""

    y_alphabet: tuple
    z_alphabet: tuple
    tensor: np.ndarray

    def __post_init__(self):
        ya, za = tuple(self.y_alphabet), tuple(self.z_alphabet)
        w = np.array(self.tensor, dtype=float)
        if w.shape != (2, 2, len(ya), len(za)):
            raise ShapeError(
                f"channel tensor must have shape (2, 2, {len(ya)}, {len(za)}), got {w.shape}"
            )
        for x in BINARY:
            for s in BINARY:
                # validates normalization and non-negativity
                JointPmf(ya, za, w[x, s])
        w.setflags(write=False)
        object.__setattr__(self, "y_alphabet", ya)
        object.__setattr__(self, "z_alphabet", za)
        object.__setattr__(self, "tensor", w)

    @classmethod
    def independent(cls, p: dict, q: dict) -> "StateDmc":
        """Build ``(PQ)_x^s = P_x^s x Q_x^s`` from per-(x, s) marginals."""
        ya, za = p[0, 0].support, q[0, 0].support
        w = np.empty((2, 2, len(ya), len(za)))
        for x in BINARY:
            for s in BINARY:
                w[x, s] = np.outer(p[x, s].mass, q[x, s].mass)
        return cls(ya, za, w)

    @property
    def ny(self) -> int:
        return len(self.y_alphabet)

    @property
    def nz(self) -> int:
        return len(self.z_alphabet)

    def joint_pq(self, x: int, s: int) -> JointPmf:
        return JointPmf(self.y_alphabet, self.z_alphabet, self.tensor[x, s])

    def marginal_p(self, x: int, s: int) -> Pmf:
        return Pmf(self.y_alphabet, self.tensor[x, s].sum(axis=1))

    def marginal_q(self, x: int, s: int) -> Pmf:
        return Pmf(self.z_alphabet, self.tensor[x, s].sum(axis=0))

    def y_given_x(self, s_weight: float) -> np.ndarray:
        """Bob's averaged channel ``beta * P_x^1 + (1 - beta) * P_x^0`` as a 2 x |Y| matrix."""
        py = self.tensor.sum(axis=3)
        return (1.0 - s_weight) * py[:, 0] + s_weight * py[:, 1]

    def innocent_y(self) -> Pmf:
        """P_0, Bob's output law when nothing is sent (state-0 slice)."""
        return self.marginal_p(0, 0)

    def to_dict(self) -> dict:
        return {
            "y_alphabet": list(self.y_alphabet),
            "z_alphabet": list(self.z_alphabet),
            "slices": {
                SLICE_KEYS[x, s]: self.tensor[x, s].ravel().tolist()
                for x in BINARY
                for s in BINARY
            },
        }


@dataclass(frozen=True)
class HypothesisReport:
    """Entrywise checks of the structural assumptions on a channel."""

    tol: float
    p0_state_invariant: bool
    p1_states_distinct: bool
    zero_input_independent: tuple
    one_input_independent: tuple
    deviations: dict = field(default_factory=dict)

    @property
    def active_ok(self) -> bool:
        """Assumptions of the active-warden achievability result."""
        return (
            self.p0_state_invariant
            and self.p1_states_distinct
            and all(self.zero_input_independent)
        )

    @property
    def passive_ok(self) -> bool:
        return self.zero_input_independent[0]

    @property
    def independent_ok(self) -> bool:
        return self.zero_input_independent[0] and self.one_input_independent[0]

    def failures(self) -> list:
        out = []
        if not self.p0_state_invariant:
            out.append("P_0^0 != P_0^1")
        if not self.p1_states_distinct:
            out.append("P_1^1 == P_1^0")
        for s, ok in enumerate(self.zero_input_independent):
            if not ok:
                out.append(f"(PQ)_0^{s} != P_0^{s} x Q_0^{s}")
        return out


def _max_dev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def validate_hypotheses(ch: StateDmc, tol: float = 1e-12) -> HypothesisReport:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    dev = {
        "p0_state": _max_dev(ch.marginal_p(0, 0).mass, ch.marginal_p(0, 1).mass),
        "p1_states": _max_dev(ch.marginal_p(1, 1).mass, ch.marginal_p(1, 0).mass),
    }
    zero, one = [], []
    for s in BINARY:
        for x, bucket in ((0, zero), (1, one)):
            d = _max_dev(ch.tensor[x, s], ch.joint_pq(x, s).marginal_product().mass)
            dev[f"independence_x{x}_s{s}"] = d
            bucket.append(d <= tol)
    return HypothesisReport(
        tol=tol,
        p0_state_invariant=dev["p0_state"] <= tol,
        p1_states_distinct=dev["p1_states"] > tol,
        zero_input_independent=tuple(zero),
        one_input_independent=tuple(one),
        deviations=dev,
    )


def sample(ch: StateDmc, xs, ss, rng: np.random.Generator):
    """Pass ``xs`` through the channel under states ``ss``.

    Returns ``(y, z)`` as index arrays.  One uniform draw per channel use, so
    the output is a deterministic function of the generator state.
    """
    xs = np.asarray(xs, dtype=np.int64)
    ss = np.asarray(ss, dtype=np.int64)
    if xs.shape != ss.shape or xs.ndim != 1:
        raise ShapeError(f"input/state shapes differ: {xs.shape} vs {ss.shape}")
    if xs.size and (xs.min() < 0 or xs.max() > 1 or ss.min() < 0 or ss.max() > 1):
        raise AlphabetError("inputs and states must be binary")
    cdf = np.cumsum(ch.tensor.reshape(2, 2, -1), axis=2)
    cdf[..., -1] = 1.0
    u = rng.random(xs.size)
    flat = np.sum(u[:, None] >= cdf[xs, ss], axis=1)
    return flat // ch.nz, flat % ch.nz


def _bsc_rows(flip0: float, flip1: float) -> tuple:
    return bernoulli(flip0), bernoulli(1.0 - flip1)


def example_fig2() -> StateDmc:
    """Binary example with independent outputs given (x, s).

    State 0: Bob sees BSC(0.1), Willie sees BSC(0.4).
    State 1: Bob sees a binary asymmetric channel flipping 0 w.p. 0.1 and
    1 w.p. 0.2; Willie sees BSC(0.3).
    """
    p, q = {}, {}
    p[0, 0], p[1, 0] = _bsc_rows(0.1, 0.1)
    q[0, 0], q[1, 0] = _bsc_rows(0.4, 0.4)
    p[0, 1], p[1, 1] = _bsc_rows(0.1, 0.2)
    q[0, 1], q[1, 1] = _bsc_rows(0.3, 0.3)
    return StateDmc.independent(p, q)


def channel_from_dict(data: dict) -> StateDmc:
    try:
        ya = tuple(data["y_alphabet"])
        za = tuple(data["z_alphabet"])
        slices = data["slices"]
        w = np.empty((2, 2, len(ya), len(za)))
        for (x, s), key in SLICE_KEYS.items():
            arr = np.asarray(slices[key], dtype=float)
            if arr.size != len(ya) * len(za):
                raise ChannelParseError(
                    f"slice {key} has {arr.size} entries, expected {len(ya) * len(za)}"
                )
            w[x, s] = arr.reshape(len(ya), len(za))
    except ChannelParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelParseError(f"malformed channel spec: {exc}") from exc
    extra = set(slices) - set(SLICE_KEYS.values())
    if extra:
        raise ChannelParseError(f"unknown slices {sorted(extra)}")
    try:
        return StateDmc(ya, za, w)
    except (NormalizationError, ShapeError) as exc:
        raise ChannelParseError(f"invalid channel: {exc}") from exc


def load_channel(path) -> StateDmc:
    """Read a channel spec (JSON with four row-major Y x Z slices)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelParseError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ChannelParseError(f"{path}: top level must be an object")
    return channel_from_dict(data)


def dump_channel(ch: StateDmc, path) -> None:
    Path(path).write_text(json.dumps(ch.to_dict(), indent=2) + "\n")
