"""Finite-alphabet probability tables and information measures.

All divergences and entropies are in bits.  Distributions are immutable
value objects: their mass arrays are flagged read-only after validation.

Sequences passed to the type/empirical functions may hold any hashable
symbols; they are relabelled internally, and empirical quantities do not
depend on the labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    AlphabetError,
    DivergenceInfiniteError,
    DomainError,
    NormalizationError,
    ShapeError,
)

NORMALIZATION_TOL = 1e-12


def _frozen(values, ndim):
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ShapeError(f"expected a {ndim}-d mass array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_mass(arr):
    if not np.all(np.isfinite(arr)):
        raise NormalizationError("masses must be finite")
    if np.any(arr < 0):
        raise NormalizationError(f"negative mass {arr.min()!r}")
    total = arr.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"masses sum to {total!r}, not 1")


def _check_labels(labels, what):
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise AlphabetError(f"{what} labels are not unique: {labels}")
    if not labels:
        raise AlphabetError(f"{what} is empty")
    return labels


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over an ordered finite alphabet."""

    support: tuple
    mass: np.ndarray

    def __post_init__(self):
        support = _check_labels(self.support, "support")
        mass = _frozen(self.mass, 1)
        if mass.shape[0] != len(support):
            raise ShapeError(f"{len(support)} labels but {mass.shape[0]} masses")
        _check_mass(mass)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_weights(cls, support, weights) -> "Pmf":
        """Build a PMF by explicitly normalizing non-negative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise NormalizationError("weights must be non-negative with positive total")
        return cls(tuple(support), w / w.sum())

    @classmethod
    def uniform(cls, support) -> "Pmf":
        support = tuple(support)
        return cls(support, np.full(len(support), 1.0 / len(support)))

    @classmethod
    def point(cls, support, label) -> "Pmf":
        support = tuple(support)
        mass = np.zeros(len(support))
        mass[support.index(label)] = 1.0
        return cls(support, mass)

    def __len__(self):
        return len(self.support)

    def __getitem__(self, label) -> float:
        try:
            return float(self.mass[self.support.index(label)])
        except ValueError:
            raise AlphabetError(f"{label!r} not in support {self.support}") from None

    def __repr__(self):
        body = ", ".join(f"{s!r}: {m:.6g}" for s, m in zip(self.support, self.mass))
        return f"Pmf({{{body}}})"

    def isclose(self, other: "Pmf", tol: float = 1e-12) -> bool:
        return self.support == other.support and bool(
            np.max(np.abs(self.mass - other.mass)) <= tol
        )

    def mix(self, other: "Pmf", weight: float) -> "Pmf":
        """Return ``(1 - weight) * self + weight * other``."""
        if self.support != other.support:
            raise AlphabetError("cannot mix PMFs over different supports")
        if not 0.0 <= weight <= 1.0:
            raise DomainError(f"mixture weight {weight} outside [0, 1]")
        return Pmf(self.support, (1.0 - weight) * self.mass + weight * other.mass)

    def product(self, other: "Pmf") -> "JointPmf":
        return JointPmf(self.support, other.support, np.outer(self.mass, other.mass))

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        """Draw symbol *indices* (not labels)."""
        return rng.choice(len(self.mass), size=size, p=self.mass)


def bernoulli(p: float) -> Pmf:
    """Bernoulli(p) over the support (0, 1)."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Bernoulli parameter {p} outside [0, 1]")
    return Pmf((0, 1), np.array([1.0 - p, p]))


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint PMF over a row alphabet times a column alphabet."""

    rows: tuple
    cols: tuple
    mass: np.ndarray

    def __post_init__(self):
        rows = _check_labels(self.rows, "row alphabet")
        cols = _check_labels(self.cols, "column alphabet")
        mass = _frozen(self.mass, 2)
        if mass.shape != (len(rows), len(cols)):
            raise ShapeError(f"mass shape {mass.shape} does not match alphabets")
        _check_mass(mass)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def product(cls, p: Pmf, q: Pmf) -> "JointPmf":
        return p.product(q)

    def row_marginal(self) -> Pmf:
        return Pmf(self.rows, self.mass.sum(axis=1))

    def col_marginal(self) -> Pmf:
        return Pmf(self.cols, self.mass.sum(axis=0))

    def marginal_product(self) -> "JointPmf":
        return self.row_marginal().product(self.col_marginal())

    def flatten(self) -> Pmf:
        """View as a PMF over ``(row, col)`` pairs, row-major."""
        labels = tuple((r, c) for r in self.rows for c in self.cols)
        return Pmf(labels, self.mass.ravel())

    def transpose(self) -> "JointPmf":
        return JointPmf(self.cols, self.rows, self.mass.T)

    def conditional(self) -> "CondPmf":
        """Column given row; rows with zero mass get a uniform conditional."""
        marg = self.mass.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            mat = np.where(marg > 0, self.mass / marg, 1.0 / len(self.cols))
        return CondPmf(self.rows, self.cols, mat)

    def isclose(self, other: "JointPmf", tol: float = 1e-12) -> bool:
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and bool(np.max(np.abs(self.mass - other.mass)) <= tol)
        )


@dataclass(frozen=True, eq=False)
class CondPmf:
    """Conditional PMF: for each input symbol, a PMF over the outputs."""

    inputs: tuple
    outputs: tuple
    matrix: np.ndarray

    def __post_init__(self):
        inputs = _check_labels(self.inputs, "input alphabet")
        outputs = _check_labels(self.outputs, "output alphabet")
        mat = _frozen(self.matrix, 2)
        if mat.shape != (len(inputs), len(outputs)):
            raise ShapeError(f"matrix shape {mat.shape} does not match alphabets")
        for row in mat:
            _check_mass(row)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_rows(cls, inputs, rows: Sequence[Pmf]) -> "CondPmf":
        outputs = rows[0].support
        if any(r.support != outputs for r in rows):
            raise AlphabetError("all rows must share one output alphabet")
        return cls(tuple(inputs), outputs, np.vstack([r.mass for r in rows]))

    def row(self, symbol) -> Pmf:
        return Pmf(self.outputs, self.matrix[self.inputs.index(symbol)])

    def joint(self, input_pmf: Pmf) -> JointPmf:
        if input_pmf.support != self.inputs:
            raise AlphabetError("input PMF support does not match the channel inputs")
        return JointPmf(self.inputs, self.outputs, input_pmf.mass[:, None] * self.matrix)


@dataclass(frozen=True, eq=False)
class SeqType:
    """Empirical type: symbol counts of one sequence or pair counts of two."""

    n: int
    labels: tuple
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if np.any(counts < 0) or int(counts.sum()) != self.n:
            raise ShapeError(f"counts must be non-negative and sum to n={self.n}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def to_pmf(self) -> Pmf:
        if self.counts.ndim != 1:
            raise ShapeError("joint type; use to_joint()")
        return Pmf(self.labels, self.counts / self.n)

    def to_joint(self) -> JointPmf:
        if self.counts.ndim != 2:
            raise ShapeError("single-sequence type; use to_pmf()")
        rows, cols = self.labels
        return JointPmf(rows, cols, self.counts / self.n)


def _relabel(seq):
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError("sequences must be non-empty and one-dimensional")
    labels, codes = np.unique(arr, return_inverse=True)
    return tuple(labels.tolist()), codes.ravel()


def seq_type(x: Sequence[Hashable]) -> SeqType:
    """Type of ``x``: N(x|a) for every symbol a occurring in x."""
    labels, codes = _relabel(x)
    return SeqType(len(codes), labels, np.bincount(codes, minlength=len(labels)))


def joint_type(x: Sequence[Hashable], y: Sequence[Hashable]) -> SeqType:
    """Joint type N(x, y | a, b) of two equal-length sequences."""
    if len(x) != len(y):
        raise ShapeError(f"length mismatch: {len(x)} vs {len(y)}")
    lx, cx = _relabel(x)
    ly, cy = _relabel(y)
    counts = np.bincount(cx * len(ly) + cy, minlength=len(lx) * len(ly))
    return SeqType(len(cx), (lx, ly), counts.reshape(len(lx), len(ly)))


def weight(x) -> int:
    """Hamming weight of a binary sequence."""
    return int(np.count_nonzero(np.asarray(x)))


def _aligned(p, q):
    if isinstance(p, JointPmf) and isinstance(q, JointPmf):
        if p.rows != q.rows or p.cols != q.cols:
            raise AlphabetError("joint PMFs are over different alphabets")
    elif isinstance(p, Pmf) and isinstance(q, Pmf):
        if p.support != q.support:
            raise AlphabetError(f"supports differ: {p.support} vs {q.support}")
    else:
        raise AlphabetError("cannot compare a PMF with a joint PMF")
    return p.mass.ravel(), q.mass.ravel()


def kl(p, q) -> float:
    """Kullback-Leibler divergence D(p||q) in bits.

    Raises
    ------
    DivergenceInfiniteError
        If some symbol has ``q == 0 < p``.
    """
    pm, qm = _aligned(p, q)
    pos = pm > 0
    if np.any(qm[pos] == 0):
        raise DivergenceInfiniteError("p is not absolutely continuous w.r.t. q")
    return max(float(np.sum(pm[pos] * np.log2(pm[pos] / qm[pos]))), 0.0)


def chi2(p, q) -> float:
    """Chi-squared divergence sum (p - q)^2 / q; q must be strictly positive."""
    pm, qm = _aligned(p, q)
    if np.any(qm <= 0):
        raise DivergenceInfiniteError("chi-squared divergence needs q > 0 everywhere")
    return float(np.sum((pm - qm) ** 2 / qm))


def tv(p, q) -> float:
    """Total variation distance, half the L1 distance."""
    pm, qm = _aligned(p, q)
    return float(0.5 * np.sum(np.abs(pm - qm)))


def entropy(p: Pmf) -> float:
    m = p.mass[p.mass > 0]
    return float(-np.sum(m * np.log2(m)))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy argument {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def mutual_information(j: JointPmf) -> float:
    """I(X;Y) in bits for the joint PMF ``j``."""
    m = j.mass
    pos = m > 0
    rows, cols = np.nonzero(pos)
    # work in logs so subnormal masses neither underflow nor overflow the ratio
    log_ratio = np.log2(m[pos]) - np.log2(m.sum(axis=1)[rows]) - np.log2(m.sum(axis=0)[cols])
    return max(float(np.sum(m[pos] * log_ratio)), 0.0)


def empirical_mi(x: Sequence[Hashable], y: Sequence[Hashable]) -> float:
    """Mutual information of the joint type of ``(x, y)``."""
    return mutual_information(joint_type(x, y).to_joint())
