"""Finite probability spaces, random variables and partitions.

A sigma-field on a finite outcome set is represented by the partition into
its atoms.  Conditional expectation given a sigma-field is then a
probability-weighted block average, which is exact up to floating point.

Outcomes are indexed from 0 everywhere in code and in serialized documents.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyWeights, NegativeWeight, SizeMismatch, SpaceMismatch, ZeroMass

# Two variables are a.s. equal when they agree within this on every
# positive-probability outcome.
AS_TOL = 1e-9
LEVEL_SET_TOL = 1e-9
_SUM_TOL = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class ProbabilitySpace:
    """A finite outcome set with one probability weight per outcome."""

    __slots__ = ("weights",)

    def __init__(self, weights: Sequence[float]):
        w = _frozen(weights)
        if w.ndim != 1 or w.size == 0:
            raise EmptyWeights("a probability space needs at least one outcome")
        if not np.all(np.isfinite(w)):
            raise NegativeWeight("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight(f"negative weight at outcome {int(np.argmax(w < 0))}")
        if abs(w.sum() - 1.0) > _SUM_TOL:
            raise ZeroMass(f"weights sum to {w.sum()!r}, not 1; use make_space to normalize")
        self.weights = w

    @property
    def n_outcomes(self) -> int:
        return int(self.weights.size)

    @property
    def positive(self) -> np.ndarray:
        """Boolean mask of outcomes with positive probability."""
        return self.weights > 0

    def rv(self, values: Iterable[float]) -> "RandomVariable":
        return RandomVariable(self, values)

    def constant(self, c: float) -> "RandomVariable":
        return RandomVariable(self, np.full(self.n_outcomes, float(c)))

    def prob(self, mask) -> float:
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())

    def __eq__(self, other):
        if not isinstance(other, ProbabilitySpace):
            return NotImplemented
        return self is other or np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"ProbabilitySpace(n_outcomes={self.n_outcomes})"

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProbabilitySpace":
        return make_space(doc["weights"])


class RandomVariable:
    """A real value per outcome of a particular space."""

    __slots__ = ("space", "values")
    # numpy scalars defer to our reflected operators instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, space: ProbabilitySpace, values: Iterable[float]):
        v = _frozen(list(values) if not isinstance(values, np.ndarray) else values)
        if v.shape != (space.n_outcomes,):
            raise SpaceMismatch(
                f"variable has {v.size} values but the space has {space.n_outcomes} outcomes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("random variable values must be finite")
        self.space = space
        self.values = v

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def _lift(self, other):
        if isinstance(other, RandomVariable):
            _check_space(self.space, other)
            return other.values
        return other

    def __add__(self, other):
        return RandomVariable(self.space, self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVariable(self.space, self.values - self._lift(other))

    def __rsub__(self, other):
        return RandomVariable(self.space, self._lift(other) - self.values)

    def __mul__(self, other):
        return RandomVariable(self.space, self.values * self._lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(self.space, -self.values)

    def __repr__(self):
        return f"RandomVariable({self.values.tolist()!r})"

    def to_dict(self) -> dict:
        return {"values": self.values.tolist()}

    @classmethod
    def from_dict(cls, space: ProbabilitySpace, doc: dict) -> "RandomVariable":
        return cls(space, doc["values"])


def _canonical(labels: np.ndarray) -> np.ndarray:
    """Relabel blocks 0, 1, 2, ... in order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse.reshape(-1)]


class Partition:
    """Disjoint, non-empty blocks of outcome indices covering every outcome.

    Stored as one block label per outcome; labels are canonical (numbered in
    order of first appearance) so equal partitions compare equal.
    """

    __slots__ = ("labels",)

    def __init__(self, labels: Iterable[int]):
        lab = np.asarray(list(labels) if not isinstance(labels, np.ndarray) else labels)
        if lab.ndim != 1 or lab.size == 0:
            raise SizeMismatch("a partition needs at least one outcome")
        self.labels = _frozen(_canonical(lab), dtype=np.intp)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n_outcomes: int | None = None) -> "Partition":
        blocks = [list(b) for b in blocks]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("partition blocks must be non-empty")
        flat = [i for b in blocks for i in b]
        n = len(flat) if n_outcomes is None else n_outcomes
        if sorted(flat) != list(range(n)):
            raise ValueError("blocks must cover every outcome index exactly once")
        labels = np.empty(n, dtype=np.intp)
        for k, b in enumerate(blocks):
            labels[b] = k
        return cls(labels)

    @classmethod
    def trivial(cls, n_outcomes: int) -> "Partition":
        return cls(np.zeros(n_outcomes, dtype=np.intp))

    @classmethod
    def finest(cls, n_outcomes: int) -> "Partition":
        return cls(np.arange(n_outcomes))

    @property
    def n_outcomes(self) -> int:
        return int(self.labels.size)

    @property
    def n_blocks(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def blocks(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for i, k in enumerate(self.labels):
            out[k].append(i)
        return [tuple(b) for b in out]

    def refines(self, other: "Partition") -> bool:
        """True when every block of self sits inside one block of other."""
        if self.n_outcomes != other.n_outcomes:
            raise SizeMismatch("partitions are over different outcome counts")
        pairs = np.unique(np.stack([self.labels, other.labels], axis=1), axis=0)
        return pairs.shape[0] == self.n_blocks

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"Partition({[list(b) for b in self.blocks]!r})"

    def to_dict(self) -> dict:
        return {"blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, doc: dict, n_outcomes: int | None = None) -> "Partition":
        return cls.from_blocks(doc["blocks"], n_outcomes)


def _check_space(space: ProbabilitySpace, x: RandomVariable) -> None:
    if x.space is not space and x.space != space:
        raise SpaceMismatch("random variable is defined on a different space")


def _check_partition(space: ProbabilitySpace, g: Partition) -> None:
    if g.n_outcomes != space.n_outcomes:
        raise SpaceMismatch(
            f"partition covers {g.n_outcomes} outcomes, space has {space.n_outcomes}"
        )


def make_space(weights: Sequence[float]) -> ProbabilitySpace:
    """Normalize non-negative weights into a probability space.

    The last positive weight absorbs the rounding residue so the weights
    sum to 1 (the largest weight does, if the last is too small to).
    """
    w = np.array(weights, dtype=float).reshape(-1)
    if w.size == 0:
        raise EmptyWeights("weights list is empty")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise NegativeWeight("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ZeroMass("weights sum to zero")
    w = w / total
    last = int(np.flatnonzero(w > 0)[-1])
    keep = w[last]
    w[last] = 0.0
    w[last] = 1.0 - w.sum()
    if w[last] < 0:
        # too small to absorb the residue; hand it to the largest weight
        w[last] = keep
        big = int(np.argmax(w))
        w[big] = 0.0
        w[big] = 1.0 - w.sum()
    return ProbabilitySpace(w)


def partition_from_rv(space: ProbabilitySpace, x: RandomVariable, tol: float = LEVEL_SET_TOL) -> Partition:
    """Level-set partition of x.

    Outcomes are grouped under the transitive closure of |x_i - x_k| <= tol;
    on the real line that is the same as cutting the sorted values wherever
    consecutive gaps exceed tol.
    """
    _check_space(space, x)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    v = x.values
    order = np.argsort(v, kind="stable")
    cuts = np.concatenate([[0], (np.diff(v[order]) > tol).astype(np.intp)])
    labels = np.empty(v.size, dtype=np.intp)
    labels[order] = np.cumsum(cuts)
    return Partition(labels)


def join(p: Partition, q: Partition) -> Partition:
    """Coarsest common refinement: all non-empty pairwise block intersections."""
    if p.n_outcomes != q.n_outcomes:
        raise SizeMismatch(f"cannot join partitions over {p.n_outcomes} and {q.n_outcomes} outcomes")
    return Partition(p.labels * q.n_blocks + q.labels)


def join_all(partitions: Sequence[Partition]) -> Partition:
    if not partitions:
        raise ValueError("need at least one partition")
    out = partitions[0]
    for q in partitions[1:]:
        out = join(out, q)
    return out


def block_means(space: ProbabilitySpace, y: RandomVariable, g: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Per-block (mass, probability-weighted mean of y); mean is nan on null blocks."""
    _check_space(space, y)
    _check_partition(space, g)
    mass = np.bincount(g.labels, weights=space.weights, minlength=g.n_blocks)
    total = np.bincount(g.labels, weights=space.weights * y.values, minlength=g.n_blocks)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(mass > 0, total / np.where(mass > 0, mass, 1.0), np.nan)
    return mass, means


def conditional_expectation(space: ProbabilitySpace, y: RandomVariable, g: Partition) -> RandomVariable:
    """E(y | sigma(g)); zero-probability blocks get the unconditional mean."""
    mass, means = block_means(space, y, g)
    mu0 = float(space.weights @ y.values)
    means = np.where(mass > 0, means, mu0)
    return RandomVariable(space, means[g.labels])


def moments(space: ProbabilitySpace, x: RandomVariable, y: RandomVariable | None = None):
    """Return (mean, variance, covariance-with-y or None)."""
    _check_space(space, x)
    w = space.weights
    mean = float(w @ x.values)
    dx = x.values - mean
    var = float(w @ (dx * dx))
    cov = None
    if y is not None:
        _check_space(space, y)
        cov = float(w @ (dx * (y.values - w @ y.values)))
    return mean, var, cov


def mean(space: ProbabilitySpace, x: RandomVariable) -> float:
    return moments(space, x)[0]


def variance(space: ProbabilitySpace, x: RandomVariable) -> float:
    return moments(space, x)[1]


def prob_differ(space: ProbabilitySpace, x: RandomVariable, y: RandomVariable, tol: float = AS_TOL) -> float:
    """P(|x - y| > tol)."""
    _check_space(space, x)
    _check_space(space, y)
    return float(space.weights[np.abs(x.values - y.values) > tol].sum())


def as_equal(space: ProbabilitySpace, x: RandomVariable, y: RandomVariable, tol: float = AS_TOL) -> bool:
    """Equality within tol on every positive-probability outcome."""
    _check_space(space, x)
    _check_space(space, y)
    diff = np.abs(x.values - y.values)[space.positive]
    return bool(np.all(diff <= tol))
