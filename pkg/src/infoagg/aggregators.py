"""Mean-type aggregators, hull classification and the efficient aggregator."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import expit, logit, ndtr, ndtri

from .errors import DomainError, InvalidConfig, SingularCovariance, SpaceMismatch, WeightMismatch
from .prob_core import (
    LEVEL_SET_TOL,
    Partition,
    ProbabilitySpace,
    RandomVariable,
    _check_partition,
    _check_space,
    conditional_expectation,
    join_all,
    partition_from_rv,
)

KINDS = ("arithmetic", "quasi_arithmetic", "median", "trimmed", "winsorized", "midrange")
TRANSFORMS = ("power", "logit", "probit")
TIE_TOL = 1e-9
PROBIT_CLIP = 1e-12
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class AggregatorSpec:
    """A pooling rule applied to one vector of predictions at a time.

    ``weights`` only matter for the arithmetic and quasi-arithmetic kinds;
    ``None`` means equal weights.  ``transform`` is one of ``power``
    (with exponent ``a``; ``a == 0`` is the geometric mean), ``logit`` or
    ``probit``.
    """

    kind: str = "arithmetic"
    weights: tuple[float, ...] | None = None
    transform: str | None = None
    a: float | None = None
    trim_fraction: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown aggregator kind {self.kind!r}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if any(v < 0 for v in w) or abs(sum(w) - 1.0) > 1e-12:
                raise InvalidConfig("weights must be non-negative and sum to 1")
            object.__setattr__(self, "weights", w)
        if self.kind == "quasi_arithmetic":
            if self.transform not in TRANSFORMS:
                raise InvalidConfig(f"quasi_arithmetic needs a transform in {TRANSFORMS}")
            if self.transform == "power" and self.a is None:
                raise InvalidConfig("power transform needs an exponent a")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise InvalidConfig("trim_fraction must lie in [0, 0.5)")

    @property
    def label(self) -> str:
        if self.kind == "quasi_arithmetic":
            return f"quasi_arithmetic[{self.transform}{'' if self.a is None else f'({self.a:g})'}]"
        if self.kind in ("trimmed", "winsorized"):
            return f"{self.kind}[{self.trim_fraction:g}]"
        return self.kind

    def to_dict(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.weights is not None:
            doc["weights"] = list(self.weights)
        if self.transform is not None:
            doc["transform"] = self.transform
        if self.a is not None:
            doc["a"] = self.a
        if self.kind in ("trimmed", "winsorized"):
            doc["trim_fraction"] = self.trim_fraction
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "AggregatorSpec":
        known = {"kind", "weights", "transform", "a", "trim_fraction"}
        extra = set(doc) - known
        if extra:
            raise InvalidConfig(f"unknown aggregator fields {sorted(extra)}")
        w = doc.get("weights")
        return cls(
            kind=doc.get("kind", "arithmetic"),
            weights=None if w is None else tuple(w),
            transform=doc.get("transform"),
            a=None if doc.get("a") is None else float(doc["a"]),
            trim_fraction=float(doc.get("trim_fraction", 0.0)),
        )


def _weights(spec: AggregatorSpec, n: int) -> np.ndarray:
    if spec.weights is None:
        return np.full(n, 1.0 / n)
    if len(spec.weights) != n:
        raise WeightMismatch(f"{len(spec.weights)} weights for {n} predictions")
    return np.asarray(spec.weights)


def _odd_integer(a: float) -> bool:
    # only positive odd powers are monotone across zero
    return a > 0 and float(a).is_integer() and int(a) % 2 == 1


def _power_mean(xs: np.ndarray, w: np.ndarray, a: float) -> float:
    if a == 0:
        if np.any(xs <= 0):
            raise DomainError("geometric mean needs positive inputs")
        return float(np.exp(w @ np.log(xs)))
    if a == 1:
        return float(w @ xs)
    if _odd_integer(a):
        s = float(w @ xs**a)
        return math.copysign(abs(s) ** (1.0 / a), s)
    if a < 0 or not float(a).is_integer():
        if np.any(xs <= 0):
            raise DomainError(f"power mean with a={a:g} needs positive inputs")
    elif np.any(xs < 0):
        raise DomainError(f"power mean with a={a:g} needs non-negative inputs")
    return float((w @ xs**a) ** (1.0 / a))


def _probit(xs: np.ndarray) -> np.ndarray:
    clipped = np.clip(xs, PROBIT_CLIP, 1.0 - PROBIT_CLIP)
    if np.any(clipped != xs):
        warnings.warn("probit inputs clipped to [1e-12, 1 - 1e-12]", RuntimeWarning, stacklevel=3)
    return ndtri(clipped)


def _quasi_arithmetic(spec: AggregatorSpec, xs: np.ndarray, w: np.ndarray) -> float:
    if spec.transform == "power":
        return _power_mean(xs, w, float(spec.a))
    if np.any((xs <= 0) | (xs >= 1)):
        raise DomainError(f"{spec.transform} transform needs inputs strictly inside (0, 1)")
    if spec.transform == "logit":
        return float(expit(w @ logit(xs)))
    return float(ndtr(w @ _probit(xs)))


def _trim_count(spec: AggregatorSpec, n: int) -> int:
    return int(math.floor(spec.trim_fraction * n))


def apply(spec: AggregatorSpec, xs: Sequence[float]) -> float:
    """Aggregate one vector of predictions."""
    x = np.asarray(xs, dtype=float).reshape(-1)
    n = x.size
    if n == 0:
        raise ValueError("cannot aggregate an empty prediction vector")
    kind = spec.kind
    if kind == "arithmetic":
        return float(_weights(spec, n) @ x)
    if kind == "quasi_arithmetic":
        return _quasi_arithmetic(spec, x, _weights(spec, n))
    s = np.sort(x)
    if kind == "median":
        mid = n // 2
        return float(s[mid]) if n % 2 else float((s[mid - 1] + s[mid]) / 2)
    if kind == "midrange":
        return float((s[0] + s[-1]) / 2)
    k = _trim_count(spec, n)
    if kind == "trimmed":
        return float(s[k:n - k].mean())
    # winsorized
    if k:
        s = s.copy()
        s[:k] = s[k]
        s[n - k:] = s[n - k - 1]
    return float(s.mean())


def aggregate(spec: AggregatorSpec, predictions: Sequence[RandomVariable]) -> RandomVariable:
    """Apply ``spec`` outcome by outcome to a list of predictions on one space."""
    if not predictions:
        raise ValueError("need at least one prediction")
    space = predictions[0].space
    for x in predictions[1:]:
        _check_space(space, x)
    mat = np.stack([x.values for x in predictions], axis=1)
    if spec.kind == "arithmetic":
        return RandomVariable(space, mat @ _weights(spec, mat.shape[1]))
    return RandomVariable(space, [apply(spec, row) for row in mat])


class HullPosition(str, Enum):
    UNANIMOUS = "unanimous"
    INTERIOR = "interior"
    AT_MIN = "at_min"
    AT_MAX = "at_max"
    OUTSIDE = "outside"


def hull_classify(xs: Sequence[float], value: float, tie_tol: float = TIE_TOL) -> HullPosition:
    """Where ``value`` sits relative to the convex hull of ``xs``."""
    x = np.asarray(xs, dtype=float)
    if x.size == 0:
        raise ValueError("xs must be non-empty")
    lo, hi = float(x.min()), float(x.max())
    if hi - lo <= tie_tol:
        return HullPosition.UNANIMOUS
    if value < lo - tie_tol or value > hi + tie_tol:
        return HullPosition.OUTSIDE
    if abs(value - lo) <= tie_tol:
        return HullPosition.AT_MIN
    if abs(value - hi) <= tie_tol:
        return HullPosition.AT_MAX
    return HullPosition.INTERIOR


def hull_positions(predictions: Sequence[RandomVariable], x: RandomVariable, tie_tol: float = TIE_TOL) -> list[HullPosition]:
    """Per-outcome hull classification of an aggregate."""
    mat = np.stack([p.values for p in predictions], axis=1)
    return [hull_classify(row, v, tie_tol) for row, v in zip(mat, x.values)]


def is_strict_realization(predictions: Sequence[RandomVariable], x: RandomVariable, tie_tol: float = TIE_TOL) -> bool:
    """Interior on every positive-probability outcome where predictions disagree,
    and equal to the shared value where they agree."""
    pos = x.space.positive
    for keep, h in zip(pos, hull_positions(predictions, x, tie_tol)):
        if keep and h not in (HullPosition.INTERIOR, HullPosition.UNANIMOUS):
            return False
    mat = np.stack([p.values for p in predictions], axis=1)
    agree = (mat.max(axis=1) - mat.min(axis=1) <= tie_tol) & pos
    return bool(np.all(np.abs(x.values[agree] - mat[agree, 0]) <= tie_tol))


def efficient_partition(space: ProbabilitySpace, predictions: Sequence[RandomVariable], tol: float = LEVEL_SET_TOL) -> Partition:
    """Join of the level-set partitions of the reported predictions."""
    return join_all([partition_from_rv(space, x, tol) for x in predictions])


def efficient_from_predictions(space: ProbabilitySpace, y: RandomVariable, predictions: Sequence[RandomVariable], tol: float = LEVEL_SET_TOL) -> RandomVariable:
    """E(y | X_1, ..., X_N)."""
    if not predictions:
        raise ValueError("need at least one prediction")
    return conditional_expectation(space, y, efficient_partition(space, predictions, tol))


def efficient_aggregator(space: ProbabilitySpace, y: RandomVariable, infos: Sequence[Partition]) -> RandomVariable:
    """E(y | sigma(X_1, ..., X_N)) where X_j = E(y | infos[j]).

    Conditions on what the predictions reveal, not on the raw information
    partitions: an atom of ``infos[j]`` that the prediction does not
    separate is invisible to the aggregator.
    """
    if not infos:
        raise ValueError("need at least one information partition")
    _check_space(space, y)
    for g in infos:
        _check_partition(space, g)
    preds = [conditional_expectation(space, y, g) for g in infos]
    return efficient_from_predictions(space, y, preds)


def linear_pool_weights(cov, cov_with_y) -> np.ndarray:
    """Best linear weights beta = Cov(X, Y) Sigma^-1 for mean-zero predictions.

    For calibrated predictions ``cov_with_y`` is the diagonal of ``cov``.
    """
    sigma = np.atleast_2d(np.asarray(cov, dtype=float))
    c = np.asarray(cov_with_y, dtype=float).reshape(-1)
    if sigma.shape != (c.size, c.size):
        raise SpaceMismatch(f"covariance is {sigma.shape}, Cov(X, Y) has length {c.size}")
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise SingularCovariance("covariance matrix is not symmetric")
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularCovariance(f"covariance condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    return np.linalg.solve(sigma, c)


def two_forecaster_weights(delta1: float, delta2: float, rho: float) -> tuple[float, float]:
    """Closed form of ``linear_pool_weights`` for two calibrated predictions."""
    det = delta1 * delta2 - rho**2
    return ((delta1 * delta2 - rho * delta2) / det, (delta1 * delta2 - rho * delta1) / det)
