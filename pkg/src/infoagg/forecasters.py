"""Calibrated forecasters, information menus and noisy predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from .errors import DomainError, EmptyMenu, InvalidConfig
from .prob_core import (
    Partition,
    ProbabilitySpace,
    RandomVariable,
    _check_partition,
    conditional_expectation,
)

# Substream purposes; a forecaster's draws for different purposes never overlap.
STREAM_INFO = 0
STREAM_NOISE = 1


@dataclass(frozen=True)
class Forecaster:
    info: Partition
    prediction: RandomVariable


def calibrate(space: ProbabilitySpace, y: RandomVariable, info: Partition) -> Forecaster:
    """The forecaster who reports E(y | info)."""
    _check_partition(space, info)
    return Forecaster(info, conditional_expectation(space, y, info))


@dataclass(frozen=True)
class NoiseModel:
    """Prediction error model.

    ``kind`` is ``"additive"`` (x + e) or ``"logit_additive"``
    (expit(logit(x) + e)).  ``dist`` is ``"gaussian"`` with standard
    deviation ``scale`` or ``"uniform"`` on ``[-scale, scale]``.  Both error
    families are symmetric about zero.
    """

    kind: str = "additive"
    dist: str = "gaussian"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("additive", "logit_additive"):
            raise InvalidConfig(f"unknown noise kind {self.kind!r}")
        if self.dist not in ("gaussian", "uniform"):
            raise InvalidConfig(f"unknown error distribution {self.dist!r}")
        if not np.isfinite(self.scale) or self.scale < 0:
            raise InvalidConfig("noise scale must be a finite non-negative number")

    @property
    def error_sd(self) -> float:
        """Standard deviation of the error term on its own scale."""
        if self.dist == "gaussian":
            return float(self.scale)
        return float(self.scale) / np.sqrt(3.0)

    def draw_errors(self, rng: np.random.Generator, size=None):
        if self.dist == "gaussian":
            return rng.normal(0.0, self.scale, size)
        return rng.uniform(-self.scale, self.scale, size)

    def apply(self, calibrated, errors):
        """Q(x, e), vectorized over matching shapes."""
        x = np.asarray(calibrated, dtype=float)
        if self.kind == "additive":
            return x + errors
        if np.any((x <= 0) | (x >= 1)):
            raise DomainError("logit_additive noise needs calibrated values strictly inside (0, 1)")
        return expit(logit(x) + errors)

    def to_dict(self) -> dict:
        key = "sigma" if self.dist == "gaussian" else "half_width"
        return {"kind": self.kind, "dist": self.dist, key: self.scale}

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseModel":
        dist = doc.get("dist", "gaussian")
        if "sigma" in doc:
            scale = doc["sigma"]
        elif "half_width" in doc:
            scale = doc["half_width"]
        else:
            scale = doc.get("scale", 0.0)
        return cls(kind=doc.get("kind", "additive"), dist=dist, scale=float(scale))


def noisy_prediction(calibrated_value: float, model: NoiseModel, rng: np.random.Generator) -> float:
    """One noisy report Q(calibrated_value, e) with e drawn from ``rng``."""
    if model.kind == "logit_additive" and not 0.0 < calibrated_value < 1.0:
        raise DomainError(f"logit_additive noise undefined at {calibrated_value!r}")
    return float(model.apply(calibrated_value, model.draw_errors(rng)))


def substream(seed: int, index: int, purpose: int = STREAM_NOISE) -> np.random.Generator:
    """Independent generator for one forecaster, keyed by (seed, purpose, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose, int(index))))


@dataclass(frozen=True)
class InformationMenu:
    """A finite menu of information partitions with sampling probabilities."""

    partitions: tuple[Partition, ...]
    probs: tuple[float, ...]

    def __init__(self, partitions: Sequence[Partition], probs: Sequence[float]):
        parts = tuple(partitions)
        p = tuple(float(v) for v in probs)
        if not parts:
            raise EmptyMenu("information menu has no entries")
        if len(parts) != len(p):
            raise InvalidConfig(f"{len(parts)} partitions but {len(p)} probabilities")
        if any(v < 0 for v in p) or abs(sum(p) - 1.0) > 1e-12:
            raise InvalidConfig("menu probabilities must be non-negative and sum to 1")
        n = {q.n_outcomes for q in parts}
        if len(n) != 1:
            raise InvalidConfig("menu partitions cover different outcome counts")
        object.__setattr__(self, "partitions", parts)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return len(self.partitions)

    @property
    def active(self) -> list[int]:
        return [i for i, p in enumerate(self.probs) if p > 0]

    def is_nontrivial(self, space: ProbabilitySpace, y: RandomVariable, tol: float = 1e-9) -> bool:
        """Two positive-probability entries whose predictions differ with positive probability."""
        preds = [conditional_expectation(space, y, self.partitions[i]).values for i in self.active]
        pos = space.positive
        for a in range(len(preds)):
            for b in range(a + 1, len(preds)):
                if np.any(np.abs(preds[a] - preds[b])[pos] > tol):
                    return True
        return False

    def to_dict(self) -> dict:
        return {"partitions": [q.to_dict()["blocks"] for q in self.partitions], "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, doc: dict, n_outcomes: int | None = None) -> "InformationMenu":
        parts = [Partition.from_blocks(b, n_outcomes) for b in doc["partitions"]]
        return cls(parts, doc["probs"])


def sample_menu_indices(menu: InformationMenu, n: int, rng_seed: int) -> np.ndarray:
    """Menu index drawn for each of forecasters 0..n-1.

    Forecaster j's draw comes from its own substream, so the first k draws
    do not depend on n.
    """
    if len(menu) == 0:
        raise EmptyMenu("information menu has no entries")
    if n < 1:
        raise ValueError("need at least one draw")
    cdf = np.cumsum(menu.probs)
    cdf[-1] = 1.0
    u = np.array([substream(rng_seed, j, STREAM_INFO).random() for j in range(n)])
    idx = np.searchsorted(cdf, u, side="right")
    # guard against u landing on a zero-probability tail entry
    return np.minimum(idx, max(menu.active))


def sample_information_sets(menu: InformationMenu, n: int, rng_seed: int) -> list[Partition]:
    return [menu.partitions[i] for i in sample_menu_indices(menu, n, rng_seed)]
