"""Seeded generator of random finite forecasting problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..forecasters import Forecaster, calibrate
from ..prob_core import Partition, ProbabilitySpace, RandomVariable, make_space, prob_differ


@dataclass
class Instance:
    space: ProbabilitySpace
    y: RandomVariable
    forecasters: list[Forecaster]

    @property
    def predictions(self) -> list[RandomVariable]:
        return [f.prediction for f in self.forecasters]


def _random_partition(rng: np.random.Generator, n: int, k: int) -> Partition:
    # every label used at least once
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    return Partition(rng.permutation(labels))


def disagree(space: ProbabilitySpace, preds: list[RandomVariable]) -> bool:
    return any(
        prob_differ(space, preds[i], preds[j]) > 0
        for i in range(len(preds))
        for j in range(i + 1, len(preds))
    )


def random_instance(
    rng: np.random.Generator,
    n_outcomes: tuple[int, int] = (4, 64),
    n_forecasters: tuple[int, int] = (2, 6),
    zero_weight_prob: float = 0.05,
) -> Instance:
    """A space with small-integer weights, outcome values k/20 in (0, 1),
    and 2-6 calibrated forecasters on random partitions of at least 3
    blocks.  Redrawn until two predictions disagree with positive probability.
    """
    while True:
        n = int(rng.integers(n_outcomes[0], n_outcomes[1] + 1))
        raw = rng.integers(1, 7, n).astype(float)
        raw[rng.random(n) < zero_weight_prob] = 0.0
        if raw.sum() == 0:
            continue
        space = make_space(raw)
        y = space.rv(rng.integers(1, 20, n) / 20)
        m = int(rng.integers(n_forecasters[0], n_forecasters[1] + 1))
        infos = [_random_partition(rng, n, int(rng.integers(3, min(n, 10) + 1))) for _ in range(m)]
        fcs = [calibrate(space, y, g) for g in infos]
        if disagree(space, [f.prediction for f in fcs]):
            return Instance(space, y, fcs)


def random_weights(rng: np.random.Generator, m: int) -> tuple[float, ...]:
    """Fixed positive weights from small integers, normalized to sum to 1."""
    raw = rng.integers(1, 6, m).astype(float)
    w = raw / raw.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return tuple(float(v) for v in w)
