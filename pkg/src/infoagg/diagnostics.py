"""Executable checks for calibration, extremizing and efficiency."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .aggregators import efficient_from_predictions, efficient_partition
from .forecasters import Forecaster
from .prob_core import (
    AS_TOL,
    LEVEL_SET_TOL,
    ProbabilitySpace,
    RandomVariable,
    _check_space,
    block_means,
    conditional_expectation,
    moments,
    partition_from_rv,
    prob_differ,
)

VIOLATION_TOL = 1e-10
EXHAUSTIVE_MAX = 12
DEFAULT_SUBSET_BUDGET = 200


def _predictions(items: Sequence) -> list[RandomVariable]:
    return [f.prediction if isinstance(f, Forecaster) else f for f in items]


def check_calibration(space: ProbabilitySpace, y: RandomVariable, x: RandomVariable, tol: float = 1e-10) -> tuple[float, bool]:
    """Largest |E(y | atom) - x(atom)| over positive atoms of sigma(x)."""
    _check_space(space, x)
    g = partition_from_rv(space, x, LEVEL_SET_TOL)
    mass, y_avg = block_means(space, y, g)
    _, x_avg = block_means(space, x, g)
    live = mass > 0
    gap = float(np.max(np.abs(y_avg[live] - x_avg[live]))) if np.any(live) else 0.0
    return gap, gap <= tol


def recalibrate(space: ProbabilitySpace, y: RandomVariable, x: RandomVariable) -> RandomVariable:
    """E(y | x), the calibrated version of x."""
    return conditional_expectation(space, y, partition_from_rv(space, x, LEVEL_SET_TOL))


def inefficiency_probability(space: ProbabilitySpace, x: RandomVariable, x_eff: RandomVariable, tol: float = AS_TOL) -> float:
    """P(|x - x_eff| > tol)."""
    return prob_differ(space, x, x_eff, tol)


@dataclass(frozen=True)
class Violation:
    subset: tuple[int, ...]
    excess: float


def _subsets(n: int, budget: int, seed: int) -> list[tuple[int, ...]]:
    if n <= EXHAUSTIVE_MAX:
        masks = range(1, 1 << n)
    else:
        rng = np.random.default_rng(seed)
        chosen = {1 << j for j in range(n)} | {(1 << n) - 1}
        while len(chosen) < n + 1 + budget:
            bits = rng.integers(0, 2, n)
            if bits.any():
                chosen.add(int(sum(1 << j for j in np.flatnonzero(bits))))
        masks = sorted(chosen)
    return [tuple(j for j in range(n) if m >> j & 1) for m in masks]


def check_extremizing(
    space: ProbabilitySpace,
    y: RandomVariable,
    forecasters: Sequence,
    x: RandomVariable,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    seed: int = 0,
) -> list[Violation]:
    """Subsets v with Var(E(y | X_j, j in v)) > Var(x) + 1e-10.

    All non-empty subsets are tried for up to 12 forecasters; beyond that
    every singleton, the full set and ``subset_budget`` seeded random
    subsets.  Results are ordered by subset bitmask.
    """
    preds = _predictions(forecasters)
    if not preds:
        raise ValueError("need at least one forecaster")
    var_x = moments(space, x)[1]
    labels = np.stack([partition_from_rv(space, p, LEVEL_SET_TOL).labels for p in preds], axis=1)
    w = space.weights
    wy = w * y.values
    mu0 = float(wy.sum())
    out = []
    for v in _subsets(len(preds), subset_budget, seed):
        _, inv = np.unique(labels[:, list(v)], axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        mass = np.bincount(inv, weights=w)
        tot = np.bincount(inv, weights=wy)
        live = mass > 0
        # Var of the block-average variable = sum over blocks of mass * (avg - mu0)^2
        avg = tot[live] / mass[live]
        var_v = float(mass[live] @ (avg - mu0) ** 2)
        if var_v - var_x > VIOLATION_TOL:
            out.append(Violation(v, var_v - var_x))
    return out


def decomposition_gap(space: ProbabilitySpace, predictions: Sequence[RandomVariable], x_eff: RandomVariable) -> float:
    """Worst error of X_j(A) = sum_k P(B_k)/P(A) * x_eff(B_k) over positive atoms A.

    A ranges over atoms of sigma(X_j) and B_k over the atoms of the joint
    level-set partition contained in A.  The identity says every calibrated
    prediction is a convex combination of efficient-aggregate values.
    Returns inf if some joint atom straddles two atoms of a prediction or
    x_eff is not constant on a positive joint atom.
    """
    preds = _predictions(predictions)
    w = space.weights
    joint = efficient_partition(space, preds)
    b_mass, b_val = block_means(space, x_eff, joint)
    b_live = b_mass > 0
    spread = np.zeros(joint.n_blocks)
    np.maximum.at(spread, joint.labels, np.abs(x_eff.values - np.nan_to_num(b_val)[joint.labels]) * (w > 0))
    if np.any(spread[b_live] > LEVEL_SET_TOL):
        return float("inf")
    worst = 0.0
    for x in preds:
        a = partition_from_rv(space, x, LEVEL_SET_TOL)
        # the atom A containing each joint atom B_k
        parent = np.full(joint.n_blocks, -1)
        parent[joint.labels] = a.labels
        if np.any(parent[joint.labels] != a.labels):
            return float("inf")
        a_mass, x_at = block_means(space, x, a)
        recon = np.zeros(a.n_blocks)
        for k in np.flatnonzero(b_live):
            recon[parent[k]] += b_mass[k] / a_mass[parent[k]] * b_val[k]
        live = a_mass > 0
        if np.any(live):
            worst = max(worst, float(np.max(np.abs(recon[live] - x_at[live]))))
    return worst


@dataclass
class DiagnosticsReport:
    subject: str
    marginal_gap: float
    calibration_gap: float
    extremizing_violations: list[Violation] = field(default_factory=list)
    inefficiency_prob: float = 0.0
    var_x: float = 0.0
    var_recalibrated: float = 0.0
    var_efficient: float = 0.0
    calibration_tol: float = 1e-10
    as_tol: float = AS_TOL

    @property
    def calibrated(self) -> bool:
        return self.calibration_gap <= self.calibration_tol

    @property
    def extremizing(self) -> bool:
        return not self.extremizing_violations

    @property
    def marginally_consistent(self) -> bool:
        return self.marginal_gap <= 1e-10

    @property
    def efficient(self) -> bool:
        return self.inefficiency_prob == 0.0

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["extremizing_violations"] = [
            {"subset": list(v.subset), "excess": v.excess} for v in self.extremizing_violations
        ]
        doc.update(
            calibrated=self.calibrated,
            extremizing=self.extremizing,
            marginally_consistent=self.marginally_consistent,
            efficient=self.efficient,
        )
        return doc

    def rows(self) -> list[tuple[str, str, float, bool]]:
        """(check, subject, gap_or_prob, pass) rows for CSV output."""
        return [
            ("marginal_consistency", self.subject, self.marginal_gap, self.marginally_consistent),
            ("calibration", self.subject, self.calibration_gap, self.calibrated),
            ("extremizing", self.subject, float(len(self.extremizing_violations)), self.extremizing),
            ("efficiency", self.subject, self.inefficiency_prob, self.efficient),
        ]


def diagnose(
    space: ProbabilitySpace,
    y: RandomVariable,
    forecasters: Sequence,
    x: RandomVariable,
    subject: str = "aggregate",
    calibration_tol: float = 1e-10,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    seed: int = 0,
    x_eff: RandomVariable | None = None,
) -> DiagnosticsReport:
    preds = _predictions(forecasters)
    if x_eff is None:
        x_eff = efficient_from_predictions(space, y, preds)
    mu0 = moments(space, y)[0]
    mean_x, var_x, _ = moments(space, x)
    gap, _ = check_calibration(space, y, x, calibration_tol)
    return DiagnosticsReport(
        subject=subject,
        marginal_gap=abs(mean_x - mu0),
        calibration_gap=gap,
        extremizing_violations=check_extremizing(space, y, preds, x, subset_budget, seed),
        inefficiency_prob=inefficiency_probability(space, x, x_eff),
        var_x=var_x,
        var_recalibrated=moments(space, recalibrate(space, y, x))[1],
        var_efficient=moments(space, x_eff)[1],
        calibration_tol=calibration_tol,
    )
