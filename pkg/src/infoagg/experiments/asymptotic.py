"""Weighted means of noisy forecasters as the crowd grows.

Forecasters draw their information i.i.d. from a finite menu and report a
noisy version of their calibrated prediction.  A consistent weighted mean
converges to the mixture centre of the calibrated predictions, which in
general differs from the prediction based on all menu information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, logit

from ..errors import InvalidConfig, JamisonViolation, NonPositiveWeight
from ..forecasters import (
    STREAM_NOISE,
    InformationMenu,
    NoiseModel,
    sample_menu_indices,
    substream,
)
from ..prob_core import (
    ProbabilitySpace,
    RandomVariable,
    conditional_expectation,
    join_all,
    partition_from_rv,
)


@dataclass(frozen=True)
class WeightRule:
    """Unnormalized weights b_j for forecaster j = 1, 2, ...

    ``equal``: b_j = 1; ``power``: b_j = j**param; ``geometric``:
    b_j = param**j.  Weights are handled in log space so fast-growing
    sequences do not overflow.
    """

    kind: str = "equal"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("equal", "power", "geometric"):
            raise InvalidConfig(f"unknown weight rule {self.kind!r}")
        if self.kind == "geometric" and self.param <= 0:
            raise NonPositiveWeight("geometric weight ratio must be positive")

    def log_b(self, j: np.ndarray) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        if self.kind == "equal":
            return np.zeros_like(j)
        if self.kind == "power":
            return self.param * np.log(j)
        return j * np.log(self.param)

    @classmethod
    def from_dict(cls, doc) -> "WeightRule":
        if isinstance(doc, str):
            return cls(doc)
        return cls(doc.get("kind", "equal"), float(doc.get("param", 1.0)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param}


@dataclass
class JamisonReport:
    t: np.ndarray
    ratio: np.ndarray
    sup_ratio: float
    horizon: int
    saturated: bool

    @property
    def consistent(self) -> bool:
        return not self.saturated and bool(np.isfinite(self.sup_ratio))


def _log_weights(b_seq, n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    if isinstance(b_seq, WeightRule):
        return b_seq.log_b(j)
    b = np.array([b_seq(int(k)) for k in j], dtype=float)
    if np.any(~np.isfinite(b)) or np.any(b <= 0):
        raise NonPositiveWeight("weight sequence must be finite and positive")
    return np.log(b)


def jamison_check(b_seq: WeightRule | Callable[[int], float], t_max: float, horizon: int | None = None) -> JamisonReport:
    """Finite-horizon estimate of sup gamma(t)/t for t in [1, t_max].

    gamma(t) counts indices N with B_N / b_N <= t, where B_N is the partial
    sum of the weights.  Only N up to ``horizon`` (default 8 * t_max) are
    examined.  If every examined N satisfies B_N / b_N <= t_max the count
    is limited by the horizon rather than by t, which is reported as
    ``saturated``: gamma is then unbounded and the weighted mean is not
    strongly consistent.
    """
    if t_max <= 1:
        raise ValueError("t_max must exceed 1")
    h = int(horizon or 8 * int(np.ceil(t_max)))
    step = np.exp(-np.diff(_log_weights(b_seq, h)))
    # B_N / b_N = 1 + (B_{N-1} / b_{N-1}) * b_{N-1} / b_N, exact for constant weights
    ratios = np.empty(h)
    ratios[0] = r = 1.0
    for k, f in enumerate(step.tolist(), start=1):
        r = 1.0 + r * f
        ratios[k] = r
    r = np.sort(ratios[ratios <= t_max])
    if r.size == 0:
        return JamisonReport(np.array([t_max]), np.array([0.0]), 0.0, h, False)
    # gamma is a right-continuous step function; gamma(t)/t peaks at its jumps
    t = np.unique(r)
    counts = np.searchsorted(r, t, side="right")
    ratio = counts / t
    return JamisonReport(t, ratio, float(ratio.max()), h, bool(r.size == h))


@dataclass
class Corollary1Config:
    space: ProbabilitySpace
    y: RandomVariable
    menu: InformationMenu
    noise: NoiseModel
    n_max: int = 10_000
    weight_rule: WeightRule = field(default_factory=WeightRule)
    seed: int = 0
    realized_outcome: int = 0
    t_max: float = 10_000.0

    def validate(self) -> None:
        if self.n_max < 1:
            raise InvalidConfig("n_max must be at least 1")
        if not 0 <= self.realized_outcome < self.space.n_outcomes:
            raise InvalidConfig("realized_outcome is not an outcome index")
        if self.space.weights[self.realized_outcome] <= 0:
            raise InvalidConfig("realized_outcome has zero probability")
        if self.menu.partitions[0].n_outcomes != self.space.n_outcomes:
            raise InvalidConfig("menu partitions do not match the space")


def die_menu_config(**overrides) -> Corollary1Config:
    """Fair die, menu {sigma({1}), sigma({6})} with equal probabilities,
    additive uniform(-0.1, 0.1) noise, equal weights."""
    from .example2 import die_infos, die_space

    space, y = die_space()
    cfg = dict(
        space=space,
        y=y,
        menu=InformationMenu(die_infos(), (0.5, 0.5)),
        noise=NoiseModel("additive", "uniform", 0.1),
    )
    cfg.update(overrides)
    return Corollary1Config(**cfg)


def noisy_center(value: float, noise: NoiseModel, order: int = 64) -> float:
    """E[Q(value, e)], the mean of one forecaster's noisy report."""
    if noise.kind == "additive" or noise.scale == 0:
        return float(value)
    if noise.dist == "gaussian":
        nodes, w = np.polynomial.hermite_e.hermegauss(order)
        return float(w @ expit(logit(value) + noise.scale * nodes) / w.sum())
    nodes, w = np.polynomial.legendre.leggauss(order)
    return float(w @ expit(logit(value) + noise.scale * nodes) / w.sum())


@dataclass
class Corollary1Result:
    n: np.ndarray
    aggregate: np.ndarray
    dist_target: np.ndarray
    dist_efficient: np.ndarray
    se: np.ndarray
    target: float
    efficient_value: float
    calibrated_values: list[float]
    jamison: JamisonReport
    predictions_coarser: bool
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def table(self) -> tuple[list[str], list[list]]:
        header = ["n", "aggregate", "dist_target", "dist_efficient", "se"]
        cols = (self.n, self.aggregate, self.dist_target, self.dist_efficient, self.se)
        return header, [list(r) for r in zip(*cols)]

    def summary(self) -> dict:
        return {
            "n_final": int(self.n[-1]),
            "aggregate_final": float(self.aggregate[-1]),
            "target": self.target,
            "efficient_value": self.efficient_value,
            "dist_target_final": float(self.dist_target[-1]),
            "dist_efficient_final": float(self.dist_efficient[-1]),
            "se_final": float(self.se[-1]),
            "calibrated_values": self.calibrated_values,
            "jamison_sup_ratio": self.jamison.sup_ratio,
            "predictions_coarser_than_menu": self.predictions_coarser,
            "checks": dict(self.checks),
        }


def run_corollary1(cfg: Corollary1Config) -> Corollary1Result:
    cfg.validate()
    jam = jamison_check(cfg.weight_rule, cfg.t_max)
    if not jam.consistent:
        raise JamisonViolation(
            f"weight rule {cfg.weight_rule.kind}({cfg.weight_rule.param:g}) fails the counting-function condition"
        )
    space, y, menu, noise = cfg.space, cfg.y, cfg.menu, cfg.noise
    w_idx = cfg.realized_outcome
    preds = [conditional_expectation(space, y, g) for g in menu.partitions]
    calibrated = np.array([p.values[w_idx] for p in preds])
    active = menu.active
    probs = np.asarray(menu.probs)
    target = float(probs @ [noisy_center(c, noise) for c in calibrated])
    all_info = join_all([menu.partitions[i] for i in active])
    efficient_value = float(conditional_expectation(space, y, all_info).values[w_idx])
    revealed = join_all([partition_from_rv(space, preds[i]) for i in active])
    predictions_coarser = revealed.n_blocks < all_info.n_blocks

    n = cfg.n_max
    idx = sample_menu_indices(menu, n, cfg.seed)
    errors = np.array([noise.draw_errors(substream(cfg.seed, j, STREAM_NOISE)) for j in range(n)])
    noisy = noise.apply(calibrated[idx], errors)

    lb = cfg.weight_rule.log_b(np.arange(1, n + 1))
    b = np.exp(lb - lb.max())
    cb = np.cumsum(b)
    agg = np.cumsum(b * noisy) / cb
    # standard error of a weighted mean: running sample sd times sqrt(sum of squared weights)
    ns = np.arange(1, n + 1)
    s1 = np.cumsum(noisy)
    s2 = np.cumsum(noisy**2)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.where(ns > 1, (s2 - s1**2 / ns) / np.maximum(ns - 1, 1), 0.0)
    sd = np.sqrt(np.maximum(var, 0.0))
    se = sd * np.sqrt(np.cumsum(b**2)) / cb

    dist_t = np.abs(agg - target)
    dist_e = np.abs(agg - efficient_value)
    act_vals = calibrated[active]
    lo, hi = float(act_vals.min()), float(act_vals.max())
    spread = float(np.sqrt(probs[active] @ (calibrated[active] - probs[active] @ calibrated[active]) ** 2))
    bound = 4 * (noise.error_sd + spread) / np.sqrt(n)
    checks = {
        "within_4se_of_target": bool(dist_t[-1] <= 4 * se[-1]) if se[-1] > 0 else bool(dist_t[-1] <= 1e-12),
        "within_scale_bound": bool(dist_t[-1] <= bound) if bound > 0 else bool(dist_t[-1] <= 1e-12),
    }
    if hi - lo > 1e-9:
        checks["strictly_inside_hull"] = bool(lo < agg[-1] < hi)
    return Corollary1Result(
        n=ns,
        aggregate=agg,
        dist_target=dist_t,
        dist_efficient=dist_e,
        se=se,
        target=target,
        efficient_value=efficient_value,
        calibrated_values=calibrated.tolist(),
        jamison=jam,
        predictions_coarser=predictions_coarser,
        checks=checks,
    )
