"""Two experts sharing one intern signal and each holding a private one.

The three intern signals are independent, mean zero, and realized on a
finite product space so every moment below is an exact weighted sum.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from ..aggregators import AggregatorSpec, aggregate, efficient_from_predictions, linear_pool_weights, two_forecaster_weights
from ..errors import InvalidConfig, NonTrivialityError
from ..forecasters import calibrate
from ..prob_core import (
    ProbabilitySpace,
    RandomVariable,
    as_equal,
    join,
    make_space,
    moments,
    partition_from_rv,
    prob_differ,
)


@dataclass(frozen=True)
class Example1Config:
    v1: float = 1.0
    v2: float = 1.0
    v12: float = 1.0
    atoms_per_signal: int = 3
    residual_var: float = 0.0
    weights: tuple[float, float] = (0.5, 0.5)

    def validate(self) -> None:
        if min(self.v1, self.v2, self.v12, self.residual_var) < 0:
            raise InvalidConfig("variances must be non-negative")
        if self.atoms_per_signal < 2:
            raise InvalidConfig("atoms_per_signal must be at least 2")
        if len(self.weights) != 2 or min(self.weights) < 0 or abs(sum(self.weights) - 1) > 1e-12:
            raise InvalidConfig("weights must be two non-negative numbers summing to 1")
        if self.v1 <= 0 or self.v2 <= 0:
            raise NonTrivialityError("both private signals need positive variance")

    @classmethod
    def from_dict(cls, doc: dict) -> "Example1Config":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise InvalidConfig(f"unknown example 1 fields {sorted(extra)}")
        doc = dict(doc)
        if "weights" in doc:
            doc["weights"] = tuple(float(v) for v in doc["weights"])
        return cls(**doc)


@dataclass
class ProductSpace:
    space: ProbabilitySpace
    y: RandomVariable
    private1: RandomVariable
    private2: RandomVariable
    shared: RandomVariable


def _signal_points(m: int, var: float) -> np.ndarray:
    z = np.arange(m) - (m - 1) / 2
    return z * np.sqrt(var / ((m * m - 1) / 12))


def build_product_space(cfg: Example1Config) -> ProductSpace:
    """Equally likely grid over (private1, private2, shared[, residual])."""
    m = cfg.atoms_per_signal
    factors = [_signal_points(m, cfg.v1), _signal_points(m, cfg.v2), _signal_points(m, cfg.v12)]
    if cfg.residual_var > 0:
        factors.append(np.sqrt(cfg.residual_var) * np.array([-1.0, 1.0]))
    grid = np.array(list(itertools.product(*factors)))
    space = make_space(np.ones(len(grid)))
    cols = [space.rv(grid[:, k]) for k in range(grid.shape[1])]
    y = space.rv(grid.sum(axis=1))
    return ProductSpace(space, y, cols[0], cols[1], cols[2])


@dataclass
class Example1Report:
    config: Example1Config
    delta: tuple[float, float]
    rho: float
    beta: tuple[float, float]
    beta_formula: tuple[float, float]
    shared_weight: float
    beta_coefficients: tuple[float, float, float]
    mean_coefficients: tuple[float, float, float]
    var_mean: float
    var_linear: float
    var_efficient: float
    p_mean_ne_linear: float
    p_mean_ne_efficient: float
    efficient_is_linear: bool
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["config"] = asdict(self.config)
        return doc

    def table(self) -> tuple[list[str], list[list]]:
        header = ["quantity", "value"]
        rows = [
            ["delta1", self.delta[0]], ["delta2", self.delta[1]], ["rho", self.rho],
            ["beta1", self.beta[0]], ["beta2", self.beta[1]],
            ["beta1_formula", self.beta_formula[0]], ["beta2_formula", self.beta_formula[1]],
            ["shared_weight", self.shared_weight],
            ["var_mean", self.var_mean], ["var_linear", self.var_linear], ["var_efficient", self.var_efficient],
            ["p_mean_ne_linear", self.p_mean_ne_linear], ["p_mean_ne_efficient", self.p_mean_ne_efficient],
        ]
        return header, rows


def _loading(space, target: RandomVariable, signal: RandomVariable) -> float:
    """Regression coefficient of target on one independent signal."""
    _, var, cov = moments(space, signal, target)
    return cov / var if var > 0 else float("nan")


def run_example1(cfg: Example1Config) -> Example1Report:
    cfg.validate()
    ps = build_product_space(cfg)
    space, y = ps.space, ps.y
    shared_info = partition_from_rv(space, ps.shared)
    infos = [join(partition_from_rv(space, ps.private1), shared_info),
             join(partition_from_rv(space, ps.private2), shared_info)]
    x1, x2 = (calibrate(space, y, g).prediction for g in infos)

    # Normal equations assembled from brute-force moments.
    _, d1, c1y = moments(space, x1, y)
    _, d2, c2y = moments(space, x2, y)
    rho = moments(space, x1, x2)[2]
    sigma = np.array([[d1, rho], [rho, d2]])
    beta = linear_pool_weights(sigma, [c1y, c2y])
    beta_formula = two_forecaster_weights(d1, d2, rho)

    x_mean = aggregate(AggregatorSpec("arithmetic", weights=cfg.weights), [x1, x2])
    x_lin = beta[0] * x1 + beta[1] * x2
    x_eff = efficient_from_predictions(space, y, [x1, x2])

    signals = (ps.private1, ps.private2, ps.shared)
    beta_coef = tuple(_loading(space, x_lin, s) for s in signals)
    mean_coef = tuple(_loading(space, x_mean, s) for s in signals)
    shared_weight = float(beta[0] + beta[1])
    expected_beta_coef = (beta[0], beta[1], shared_weight)
    expected_mean_coef = (cfg.weights[0], cfg.weights[1], 1.0)

    def coef_ok(got, want):
        return all(np.isnan(g) or abs(g - w) <= 1e-9 for g, w in zip(got, want))

    nontrivial_w = min(cfg.weights) > 0
    p_ne_eff = prob_differ(space, x_mean, x_eff)
    checks = {
        "experts_sum_signals": as_equal(space, x1, ps.private1 + ps.shared) and as_equal(space, x2, ps.private2 + ps.shared),
        "calibrated_covariances": abs(c1y - d1) <= 1e-10 and abs(c2y - d2) <= 1e-10,
        "beta_matches_formula": bool(np.max(np.abs(beta - beta_formula)) <= 1e-12),
        "beta_coefficient_pattern": coef_ok(beta_coef, expected_beta_coef),
        "mean_coefficient_pattern": coef_ok(mean_coef, expected_mean_coef),
        "shared_weight_exceeds_one": shared_weight > 1.0,
        "mean_inefficient": (p_ne_eff > 0) if nontrivial_w else True,
    }
    if cfg.v12 == 0:
        checks["independent_experts_sum"] = as_equal(space, x_eff, x1 + x2)
    return Example1Report(
        config=cfg,
        delta=(d1, d2),
        rho=rho,
        beta=(float(beta[0]), float(beta[1])),
        beta_formula=beta_formula,
        shared_weight=shared_weight,
        beta_coefficients=beta_coef,
        mean_coefficients=mean_coef,
        var_mean=moments(space, x_mean)[1],
        var_linear=moments(space, x_lin)[1],
        var_efficient=moments(space, x_eff)[1],
        p_mean_ne_linear=prob_differ(space, x_mean, x_lin),
        p_mean_ne_efficient=p_ne_eff,
        efficient_is_linear=as_equal(space, x_eff, x_lin),
        checks=checks,
    )


def shared_weight_curve(v1: float, v2: float, v12_grid, atoms_per_signal: int = 3) -> list[float]:
    """beta1 + beta2 over a grid of shared-signal variances."""
    return [run_example1(Example1Config(v1, v2, float(v), atoms_per_signal)).shared_weight for v in v12_grid]
