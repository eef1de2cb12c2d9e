"""Seeded property suites over random finite forecasting problems."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..aggregators import AggregatorSpec, aggregate, efficient_aggregator, is_strict_realization
from ..diagnostics import check_calibration, check_extremizing, decomposition_gap, inefficiency_probability, recalibrate
from ..prob_core import mean, variance
from .random_instances import random_instance, random_weights

STRICT_SPECS = (
    AggregatorSpec("median"),
    AggregatorSpec("trimmed", trim_fraction=0.2),
    AggregatorSpec("winsorized", trim_fraction=0.2),
    AggregatorSpec("midrange"),
    AggregatorSpec("quasi_arithmetic", transform="logit"),
)


@dataclass
class SuiteResult:
    name: str
    n_instances: int
    records: list[dict] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def column(self, key: str, where: str | None = None) -> np.ndarray:
        rows = self.records if where is None else [r for r in self.records if r.get("subject") == where]
        return np.array([r[key] for r in rows], dtype=float)


def weighted_mean_suite(n_instances: int = 1000, seed: int = 0) -> SuiteResult:
    """Weighted arithmetic means of calibrated, disagreeing forecasters:
    marginally consistent, yet uncalibrated, under-confident and inefficient."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("weighted_mean", n_instances)
    for i in range(n_instances):
        inst = random_instance(rng)
        preds = inst.predictions
        w = random_weights(rng, len(preds))
        x = aggregate(AggregatorSpec("arithmetic", weights=w), preds)
        space, y = inst.space, inst.y
        x_eff = efficient_aggregator(space, y, [f.info for f in inst.forecasters])
        gap, _ = check_calibration(space, y, x)
        out.records.append({
            "instance": i,
            "n_outcomes": space.n_outcomes,
            "n_forecasters": len(preds),
            "marginal_gap": abs(mean(space, x) - mean(space, y)),
            "calibration_gap": gap,
            "var_x": variance(space, x),
            "var_recalibrated": variance(space, recalibrate(space, y, x)),
            "max_var_individual": max(variance(space, p) for p in preds),
            "inefficiency_prob": inefficiency_probability(space, x, x_eff),
        })
    r = out.records
    out.checks = {
        "marginally_consistent": all(d["marginal_gap"] <= 1e-10 for d in r),
        "uncalibrated": all(d["calibration_gap"] > 1e-6 for d in r),
        "under_confident_vs_recalibrated": all(d["var_x"] < d["var_recalibrated"] for d in r),
        "under_confident_vs_individuals": all(d["var_x"] < d["max_var_individual"] for d in r),
        "inefficient": all(d["inefficiency_prob"] > 0 for d in r),
    }
    return out


def strict_mean_suite(n_instances: int = 1000, seed: int = 1, specs=STRICT_SPECS) -> SuiteResult:
    """Strict means, scored only on realizations that stay strictly inside
    the hull wherever the forecasters disagree."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("strict_mean", n_instances)
    for i in range(n_instances):
        inst = random_instance(rng)
        preds = inst.predictions
        x_eff = efficient_aggregator(inst.space, inst.y, [f.info for f in inst.forecasters])
        for spec in specs:
            x = aggregate(spec, preds)
            strict = is_strict_realization(preds, x)
            out.records.append({
                "instance": i,
                "subject": spec.label,
                "strict": strict,
                "inefficiency_prob": inefficiency_probability(inst.space, x, x_eff),
            })
    for spec in specs:
        rows = [d for d in out.records if d["subject"] == spec.label and d["strict"]]
        out.checks[f"{spec.label}:inefficient"] = bool(rows) and all(d["inefficiency_prob"] > 0 for d in rows)
    return out


def efficiency_certification(n_instances: int = 1000, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    """The efficient aggregator is calibrated, extremizing and satisfies the
    atom decomposition on every instance of the weighted-mean suite."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("efficiency_certification", n_instances)
    for i in range(n_instances):
        inst = random_instance(rng)
        random_weights(rng, len(inst.forecasters))  # keep the draw sequence aligned with weighted_mean_suite
        space, y, preds = inst.space, inst.y, inst.predictions
        x_eff = efficient_aggregator(space, y, [f.info for f in inst.forecasters])
        gap, _ = check_calibration(space, y, x_eff, tol)
        out.records.append({
            "instance": i,
            "n_outcomes": space.n_outcomes,
            "calibration_gap": gap,
            "violations": len(check_extremizing(space, y, preds, x_eff)),
            "decomposition_gap": decomposition_gap(space, preds, x_eff),
        })
    r = out.records
    out.checks = {
        "calibrated": all(d["calibration_gap"] <= tol for d in r),
        "extremizing": all(d["violations"] == 0 for d in r),
        "decomposition": all(d["decomposition_gap"] <= tol for d in r),
    }
    return out
