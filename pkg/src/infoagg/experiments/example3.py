"""Two interleaved interval partitions of [0, 1] under Lebesgue measure.

Cut points accumulate only near 0 and 1 and alternate between the two
forecasters, which makes the efficient aggregate a strict mean.  The
infinite sequences are truncated at ``depth`` terms per side; omegas that
fall in the merged outer atoms are rejected instead of approximated.
"""

from __future__ import annotations

import bisect
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from ..aggregators import efficient_from_predictions, hull_classify, HullPosition
from ..errors import BoundaryOmega, DepthTooSmall, InvalidConfig
from ..prob_core import Partition, conditional_expectation, make_space

HALF = Fraction(1, 2)


def gamma(k: int) -> Fraction:
    """Partial sum 1 + 1/2 + ... + 2^-k."""
    return 2 - Fraction(1, 2**k)


def cut_points(depth: int) -> tuple[list[Fraction], list[Fraction]]:
    """Sorted cut points (first forecaster, second forecaster)."""
    a = set()
    b = {HALF}
    for k in range(depth):
        off_a = gamma(k) / 3 - Fraction(1, 6)
        off_b = gamma(k) / 4
        a.update((HALF - off_a, HALF + off_a))
        b.update((HALF - off_b, HALF + off_b))
    return sorted(a), sorted(b)


def alternates(a: list[Fraction], b: list[Fraction]) -> bool:
    """Merged points strictly alternate between the two sequences."""
    merged = sorted([(p, 0) for p in a] + [(p, 1) for p in b])
    if len({p for p, _ in merged}) != len(merged):
        return False
    return all(merged[i][1] != merged[i + 1][1] for i in range(len(merged) - 1))


@dataclass(frozen=True)
class Example3Config:
    depth: int = 5
    omega: float = 0.6

    @classmethod
    def from_dict(cls, doc: dict) -> "Example3Config":
        extra = set(doc) - {"depth", "omega"}
        if extra:
            raise InvalidConfig(f"unknown example 3 fields {sorted(extra)}")
        return cls(int(doc.get("depth", 5)), float(doc.get("omega", 0.6)))


def _atom(points: list[Fraction], w: Fraction) -> tuple[Fraction, Fraction]:
    if w in points:
        raise BoundaryOmega(f"omega={float(w)!r} is a partition point")
    i = bisect.bisect_left(points, w)
    if i == 0 or i == len(points):
        raise DepthTooSmall(f"omega={float(w)!r} falls in a truncated outer atom; increase depth")
    return points[i - 1], points[i]


@dataclass
class Example3Report:
    config: Example3Config
    x1: float
    x2: float
    efficient: float
    closed_form: float
    atom1: tuple[float, float]
    atom2: tuple[float, float]
    joint_atom: tuple[float, float]
    position: HullPosition
    note: str = "finite truncation: atoms beyond the configured depth are merged and never evaluated"
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["config"] = asdict(self.config)
        doc["position"] = self.position.value
        return doc

    def table(self) -> tuple[list[str], list[list]]:
        header = ["omega", "x1", "x2", "efficient", "closed_form", "hull_position"]
        return header, [[self.config.omega, self.x1, self.x2, self.efficient, self.closed_form, self.position.value]]


def closed_form(x1: float, x2: float) -> float:
    """Two-thirds weight on the prediction nearer the closer end of [0, 1]."""
    lo, hi = min(x1, x2), max(x1, x2)
    if x2 < 0.5:
        return 2 / 3 * lo + 1 / 3 * hi
    return 1 / 3 * lo + 2 / 3 * hi


def run_example3(cfg: Example3Config) -> Example3Report:
    if cfg.depth < 2:
        raise InvalidConfig("depth must be at least 2")
    if not 0.0 < cfg.omega < 1.0:
        raise InvalidConfig("omega must lie in (0, 1)")
    a, b = cut_points(cfg.depth)
    w = Fraction(cfg.omega)
    a_lo, a_hi = _atom(a, w)
    b_lo, b_hi = _atom(b, w)
    x1 = (a_lo + a_hi) / 2
    x2 = (b_lo + b_hi) / 2
    # Midpoint of the joint atom, case by case
    eff = (b_lo + a_hi) / 2 if a_lo < b_lo else (b_hi + a_lo) / 2
    j_lo, j_hi = max(a_lo, b_lo), min(a_hi, b_hi)
    cf = closed_form(float(x1), float(x2))
    position = hull_classify((float(x1), float(x2)), float(eff))
    checks = {
        "points_alternate": alternates(a, b),
        "matches_joint_atom_midpoint": eff == (j_lo + j_hi) / 2,
        "closed_form_agrees": abs(cf - float(eff)) <= 1e-12,
        "efficient_strictly_interior": position is HullPosition.INTERIOR,
    }
    return Example3Report(
        config=cfg,
        x1=float(x1),
        x2=float(x2),
        efficient=float(eff),
        closed_form=cf,
        atom1=(float(a_lo), float(a_hi)),
        atom2=(float(b_lo), float(b_hi)),
        joint_atom=(float(j_lo), float(j_hi)),
        position=position,
        checks=checks,
    )


def finite_space_values(depth: int):
    """Predictions on the truncated joint atoms via generic conditioning.

    Each joint atom between the outermost cut points becomes one outcome
    with probability proportional to its length and outcome value equal to
    its midpoint.  Returns (joint atom bounds, complete, x1, x2, efficient)
    arrays, where ``complete`` marks joint atoms whose parent atoms in both
    partitions lie wholly inside the truncated range.
    """
    a, b = cut_points(depth)
    lo, hi = max(a[0], b[0]), min(a[-1], b[-1])
    pts = sorted(p for p in set(a) | set(b) if lo <= p <= hi)
    bounds = list(zip(pts[:-1], pts[1:]))
    space = make_space([float(r - l) for l, r in bounds])
    y = space.rv([float((l + r) / 2) for l, r in bounds])

    def labels(cuts):
        return [bisect.bisect_right(cuts, l) for l, _ in bounds]

    x1 = conditional_expectation(space, y, Partition(labels(a)))
    x2 = conditional_expectation(space, y, Partition(labels(b)))
    eff = efficient_from_predictions(space, y, [x1, x2])

    def whole(cuts, l):
        i = bisect.bisect_right(cuts, l)
        return 0 < i < len(cuts) and cuts[i - 1] >= lo and cuts[i] <= hi

    complete = np.array([whole(a, l) and whole(b, l) for l, _ in bounds])
    return np.array(bounds, dtype=float), complete, x1.values, x2.values, eff.values
