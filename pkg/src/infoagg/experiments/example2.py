"""Fair die, two forecasters who each learn whether one face came up.

The efficient aggregate equals the smallest prediction on face 1 and the
largest on face 6, so it is a mean but not a strict mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..aggregators import HullPosition, efficient_aggregator, hull_classify
from ..prob_core import Partition, ProbabilitySpace, RandomVariable, make_space
from ..forecasters import calibrate

# Face 1 is outcome 0, ..., face 6 is outcome 5.
EXPECTED_X1 = (0.0, 3 / 5, 3 / 5, 3 / 5, 3 / 5, 3 / 5)
EXPECTED_X2 = (2 / 5, 2 / 5, 2 / 5, 2 / 5, 2 / 5, 1.0)
EXPECTED_EFFICIENT = (0.0, 1 / 2, 1 / 2, 1 / 2, 1 / 2, 1.0)
EXACT_TOL = 1e-15


def die_space() -> tuple[ProbabilitySpace, RandomVariable]:
    """Uniform die with the even-face indicator as outcome."""
    space = make_space([1] * 6)
    y = space.rv([0, 1, 0, 1, 0, 1])
    return space, y


def die_infos() -> tuple[Partition, Partition]:
    """Information generated by {face 1} and by {face 6}."""
    return (
        Partition.from_blocks([[0], [1, 2, 3, 4, 5]]),
        Partition.from_blocks([[0, 1, 2, 3, 4], [5]]),
    )


@dataclass
class Example2Report:
    x1: np.ndarray
    x2: np.ndarray
    efficient: np.ndarray
    positions: list[HullPosition]
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def table(self) -> tuple[list[str], list[list]]:
        header = ["face", "x1", "x2", "efficient", "hull_position"]
        rows = [
            [i + 1, self.x1[i], self.x2[i], self.efficient[i], self.positions[i].value]
            for i in range(self.x1.size)
        ]
        return header, rows


def run_example2() -> Example2Report:
    space, y = die_space()
    infos = die_infos()
    x1 = calibrate(space, y, infos[0]).prediction.values
    x2 = calibrate(space, y, infos[1]).prediction.values
    eff = efficient_aggregator(space, y, infos).values
    positions = [hull_classify((a, b), v) for a, b, v in zip(x1, x2, eff)]
    checks = {
        "x1_matches_display": bool(np.max(np.abs(x1 - EXPECTED_X1)) <= EXACT_TOL),
        "x2_matches_display": bool(np.max(np.abs(x2 - EXPECTED_X2)) <= EXACT_TOL),
        "efficient_matches_display": bool(np.max(np.abs(eff - EXPECTED_EFFICIENT)) <= EXACT_TOL),
        "efficient_at_min_on_face_1": positions[0] is HullPosition.AT_MIN,
        "efficient_at_max_on_face_6": positions[5] is HullPosition.AT_MAX,
        "efficient_interior_on_faces_2_to_5": all(p is HullPosition.INTERIOR for p in positions[1:5]),
    }
    return Example2Report(x1, x2, eff, positions, checks)
