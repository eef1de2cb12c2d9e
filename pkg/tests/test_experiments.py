from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infoagg import InformationMenu, NoiseModel, Partition, calibrate
from infoagg.aggregators import HullPosition
from infoagg.errors import BoundaryOmega, DepthTooSmall, InvalidConfig, JamisonViolation, NonPositiveWeight, NonTrivialityError
from infoagg.experiments import (
    Example1Config,
    Example3Config,
    WeightRule,
    die_menu_config,
    efficiency_certification,
    jamison_check,
    random_instance,
    random_weights,
    run_corollary1,
    run_example1,
    run_example2,
    run_example3,
    shared_weight_curve,
    strict_mean_suite,
    weighted_mean_suite,
)
from infoagg.experiments.asymptotic import noisy_center
from infoagg.experiments.example3 import alternates, closed_form, cut_points, finite_space_values, gamma
from infoagg.experiments.random_instances import disagree
from infoagg.prob_core import moments


def normal_equation_oracle(v1, v2, v12, m=3):
    """Best linear weights from loops over the equally likely signal grid."""
    def pts(v):
        return [(k - (m - 1) / 2) * (v / ((m * m - 1) / 12)) ** 0.5 for k in range(m)]

    grid = list(itertools.product(pts(v1), pts(v2), pts(v12)))
    n = len(grid)

    def expert(j):
        # average Y over outcomes sharing this expert's private and shared signal
        out = []
        for g in grid:
            same = [h for h in grid if h[j] == g[j] and h[2] == g[2]]
            out.append(sum(sum(h) for h in same) / len(same))
        return out

    x1, x2, y = expert(0), expert(1), [sum(g) for g in grid]
    e = lambda u, v: sum(a * b for a, b in zip(u, v)) / n
    s11, s22, s12 = e(x1, x1), e(x2, x2), e(x1, x2)
    c1, c2 = e(x1, y), e(x2, y)
    det = s11 * s22 - s12 * s12
    return (c1 * s22 - c2 * s12) / det, (c2 * s11 - c1 * s12) / det, n


class TestExample1:
    def test_shared_signal_weights(self):
        rep = run_example1(Example1Config(1, 1, 1))
        b1, b2, n = normal_equation_oracle(1, 1, 1)
        assert n == 27
        assert (b1, b2) == pytest.approx((2 / 3, 2 / 3), abs=1e-12)
        assert rep.beta == pytest.approx((b1, b2), abs=1e-12)
        assert rep.delta == pytest.approx((2, 2), abs=1e-12)
        assert rep.rho == pytest.approx(1, abs=1e-12)
        assert rep.shared_weight == pytest.approx(4 / 3, abs=1e-12)
        assert rep.passed, rep.checks

    def test_independent_experts(self):
        rep = run_example1(Example1Config(1, 1, 0))
        assert rep.beta == pytest.approx((1, 1), abs=1e-12)
        assert rep.checks["independent_experts_sum"]
        assert rep.p_mean_ne_efficient > 0
        assert rep.passed

    @pytest.mark.parametrize("w", [(0.5, 0.5), (0.1, 0.9), (0.7, 0.3)])
    def test_any_nontrivial_mean_is_inefficient(self, w):
        assert run_example1(Example1Config(1, 1, 0, weights=w)).p_mean_ne_efficient > 0

    def test_asymmetric_matches_oracle(self):
        rep = run_example1(Example1Config(0.5, 2.0, 0.7))
        b1, b2, _ = normal_equation_oracle(0.5, 2.0, 0.7)
        assert rep.beta == pytest.approx((b1, b2), abs=1e-12)
        assert rep.passed

    def test_shared_weight_curve(self):
        curve = shared_weight_curve(1, 1, [0.2, 0.4, 0.6, 0.8, 1.0])
        # (1 + r) / (1 + 2r) per expert with unit private variance
        want = [2 * (1 + r) / (1 + 2 * r) for r in (0.2, 0.4, 0.6, 0.8, 1.0)]
        assert curve == pytest.approx(want, abs=1e-12)
        assert all(a > b for a, b in zip(curve, curve[1:]))

    def test_residual_noise(self):
        rep = run_example1(Example1Config(1, 1, 1, residual_var=0.5))
        assert rep.beta == pytest.approx((2 / 3, 2 / 3), abs=1e-12)
        assert rep.passed

    def test_degenerate_private_signals(self):
        with pytest.raises(NonTrivialityError):
            run_example1(Example1Config(0, 0, 1))

    @pytest.mark.parametrize("kw", [dict(v12=-1), dict(atoms_per_signal=1), dict(weights=(0.5, 0.6))])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            run_example1(Example1Config(**kw))

    def test_unknown_field(self):
        with pytest.raises(InvalidConfig):
            Example1Config.from_dict({"v3": 1})


class TestExample2:
    def test_display(self):
        rep = run_example2()
        assert rep.x1.tolist() == [0, 0.6, 0.6, 0.6, 0.6, 0.6]
        assert rep.x2.tolist() == [0.4, 0.4, 0.4, 0.4, 0.4, 1.0]
        assert rep.efficient.tolist() == [0, 0.5, 0.5, 0.5, 0.5, 1]
        assert rep.passed

    def test_positions(self):
        pos = run_example2().positions
        assert pos[0] is HullPosition.AT_MIN
        assert pos[5] is HullPosition.AT_MAX
        assert pos[2] is HullPosition.INTERIOR

    def test_table(self):
        header, rows = run_example2().table()
        assert header[0] == "face" and len(rows) == 6


class TestExample3:
    def test_points_at_depth_three(self):
        a, b = cut_points(3)
        assert Fraction(1, 3) in a and Fraction(2, 3) in a
        assert Fraction(1, 2) in b and Fraction(3, 4) in b and Fraction(1, 4) in b

    def test_gamma(self):
        assert [gamma(k) for k in range(3)] == [1, Fraction(3, 2), Fraction(7, 4)]

    @pytest.mark.parametrize("depth", [2, 3, 5, 10, 20])
    def test_alternation(self, depth):
        a, b = cut_points(depth)
        assert alternates(a, b)

    def test_alternates_rejects_runs(self):
        assert not alternates([Fraction(1, 4), Fraction(1, 3)], [Fraction(1, 2)])

    @pytest.mark.parametrize("depth", [3, 5, 12])
    def test_omega_point_six(self, depth):
        rep = run_example3(Example3Config(depth, 0.6))
        assert rep.x1 == 0.5
        assert rep.x2 == 0.625
        assert abs(rep.efficient - 7 / 12) <= 1e-12
        assert abs(1 / 3 * 0.5 + 2 / 3 * 0.625 - 7 / 12) <= 1e-15
        assert rep.passed

    def test_left_of_half_uses_min_branch(self):
        rep = run_example3(Example3Config(6, 0.5 - 1e-6))
        assert rep.x2 < 0.5
        lo, hi = sorted((rep.x1, rep.x2))
        assert rep.efficient == pytest.approx(2 / 3 * lo + 1 / 3 * hi, abs=1e-12)

    def test_boundary_omega(self):
        with pytest.raises(BoundaryOmega):
            run_example3(Example3Config(5, 0.5))

    def test_outer_atom_needs_depth(self):
        with pytest.raises(DepthTooSmall):
            run_example3(Example3Config(3, 0.02))

    @pytest.mark.parametrize("cfg", [Example3Config(1, 0.6), Example3Config(5, 1.2)])
    def test_invalid(self, cfg):
        with pytest.raises(InvalidConfig):
            run_example3(cfg)

    @settings(max_examples=60)
    @given(st.floats(0.01, 0.99).filter(lambda w: abs(w - 0.5) > 1e-9))
    def test_interior_and_closed_form(self, omega):
        try:
            rep = run_example3(Example3Config(40, omega))
        except (BoundaryOmega, DepthTooSmall):
            return
        lo, hi = sorted((rep.x1, rep.x2))
        assert lo < rep.efficient < hi
        assert rep.closed_form == pytest.approx(rep.efficient, abs=1e-12)

    @pytest.mark.parametrize("depth", [3, 6])
    def test_against_generic_conditioning(self, depth):
        bounds, complete, x1, x2, eff = finite_space_values(depth)
        assert complete.any()
        for (l, r), ok, e1, e2, ee in zip(bounds, complete, x1, x2, eff):
            if not ok:
                continue
            rep = run_example3(Example3Config(depth, (l + r) / 2))
            assert (rep.x1, rep.x2) == pytest.approx((e1, e2), abs=1e-12)
            assert rep.efficient == pytest.approx(ee, abs=1e-12)
            assert closed_form(e1, e2) == pytest.approx(ee, abs=1e-12)


class TestJamison:
    def test_equal_weights(self):
        rep = jamison_check(WeightRule("equal"), 1e4)
        assert 0.99 <= rep.sup_ratio <= 1.0
        assert rep.consistent

    def test_linear_weights(self):
        rep = jamison_check(WeightRule("power", 1.0), 1e4)
        assert 1.99 <= rep.sup_ratio <= 2.0
        assert rep.consistent

    def test_geometric_weights_flagged(self):
        rep = jamison_check(WeightRule("geometric", 2.0), 1e4)
        assert rep.saturated and not rep.consistent

    def test_callable_sequence(self):
        rep = jamison_check(lambda j: 1.0, 100)
        assert rep.sup_ratio == pytest.approx(1.0)

    def test_non_positive(self):
        with pytest.raises(NonPositiveWeight):
            jamison_check(lambda j: 1.0 if j < 5 else 0.0, 10)
        with pytest.raises(NonPositiveWeight):
            WeightRule("geometric", 0.0)

    def test_t_max(self):
        with pytest.raises(ValueError):
            jamison_check(WeightRule(), 1.0)


class TestCorollary1:
    def test_face_one(self):
        res = run_corollary1(die_menu_config())
        assert res.target == pytest.approx(0.2, abs=1e-15)
        assert res.efficient_value == 0.0
        assert res.dist_target[-1] <= 4 * res.se[-1]
        assert 0.15 <= res.dist_efficient[-1] <= 0.25
        assert res.passed

    def test_face_three(self):
        res = run_corollary1(die_menu_config(realized_outcome=2))
        assert res.target == pytest.approx(0.5) and res.efficient_value == pytest.approx(0.5)
        assert res.dist_target[-1] <= 4 * res.se[-1]
        assert res.dist_efficient[-1] <= 4 * res.se[-1]

    def test_zero_noise_single_partition(self, die):
        s, y, infos = die
        cfg = die_menu_config(menu=InformationMenu(infos, (1.0, 0.0)), noise=NoiseModel("additive", "gaussian", 0.0), n_max=200)
        res = run_corollary1(cfg)
        x1 = calibrate(s, y, infos[0]).prediction.values[0]
        assert np.all(res.aggregate == x1)

    def test_reproducible(self):
        a = run_corollary1(die_menu_config(n_max=500, seed=4))
        b = run_corollary1(die_menu_config(n_max=500, seed=4))
        c = run_corollary1(die_menu_config(n_max=500, seed=5))
        assert np.array_equal(a.aggregate, b.aggregate)
        assert not np.array_equal(a.aggregate, c.aggregate)

    def test_trace_prefix_independent_of_length(self):
        a = run_corollary1(die_menu_config(n_max=300))
        b = run_corollary1(die_menu_config(n_max=1000))
        assert np.array_equal(a.aggregate, b.aggregate[:300])

    def test_geometric_weights_rejected(self):
        with pytest.raises(JamisonViolation):
            run_corollary1(die_menu_config(weight_rule=WeightRule("geometric", 2.0)))

    def test_linear_weights_converge(self):
        res = run_corollary1(die_menu_config(weight_rule=WeightRule("power", 1.0)))
        assert res.dist_target[-1] <= 4 * res.se[-1]

    def test_logit_noise_target(self):
        # interior calibrated values are needed for logit noise: face 3
        cfg = die_menu_config(noise=NoiseModel("logit_additive", "gaussian", 0.5), realized_outcome=2)
        res = run_corollary1(cfg)
        want = 0.5 * (noisy_center(0.6, cfg.noise) + noisy_center(0.4, cfg.noise))
        assert res.target == pytest.approx(want, abs=1e-12)
        assert res.dist_target[-1] <= 4 * res.se[-1]

    def test_noisy_center_quadrature(self):
        m = NoiseModel("logit_additive", "uniform", 1.0)
        e = np.random.default_rng(0).uniform(-1, 1, 400_000)
        mc = np.mean(1 / (1 + np.exp(-(np.log(0.7 / 0.3) + e))))
        assert noisy_center(0.7, m) == pytest.approx(mc, abs=2e-3)

    @pytest.mark.parametrize("kw", [dict(n_max=0), dict(realized_outcome=6)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            run_corollary1(die_menu_config(**kw))

    def test_coarser_predictions_flagged(self):
        # the partition {0,1},{2,3} predicts the same on both blocks
        from infoagg import make_space

        s = make_space([1, 1, 1, 1])
        y = s.rv([0, 1, 1, 0])
        menu = InformationMenu([Partition([0, 0, 1, 1]), Partition([0, 1, 0, 1])], (0.5, 0.5))
        cfg = die_menu_config(space=s, y=y, menu=menu, n_max=50)
        assert run_corollary1(cfg).predictions_coarser


class TestRandomInstances:
    def test_properties(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            inst = random_instance(rng)
            n = inst.space.n_outcomes
            assert 4 <= n <= 64
            assert 2 <= len(inst.forecasters) <= 6
            assert all(f.info.n_blocks >= 3 for f in inst.forecasters)
            assert disagree(inst.space, inst.predictions)
            mu0 = moments(inst.space, inst.y)[0]
            assert all(abs(moments(inst.space, p)[0] - mu0) <= 1e-10 for p in inst.predictions)

    def test_weights(self):
        w = random_weights(np.random.default_rng(1), 5)
        assert len(w) == 5 and min(w) > 0 and abs(sum(w) - 1) <= 1e-15


class TestSuites:
    def test_weighted_mean(self):
        res = weighted_mean_suite(60, seed=11)
        assert res.passed, res.checks
        assert len(res.records) == 60

    def test_strict_means(self):
        res = strict_mean_suite(60, seed=12)
        assert res.passed, res.checks

    def test_certification(self):
        res = efficiency_certification(60, seed=13)
        assert res.passed, res.checks

    def test_certification_uses_weighted_mean_spaces(self):
        a = weighted_mean_suite(5, seed=3)
        b = efficiency_certification(5, seed=3)
        assert [r["n_outcomes"] for r in a.records] == [r["n_outcomes"] for r in b.records]
