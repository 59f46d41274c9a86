"""Collapse costs, optimizer, widths, and curve fits against synthetics."""

import math

import numpy as np
import pytest

from fockscope import (
    BKTAnsatz,
    PowerLawAnsatz,
    ScalingDataset,
    collapsed_coordinates,
    cost_bkt,
    cost_power_law,
    estimate_width,
    fit_log_growth,
    fit_power_beta,
    interpolate_linear,
    optimize_collapse,
    xi_bkt,
)
from fockscope.errors import (
    InvalidParameterError,
    UndefinedCostError,
    WindowError,
)


def power_law_dataset(Wc=5.7, nu=1.0, lam=1.7, sizes=(14, 16, 18, 20), n=141):
    W = np.linspace(5.0, 6.4, n)
    curves = {
        L: (W, L**lam * np.exp(-(((W - Wc) * L ** (1.0 / nu)) ** 2)))
        for L in sizes
    }
    return ScalingDataset(curves)


def bkt_dataset(b=18.0, w0=5.2, w1=0.61, sizes=(12, 14, 16, 18), n=49):
    W = np.linspace(8.0, 20.0, n)
    curves = {}
    for L in sizes:
        x = L * np.exp(-b / np.sqrt(np.abs(W - (w0 + w1 * L))))
        curves[L] = (W, 1200.0 * x / (1.0 + 30.0 * x))
    return ScalingDataset(curves)


class TestInterpolateLinear:
    def test_knot_exact(self):
        curve = np.array([[0.0, 1.0], [1.0, 3.0], [2.0, -1.0]])
        assert interpolate_linear(curve, 1.0) == 3.0

    def test_midpoint(self):
        curve = np.array([[0.0, 0.0], [1.0, 2.0]])
        assert interpolate_linear(curve, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_out_of_range_marker(self):
        curve = np.array([[0.0, 0.0], [1.0, 2.0]])
        assert math.isnan(interpolate_linear(curve, -0.1))
        assert math.isnan(interpolate_linear(curve, 1.1))

    def test_unsorted_rejected(self):
        with pytest.raises(InvalidParameterError):
            interpolate_linear(np.array([[1.0, 0.0], [0.0, 1.0]]), 0.5)


class TestCostPowerLaw:
    def test_synthetic_at_truth_near_zero(self):
        data = power_law_dataset()
        r = cost_power_law(data, PowerLawAnsatz(5.7, 1.0, 1.7))
        qmax = max(q.max() for _, q in data.curves.values())
        assert r < 1e-3 * qmax

    def test_perturbing_nu_increases_cost(self):
        data = power_law_dataset()
        r0 = cost_power_law(data, PowerLawAnsatz(5.7, 1.0, 1.7))
        r1 = cost_power_law(data, PowerLawAnsatz(5.7, 1.5, 1.7))
        assert r1 > r0 * 10

    def test_single_matching_point_per_size_is_zero(self):
        # identical values at identical collapse coordinates
        data = ScalingDataset(
            {10: ([5.0], [2.0]), 12: ([5.0], [2.0])}, validate=False
        )
        r = cost_power_law(data, PowerLawAnsatz(5.0, 1.0, 0.0))
        assert r == 0.0

    def test_identical_curves_trivial_parameters(self):
        # lam = 0 and 1/nu ~ 0 leave every curve unscaled: shared-grid
        # curves then collapse onto themselves regardless of W_c
        W = np.linspace(1.0, 4.0, 25)
        q = np.sin(W) + 2.0
        data = ScalingDataset({8: (W, q), 10: (W, q), 12: (W, q)})
        r = cost_power_law(data, PowerLawAnsatz(2.2, 1e12, 0.0))
        assert r < 1e-9

    def test_invariant_under_reordering(self):
        data = power_law_dataset(n=31)
        reordered = ScalingDataset(
            {L: data.curves[L] for L in reversed(list(data.curves))}
        )
        p = PowerLawAnsatz(5.6, 1.1, 1.6)
        assert cost_power_law(data, p) == cost_power_law(reordered, p)

    def test_no_overlap_raises(self):
        data = ScalingDataset(
            {10: ([1.0], [2.0]), 12: ([5.0], [2.0])}, validate=False
        )
        with pytest.raises(UndefinedCostError):
            cost_power_law(data, PowerLawAnsatz(0.0, 0.3, 1.0))


class TestCostBkt:
    def test_synthetic_minimum_at_truth(self):
        data = bkt_dataset()
        r0 = cost_bkt(data, BKTAnsatz(18.0, 5.2, 0.61))
        for bad in (
            BKTAnsatz(19.8, 5.2, 0.61),
            BKTAnsatz(18.0, 5.9, 0.61),
            BKTAnsatz(18.0, 5.2, 0.75),
        ):
            assert cost_bkt(data, bad) > 3 * r0

    def test_xi_divergence_near_crossing(self):
        assert xi_bkt(5.0 + 1e-12, 2.0, 5.0) == np.inf
        x = 10 * np.exp(-2.0 / np.sqrt(np.abs(5.0 + 1e-12 - 5.0)))
        assert x == 0.0

    def test_xi_strictly_decreasing_away_from_crossing(self):
        d = np.linspace(0.1, 10, 50)
        xi = xi_bkt(5.0 + d, 3.0, 5.0)
        assert np.all(np.diff(xi) < 0)
        xi_left = xi_bkt(5.0 - d, 3.0, 5.0)
        np.testing.assert_allclose(xi_left, xi, rtol=1e-12)

    def test_small_b_limit_excludes_everything(self):
        # as b -> 0+ each size's rescaled points pile up at x = L, so the
        # per-size hulls stop overlapping and the cost becomes undefined
        data = bkt_dataset(n=25)
        with pytest.raises(UndefinedCostError):
            cost_bkt(data, BKTAnsatz(1e-9, 5.2, 0.61))

    def test_points_at_crossing_excluded(self):
        W = np.array([4.0, 5.0, 6.0, 7.0])
        data = ScalingDataset(
            {8: (W, np.ones(4)), 10: (W, np.ones(4))}, validate=True
        )
        # W_star(8) = 5.0 exactly: that point must be dropped, not evaluated
        r = cost_bkt(data, BKTAnsatz(1.0, 5.0, 0.0))
        assert np.isfinite(r)


class TestOptimizeCollapse:
    def test_power_law_round_trip(self):
        data = power_law_dataset(n=71)
        res = optimize_collapse(
            data,
            "power-law",
            {"W_c": (4.5, 7.0), "nu": (0.5, 2.0), "lam": (1.0, 2.5)},
            restarts=24,
            seed=7,
        )
        assert res.params["W_c"] == pytest.approx(5.7, rel=0.02)
        assert res.params["nu"] == pytest.approx(1.0, rel=0.02)
        assert res.params["lam"] == pytest.approx(1.7, rel=0.02)
        assert res.n_points > 0
        assert set(res.widths) == {"W_c", "nu", "lam"}

    def test_bkt_round_trip(self):
        data = bkt_dataset()
        res = optimize_collapse(
            data,
            "bkt",
            {"b": (10.0, 30.0), "w0": (3.0, 8.0), "w1": (0.2, 1.2)},
            restarts=24,
            seed=7,
        )
        assert res.params["b"] == pytest.approx(18.0, rel=0.03)
        assert res.params["w0"] == pytest.approx(5.2, rel=0.03)
        assert res.params["w1"] == pytest.approx(0.61, rel=0.03)

    def test_deterministic(self):
        data = power_law_dataset(n=31)
        box = {"W_c": (4.5, 7.0), "nu": (0.5, 2.0), "lam": (1.0, 2.5)}
        r1 = optimize_collapse(data, "power-law", box, restarts=8, seed=3)
        r2 = optimize_collapse(data, "power-law", box, restarts=8, seed=3)
        assert r1.params == r2.params and r1.R_star == r2.R_star

    def test_fitted_crossing_point_increases_with_size(self):
        data = bkt_dataset()
        res = optimize_collapse(
            data,
            "bkt",
            {"b": (10.0, 30.0), "w0": (3.0, 8.0), "w1": (0.2, 1.2)},
            restarts=16,
            seed=1,
        )
        w_stars = [res.params["w0"] + res.params["w1"] * L for L in (12, 14, 16, 18)]
        assert np.all(np.diff(w_stars) > 0)

    def test_collapsed_coordinates_export(self):
        data = power_law_dataset(n=31)
        rows = collapsed_coordinates(data, PowerLawAnsatz(5.7, 1.0, 1.7))
        assert rows.shape == (data.n_points, 3)
        assert set(np.unique(rows[:, 2])) == {14, 16, 18, 20}


class TestEstimateWidth:
    def test_gaussian_cost_eta_independent(self):
        kappa = 7.3
        theta0 = 5.7

        def cost(x):
            return 0.2 * math.exp(0.5 * kappa * (x[0] - theta0) ** 2)

        for eta in (0.005, 0.01, 0.02):
            w = estimate_width(cost, np.array([theta0]), 0, eta=eta)
            assert w == pytest.approx(kappa**-0.5, rel=0.01)

    def test_cost_doubling_identity(self):
        theta0, eta = 5.7, 0.01

        def cost(x):
            return 0.31 * 2.0 ** ((x[0] - theta0) / (eta * theta0))

        w = estimate_width(cost, np.array([theta0]), 0, eta=eta)
        expect = eta * theta0 * (2 * math.log(2)) ** -0.5
        assert w == pytest.approx(expect, abs=1e-12)

    def test_width_scales_with_parameter_value(self):
        # fixed cost ratio at the relative perturbation -> width prop. theta
        def make_cost(theta0, eta):
            return lambda x: 1.0 * 2.0 ** ((x[0] - theta0) / (eta * theta0))

        w1 = estimate_width(make_cost(2.0, 0.01), np.array([2.0]), 0, eta=0.01)
        w2 = estimate_width(make_cost(6.0, 0.01), np.array([6.0]), 0, eta=0.01)
        assert w2 == pytest.approx(3.0 * w1, rel=1e-10)

    def test_flat_minimum_escalates_eta_with_warning(self):
        theta0 = 4.0

        def plateau_cost(x):
            d = abs(x[0] - theta0)
            return 1.0 if d < 0.1 else 1.0 + d**2

        with pytest.warns(UserWarning, match="lower bound"):
            w = estimate_width(plateau_cost, np.array([theta0]), 0, eta=0.01)
        assert np.isfinite(w) and w > 0

    def test_never_rising_cost_warns_inf(self):
        with pytest.warns(UserWarning, match="never rose"):
            w = estimate_width(lambda x: 1.0, np.array([2.0]), 0)
        assert w == np.inf


class TestFitPowerBeta:
    def test_exact_power_law(self):
        L = np.array([8, 10, 12, 14, 16])
        fit = fit_power_beta(np.column_stack([L, 3.0 * L**2.0]))
        assert fit.beta == pytest.approx(2.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-12)
        assert fit.ci95[0] == pytest.approx(2.0, abs=1e-10)
        assert fit.ci95[1] == pytest.approx(2.0, abs=1e-10)

    def test_nonpositive_rejected(self):
        with pytest.raises(InvalidParameterError):
            fit_power_beta([(8, 1.0), (10, -2.0), (12, 3.0)])

    def test_too_few_points(self):
        with pytest.raises(InvalidParameterError):
            fit_power_beta([(8, 1.0), (10, 2.0)])

    def test_noisy_recovery(self, rng):
        L = np.array([8, 10, 12, 14, 16, 18, 20])
        q = 2.0 * L**1.36 * np.exp(rng.normal(0, 0.02, len(L)))
        fit = fit_power_beta(np.column_stack([L, q]))
        assert fit.ci95[0] < 1.36 < fit.ci95[1]


class TestFitLogGrowth:
    def test_exact_log(self):
        t = np.geomspace(1, 1000, 40)
        fit = fit_log_growth(np.column_stack([t, 2.0 * np.log(t)]), (1.0, 1000.0))
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.goodness == pytest.approx(1.0, abs=1e-12)

    def test_window_restriction(self):
        t = np.geomspace(0.1, 1000, 60)
        y = np.where(t < 10, 100.0, 3.0 * np.log(t))  # garbage before t=10
        fit = fit_log_growth(np.column_stack([t, y]), (10.0, 1000.0))
        assert fit.slope == pytest.approx(3.0, abs=1e-10)

    def test_too_few_points(self):
        t = np.array([1.0, 2.0, 50.0, 80.0])
        with pytest.raises(WindowError):
            fit_log_growth(np.column_stack([t, np.log(t)]), (10.0, 20.0))

    def test_monte_carlo_unbiased(self, rng):
        # the spread of fitted slopes over repeated noise draws brackets truth
        t = np.geomspace(10, 1000, 30)
        slopes = []
        for _ in range(100):
            y = 1.5 * np.log(t) + 0.4 + rng.normal(0, 0.3, len(t))
            slopes.append(fit_log_growth(np.column_stack([t, y]), (10, 1000)).slope)
        lo, hi = np.quantile(slopes, [0.025, 0.975])
        assert lo < 1.5 < hi


class TestScalingDataset:
    def test_from_window_averages(self):
        rows = [(10, 2.0, 1.1), (10, 1.0, 0.9), (12, 1.0, 1.4), (12, 2.0, 1.8),
                (10, 3.0, 1.2), (10, 4.0, 1.0), (12, 3.0, 2.0), (12, 4.0, 1.6)]
        data = ScalingDataset.from_window_averages(rows)
        assert data.sizes == [10, 12]
        w10, q10 = data.curves[10]
        assert list(w10) == [1.0, 2.0, 3.0, 4.0]
        assert q10[0] == 0.9

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            ScalingDataset({10: ([1, 2, 3, 4], [1, 1, 1, 1])})  # one size only
        with pytest.raises(InvalidParameterError):
            ScalingDataset({10: ([1, 2], [1, 1]), 12: ([1, 2], [1, 1])})
