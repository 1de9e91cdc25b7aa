# -*- coding: utf-8 -*-
"""fourier_density モジュールのテスト"""

import math

import numpy as np
import pytest

from kgspec.bounds import slope_bound_m
from kgspec.errors import TailBoundError
from kgspec.fourier_density import (
    FourierDensity, RearrangedProfile, check_bessel_bound, check_equimeasurability,
    check_gradient_bound, check_h_monotonicity, check_normalization, check_phi0_bound,
    check_slope_condition, check_sum_identity, density_sample_points, eval_F, eval_grad_F,
    gradient_fd_check, integrate_density, moments_bridge, profile_bound_chain, rearrange,
    rearrange_samples, sample_density_grid
)
from kgspec.geometry import Domain
from kgspec.spectral import compute_spectrum

INTERVAL = Domain.interval(2.0)
SQUARE = Domain.box([1.0, 1.0])


@pytest.fixture(scope="module")
def interval_density():
    return FourierDensity(compute_spectrum(INTERVAL, "sine", 32, k=3), 3)


@pytest.fixture(scope="module")
def square_density():
    return FourierDensity(compute_spectrum(SQUARE, "sine", 6, k=2), 2)


@pytest.fixture(scope="module")
def interval_profile(interval_density):
    return rearrange(interval_density, INTERVAL)


class TestEvaluation:
    """F と ∇F の評価"""

    def test_scalar_and_array(self, interval_density):
        assert isinstance(eval_F(interval_density, 0.3), float)
        assert eval_F(interval_density, np.array([0.3, 1.0])).shape == (2,)

    def test_density_is_even(self, interval_density, square_density):
        assert eval_F(interval_density, 2.7) == pytest.approx(eval_F(interval_density, -2.7), rel=1e-12)
        point = np.array([1.1, -3.0])
        assert eval_F(square_density, point) == pytest.approx(eval_F(square_density, -point), rel=1e-12)

    def test_gradient_matches_finite_differences(self, interval_density, square_density):
        for fd in (interval_density, square_density):
            points = density_sample_points(fd, 25)
            assert gradient_fd_check(fd, points)["holds"]

    def test_gradient_shape(self, square_density):
        assert eval_grad_F(square_density, np.array([0.5, 0.5])).shape == (2,)
        assert eval_grad_F(square_density, np.zeros((4, 2))).shape == (4, 2)

    def test_zero_modes(self, interval_density):
        empty = FourierDensity(interval_density.source, 0)
        assert eval_F(empty, 1.0) == 0.0
        assert check_normalization(empty)["holds"]

    def test_k_beyond_retained_modes(self, interval_density):
        with pytest.raises(ValueError):
            FourierDensity(interval_density.source, 4)


class TestIdentities:
    """積分恒等式と点ごとの上界"""

    @pytest.mark.parametrize("name", ["interval_density", "square_density"])
    def test_normalization_and_sum_identity(self, name, request):
        fd = request.getfixturevalue(name)
        integrals = integrate_density(fd)
        normalization = check_normalization(fd, integrals=integrals)
        identity = check_sum_identity(fd, integrals=integrals)
        assert normalization["holds"]
        assert normalization["rel_err"] <= 5e-3
        assert identity["holds"]
        assert identity["sum_beta"] == pytest.approx(fd.source.eigenvalue_sum(fd.k))

    @pytest.mark.parametrize("name, dom", [("interval_density", INTERVAL), ("square_density", SQUARE)])
    def test_bessel_and_gradient_bounds(self, name, dom, request):
        fd = request.getfixturevalue(name)
        grid = density_sample_points(fd, 1000)
        bessel = check_bessel_bound(fd, dom, grid)
        gradient = check_gradient_bound(fd, dom, grid)
        assert bessel["holds"]
        assert bessel["bound"] == pytest.approx(dom.volume() / (2.0 * math.pi) ** dom.dimension)
        assert gradient["holds"]
        assert gradient["m"] == pytest.approx(slope_bound_m(dom))

    def test_bessel_on_empty_grid(self, interval_density):
        with pytest.raises(ValueError):
            check_bessel_bound(interval_density, INTERVAL, np.array([]))

    def test_sample_points_cover_square(self, square_density):
        points = density_sample_points(square_density, 100)
        assert points.shape == (100, 2)


class TestRearrangement:
    """減少的球対称再配列"""

    def test_synthetic_samples(self):
        profile = rearrange_samples(np.array([[1.0, 3.0], [2.0, 4.0]]), 1.0, 2)
        assert profile.values.tolist() == [4.0, 4.0, 3.0, 2.0, 1.0]
        assert profile.radii[0] == 0.0
        assert profile.radii[1] == pytest.approx(math.sqrt(0.5 / math.pi))
        assert profile.captured_mass == pytest.approx(10.0)

    def test_profile_must_be_nonincreasing(self):
        with pytest.raises(ValueError):
            RearrangedProfile(np.array([0.0, 1.0]), np.array([1.0, 2.0]), 1.0, 1)

    def test_interval_profile(self, interval_profile):
        assert np.all(np.diff(interval_profile.values) <= 0)
        assert interval_profile.boundary_ratio <= 1e-3
        assert interval_profile.captured_mass == pytest.approx(3.0, rel=1e-2)

    def test_interval_checks(self, interval_density, interval_profile):
        assert check_slope_condition(interval_profile)["holds"]
        assert check_phi0_bound(interval_profile, INTERVAL)["holds"]
        chain = profile_bound_chain(interval_profile, 3, interval_density.source.eigenvalue_sum(3))
        assert chain["first_term_holds"]
        assert chain["full_bound"] is None

    def test_equimeasurability(self, interval_density):
        grid = sample_density_grid(interval_density)
        profile = rearrange(interval_density, INTERVAL, grid=grid)
        assert check_equimeasurability(profile, grid[1], seed=1)["holds"]

    def test_moments_bridge(self, interval_density, interval_profile):
        bridge = moments_bridge(interval_profile)
        assert bridge["k_recovered"] == pytest.approx(3.0, rel=2e-2)
        # 再配列は |ξ| のモーメントを減らす
        assert bridge["sum_recovered"] <= interval_density.source.eigenvalue_sum(3) * (1.0 + 1e-2)

    def test_square_profile(self, square_density):
        profile = rearrange(square_density, SQUARE)
        assert check_slope_condition(profile)["holds"]
        assert check_phi0_bound(profile, SQUARE)["holds"]
        chain = profile_bound_chain(profile, 2, square_density.source.eigenvalue_sum(2))
        assert chain["first_term_holds"]
        assert chain["full_bound"] > chain["first_term"]

    def test_small_cutoff_raises(self, interval_density):
        with pytest.raises(TailBoundError):
            rearrange(interval_density, INTERVAL, sampling={"cutoff": 0.5 * interval_density.top_frequency()})

    def test_too_few_samples(self, interval_density):
        with pytest.raises(ValueError):
            sample_density_grid(interval_density, samples=10)

    def test_profile_record(self, interval_profile):
        record = interval_profile.to_dict()
        assert "radii" not in record
        assert record["phi0"] == interval_profile.phi0
        assert len(interval_profile.to_dict(include_grid=True)["radii"]) == len(interval_profile.radii)


class TestSlopeCondition:
    """傾き条件（合成データ）"""

    def test_within_bound(self):
        profile = RearrangedProfile(np.array([0.0, 1.0, 2.0]), np.array([2.0, 1.0, 0.0]), 1.0, 1)
        assert check_slope_condition(profile)["holds"]

    def test_grid_profile_is_resampled_before_differencing(self):
        # 1 次元格子上の (1 − |ξ|)_+ は同じ値が 2 点ずつ並び、隣接差分では傾き 2 に見える
        xi = (np.arange(20) - 9.5) * 0.1
        profile = rearrange_samples(1.0 - np.abs(xi), 0.1, 1, m_bound=1.0)
        adjacent = -np.diff(profile.values) / np.diff(profile.radii)
        assert adjacent.max() == pytest.approx(2.0)
        result = check_slope_condition(profile)
        assert result["holds"]
        assert result["max_slope"] == pytest.approx(1.0, rel=1e-9)

    def test_exceeds_bound(self):
        profile = RearrangedProfile(np.array([0.0, 1.0, 2.0]), np.array([2.0, 1.0, 0.0]), 0.5, 1)
        result = check_slope_condition(profile)
        assert not result["holds"]
        assert result["max_slope"] == pytest.approx(1.0)


class TestHMonotonicity:
    """h(t) の単調性"""

    @pytest.mark.parametrize("k", [1, 2, 6, 20])
    def test_unit_square(self, k):
        result = check_h_monotonicity(SQUARE.measures(), k)
        assert result["applicable"]
        assert result["holds"]
        assert result["stationary_point"] > result["t_max"]

    def test_not_applicable_in_one_dimension(self):
        result = check_h_monotonicity(INTERVAL.measures(), 3)
        assert result["applicable"] is False
        assert result["holds"] is True
