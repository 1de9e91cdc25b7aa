# -*- coding: utf-8 -*-
"""bounds モジュールのテスト（定数チェーンは mpmath の高精度計算と照合）"""

import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from kgspec.bounds import (
    FULL, LEADING_ONLY, ball_inertia_lower_bound, gamma_half, h_function, h_threshold,
    improved_constant_C, improved_kg_bound, kg_berezin_li_yau_bound, li_yau_laplacian_bound,
    melas_laplacian_bound, omega_d, riesz_mean, slope_bound_lower_chain, slope_bound_m,
    tilde_C_d, tilde_M_d, two_term_laplacian_ratio, weyl_estimate, weyl_ratio
)
from kgspec.errors import DimensionUnsupportedError
from kgspec.geometry import Domain, DomainMeasures, moment_of_inertia

mpmath.mp.dps = 40


def mp_chain_unit_square(k):
    """単位正方形の定数チェーンを 40 桁で評価"""
    pi = mpmath.pi
    d, vol, inertia = 2, mpmath.mpf(1), mpmath.mpf(1) / 6
    omega = pi ** (mpmath.mpf(d) / 2) / mpmath.gamma(1 + mpmath.mpf(d) / 2)
    m = 2 * (2 * pi) ** (-d) * mpmath.sqrt(vol * inertia)
    second = (m ** 2 * (d - 1) * mpmath.mpf(k) ** (mpmath.mpf(2) / d) * (2 * pi) ** (d + 2)
              / ((2 * d + 1) * omega ** (mpmath.mpf(2) / d) * vol ** (1 + mpmath.mpf(2) / d)))
    C = min(mpmath.mpf(1) / 6, second)
    M = C * d / (8 * mpmath.sqrt(pi) * (d * d - 1) * mpmath.gamma(1 + mpmath.mpf(d) / 2) ** (mpmath.mpf(1) / d))
    correction = M * vol ** (1 + mpmath.mpf(1) / d) / inertia * mpmath.mpf(k) ** (1 - mpmath.mpf(1) / d)
    tilde_C = mpmath.sqrt(4 * pi) * mpmath.gamma(1 + mpmath.mpf(d) / 2) ** (mpmath.mpf(1) / d)
    leading = mpmath.mpf(d) / (d + 1) * tilde_C * vol ** (-mpmath.mpf(1) / d) * mpmath.mpf(k) ** (1 + mpmath.mpf(1) / d)
    return {"m": m, "C": C, "M": M, "correction": correction, "leading": leading}


class TestConstants:
    """次元定数"""

    def test_tilde_C_low_dimensions(self):
        assert tilde_C_d(1) == pytest.approx(math.pi, abs=1e-12)
        assert tilde_C_d(2) == pytest.approx(2.0 * math.sqrt(math.pi), abs=1e-12)

    def test_omega_two_is_pi(self):
        assert omega_d(2) == pytest.approx(math.pi, abs=1e-12)

    @pytest.mark.parametrize("d", range(1, 13))
    def test_gamma_half_against_mpmath(self, d):
        expected = float(mpmath.gamma(1 + mpmath.mpf(d) / 2))
        assert gamma_half(d) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("d", [1, 3, 5, 7])
    def test_gamma_half_odd_recurrence(self, d):
        # Γ(1 + d/2) = (d/2)(d/2 − 1)…(1/2)·√π
        value = math.sqrt(math.pi)
        x = 0.5
        while x <= d / 2.0:
            value *= x
            x += 1.0
        assert gamma_half(d) == pytest.approx(value, rel=1e-13)

    @pytest.mark.parametrize("d", range(1, 13))
    def test_tilde_C_through_unit_ball_volume(self, d):
        # Γ(1 + d/2) = π^{d/2} / ω_d
        expected = math.sqrt(4.0 * math.pi) * (math.pi ** (d / 2.0) / omega_d(d)) ** (1.0 / d)
        assert tilde_C_d(d) == pytest.approx(expected, rel=1e-12)

    def test_tilde_C_rejects_nonpositive_dimension(self):
        with pytest.raises(ValueError):
            tilde_C_d(0)


class TestUnitSquareChain:
    """単位正方形 k = 1 の定数チェーン"""

    def test_slope_bound_closed_form(self, unit_square):
        m = slope_bound_m(unit_square)
        assert m == pytest.approx(1.0 / (2.0 * math.pi ** 2 * math.sqrt(6.0)), rel=1e-12)
        assert m == pytest.approx(0.0206821, rel=1e-5)

    def test_chain_values(self, unit_square):
        assert improved_constant_C(unit_square, 1) == pytest.approx(0.0424413, rel=1e-6)
        assert tilde_M_d(2, improved_constant_C(unit_square, 1)) == pytest.approx(0.0019954, rel=1e-5)
        breakdown = improved_kg_bound(unit_square, 1)
        assert breakdown.leading_term == pytest.approx(2.3632718, rel=1e-7)
        assert breakdown.correction_term == pytest.approx(0.0119724, rel=1e-5)
        assert breakdown.applicability_flag == FULL

    @pytest.mark.parametrize("k", [1, 2, 4, 6, 20])
    def test_chain_against_mpmath(self, unit_square, k):
        oracle = mp_chain_unit_square(k)
        breakdown = improved_kg_bound(unit_square, k)
        assert slope_bound_m(unit_square) == pytest.approx(float(oracle["m"]), rel=1e-13)
        assert breakdown.constants["C"] == pytest.approx(float(oracle["C"]), rel=1e-12)
        assert breakdown.constants["tilde_M_d"] == pytest.approx(float(oracle["M"]), rel=1e-12)
        assert breakdown.correction_term == pytest.approx(float(oracle["correction"]), rel=1e-12)
        assert breakdown.leading_term == pytest.approx(float(oracle["leading"]), rel=1e-12)

    def test_leading_is_four_root_pi_over_three(self, unit_square):
        assert kg_berezin_li_yau_bound(unit_square, 1) == pytest.approx(4.0 * math.sqrt(math.pi) / 3.0, rel=1e-12)

    def test_C_is_capped_at_one_sixth(self, unit_square):
        assert improved_constant_C(unit_square, 100) == pytest.approx(1.0 / 6.0)

    def test_total_is_sum_of_terms(self, unit_square):
        breakdown = improved_kg_bound(unit_square, 3)
        assert breakdown.total == breakdown.leading_term + breakdown.correction_term


class TestBerezinLiYau:
    """Klein-Gordon 版下界"""

    @pytest.mark.parametrize("k", [1, 5, 20])
    def test_interval_two(self, interval_two, k):
        assert kg_berezin_li_yau_bound(interval_two, k) == pytest.approx(math.pi * k * k / 4.0, rel=1e-12)

    def test_interval_pi_cancels(self, interval_pi):
        assert kg_berezin_li_yau_bound(interval_pi, 1) == pytest.approx(0.5, rel=1e-12)

    def test_unit_disk(self):
        assert kg_berezin_li_yau_bound(Domain.ball(2, 1.0), 1) == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_accepts_measure_dict(self):
        assert kg_berezin_li_yau_bound({"d": 1, "volume": 2.0}, 2) == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.parametrize("k", [0, -1, 1.5])
    def test_rejects_bad_k(self, unit_square, k):
        with pytest.raises(ValueError):
            kg_berezin_li_yau_bound(unit_square, k)

    def test_scaling(self, unit_square):
        # β は長さの逆数でスケールする
        scaled = unit_square.scaled(2.0)
        assert kg_berezin_li_yau_bound(scaled, 4) == pytest.approx(kg_berezin_li_yau_bound(unit_square, 4) / 2.0)
        assert improved_kg_bound(scaled, 4).total == pytest.approx(improved_kg_bound(unit_square, 4).total / 2.0)


class TestOneDimension:
    """d = 1 では改良下界は主項のみ"""

    def test_improved_bound_is_flagged(self, interval_two):
        breakdown = improved_kg_bound(interval_two, 3)
        assert breakdown.applicability_flag == LEADING_ONLY
        assert breakdown.correction_term == 0.0
        assert breakdown.total == breakdown.leading_term

    def test_improved_constant_raises(self, interval_two):
        with pytest.raises(DimensionUnsupportedError):
            improved_constant_C(interval_two, 1)

    def test_tilde_M_raises(self):
        with pytest.raises(DimensionUnsupportedError):
            tilde_M_d(1, 0.1)


class TestLaplacianBounds:
    """Li-Yau / Melas（比較用）"""

    def test_li_yau_unit_square(self, unit_square):
        assert li_yau_laplacian_bound(unit_square, 1) == pytest.approx(2.0 * math.pi, rel=1e-12)

    def test_melas_zero_constant_matches_li_yau(self, unit_square):
        assert melas_laplacian_bound(unit_square, 4, 0.0) == pytest.approx(li_yau_laplacian_bound(unit_square, 4))

    def test_melas_adds_inertia_term(self, unit_square):
        expected = li_yau_laplacian_bound(unit_square, 2) + 0.1 * 2 * 1.0 / (1.0 / 6.0)
        assert melas_laplacian_bound(unit_square, 2, 0.1) == pytest.approx(expected, rel=1e-12)

    def test_melas_rejects_negative_constant(self, unit_square):
        with pytest.raises(ValueError):
            melas_laplacian_bound(unit_square, 1, -0.1)

    def test_two_term_ratio(self, unit_square):
        assert two_term_laplacian_ratio(4.0 * math.pi, unit_square, 1) == pytest.approx(2.0)


class TestSlopeChain:
    """m と球の慣性下界"""

    @pytest.mark.parametrize("dom", [Domain.box([1.0, 1.0]), Domain.box([1.0, 3.0]), Domain.ball(2, 1.0)])
    def test_lower_chain_below_m(self, dom):
        assert slope_bound_lower_chain(dom) <= slope_bound_m(dom)

    def test_ball_inertia_lower_bound(self, unit_square):
        assert ball_inertia_lower_bound(unit_square) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)
        assert ball_inertia_lower_bound(unit_square) <= moment_of_inertia(unit_square)

    def test_disk_is_its_own_lower_bound(self):
        disk = Domain.ball(2, 1.0)
        assert ball_inertia_lower_bound(disk) == pytest.approx(moment_of_inertia(disk), rel=1e-12)


class TestWeyl:
    """Weyl 漸近"""

    def test_interval_estimate(self, interval_two):
        assert weyl_estimate(interval_two, 10) == pytest.approx(5.0 * math.pi, rel=1e-12)

    def test_ratio(self, interval_two):
        assert weyl_ratio(math.pi / 2.0, interval_two, 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("k", [1, 3, 10])
    @pytest.mark.parametrize("dom", [Domain.interval(2.0), Domain.box([1.0, 2.0]), Domain.ball(3, 1.5)])
    def test_berezin_bound_is_scaled_weyl_sum(self, dom, k):
        d = dom.dimension
        expected = (d / (d + 1.0)) * weyl_estimate(dom, k) * k
        assert kg_berezin_li_yau_bound(dom, k) == pytest.approx(expected, rel=1e-12)


class TestHFunction:
    """φ(0) 置換の関数 h"""

    def test_stationary_point_beyond_t_max(self, unit_square):
        threshold = h_threshold(unit_square, 1)
        assert threshold["t_max"] == pytest.approx(1.0 / (4.0 * math.pi ** 2))
        assert threshold["stationary"] > threshold["t_max"]

    def test_stationary_point_is_critical(self, unit_square):
        t_star = h_threshold(unit_square, 2)["stationary"]
        step = 1e-6 * t_star
        slope = (h_function(t_star + step, unit_square, 2) - h_function(t_star - step, unit_square, 2)) / (2 * step)
        assert abs(slope) <= 1e-4 * abs(h_function(t_star, unit_square, 2)) / t_star

    def test_vectorized(self, unit_square):
        values = h_function([0.01, 0.02], unit_square, 1)
        assert values.shape == (2,)
        assert values[0] > values[1]


class TestRieszMean:
    """Riesz 平均"""

    def test_examples(self):
        assert riesz_mean([1.0, 2.0, 3.0], 2.5, 1.0) == pytest.approx(2.0)
        assert riesz_mean([1.0, 2.0, 3.0], 2.5, 0.0) == 2
        assert riesz_mean([1.0, 2.0, 3.0], 0.5, 1.0) == 0

    def test_rejects_negative_sigma(self):
        with pytest.raises(ValueError):
            riesz_mean([1.0], 2.0, -0.5)

    @given(
        values=st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=20),
        z=st.floats(min_value=0.0, max_value=120.0),
        dz=st.floats(min_value=0.0, max_value=10.0),
        sigma=st.floats(min_value=0.0, max_value=3.0)
    )
    def test_nondecreasing_in_z(self, values, z, dz, sigma):
        spectrum = sorted(values)
        assert riesz_mean(spectrum, z + dz, sigma) >= riesz_mean(spectrum, z, sigma) - 1e-9


def test_measures_record_is_accepted():
    measures = DomainMeasures(2, 1.0, 1.0 / 6.0)
    assert improved_kg_bound(measures, 1).total == pytest.approx(2.3632718 + 0.0119724, rel=1e-6)


@settings(max_examples=300)
@given(
    values=st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=20),
    z1=st.floats(min_value=0.0, max_value=120.0),
    z2=st.floats(min_value=0.0, max_value=120.0),
    sigma=st.floats(min_value=1.0, max_value=3.0)
)
def test_riesz_mean_is_convex_in_z(values, z1, z2, sigma):
    spectrum = sorted(values)
    left = riesz_mean(spectrum, z1, sigma)
    right = riesz_mean(spectrum, z2, sigma)
    middle = riesz_mean(spectrum, 0.5 * (z1 + z2), sigma)
    assert middle <= 0.5 * (left + right) + 1e-9 * (1.0 + left + right)
