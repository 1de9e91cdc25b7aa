# -*- coding: utf-8 -*-
"""geometry モジュールのテスト"""

import math

import pytest
from hypothesis import given, strategies as st

from kgspec.errors import DomainSpecError
from kgspec.geometry import (
    Domain, ball_with_volume, centroid, moment_of_inertia, monte_carlo_inertia,
    parse_domain, unit_ball_volume, volume
)


def test_unit_square_measures(unit_square):
    assert volume(unit_square) == pytest.approx(1.0, abs=1e-12)
    assert moment_of_inertia(unit_square) == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert centroid(unit_square) == (0.5, 0.5)


def test_box_1x2_inertia():
    assert moment_of_inertia(Domain.box([1.0, 2.0])) == pytest.approx(5.0 / 6.0, abs=1e-12)


def test_unit_disk_inertia():
    disk = Domain.ball(2, 1.0)
    assert volume(disk) == pytest.approx(math.pi, abs=1e-12)
    assert moment_of_inertia(disk) == pytest.approx(math.pi / 2.0, abs=1e-12)


def test_interval_inertia():
    assert moment_of_inertia(Domain.interval(2.0)) == pytest.approx(2.0 ** 3 / 12.0, abs=1e-12)


def test_unit_ball_volume_small_dimensions():
    assert unit_ball_volume(1) == pytest.approx(2.0, abs=1e-12)
    assert unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-12)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-12)


def test_ball_with_volume_matches_volume():
    ball = ball_with_volume(1.0, 2)
    assert volume(ball) == pytest.approx(1.0, rel=1e-12)
    assert ball.radius == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)


def test_ball_inertia_is_below_square_inertia(unit_square):
    ball = ball_with_volume(volume(unit_square), 2)
    assert moment_of_inertia(ball) < moment_of_inertia(unit_square)


@pytest.mark.parametrize("dom", [
    Domain.interval(2.0), Domain.box([1.0, 1.0]), Domain.box([1.0, 2.0]), Domain.ball(2, 1.0)
])
def test_monte_carlo_inertia_within_three_sigma(dom):
    estimate, error = monte_carlo_inertia(dom, 1_000_000, seed=7, return_error=True)
    assert abs(estimate - moment_of_inertia(dom)) <= 3.0 * error


def test_monte_carlo_inertia_is_deterministic(unit_square):
    first = monte_carlo_inertia(unit_square, 10_000, seed=3)
    second = monte_carlo_inertia(unit_square, 10_000, seed=3)
    assert first == second


def test_inertia_is_translation_invariant(unit_square):
    moved = unit_square.translated((3.0, -2.0))
    assert moment_of_inertia(moved) == pytest.approx(moment_of_inertia(unit_square), rel=1e-12)
    assert centroid(moved) == pytest.approx((3.5, -1.5))


@given(
    sides=st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=1, max_size=3),
    factor=st.floats(min_value=0.1, max_value=10.0)
)
def test_scaling_laws(sides, factor):
    dom = Domain.box(sides)
    scaled = dom.scaled(factor)
    d = dom.dimension
    assert volume(scaled) == pytest.approx(factor ** d * volume(dom), rel=1e-9)
    assert moment_of_inertia(scaled) == pytest.approx(factor ** (d + 2) * moment_of_inertia(dom), rel=1e-9)


class TestParseDomain:
    """領域指定文字列の解析"""

    def test_interval(self):
        dom = parse_domain("interval:2")
        assert dom.kind == "interval"
        assert dom.sides == (2.0,)

    def test_box(self):
        dom = parse_domain("box:1x2.5")
        assert dom.dimension == 2
        assert dom.sides == (1.0, 2.5)

    def test_ball(self):
        dom = parse_domain("ball:3,0.5")
        assert dom.dimension == 3
        assert dom.radius == 0.5

    @pytest.mark.parametrize("text", ["interval:2", "box:1x2", "ball:2,1", "box:0.5x3x2"])
    def test_spec_round_trip(self, text):
        assert parse_domain(text).to_spec() == text

    @pytest.mark.parametrize("text, token", [
        ("square:1", "square"),
        ("interval:-1", "-1"),
        ("box:1xabc", "abc"),
        ("ball:x,1", "x"),
        ("interval:0", "0"),
    ])
    def test_errors_name_the_token(self, text, token):
        with pytest.raises(DomainSpecError) as excinfo:
            parse_domain(text)
        assert excinfo.value.token == token

    def test_missing_colon(self):
        with pytest.raises(DomainSpecError):
            parse_domain("interval2")
