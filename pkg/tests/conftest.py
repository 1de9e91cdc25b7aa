# -*- coding: utf-8 -*-
"""テスト共通設定: リポジトリのルートを import パスに追加し、共有の領域を提供"""

import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from kgspec.geometry import Domain  # noqa: E402
from kgspec.utils import set_quiet  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 数十秒かかる数値検証テスト")


@pytest.fixture(autouse=True)
def quiet_status():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture
def unit_square():
    return Domain.box([1.0, 1.0])


@pytest.fixture
def interval_two():
    return Domain.interval(2.0)


@pytest.fixture
def interval_pi():
    return Domain.interval(math.pi)
