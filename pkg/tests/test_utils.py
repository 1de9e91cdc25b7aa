# -*- coding: utf-8 -*-
"""utils モジュールのテスト"""

import csv
import io
import json

import numpy as np
import pytest

from kgspec.utils import calculate_basic_statistics, dump_json, format_number, rows_to_csv


@pytest.mark.parametrize("value, expected", [
    (None, ""),
    ("full", "full"),
    ("leading_only", "leading_only"),
    (True, "true"),
    (np.bool_(False), "false"),
    (3, "3"),
    (np.int64(7), "7"),
    (2.0, "2"),
    (0.1, "0.10000000000000001"),
])
def test_format_number(value, expected):
    assert format_number(value) == expected


def test_float_text_round_trips():
    value = 2.3632718 + 0.0119724748
    assert float(format_number(value)) == value


def test_rows_to_csv_mixes_text_and_numbers():
    rows = [{"k": 1, "total": 0.5, "applicability_flag": "full"},
            {"k": 2, "total": None, "applicability_flag": "leading_only"}]
    text = rows_to_csv(rows, ["k", "total", "applicability_flag"])
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed == [["k", "total", "applicability_flag"], ["1", "0.5", "full"], ["2", "", "leading_only"]]


def test_dump_json_is_key_sorted():
    text = dump_json({"b": np.float64(1.5), "a": [np.int64(2)]})
    assert list(json.loads(text)) == ["a", "b"]
    assert json.loads(text) == {"a": [2], "b": 1.5}


def test_basic_statistics():
    stats = calculate_basic_statistics([1.0, 2.0, 3.0, 4.0])
    assert stats["min"] == 1.0
    assert stats["max"] == 4.0
    assert stats["mean"] == pytest.approx(2.5)
