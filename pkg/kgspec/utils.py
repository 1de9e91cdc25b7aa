#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Klein-Gordon スペクトル検証ツールキット - 共通ユーティリティ
状態表示、決定的な JSON/CSV 出力、統計計算などの共通機能
"""

import csv
import io
import json
import math
import os
import statistics
import sys

import numpy as np

# 状態表示レベルごとの絵文字
STATUS_ICONS = {
    "progress": "📊",
    "success": "✅",
    "warning": "⚠️",
    "error": "❌",
    "info": "🔍"
}

_QUIET = False


def set_quiet(quiet):
    """状態表示の抑制を切り替え"""
    global _QUIET
    _QUIET = bool(quiet)


def print_status(message, level="progress"):
    """状態メッセージを標準エラーに表示（標準出力はレポート専用）"""
    if _QUIET:
        return
    icon = STATUS_ICONS.get(level, "")
    print(f"{icon} {message}", file=sys.stderr)


def get_thread_count():
    """組み立ての並列数を環境変数 KGSPEC_THREADS から決定"""
    raw = os.environ.get("KGSPEC_THREADS")
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        print_status(f"KGSPEC_THREADS の値が不正です: {raw}（既定値を使用）", "warning")
    return os.cpu_count() or 1


def to_jsonable(value):
    """numpy 型やデータクラスを JSON 変換可能な値に変換"""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        # 非有限値は JSON 標準にないため文字列で保持
        if not math.isfinite(number):
            return str(number)
        return number
    return value


def dump_json(payload):
    """決定的な JSON 文字列を生成（キー順固定、float は往復可能な最短表現）"""
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False)


def format_number(value, significant_digits=17):
    """数値を有効数字指定で文字列化（CSV 出力用）"""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{significant_digits}g}"


def rows_to_csv(rows, columns):
    """辞書のリストを CSV 文字列に変換"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_text(path, text):
    """レポートをファイルに保存"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
        if not text.endswith("\n"):
            handle.write("\n")
    print_status(f"レポート保存: {path}", "success")


def calculate_basic_statistics(values):
    """基本統計量を計算"""
    if not values:
        return {}

    return {
        "count": len(values),
        "mean": statistics.fmean(values),
        "median": statistics.median(values),
        "min": min(values),
        "max": max(values),
        "std": statistics.stdev(values) if len(values) > 1 else 0.0
    }
