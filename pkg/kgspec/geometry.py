#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
有界領域 Ω ⊂ ℝ^d の幾何量
体積 |Ω|、重心、慣性モーメント I(Ω) の閉形式と Monte Carlo オラクル
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gamma

from .errors import DomainSpecError

DOMAIN_KINDS = ("interval", "box", "ball")

_DECIMAL = re.compile(r"^[+]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class DomainMeasures(NamedTuple):
    """境界評価が消費する量 (d, |Ω|, I(Ω))"""
    d: int
    volume: float
    inertia: float


@dataclass(frozen=True)
class Domain:
    """区間・直方体・球のいずれかの領域

    Args:
        kind: "interval" / "box" / "ball"
        dimension: 次元 d
        sides: 区間・直方体の辺の長さ（球では空）
        radius: 球の半径（それ以外では None）
        anchor: 下側の角（区間・直方体）または中心（球）
    """
    kind: str
    dimension: int
    sides: tuple = ()
    radius: float | None = None
    anchor: tuple = ()

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"未対応の領域種別: {self.kind}")
        if self.dimension < 1:
            raise ValueError(f"次元は正の整数である必要があります: {self.dimension}")

        if self.kind == "ball":
            if self.radius is None or not self.radius > 0:
                raise ValueError(f"球の半径は正である必要があります: {self.radius}")
        else:
            if self.kind == "interval" and self.dimension != 1:
                raise ValueError("区間は d = 1 に限られます")
            if len(self.sides) != self.dimension:
                raise ValueError(
                    f"辺の数 {len(self.sides)} が次元 {self.dimension} と一致しません"
                )
            if any(not side > 0 for side in self.sides):
                raise ValueError(f"辺の長さは正である必要があります: {self.sides}")

        anchor = tuple(float(a) for a in self.anchor) if self.anchor else (0.0,) * self.dimension
        if len(anchor) != self.dimension:
            raise ValueError(f"アンカー座標の次元が不正です: {self.anchor}")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "sides", tuple(float(s) for s in self.sides))

    # --- 生成ヘルパー ---

    @classmethod
    def interval(cls, length, anchor=0.0):
        return cls("interval", 1, sides=(length,), anchor=(anchor,))

    @classmethod
    def box(cls, sides, anchor=None):
        sides = tuple(sides)
        return cls("box", len(sides), sides=sides, anchor=tuple(anchor) if anchor else ())

    @classmethod
    def ball(cls, dimension, radius, center=None):
        return cls("ball", dimension, radius=float(radius), anchor=tuple(center) if center else ())

    # --- 幾何量 ---

    @property
    def is_rectangular(self):
        return self.kind in ("interval", "box")

    def volume(self):
        return volume(self)

    def centroid(self):
        return centroid(self)

    def moment_of_inertia(self):
        return moment_of_inertia(self)

    def measures(self):
        """境界評価用の (d, |Ω|, I(Ω)) を返す"""
        return DomainMeasures(self.dimension, volume(self), moment_of_inertia(self))

    def scaled(self, factor):
        """全ての長さを factor 倍した領域"""
        if not factor > 0:
            raise ValueError(f"倍率は正である必要があります: {factor}")
        anchor = tuple(factor * a for a in self.anchor)
        if self.kind == "ball":
            return Domain("ball", self.dimension, radius=self.radius * factor, anchor=anchor)
        return Domain(self.kind, self.dimension, sides=tuple(factor * s for s in self.sides), anchor=anchor)

    def translated(self, shift):
        """アンカーを shift だけ平行移動した領域"""
        shift = tuple(shift)
        if len(shift) != self.dimension:
            raise ValueError("平行移動ベクトルの次元が不正です")
        anchor = tuple(a + s for a, s in zip(self.anchor, shift))
        return Domain(self.kind, self.dimension, sides=self.sides, radius=self.radius, anchor=anchor)

    def bounding_box(self):
        """Monte Carlo 用の外接直方体 (下端, 上端)"""
        lower = np.asarray(self.anchor, dtype=float)
        if self.kind == "ball":
            return lower - self.radius, lower + self.radius
        return lower, lower + np.asarray(self.sides, dtype=float)

    def contains(self, points):
        """点群 (n, d) が領域内かを判定"""
        points = np.atleast_2d(points)
        if self.kind == "ball":
            offset = points - np.asarray(self.anchor)
            return np.einsum("ij,ij->i", offset, offset) <= self.radius ** 2
        lower, upper = self.bounding_box()
        return np.all((points >= lower) & (points <= upper), axis=1)

    def to_spec(self):
        """領域指定文字列に変換（アンカーは含まない）"""
        if self.kind == "interval":
            return f"interval:{_format_decimal(self.sides[0])}"
        if self.kind == "box":
            return "box:" + "x".join(_format_decimal(s) for s in self.sides)
        return f"ball:{self.dimension},{_format_decimal(self.radius)}"

    def to_dict(self):
        record = {"kind": self.kind, "dimension": self.dimension, "anchor": list(self.anchor),
                  "spec": self.to_spec()}
        if self.kind == "ball":
            record["radius"] = self.radius
        else:
            record["sides"] = list(self.sides)
        return record


def _format_decimal(value):
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def unit_ball_volume(d):
    """d 次元単位球の体積 ω_d = π^{d/2} / Γ(1 + d/2)"""
    if d < 1:
        raise ValueError(f"次元は正の整数である必要があります: {d}")
    return math.pi ** (d / 2.0) / float(gamma(1.0 + d / 2.0))


def volume(dom: Domain) -> float:
    """体積 |Ω|"""
    if dom.kind == "ball":
        return unit_ball_volume(dom.dimension) * dom.radius ** dom.dimension
    return float(math.prod(dom.sides))


def centroid(dom: Domain) -> tuple:
    """重心（∫_Ω |x − u|² dx の唯一の最小点）"""
    if dom.kind == "ball":
        return tuple(dom.anchor)
    return tuple(a + 0.5 * s for a, s in zip(dom.anchor, dom.sides))


def moment_of_inertia(dom: Domain) -> float:
    """慣性モーメント I(Ω) = ∫_Ω |x − 重心|² dx の閉形式"""
    d = dom.dimension
    if dom.kind == "ball":
        return d * unit_ball_volume(d) * dom.radius ** (d + 2) / (d + 2)
    vol = volume(dom)
    return vol * sum(s * s for s in dom.sides) / 12.0


def ball_with_volume(vol, d):
    """|B(R)| = vol となる原点中心の球 B(R)"""
    if not vol > 0:
        raise ValueError(f"体積は正である必要があります: {vol}")
    radius = (vol / unit_ball_volume(d)) ** (1.0 / d)
    return Domain.ball(d, radius)


def monte_carlo_inertia(dom: Domain, samples: int, seed: int, return_error=False):
    """外接直方体内の一様棄却サンプリングによる I(Ω) の推定

    Args:
        dom: 対象領域
        samples: 外接直方体内のサンプル数
        seed: 乱数シード（同じシードなら結果は同一）
        return_error: True の場合 (推定値, 標準誤差) を返す
    """
    if samples < 1:
        raise ValueError(f"サンプル数は 1 以上である必要があります: {samples}")

    rng = np.random.default_rng(seed)
    lower, upper = dom.bounding_box()
    center = np.asarray(centroid(dom))

    total = 0.0
    total_sq = 0.0
    accepted = 0
    remaining = samples
    chunk = 200_000
    while remaining > 0:
        size = min(chunk, remaining)
        points = rng.uniform(lower, upper, size=(size, dom.dimension))
        inside = points[dom.contains(points)]
        r2 = np.einsum("ij,ij->i", inside - center, inside - center)
        total += float(r2.sum())
        total_sq += float((r2 * r2).sum())
        accepted += len(r2)
        remaining -= size

    if accepted == 0:
        raise ValueError("棄却サンプリングで領域内の点が得られませんでした")

    vol = volume(dom)
    mean = total / accepted
    estimate = vol * mean
    if not return_error:
        return estimate
    variance = max(total_sq / accepted - mean * mean, 0.0)
    std_error = vol * math.sqrt(variance / accepted)
    return estimate, std_error


def parse_domain(text: str) -> Domain:
    """領域指定文字列を解析

    文法: interval:<L> | box:<L1>x<L2>[x<L3>...] | ball:<d>,<R>
    """
    if not isinstance(text, str) or ":" not in text:
        raise DomainSpecError(f"領域指定に ':' がありません: {text!r}", token=text)

    kind, _, body = text.partition(":")
    if kind not in DOMAIN_KINDS:
        raise DomainSpecError(f"未知の領域種別トークン: {kind!r}", token=kind)
    if body == "":
        raise DomainSpecError(f"{kind} のパラメータが空です", token=text)

    if kind == "interval":
        length = _parse_positive(body)
        return Domain.interval(length)

    if kind == "box":
        sides = [_parse_positive(token) for token in body.split("x")]
        return Domain.box(sides)

    tokens = body.split(",")
    if len(tokens) != 2:
        raise DomainSpecError(f"ball は '<d>,<R>' 形式です: {body!r}", token=body)
    dim_token, radius_token = tokens
    if not dim_token.isdigit() or int(dim_token) < 1:
        raise DomainSpecError(f"次元トークンが不正です: {dim_token!r}", token=dim_token)
    return Domain.ball(int(dim_token), _parse_positive(radius_token))


def _parse_positive(token):
    if not _DECIMAL.match(token):
        raise DomainSpecError(f"数値トークンが不正です: {token!r}", token=token)
    value = float(token)
    if not value > 0:
        raise DomainSpecError(f"長さ・半径は正である必要があります: {token!r}", token=token)
    return value
