#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
固有値和の下界と定数チェーン
Li-Yau / Melas（ラプラシアン）、Berezin-Li-Yau 型（Klein-Gordon）とその改良、
Weyl 漸近、Riesz 平均の評価
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import DimensionUnsupportedError
from .geometry import Domain, DomainMeasures, unit_ball_volume

FULL = "full"
LEADING_ONLY = "leading_only"


@dataclass(frozen=True)
class BoundBreakdown:
    """1 つの境界評価の分解（主項 + 補正項）"""
    k: int
    d: int
    leading_term: float
    correction_term: float
    total: float
    constants: dict = field(default_factory=dict)
    applicability_flag: str = FULL

    def to_dict(self):
        return {
            "k": self.k,
            "d": self.d,
            "leading_term": self.leading_term,
            "correction_term": self.correction_term,
            "total": self.total,
            "constants": dict(self.constants),
            "applicability_flag": self.applicability_flag
        }


def as_measures(spec) -> DomainMeasures:
    """Domain / DomainMeasures / dict を DomainMeasures に揃える"""
    if isinstance(spec, DomainMeasures):
        return spec
    if isinstance(spec, Domain):
        return spec.measures()
    if isinstance(spec, dict):
        return DomainMeasures(int(spec["d"]), float(spec["volume"]), float(spec.get("inertia", math.nan)))
    raise TypeError(f"領域量として解釈できません: {spec!r}")


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError(f"k は 1 以上の整数である必要があります: {k}")


def gamma_half(d):
    """Γ(1 + d/2)"""
    return float(gamma(1.0 + d / 2.0))


def omega_d(d: int) -> float:
    """d 次元単位球の体積"""
    return unit_ball_volume(d)


def tilde_C_d(d: int) -> float:
    """Weyl 定数 C̃_d = √(4π)·Γ(1 + d/2)^{1/d}"""
    if d < 1:
        raise ValueError(f"次元は正の整数である必要があります: {d}")
    return math.sqrt(4.0 * math.pi) * gamma_half(d) ** (1.0 / d)


def laplacian_constant_C_d(d):
    """Li-Yau 定数 C_d = 4π·Γ(1 + d/2)^{2/d}"""
    return 4.0 * math.pi * gamma_half(d) ** (2.0 / d)


def li_yau_laplacian_bound(spec, k: int) -> float:
    """ディリクレ・ラプラシアンの Σλ_j 下界 (d/(d+2))·C_d·|Ω|^{-2/d}·k^{1+2/d}"""
    measures = as_measures(spec)
    _check_k(k)
    d = measures.d
    return (d / (d + 2.0)) * laplacian_constant_C_d(d) * measures.volume ** (-2.0 / d) * k ** (1.0 + 2.0 / d)


def melas_laplacian_bound(spec, k: int, M_d: float) -> float:
    """Melas の改良下界。M_d は呼び出し側が与える（0 は Li-Yau に一致する比較用）"""
    measures = as_measures(spec)
    if M_d < 0:
        raise ValueError(f"M_d は非負である必要があります: {M_d}")
    if not measures.inertia > 0:
        raise ValueError(f"慣性モーメントは正である必要があります: {measures.inertia}")
    return li_yau_laplacian_bound(measures, k) + M_d * k * measures.volume / measures.inertia


def kg_berezin_li_yau_bound(spec, k: int) -> float:
    """Klein-Gordon 版 Berezin-Li-Yau 下界 (d/(d+1))·C̃_d·|Ω|^{-1/d}·k^{1+1/d}"""
    measures = as_measures(spec)
    _check_k(k)
    d = measures.d
    return (d / (d + 1.0)) * tilde_C_d(d) * measures.volume ** (-1.0 / d) * k ** (1.0 + 1.0 / d)


def slope_bound_m(spec) -> float:
    """|∇F| の上界 m = 2·(2π)^{-d}·√(|Ω|·I(Ω))"""
    measures = as_measures(spec)
    if not (measures.volume > 0 and measures.inertia > 0):
        raise ValueError("体積と慣性モーメントは正である必要があります")
    return 2.0 * (2.0 * math.pi) ** (-measures.d) * math.sqrt(measures.volume * measures.inertia)


def slope_bound_lower_chain(spec) -> float:
    """球の慣性下界から従う m の下界 (2π)^{-d}·ω_d^{-1/d}·|Ω|^{(d+1)/d}"""
    measures = as_measures(spec)
    d = measures.d
    return (2.0 * math.pi) ** (-d) * omega_d(d) ** (-1.0 / d) * measures.volume ** ((d + 1.0) / d)


def ball_inertia_lower_bound(spec) -> float:
    """同体積の球の慣性モーメント d·ω_d·R^{d+2}/(d+2)"""
    measures = as_measures(spec)
    d = measures.d
    radius = (measures.volume / omega_d(d)) ** (1.0 / d)
    return d * omega_d(d) * radius ** (d + 2) / (d + 2.0)


def improved_constant_C(spec, k: int) -> float:
    """改良定数 C = min{1/6, m²(d−1)k^{2/d}(2π)^{d+2} / ((2d+1)ω_d^{2/d}|Ω|^{1+2/d})}"""
    measures = as_measures(spec)
    _check_k(k)
    d = measures.d
    if d < 2:
        raise DimensionUnsupportedError("改良定数 C は d ≥ 2 でのみ定義されます（d−1 因子が消える）")
    m = slope_bound_m(measures)
    second = (m * m * (d - 1) * k ** (2.0 / d) * (2.0 * math.pi) ** (d + 2)
              / ((2 * d + 1) * omega_d(d) ** (2.0 / d) * measures.volume ** (1.0 + 2.0 / d)))
    return min(1.0 / 6.0, second)


def tilde_M_d(d, C):
    """M̃_d = C·d / (8√π·(d²−1)·Γ(1 + d/2)^{1/d})"""
    if d < 2:
        raise DimensionUnsupportedError("M̃_d は d ≥ 2 でのみ有限です")
    return C * d / (8.0 * math.sqrt(math.pi) * (d * d - 1.0) * gamma_half(d) ** (1.0 / d))


def improved_kg_bound(spec, k: int) -> BoundBreakdown:
    """改良 Berezin-Li-Yau 型下界を主項・補正項・定数に分解して評価"""
    measures = as_measures(spec)
    _check_k(k)
    d = measures.d
    leading = kg_berezin_li_yau_bound(measures, k)
    constants = {"omega_d": omega_d(d), "tilde_C_d": tilde_C_d(d), "m": slope_bound_m(measures)}

    if d == 1:
        # 補題は d ≥ 2 を仮定し M̃_d は 1/(d²−1) を含むため主項のみ
        return BoundBreakdown(k, d, leading, 0.0, leading + 0.0, constants, LEADING_ONLY)

    C = improved_constant_C(measures, k)
    M = tilde_M_d(d, C)
    constants.update({"C": C, "tilde_M_d": M})
    correction = M * measures.volume ** (1.0 + 1.0 / d) / measures.inertia * k ** (1.0 - 1.0 / d)
    return BoundBreakdown(k, d, leading, correction, leading + correction, constants, FULL)


def weyl_estimate(spec, k: int) -> float:
    """Weyl 漸近 β_k ∼ C̃_d·|Ω|^{-1/d}·k^{1/d}"""
    measures = as_measures(spec)
    _check_k(k)
    d = measures.d
    return tilde_C_d(d) * measures.volume ** (-1.0 / d) * k ** (1.0 / d)


def weyl_ratio(beta_k, spec, k):
    """β_k / Weyl 推定値"""
    return float(beta_k) / weyl_estimate(spec, k)


def two_term_laplacian_ratio(laplacian_sum, spec, k):
    """与えられたラプラシアン固有値和と Li-Yau 主項の比（診断用）"""
    return float(laplacian_sum) / li_yau_laplacian_bound(spec, k)


def riesz_mean(spectrum, z: float, sigma: float) -> float:
    """Riesz 平均 R_σ(z) = Σ_j (z − value_j)_+^σ（σ = 0 は z 未満の個数）"""
    if sigma < 0:
        raise ValueError(f"σ は非負である必要があります: {sigma}")
    values = np.asarray(spectrum, dtype=float)
    gaps = z - values
    gaps = gaps[gaps > 0]
    if sigma == 0:
        return float(len(gaps))
    return float(np.sum(gaps ** sigma))


def h_function(t, spec, k, C=None):
    """φ(0) の置換を正当化する関数 h(t)"""
    measures = as_measures(spec)
    d = measures.d
    if C is None:
        C = improved_constant_C(measures, k)
    m = slope_bound_m(measures)
    w = omega_d(d)
    t = np.asarray(t, dtype=float)
    first = (d / (d + 1.0)) * w ** (-1.0 / d) * k ** (1.0 + 1.0 / d) * t ** (-1.0 / d)
    second = (C * d / (m * m * (d * d - 1.0))) * w ** (1.0 / d) * k ** (1.0 - 1.0 / d) * t ** (2.0 + 1.0 / d)
    return first + second


def h_threshold(spec, k, C=None):
    """h の減少区間の右端

    stationary: h′(t) = 0 から得られる t* = X^{d/(2d+2)}
    displayed: 指数 d/(d+2) を用いた値 X^{d/(d+2)}
    ここで X = m²(d−1)k^{2/d} / (C(2d+1)ω_d^{2/d})
    """
    measures = as_measures(spec)
    d = measures.d
    if C is None:
        C = improved_constant_C(measures, k)
    m = slope_bound_m(measures)
    X = m * m * (d - 1) * k ** (2.0 / d) / (C * (2 * d + 1) * omega_d(d) ** (2.0 / d))
    return {
        "X": X,
        "stationary": X ** (d / (2.0 * d + 2.0)),
        "displayed": X ** (d / (d + 2.0)),
        "t_max": (2.0 * math.pi) ** (-d) * measures.volume
    }
