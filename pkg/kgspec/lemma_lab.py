#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
補題ラボ
減少関数 φ に対するモーメント不等式とその証明の各段階を、区分線形関数上で
厳密な多項式積分により評価・判定する。判定は報告のみで、成り立たない入力も
そのまま結果として返す。
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DivergentIntegralError, InvalidFunctionError
from .kgspec_configs import DEFAULT_LEMMA_CONFIG
from .utils import calculate_basic_statistics

# 値と節点の丸め誤差に対する落差の許容量（相対）
_DROP_TOL = 1e-12


@dataclass(frozen=True)
class TabulatedDecreasingFn:
    """区分線形の非増加関数（最後の節点以降は最後の値で一定）

    Args:
        knots: 0 から始まる昇順の節点
        values: 各節点での値（非負・非増加、values[0] > 0）
        m: 傾きの上界
    """
    knots: tuple
    values: tuple
    m: float

    def __post_init__(self):
        knots = tuple(float(x) for x in self.knots)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "m", float(self.m))

        if len(knots) < 1 or len(knots) != len(values):
            raise InvalidFunctionError("節点と値の数が一致しません")
        if knots[0] != 0.0:
            raise InvalidFunctionError(f"最初の節点は 0 である必要があります: {knots[0]}")
        if not self.m > 0:
            raise InvalidFunctionError(f"傾きの上界 m は正である必要があります: {self.m}")
        if not values[0] > 0:
            raise InvalidFunctionError(f"φ(0) は正である必要があります: {values[0]}")
        if any(v < 0 for v in values):
            raise InvalidFunctionError("値は非負である必要があります")
        for i in range(1, len(knots)):
            width = knots[i] - knots[i - 1]
            if not width > 0:
                raise InvalidFunctionError(f"節点は狭義単調増加である必要があります: {knots}")
            drop = values[i - 1] - values[i]
            if drop < 0:
                raise InvalidFunctionError(f"値が増加しています（区間 {i}）")
            slack = _DROP_TOL * (max(1.0, values[0]) + self.m * max(1.0, knots[i]))
            if drop > self.m * width + slack:
                raise InvalidFunctionError(
                    f"区間 {i} の傾き {drop / width:.6g} が上界 m = {self.m:.6g} を超えています"
                )

    @property
    def phi0(self):
        return self.values[0]

    @property
    def compact(self):
        return self.values[-1] == 0.0

    def segments(self):
        """(左端, 右端, 左端の値, 傾き) の配列"""
        x = np.asarray(self.knots)
        v = np.asarray(self.values)
        slopes = np.diff(v) / np.diff(x)
        return x[:-1], x[1:], v[:-1], slopes

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.knots, self.values, right=self.values[-1])

    def to_dict(self):
        return {"knots": list(self.knots), "values": list(self.values), "m": self.m}

    @classmethod
    def from_dict(cls, record):
        try:
            return cls(record["knots"], record["values"], record["m"])
        except KeyError as exc:
            raise InvalidFunctionError(f"φ の定義にキーがありません: {exc}") from exc


@dataclass(frozen=True)
class MomentPair:
    """A = ∫x^{d−1}η dx, B = ∫x^d η dx"""
    A: float
    B: float
    d: int

    def to_dict(self):
        return {"A": self.A, "B": self.B, "d": self.d}


def _check_dimension(d):
    if int(d) != d or d < 2:
        raise ValueError(f"補題は d ≥ 2 を必要とします: d = {d}")


def _power_integral(p, a, b):
    """∫_a^b x^p dx（配列対応）"""
    return (b ** (p + 1) - a ** (p + 1)) / (p + 1)


def _segment_moment(fn: TabulatedDecreasingFn, p):
    """∫_0^∞ x^p fn(x) dx を区間ごとの多項式原始関数で厳密に計算"""
    if not fn.compact:
        raise DivergentIntegralError("最後の値が正のため積分が発散します（コンパクト台が必要）")
    if len(fn.knots) < 2:
        return 0.0
    a, b, va, s = fn.segments()
    # 各区間で fn(x) = (va − s·a) + s·x
    return float(np.sum((va - s * a) * _power_integral(p, a, b) + s * _power_integral(p + 1, a, b)))


def normalize_eta(phi: TabulatedDecreasingFn) -> TabulatedDecreasingFn:
    """η(x) = φ(φ(0)x/m)/φ(0)。η(0) = 1、傾きの上界 1"""
    scale = phi.m / phi.phi0
    knots = [x * scale for x in phi.knots]
    values = [v / phi.phi0 for v in phi.values]
    values[0] = 1.0
    return TabulatedDecreasingFn(knots, values, 1.0)


def moments(fn: TabulatedDecreasingFn, d: int) -> MomentPair:
    """A と B を厳密な区間積分で計算"""
    _check_dimension(d)
    return MomentPair(_segment_moment(fn, d - 1), _segment_moment(fn, d), d)


def lemma_rhs(phi: TabulatedDecreasingFn, d: int, correction_scale=1.0) -> float:
    """モーメント不等式の右辺（2 項）

    correction_scale は補正項の定数 1/(6m²(d²−1)) に掛ける倍率（実験用、既定 1）
    """
    return sum(_lemma_rhs_terms(phi, d, correction_scale))


def _lemma_rhs_terms(phi, d, correction_scale=1.0):
    _check_dimension(d)
    dA = d * _segment_moment(phi, d - 1)
    phi0 = phi.phi0
    first = dA ** (1.0 + 1.0 / d) * phi0 ** (-1.0 / d) / (d + 1.0)
    second = (correction_scale * phi0 ** (2.0 + 1.0 / d) / (6.0 * phi.m ** 2 * (d * d - 1.0))
              * dA ** (1.0 - 1.0 / d))
    return first, second


def lemma_gap(phi: TabulatedDecreasingFn, d: int, correction_scale=1.0) -> float:
    """∫x^d φ − 右辺。正なら不等式が成立"""
    return _segment_moment(phi, d) - lemma_rhs(phi, d, correction_scale)


def first_term_gap(phi: TabulatedDecreasingFn, d: int) -> float:
    """補正項を除いた（Berezin 部分のみの）差"""
    first, _ = _lemma_rhs_terms(phi, d)
    return _segment_moment(phi, d) - first


def find_alpha(Ad: float, d: int, xtol=None):
    """((α+1)^d − α^d)/d = (Ad)^{1−1/d} を満たす α ≥ 0（解が無ければ None）"""
    _check_dimension(d)
    if not Ad > 0:
        raise ValueError(f"Ad は正である必要があります: {Ad}")
    xtol = DEFAULT_LEMMA_CONFIG["alpha_xtol"] if xtol is None else xtol
    target = Ad ** (1.0 - 1.0 / d)

    def residual(alpha):
        return ((alpha + 1.0) ** d - alpha ** d) / d - target

    at_zero = residual(0.0)
    if abs(at_zero) <= 1e-15 * max(1.0, target):
        return 0.0
    if at_zero > 0:
        return None

    upper = 1.0
    while residual(upper) < 0:
        upper *= 2.0
    return float(bisect(residual, 0.0, upper, xtol=xtol, maxiter=200))


def step12_check(fn: TabulatedDecreasingFn, d: int):
    """α 区間選択段階 ∫_α^{α+1}x^{d+1}dx ≤ ∫x^{d+1}f dx ≤ (d+1)B の判定

    fn は正規化済み η（η(0) = 1）。f = −η′ を区間ごとに復元する。
    """
    _check_dimension(d)
    if abs(fn.phi0 - 1.0) > 1e-12:
        raise InvalidFunctionError(f"正規化済み η(0) = 1 が必要です: η(0) = {fn.phi0}")

    pair = moments(fn, d)
    a, b, _, s = fn.segments()
    f = -s
    Ad = float(np.sum(f * _power_integral(d, a, b)))
    middle = float(np.sum(f * _power_integral(d + 1, a, b)))
    # 部分積分 ∫x^d f = d·A
    parts_identity_error = abs(Ad - d * pair.A) / max(abs(d * pair.A), 1e-300)

    alpha = find_alpha(Ad, d)
    rhs = (d + 1.0) * pair.B
    record = {
        "Ad": Ad,
        "parts_identity_error": parts_identity_error,
        "middle": middle,
        "rhs": rhs,
        "alpha": alpha
    }
    if alpha is None:
        # 解 α が存在しない場合は判定対象外（空虚に真）
        record.update({"lhs": None, "holds": True, "no_alpha": True})
        return record

    lhs = ((alpha + 1.0) ** (d + 2) - alpha ** (d + 2)) / (d + 2.0)
    record.update({"lhs": lhs, "holds": bool(lhs <= rhs + 1e-12), "no_alpha": False})
    return record


def g_poly(tau: float, d: int):
    """g(τ) = (d−1)τ^{d+1} − (d+1)τ^{d−1} − 2τ² + 4τ（展開形）"""
    _check_dimension(d)
    tau = np.asarray(tau, dtype=float)
    value = (d - 1) * tau ** (d + 1) - (d + 1) * tau ** (d - 1) - 2.0 * tau ** 2 + 4.0 * tau
    return value if value.ndim else float(value)


def g_poly_factored(tau: float, d: int):
    """g(τ) = (τ−1)²τ(Σ_{k=0}^{d−3}(2k+4)τ^k + (d−1)τ^{d−2})（因数分解形）"""
    _check_dimension(d)
    tau = np.asarray(tau, dtype=float)
    inner = (d - 1) * tau ** (d - 2)
    for k in range(d - 2):
        inner = inner + (2 * k + 4) * tau ** k
    value = (tau - 1.0) ** 2 * tau * inner
    return value if value.ndim else float(value)


def step_limit_function(R=1.0, slope=1e6):
    """[0, R] で 1、その後傾き slope で 0 に落ちる指示関数近似"""
    return TabulatedDecreasingFn([0.0, R, R + 1.0 / slope], [1.0, 1.0, 0.0], slope)


def lemma_diagnostic(phi: TabulatedDecreasingFn, d: int, correction_scale=1.0):
    """単一入力の診断レコード {A, B, lemma_rhs, lemma_gap, alpha, step12}"""
    pair = moments(phi, d)
    first, second = _lemma_rhs_terms(phi, d, correction_scale)
    eta = normalize_eta(phi)
    step12 = step12_check(eta, d)
    return {
        "d": d,
        "phi": phi.to_dict(),
        "A": pair.A,
        "B": pair.B,
        "rhs_first_term": first,
        "rhs_second_term": second,
        "lemma_rhs": first + second,
        "lemma_gap": pair.B - (first + second),
        "first_term_gap": pair.B - first,
        "holds": bool(pair.B - (first + second) >= 0),
        "alpha": step12["alpha"],
        "step12": step12,
        "correction_scale": correction_scale
    }


# --- ファジング ---

def _trial_rng(seed, trial):
    """(seed, 試行番号) から独立な乱数列を決定的に生成"""
    return np.random.default_rng([int(seed), int(trial)])


def random_admissible_function(rng, config=None):
    """許容される区分線形減少関数をランダムに生成

    families:
        generic  - 各区間の傾きを [0, m] から一様に選ぶ
        extremal - 全区間が傾き m の直線（節点は直線上にランダム配置）
        plateau  - 平坦区間と傾き m の区間の混合
    """
    config = config or DEFAULT_LEMMA_CONFIG
    families = config["families"]
    family = families[int(rng.integers(len(families)))]
    n_knots = int(rng.integers(config["min_knots"], config["max_knots"] + 1))
    phi0 = float(rng.uniform(*config["phi0_range"]))
    m = float(rng.uniform(*config["slope_range"]))

    if family == "extremal":
        end = phi0 / m
        knot_gap = config["min_knot_gap"] * end
        interior = np.sort(rng.uniform(0.0, end, size=n_knots - 2))
        interior = interior[(interior > knot_gap) & (interior < end - knot_gap)]
        if interior.size:
            interior = interior[np.concatenate(([True], np.diff(interior) > knot_gap))]
        knots = np.concatenate(([0.0], interior, [end]))
        values = np.maximum(phi0 - m * knots, 0.0)
        values[-1] = 0.0
        return TabulatedDecreasingFn(knots.tolist(), values.tolist(), m), family

    knots = [0.0]
    values = [phi0]
    for _ in range(n_knots - 2):
        width = float(rng.uniform(*config["gap_range"]))
        if family == "plateau":
            slope = m if rng.random() < 0.5 else 0.0
        else:
            slope = m * float(rng.random())
        knots.append(knots[-1] + width)
        values.append(max(values[-1] - slope * width, 0.0))
        if values[-1] == 0.0:
            break

    if values[-1] > 0.0:
        final_slope = m * float(rng.uniform(0.1, 1.0)) if family == "generic" else m
        knots.append(knots[-1] + values[-1] / final_slope)
        values.append(0.0)
    return TabulatedDecreasingFn(knots, values, m), family


def fuzz_lemma(d: int, trials: int, seed: int, config_overrides=None):
    """ランダムな許容関数でモーメント不等式を検査し、最小の差と違反数を報告"""
    _check_dimension(d)
    if int(trials) != trials or trials < 1:
        raise ValueError(f"試行回数は 1 以上である必要があります: {trials}")

    config = DEFAULT_LEMMA_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)

    gaps = []
    first_gaps = []
    violations = 0
    first_violations = 0
    family_counts = {name: 0 for name in config["families"]}
    family_violations = {name: 0 for name in config["families"]}
    argmin_fn = None
    min_gap = math.inf
    min_first_gap = math.inf

    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        phi, family = random_admissible_function(rng, config)
        gap = lemma_gap(phi, d)
        first_gap = first_term_gap(phi, d)
        gaps.append(gap)
        first_gaps.append(first_gap)
        family_counts[family] += 1
        if gap < 0:
            violations += 1
            family_violations[family] += 1
        if first_gap < -config["first_term_tol"]:
            first_violations += 1
        if gap < min_gap:
            min_gap = gap
            argmin_fn = phi
        min_first_gap = min(min_first_gap, first_gap)

    gap_stats = calculate_basic_statistics(gaps)
    return {
        "d": d,
        "trials": trials,
        "seed": seed,
        "min_gap": min_gap,
        "mean_gap": gap_stats["mean"],
        "violations": violations,
        "argmin_fn": argmin_fn.to_dict(),
        "min_first_term_gap": min_first_gap,
        "first_term_violations": first_violations,
        "family_counts": family_counts,
        "family_violations": family_violations
    }
