#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
フーリエ密度 F(ξ) = Σ_{j≤k}|û_j(ξ)|² とその検証
正規化・Bessel 上界・和恒等式・勾配上界・減少的球対称再配列とその傾き条件を
計算済みスペクトルに対して評価する
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid

from .bounds import as_measures, h_function, h_threshold, improved_constant_C, omega_d, slope_bound_m
from .errors import TailBoundError
from .kgspec_configs import DEFAULT_DENSITY_CONFIG, DEFAULT_SPECTRAL_CONFIG, DEFAULT_VERIFY_CONFIG
from .spectral import SpectrumResult, axis_transforms


@dataclass(frozen=True, eq=False)
class FourierDensity:
    """計算済みスペクトルの先頭 k モードから作るフーリエ密度"""
    source: SpectrumResult
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or not 0 <= self.k <= self.source.k_retained:
            raise ValueError(f"k は 0 以上 {self.source.k_retained} 以下である必要があります: {self.k}")
        if self.source.basis is None:
            raise ValueError("基底情報を持たないスペクトルからは密度を構成できません")

    @property
    def basis(self):
        return self.source.basis

    @property
    def dimension(self):
        return self.basis.dimension

    @property
    def xi_cutoff(self):
        if self.source.xi_cutoff is not None:
            return self.source.xi_cutoff
        return DEFAULT_SPECTRAL_CONFIG["cutoff_multiplier"] * self.basis.largest_frequency()

    def coefficient_tensor(self):
        return self.source.coefficients[:self.k].reshape((self.k,) + self.basis.shape)

    def top_frequency(self):
        """先頭 k モードを含む特性周波数 (k+1)π/L_min"""
        return (max(self.k, 1) + 1) * math.pi / min(self.basis.domain.sides)

    def _points(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.dimension == 1:
            return xi.reshape(-1, 1), xi.ndim == 0
        return xi.reshape(-1, self.dimension), xi.ndim == 1

    def mode_transforms(self, points):
        """û_j(ξ_p) を (k, 点数) 配列で返す"""
        coefficients = self.coefficient_tensor()
        if self.dimension == 1:
            return coefficients @ axis_transforms(self.basis, 0, points[:, 0])
        phi_x = axis_transforms(self.basis, 0, points[:, 0])
        phi_y = axis_transforms(self.basis, 1, points[:, 1])
        return np.einsum("jab,ap,bp->jp", coefficients, phi_x, phi_y)

    def mode_gradients(self, points):
        """∇û_j(ξ_p) を (k, 点数, d) 配列で返す"""
        coefficients = self.coefficient_tensor()
        if self.dimension == 1:
            derivative = axis_transforms(self.basis, 0, points[:, 0], derivative=True)
            return (coefficients @ derivative)[:, :, None]
        phi_x = axis_transforms(self.basis, 0, points[:, 0])
        phi_y = axis_transforms(self.basis, 1, points[:, 1])
        dphi_x = axis_transforms(self.basis, 0, points[:, 0], derivative=True)
        dphi_y = axis_transforms(self.basis, 1, points[:, 1], derivative=True)
        return np.stack([
            np.einsum("jab,ap,bp->jp", coefficients, dphi_x, phi_y),
            np.einsum("jab,ap,bp->jp", coefficients, phi_x, dphi_y)
        ], axis=-1)

    def grid_values(self, axes):
        """テンソル積格子上の F（2次元は分離可能な縮約で評価）"""
        if self.k == 0:
            return np.zeros(tuple(len(axis) for axis in axes))
        coefficients = self.coefficient_tensor()
        if self.dimension == 1:
            transforms = coefficients @ axis_transforms(self.basis, 0, axes[0])
            return np.sum(np.abs(transforms) ** 2, axis=0)
        phi_x = axis_transforms(self.basis, 0, axes[0])
        phi_y = axis_transforms(self.basis, 1, axes[1])
        partial = np.tensordot(coefficients, phi_x, axes=([1], [0]))  # (k, b, p)
        transforms = np.swapaxes(partial, 1, 2) @ phi_y  # (k, p, q)
        return np.sum(np.abs(transforms) ** 2, axis=0)


@dataclass(frozen=True, eq=False)
class RearrangedProfile:
    """減少的球対称再配列 F*(ξ) = φ(|ξ|) の動径プロファイル"""
    radii: np.ndarray
    values: np.ndarray
    m_bound: float
    d: int
    cell_volume: float | None = None
    captured_mass: float | None = None
    boundary_ratio: float | None = None
    cutoff: float | None = None

    def __post_init__(self):
        if len(self.radii) != len(self.values):
            raise ValueError("動径と値の数が一致しません")
        if np.any(np.diff(self.values) > 0):
            raise ValueError("プロファイルは非増加である必要があります")

    @property
    def phi0(self):
        return float(self.values[0])

    def radius_at(self, level):
        """φ(x) = level となる x（区分線形補間）"""
        return float(np.interp(level, self.values[::-1], self.radii[::-1]))

    def to_dict(self, include_grid=False):
        record = {
            "d": self.d,
            "phi0": self.phi0,
            "m_bound": self.m_bound,
            "samples": int(len(self.radii)),
            "max_radius": float(self.radii[-1]),
            "captured_mass": self.captured_mass,
            "boundary_ratio": self.boundary_ratio,
            "cutoff": self.cutoff
        }
        if include_grid:
            record["radii"] = self.radii.tolist()
            record["values"] = self.values.tolist()
        return record


def eval_F(fd: FourierDensity, xi):
    """F(ξ) = Σ_j |û_j(ξ)|²"""
    points, single = fd._points(xi)
    if fd.k == 0:
        values = np.zeros(len(points))
    else:
        values = np.sum(np.abs(fd.mode_transforms(points)) ** 2, axis=0)
    return float(values[0]) if single else values


def eval_grad_F(fd: FourierDensity, xi):
    """∇F(ξ) = 2·Re Σ_j conj(û_j)·∇û_j（閉形式）"""
    points, single = fd._points(xi)
    if fd.k == 0:
        gradient = np.zeros((len(points), fd.dimension))
    else:
        transforms = fd.mode_transforms(points)
        gradients = fd.mode_gradients(points)
        gradient = 2.0 * np.real(np.sum(np.conj(transforms)[:, :, None] * gradients, axis=0))
    return gradient[0] if single else gradient


def density_sample_points(fd: FourierDensity, count, extent=None):
    """Bessel・勾配チェック用の一様格子（既定の範囲は ±2 × 特性周波数）"""
    extent = 2.0 * fd.top_frequency() if extent is None else extent
    if fd.dimension == 1:
        return np.linspace(-extent, extent, count)
    per_axis = int(math.ceil(math.sqrt(count)))
    axis = np.linspace(-extent, extent, per_axis)
    grid_x, grid_y = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([grid_x.ravel(), grid_y.ravel()])


# --- 積分による恒等式チェック ---

def _legendre_panels(xi_max, width, order, symmetric):
    nodes, weights = leggauss(order)
    panels = int(math.ceil(xi_max / width - 1e-9))
    start = -panels if symmetric else 0
    left = width * np.arange(start, panels)
    points = (left[:, None] + 0.5 * width * (nodes[None, :] + 1.0)).ravel()
    return points, np.tile(0.5 * width * weights, len(left))


def integrate_density(fd: FourierDensity, config_overrides=None):
    """∫F と ∫|ξ|F を Ξ の箱上で評価（組み立てとは独立な Gauss-Legendre 則）

    F(ξ) = F(−ξ) を使い ξ1 ≥ 0 の半空間の2倍として積分する。外側の殻
    （最大ノルムが Ξ/2 以上）の寄与も返し、テールの減衰を確認する。
    """
    config = DEFAULT_DENSITY_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)
    result = {"mass": 0.0, "form": 0.0, "outer_mass": 0.0, "outer_form": 0.0, "xi_cutoff": fd.xi_cutoff}
    if fd.k == 0:
        return result

    xi_max = fd.xi_cutoff
    order = config["gauss_points"]
    widths = [math.pi / side for side in fd.basis.domain.sides]

    if fd.dimension == 1:
        x, w = _legendre_panels(xi_max, widths[0], order, symmetric=False)
        chunk = DEFAULT_SPECTRAL_CONFIG["chunk_size"]
        for start in range(0, len(x), chunk):
            xs = x[start:start + chunk]
            ws = 2.0 * w[start:start + chunk]
            values = fd.grid_values([xs])
            outer = xs >= 0.5 * xi_max
            result["mass"] += float(ws @ values)
            result["form"] += float(ws @ (xs * values))
            result["outer_mass"] += float(ws[outer] @ values[outer])
            result["outer_form"] += float(ws[outer] @ (xs * values)[outer])
        return result

    x, wx = _legendre_panels(xi_max, widths[0], order, symmetric=False)
    y, wy = _legendre_panels(xi_max, widths[1], order, symmetric=True)
    rows = max(1, DEFAULT_SPECTRAL_CONFIG["chunk_elements"] // (len(y) * max(fd.k, 1)))
    y_outer = np.abs(y) >= 0.5 * xi_max
    for start in range(0, len(x), rows):
        xs = x[start:start + rows]
        ws = 2.0 * wx[start:start + rows]
        values = fd.grid_values([xs, y])
        weighted = values * np.hypot(xs[:, None], y[None, :])
        outer = (xs[:, None] >= 0.5 * xi_max) | y_outer[None, :]
        result["mass"] += float(ws @ values @ wy)
        result["form"] += float(ws @ weighted @ wy)
        result["outer_mass"] += float(ws @ np.where(outer, values, 0.0) @ wy)
        result["outer_form"] += float(ws @ np.where(outer, weighted, 0.0) @ wy)
    return result


def check_normalization(fd: FourierDensity, tol=None, integrals=None):
    """∫F dξ = k（Plancherel）"""
    tol = DEFAULT_VERIFY_CONFIG["normalization_tol"] if tol is None else tol
    integrals = integrals or integrate_density(fd)
    if fd.k == 0:
        return {"integral": 0.0, "k": 0, "rel_err": 0.0, "holds": True, "outer_mass": 0.0}
    if integrals["outer_mass"] > tol * fd.k:
        raise TailBoundError(
            f"Ξ = {fd.xi_cutoff:.6g} の外側殻の質量 {integrals['outer_mass']:.3g} が大きすぎます"
        )
    rel_err = abs(integrals["mass"] - fd.k) / fd.k
    return {
        "integral": integrals["mass"],
        "k": fd.k,
        "rel_err": rel_err,
        "holds": bool(rel_err <= tol),
        "outer_mass": integrals["outer_mass"]
    }


def check_sum_identity(fd: FourierDensity, tol=None, integrals=None):
    """∫|ξ|F dξ = Σ_{j≤k} β_j（Ritz 値は二次形式の値そのもの）"""
    tol = DEFAULT_VERIFY_CONFIG["sum_identity_tol"] if tol is None else tol
    integrals = integrals or integrate_density(fd)
    sum_beta = fd.source.eigenvalue_sum(fd.k)
    if fd.k == 0:
        return {"integral": 0.0, "sum_beta": 0.0, "rel_err": 0.0, "holds": True, "outer_form": 0.0}
    if integrals["outer_form"] > tol * sum_beta:
        raise TailBoundError(
            f"Ξ = {fd.xi_cutoff:.6g} の外側殻の |ξ|F 積分 {integrals['outer_form']:.3g} が大きすぎます"
        )
    rel_err = abs(integrals["form"] - sum_beta) / sum_beta
    return {
        "integral": integrals["form"],
        "sum_beta": sum_beta,
        "rel_err": rel_err,
        "holds": bool(rel_err <= tol),
        "outer_form": integrals["outer_form"]
    }


def check_bessel_bound(fd: FourierDensity, dom, grid, slack=None):
    """0 ≤ F(ξ) ≤ |Ω|/(2π)^d（Bessel の不等式）"""
    slack = DEFAULT_DENSITY_CONFIG["bessel_slack"] if slack is None else slack
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("サンプル点が空です")
    measures = as_measures(dom)
    bound = measures.volume * (2.0 * math.pi) ** (-measures.d)
    max_F = float(np.max(eval_F(fd, grid)))
    return {"max_F": max_F, "bound": bound, "holds": bool(max_F <= bound * (1.0 + slack))}


def check_gradient_bound(fd: FourierDensity, dom, grid, slack=None):
    """|∇F(ξ)| ≤ m = 2(2π)^{−d}√(|Ω|·I(Ω))"""
    slack = DEFAULT_DENSITY_CONFIG["gradient_slack"] if slack is None else slack
    grid = np.asarray(grid, dtype=float)
    m = slope_bound_m(dom)
    gradient = eval_grad_F(fd, grid)
    max_grad = float(np.max(np.linalg.norm(np.atleast_2d(gradient), axis=-1)))
    return {"max_grad": max_grad, "m": m, "holds": bool(max_grad <= m * (1.0 + slack))}


def gradient_fd_check(fd: FourierDensity, points, step=None, tol=None):
    """閉形式の ∇F を中心差分と比較

    相対偏差は ‖g_解析 − g_差分‖ / max(‖g_解析‖, 1e-3 × 標本内の最大 ‖g‖)。
    """
    step = DEFAULT_DENSITY_CONFIG["fd_step"] if step is None else step
    tol = DEFAULT_DENSITY_CONFIG["fd_tol"] if tol is None else tol
    points, _ = fd._points(points)
    analytic = np.atleast_2d(eval_grad_F(fd, points))
    numeric = np.empty_like(analytic)
    for axis in range(fd.dimension):
        shift = np.zeros(fd.dimension)
        shift[axis] = step
        numeric[:, axis] = (eval_F(fd, points + shift) - eval_F(fd, points - shift)) / (2.0 * step)

    norms = np.linalg.norm(analytic, axis=1)
    floor = 1e-3 * float(np.max(norms)) if len(norms) else 0.0
    scale = np.maximum(norms, max(floor, np.finfo(float).tiny))
    deviations = np.linalg.norm(analytic - numeric, axis=1) / scale
    max_deviation = float(np.max(deviations)) if len(deviations) else 0.0
    return {"points": int(len(points)), "max_deviation": max_deviation, "step": step,
            "holds": bool(max_deviation <= tol)}


# --- 再配列 ---

def rearrange_samples(samples, cell_volume, d, m_bound=math.nan, boundary_ratio=None, cutoff=None):
    """格子サンプルを降順に並べ、ω_d x^d = 順位 × セル体積 で動径に割り当てる"""
    flat = np.sort(np.asarray(samples, dtype=float).ravel())[::-1]
    ranks = np.arange(1, len(flat) + 1)
    radii = ((ranks - 0.5) * cell_volume / omega_d(d)) ** (1.0 / d)
    return RearrangedProfile(
        radii=np.r_[0.0, radii],
        values=np.r_[flat[:1], flat],
        m_bound=m_bound,
        d=d,
        cell_volume=cell_volume,
        captured_mass=float(flat.sum() * cell_volume),
        boundary_ratio=boundary_ratio,
        cutoff=cutoff
    )


def _boundary_values(values):
    faces = []
    for axis in range(values.ndim):
        faces.append(np.take(values, [0, -1], axis=axis).ravel())
    return np.concatenate(faces)


def sample_density_grid(fd: FourierDensity, cutoff=None, samples=None, config_overrides=None):
    """[−c, c]^d のセル中心格子で F を評価し (軸, 値, セル幅) を返す"""
    config = DEFAULT_DENSITY_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)
    top = fd.top_frequency()
    cutoff = config["rearrange_cutoff_factor"] * top if cutoff is None else float(cutoff)
    if samples is None:
        period = 2.0 * math.pi / max(fd.basis.domain.sides)
        per_period = config["rearrange_cells_per_period"]
        samples = max(config["rearrange_min_samples"], int(math.ceil(2.0 * cutoff * per_period / period)))
    if samples < config["rearrange_min_samples"]:
        raise ValueError(f"軸あたりのサンプル数は {config['rearrange_min_samples']} 以上が必要です: {samples}")

    width = 2.0 * cutoff / samples
    axis = -cutoff + width * (np.arange(samples) + 0.5)
    axes = [axis] * fd.dimension
    return axes, fd.grid_values(axes), width


def rearrange(fd: FourierDensity, dom, sampling=None, config_overrides=None, grid=None) -> RearrangedProfile:
    """F の減少的球対称再配列

    sampling: {"cutoff": c, "samples": 軸あたりの点数}（省略時は設定から決定）
    grid: sample_density_grid の戻り値を再利用する場合に指定
    """
    config = DEFAULT_DENSITY_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)
    sampling = sampling or {}
    if grid is None:
        grid = sample_density_grid(fd, sampling.get("cutoff"), sampling.get("samples"), config)
    axes, values, width = grid
    cutoff = float(-axes[0][0] + 0.5 * width)

    peak = float(values.max()) if values.size else 0.0
    ratio = float(_boundary_values(values).max() / peak) if peak > 0 else 0.0
    if ratio > config["boundary_ratio"]:
        raise TailBoundError(
            f"再配列カットオフ {cutoff:.6g} が小さすぎます（境界値/最大値 = {ratio:.3g}）"
        )
    return rearrange_samples(values, width ** fd.dimension, fd.dimension,
                             m_bound=slope_bound_m(dom), boundary_ratio=ratio, cutoff=cutoff)


def check_slope_condition(profile: RearrangedProfile, slack=None):
    """0 ≤ −φ′(x) ≤ m（格子誤差に対し 5% の余裕）

    格子由来のプロファイルは間隔 2·(セル幅) で再標本化してから差分を取る。
    """
    slack = DEFAULT_DENSITY_CONFIG["slope_slack"] if slack is None else slack
    if len(profile.radii) < 2:
        raise ValueError("傾きの評価には 2 点以上が必要です")

    radii, values = profile.radii, profile.values
    if profile.cell_volume is not None:
        spacing = 2.0 * profile.cell_volume ** (1.0 / profile.d)
        grid = np.arange(0.0, radii[-1], spacing)
        if len(grid) >= 2:
            radii, values = grid, np.interp(grid, profile.radii, profile.values)

    slopes = -np.diff(values) / np.diff(radii)
    max_slope = max(float(np.max(slopes)), 0.0)
    return {"max_slope": max_slope, "m": profile.m_bound,
            "holds": bool(max_slope <= profile.m_bound * (1.0 + slack))}


def moments_bridge(profile: RearrangedProfile, d=None):
    """k = dω_d∫x^{d−1}φ と Σβ_j = dω_d∫x^dφ をプロファイルから復元（台形則）"""
    d = profile.d if d is None else d
    factor = d * omega_d(d)
    x, phi = profile.radii, profile.values
    return {
        "k_recovered": float(factor * trapezoid(x ** (d - 1) * phi, x)),
        "sum_recovered": float(factor * trapezoid(x ** d * phi, x))
    }


def check_equimeasurability(profile: RearrangedProfile, samples, thresholds=20, seed=0, tol=0.02):
    """ランダムな閾値 t で |{F > t}| = ω_d·x_t^d（φ(x_t) = t）を確認

    順位の間の補間による 1 セル分の差は格子の分解能として差し引く。
    """
    samples = np.asarray(samples, dtype=float).ravel()
    peak = float(samples.max())
    if peak <= 0:
        return {"thresholds": 0, "max_rel_err": 0.0, "holds": True}

    rng = np.random.default_rng(seed)
    levels = np.sort(rng.uniform(0.05 * peak, 0.95 * peak, size=thresholds))
    errors = []
    for level in levels:
        measured = np.count_nonzero(samples > level) * profile.cell_volume
        ball = omega_d(profile.d) * profile.radius_at(level) ** profile.d
        errors.append(max(abs(ball - measured) - profile.cell_volume, 0.0) / measured)
    return {"thresholds": int(thresholds), "max_rel_err": float(max(errors)), "seed": seed,
            "holds": bool(max(errors) <= tol)}


def check_h_monotonicity(measures, k, points=None):
    """h(t) が (0, (2π)^{−d}|Ω|] で非増加であることを等間隔格子で確認"""
    points = DEFAULT_DENSITY_CONFIG["h_grid_points"] if points is None else points
    measures = as_measures(measures)
    if measures.d < 2:
        return {"applicable": False, "holds": True, "reason": "h は d ≥ 2 でのみ定義されます"}

    C = improved_constant_C(measures, k)
    threshold = h_threshold(measures, k, C)
    t_max = threshold["t_max"]
    grid = t_max * np.arange(1, points + 1) / points
    values = h_function(grid, measures, k, C)
    increases = np.diff(values)
    worst = float(np.max(increases / np.abs(values[1:])))
    return {
        "applicable": True,
        "C": C,
        "t_max": t_max,
        "stationary_point": threshold["stationary"],
        "displayed_threshold": threshold["displayed"],
        "max_relative_increase": worst,
        "holds": bool(worst <= 1e-12)
    }


def profile_bound_chain(profile: RearrangedProfile, k, sum_beta, tol=None):
    """測定した φ(0) による下界: 主項は断定、補正項付きの値は報告のみ"""
    tol = DEFAULT_VERIFY_CONFIG["profile_tol"] if tol is None else tol
    d = profile.d
    w = omega_d(d)
    phi0 = profile.phi0
    first = (d / (d + 1.0)) * w ** (-1.0 / d) * phi0 ** (-1.0 / d) * k ** (1.0 + 1.0 / d)
    record = {
        "phi0": phi0,
        "sum_beta": float(sum_beta),
        "first_term": first,
        "first_term_holds": bool(sum_beta >= first * (1.0 - tol)),
        "full_bound": None,
        "full_bound_holds": None
    }
    if d >= 2 and math.isfinite(profile.m_bound):
        correction = (d / (6.0 * profile.m_bound ** 2 * (d * d - 1.0))
                      * w ** (1.0 / d) * phi0 ** (2.0 + 1.0 / d) * k ** (1.0 - 1.0 / d))
        record["full_bound"] = first + correction
        record["full_bound_holds"] = bool(sum_beta >= first + correction)
    return record


def check_phi0_bound(profile: RearrangedProfile, dom, slack=1e-6):
    """0 < φ(0) ≤ (2π)^{−d}|Ω|"""
    measures = as_measures(dom)
    bound = (2.0 * math.pi) ** (-measures.d) * measures.volume
    return {"phi0": profile.phi0, "bound": bound, "holds": bool(profile.phi0 <= bound * (1.0 + slack))}
