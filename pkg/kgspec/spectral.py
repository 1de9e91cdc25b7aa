#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Klein-Gordon 作用素 |p| の固有値計算
表象の二次形式 ∫|ξ||û(ξ)|²dξ を正弦基底・ハット要素基底でガラーキン離散化し、
Rayleigh-Ritz 法で固有値の上からの推定値を得る
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular, toeplitz

from .errors import (
    MassMatrixError, QuadratureConvergenceError, SolverConvergenceError,
    TailBoundError, UnsupportedDomainError
)
from .geometry import Domain
from .kgspec_configs import (
    DEFAULT_SPECTRAL_CONFIG, default_resolution, get_family_config, validate_family
)
from .utils import get_thread_count, print_status

# 15点 Gauss-Kronrod 則（7点ガウス則を内包）
GAUSS_KRONROD_15 = (
    # 節点                                   ガウス重み                              クロンロッド重み
    (-0.991455371120812639206854697526329, 0.0, 0.022935322010529224963732008058970),
    (-0.949107912342758524526189684047851, 0.129484966168869693270611432679082, 0.063092092629978553290700663189204),
    (-0.864864423359769072789712788640926, 0.0, 0.104790010322250183839876322541518),
    (-0.741531185599394439863864773280788, 0.279705391489276667901467771423780, 0.140653259715525918745189590510238),
    (-0.586087235467691130294144845693013, 0.0, 0.169004726639267902826583426598550),
    (-0.405845151377397166906606412076961, 0.381830050505118944950369775488975, 0.190350578064785409913256402421014),
    (-0.207784955007898467600689403773245, 0.0, 0.204432940075298892414161999234649),
    (0.0, 0.417959183673469387755102040816327, 0.209482141084727828012999174891714),
    (0.207784955007898467600689403773245, 0.0, 0.204432940075298892414161999234649),
    (0.405845151377397166906606412076961, 0.381830050505118944950369775488975, 0.190350578064785409913256402421014),
    (0.586087235467691130294144845693013, 0.0, 0.169004726639267902826583426598550),
    (0.741531185599394439863864773280788, 0.279705391489276667901467771423780, 0.140653259715525918745189590510238),
    (0.864864423359769072789712788640926, 0.0, 0.104790010322250183839876322541518),
    (0.949107912342758524526189684047851, 0.129484966168869693270611432679082, 0.063092092629978553290700663189204),
    (0.991455371120812639206854697526329, 0.0, 0.022935322010529224963732008058970),
)

_GK = np.array(GAUSS_KRONROD_15)
_GK_NODES = _GK[:, 0]
_GK_GAUSS = _GK[:, 1]
_GK_KRONROD = _GK[:, 2]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SERIES_THRESHOLD = 0.1


@dataclass(frozen=True)
class BasisDescriptor:
    """ガラーキン基底の記述

    Args:
        family: "sine"（軸ごとのモード数 N）または "hat"（軸ごとのセル数 M）
        domain: 区間または直方体
        resolution: 軸ごとの解像度（整数なら全軸共通）
        xi_cutoff: 求積の周波数カットオフ Ξ（None なら自動決定）
        quad_tol: 相対求積許容誤差
    """
    family: str
    domain: Domain
    resolution: tuple
    xi_cutoff: float | None = None
    quad_tol: float = DEFAULT_SPECTRAL_CONFIG["quad_tol"]

    def __post_init__(self):
        validate_family(self.family)
        if not self.domain.is_rectangular:
            raise UnsupportedDomainError("固有値ソルバーは区間・直方体のみ対応しています（球は非対応）")
        if self.domain.dimension > DEFAULT_SPECTRAL_CONFIG["max_dimension"]:
            raise UnsupportedDomainError(
                f"固有値ソルバーは d ≤ {DEFAULT_SPECTRAL_CONFIG['max_dimension']} のみ対応しています: "
                f"d = {self.domain.dimension}"
            )

        resolution = self.resolution
        if isinstance(resolution, (int, np.integer)):
            resolution = (int(resolution),) * self.domain.dimension
        resolution = tuple(int(r) for r in resolution)
        if len(resolution) != self.domain.dimension:
            raise ValueError(f"解像度の軸数が次元と一致しません: {resolution}")
        minimum = get_family_config(self.family)["min_resolution"]
        if any(r < minimum for r in resolution):
            raise ValueError(f"{self.family} 基底の解像度は {minimum} 以上が必要です: {resolution}")
        object.__setattr__(self, "resolution", resolution)

        if not 0 < self.quad_tol <= 1e-4:
            raise ValueError(f"quad_tol は (0, 1e-4] の範囲が必要です: {self.quad_tol}")
        if self.xi_cutoff is not None:
            object.__setattr__(self, "xi_cutoff", float(self.xi_cutoff))
            if not self.xi_cutoff > self.largest_frequency():
                raise ValueError(
                    f"カットオフ Ξ = {self.xi_cutoff} は最大基底周波数 "
                    f"{self.largest_frequency():.6g} より大きい必要があります"
                )

    @property
    def dimension(self):
        return self.domain.dimension

    def axis_length(self, axis):
        return self.domain.sides[axis]

    def axis_anchor(self, axis):
        return self.domain.anchor[axis]

    def axis_size(self, axis):
        """軸方向の基底関数の数（ハットは内部節点数 M−1）"""
        n = self.resolution[axis]
        return n if self.family == "sine" else n - 1

    @property
    def shape(self):
        return tuple(self.axis_size(axis) for axis in range(self.dimension))

    @property
    def size(self):
        return math.prod(self.shape)

    def spacing(self, axis):
        """ハット格子の間隔 h = L/M"""
        return self.axis_length(axis) / self.resolution[axis]

    def hat_nodes(self, axis):
        return self.axis_anchor(axis) + self.spacing(axis) * np.arange(1, self.resolution[axis])

    def frequencies(self):
        """軸ごとの特性周波数（sine: nπ/L、hat: ナイキスト周波数 π/h）"""
        result = []
        for axis in range(self.dimension):
            if self.family == "sine":
                result.append(np.arange(1, self.resolution[axis] + 1) * np.pi / self.axis_length(axis))
            else:
                result.append(np.array([np.pi / self.spacing(axis)]))
        return result

    def largest_frequency(self):
        return float(max(freqs.max() for freqs in self.frequencies()))

    def with_cutoff(self, xi_cutoff):
        return replace(self, xi_cutoff=xi_cutoff)

    def flat_index(self, index):
        """多重添字（0 始まり）を行優先の平坦添字に変換"""
        return int(np.ravel_multi_index(_normalize_index(self, index), self.shape))

    def to_dict(self):
        return {
            "family": self.family,
            "domain": self.domain.to_spec(),
            "resolution": list(self.resolution),
            "xi_cutoff": self.xi_cutoff,
            "quad_tol": self.quad_tol
        }


@dataclass(frozen=True, eq=False)
class FormMatrices:
    """組み立て済みの二次形式行列 S と質量行列 Mm"""
    S: np.ndarray
    Mm: np.ndarray
    basis: BasisDescriptor
    xi_cutoff: float
    tail_bound: float  # 対角成分に対するテール上界の最大比
    quad_error: float  # G7/K15 の対角成分差の最大比
    refinements: int


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Rayleigh-Ritz 固有値と係数ベクトル（coefficients[j] が第 j モード）"""
    domain: Domain | None
    basis: BasisDescriptor | None
    eigenvalues: tuple
    coefficients: np.ndarray
    k_retained: int
    xi_cutoff: float | None = None
    residuals: tuple = ()
    error_estimates: tuple | None = None

    @property
    def family(self):
        return self.basis.family if self.basis else None

    def with_error_estimates(self, estimates):
        return replace(self, error_estimates=None if estimates is None else tuple(estimates))

    def eigenvalue_sum(self, k=None):
        k = self.k_retained if k is None else k
        return float(sum(self.eigenvalues[:k]))

    def to_dict(self, include_coefficients=False):
        record = {
            "domain": self.domain.to_spec() if self.domain else None,
            "family": self.family,
            "resolution": list(self.basis.resolution) if self.basis else None,
            "xi_cutoff": self.xi_cutoff,
            "eigenvalues": list(self.eigenvalues),
            "error_estimates": None if self.error_estimates is None else list(self.error_estimates),
            "k_retained": self.k_retained,
            "residuals": list(self.residuals)
        }
        if include_coefficients:
            record["coefficients"] = self.coefficients.tolist()
        return record


# --- 基底関数のフーリエ変換 ---

def _sinc(t):
    """sin(t)/t（t = 0 で 1）"""
    return np.sinc(np.asarray(t, dtype=float) / np.pi)


def _sinc_derivative(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) < _SERIES_THRESHOLD
    tl = t[~small]
    out[~small] = (np.cos(tl) - np.sin(tl) / tl) / tl
    ts = t[small]
    t2 = ts * ts
    out[small] = ts * (-1.0 / 3.0 + t2 * (1.0 / 30.0 + t2 * (-1.0 / 840.0 + t2 / 45360.0)))
    return out


def _unit_exponential_integral(theta):
    """G(θ) = ∫_0^1 e^{−iθs} ds（整関数なので特異点なし）"""
    theta = np.asarray(theta, dtype=float)
    return np.exp(-0.5j * theta) * np.sinc(theta / (2.0 * np.pi))


def _unit_first_moment_integral(theta):
    """H(θ) = ∫_0^1 s·e^{−iθs} ds。G′(θ) = −iH(θ)"""
    theta = np.asarray(theta, dtype=float)
    out = np.empty(theta.shape, dtype=complex)
    small = np.abs(theta) < _SERIES_THRESHOLD
    tl = theta[~small]
    out[~small] = (np.exp(-1j * tl) * (1.0 + 1j * tl) - 1.0) / (tl * tl)

    ts = theta[small]
    term = np.ones(ts.shape, dtype=complex)
    series = np.zeros(ts.shape, dtype=complex)
    for j in range(10):
        series += term / (j + 2)
        term = term * (-1j * ts) / (j + 1)
    out[small] = series
    return out


def _sine_axis(anchor, length, modes, xi, derivative):
    k = (np.asarray(modes) + 1) * np.pi / length
    minus = (xi[None, :] - k[:, None]) * length
    plus = (xi[None, :] + k[:, None]) * length
    # ∫_0^L e^{−iξy} sin(ky) dy
    body = (length / 2j) * (_unit_exponential_integral(minus) - _unit_exponential_integral(plus))
    phase = np.exp(-1j * anchor * xi)[None, :]
    prefactor = _INV_SQRT_2PI * math.sqrt(2.0 / length)
    if not derivative:
        return prefactor * phase * body
    body_derivative = -0.5 * length ** 2 * (
        _unit_first_moment_integral(minus) - _unit_first_moment_integral(plus)
    )
    return prefactor * phase * (-1j * anchor * body + body_derivative)


def _hat_profile(h, xi):
    """|FT|² = h²·sinc⁴(ξh/2)/(2π)"""
    return h * h * _sinc(0.5 * h * xi) ** 4 / (2.0 * np.pi)


def _hat_axis(anchor, h, modes, xi, derivative):
    nodes = anchor + h * (np.asarray(modes) + 1)
    t = 0.5 * h * xi
    s = _sinc(t)
    phase = np.exp(-1j * np.outer(nodes, xi))
    prefactor = _INV_SQRT_2PI * h
    if not derivative:
        return prefactor * (s * s)[None, :] * phase
    ds = _sinc_derivative(t)
    return prefactor * phase * ((h * s * ds)[None, :] - 1j * nodes[:, None] * (s * s)[None, :])


def axis_transforms(basis: BasisDescriptor, axis: int, xi, derivative=False, modes=None):
    """軸 axis の1次元基底関数の変換（または ξ 微分）を (モード数, 点数) 配列で返す"""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if modes is None:
        modes = np.arange(basis.axis_size(axis))
    anchor = basis.axis_anchor(axis)
    if basis.family == "sine":
        return _sine_axis(anchor, basis.axis_length(axis), modes, xi, derivative)
    return _hat_axis(anchor, basis.spacing(axis), modes, xi, derivative)


def _normalize_index(basis, index):
    index = (int(index),) if np.isscalar(index) else tuple(int(i) for i in index)
    if len(index) != basis.dimension:
        raise ValueError(f"添字の次元が不正です: {index}")
    for axis, value in enumerate(index):
        if not 0 <= value < basis.axis_size(axis):
            raise ValueError(f"添字 {index} が解像度 {basis.resolution} の範囲外です")
    return index


def _as_points(basis, xi):
    xi = np.asarray(xi, dtype=float)
    if basis.dimension == 1:
        return xi.reshape(-1, 1), xi.ndim == 0
    return xi.reshape(-1, basis.dimension), xi.ndim == 1


def basis_fourier_transform(basis: BasisDescriptor, index, xi):
    """Ω 外でゼロ拡張した基底関数のフーリエ変換 (2π)^{−d/2}∫e^{−ix·ξ}φ(x)dx

    index は軸ごとの 0 始まり添字（正弦基底ではモード番号 n = index + 1）。
    xi は1点または点の配列（d ≥ 2 では最後の軸が座標）。
    """
    idx = _normalize_index(basis, index)
    points, single = _as_points(basis, xi)
    value = np.ones(len(points), dtype=complex)
    for axis in range(basis.dimension):
        value *= axis_transforms(basis, axis, points[:, axis], modes=[idx[axis]])[0]
    return complex(value[0]) if single else value


def basis_fourier_gradient(basis: BasisDescriptor, index, xi):
    """基底関数のフーリエ変換の ξ 勾配（閉形式）。形状 (d,) または (点数, d)"""
    idx = _normalize_index(basis, index)
    points, single = _as_points(basis, xi)
    values = []
    derivatives = []
    for axis in range(basis.dimension):
        values.append(axis_transforms(basis, axis, points[:, axis], modes=[idx[axis]])[0])
        derivatives.append(axis_transforms(basis, axis, points[:, axis], derivative=True, modes=[idx[axis]])[0])

    gradient = np.empty((len(points), basis.dimension), dtype=complex)
    for axis in range(basis.dimension):
        component = derivatives[axis].copy()
        for other in range(basis.dimension):
            if other != axis:
                component *= values[other]
        gradient[:, axis] = component
    return gradient[0] if single else gradient


def mass_matrix(basis: BasisDescriptor):
    """厳密な質量行列（正弦基底は単位行列、ハット要素は三重対角のテンソル積）"""
    factors = []
    for axis in range(basis.dimension):
        n = basis.axis_size(axis)
        if basis.family == "sine":
            factors.append(np.eye(n))
        else:
            h = basis.spacing(axis)
            factors.append(toeplitz(np.r_[2.0 * h / 3.0, h / 6.0, np.zeros(max(n - 2, 0))][:n]))
    return reduce(np.kron, factors)


# --- テール上界とカットオフ選択 ---

def axis_tail_bounds(basis, axis, xi):
    """軸方向の (∫_{|ξ|>Ξ}|φ|², ∫_{|ξ|>Ξ}|ξ||φ|²) の解析的上界"""
    n = basis.axis_size(axis)
    if basis.family == "sine":
        length = basis.axis_length(axis)
        k = np.arange(1, n + 1) * np.pi / length
        scale = 8.0 * k * k / (np.pi * length)
        mass_tail = scale / (3.0 * xi ** 3 * (1.0 - (k / xi) ** 2) ** 2)
        form_tail = 4.0 * k * k / (np.pi * length * (xi * xi - k * k))
        return mass_tail, form_tail
    h = basis.spacing(axis)
    mass_tail = np.full(n, 16.0 / (3.0 * np.pi * h * h * xi ** 3))
    form_tail = np.full(n, 8.0 / (np.pi * h * h * xi * xi))
    return mass_tail, form_tail


def _axis_diagonals(basis, axis, xi, chunk_size=DEFAULT_SPECTRAL_CONFIG["chunk_size"]):
    """軸方向の (∫_{|ξ|≤Ξ}|ξ||φ|², ∫|φ|²)。前者は全空間の値の下界"""
    length = basis.axis_length(axis)
    nodes, wk, _ = _panel_nodes(xi, np.pi / length, 0)
    if basis.family == "sine":
        form = np.zeros(basis.axis_size(axis))
        for chunk in _node_chunks(len(nodes), chunk_size):
            values = np.abs(axis_transforms(basis, axis, nodes[chunk])) ** 2
            form += values @ (2.0 * wk[chunk] * nodes[chunk])
        return form, np.ones(basis.axis_size(axis))
    h = basis.spacing(axis)
    form = np.full(basis.axis_size(axis), float(_hat_profile(h, nodes) @ (2.0 * wk * nodes)))
    return form, np.full(basis.axis_size(axis), 2.0 * h / 3.0)


def _relative_tail(basis, xi, diagonals):
    tails = [axis_tail_bounds(basis, axis, xi) for axis in range(basis.dimension)]
    if basis.dimension == 1:
        mass_tail, form_tail = tails[0]
        return float(np.max(form_tail / diagonals[0][0]))

    (mtx, ftx), (mty, fty) = tails
    (fx, mx), (fy, my) = diagonals
    # 正方形外は {|ξ1|>Ξ} ∪ {|ξ2|>Ξ} に含まれ、|ξ| ≤ |ξ1| + |ξ2|
    tail = (np.outer(ftx, my) + np.outer(mtx, fy + fty)
            + np.outer(mx, fty) + np.outer(fx + ftx, mty))
    lower = np.maximum(np.outer(fx, my), np.outer(mx, fy))
    return float(np.max(tail / lower))


def select_cutoff(basis: BasisDescriptor, config=None):
    """テール上界が quad_tol × 対角成分 以下になるカットオフ Ξ を決定

    明示的なカットオフが不足する場合は TailBoundError。
    """
    config = config or DEFAULT_SPECTRAL_CONFIG
    explicit = basis.xi_cutoff is not None
    xi = basis.xi_cutoff if explicit else config["cutoff_multiplier"] * basis.largest_frequency()
    # 対角成分は Ξ について単調増加なので初期値での評価が以後の下界になる
    diagonals = [_axis_diagonals(basis, axis, xi, config["chunk_size"]) for axis in range(basis.dimension)]

    for _ in range(config["max_cutoff_growth_steps"] + 1):
        tail = _relative_tail(basis, xi, diagonals)
        if tail <= basis.quad_tol:
            return xi, tail
        if explicit:
            raise TailBoundError(
                f"カットオフ Ξ = {xi:.6g} ではテール上界の相対値 {tail:.3g} が "
                f"許容誤差 {basis.quad_tol:.3g} を超えます"
            )
        xi *= config["cutoff_growth"]
    raise TailBoundError(f"カットオフを {xi:.6g} まで拡大してもテール上界を満たせません")


# --- 求積と組み立て ---

def _panel_nodes(xi_max, width, level):
    """[0, Ξ] を幅 width/2^level のパネルに分割した G7/K15 節点と重み"""
    panels = int(math.ceil(xi_max / width - 1e-9))
    count = panels * 2 ** level
    half = 0.5 * width / 2 ** level
    left = 2.0 * half * np.arange(count)
    nodes = (left[:, None] + half * (_GK_NODES[None, :] + 1.0)).ravel()
    return nodes, np.tile(half * _GK_KRONROD, count), np.tile(half * _GK_GAUSS, count)


def _parallel_map(worker, chunks):
    """チャンクごとの部分和を計算（合計の順序はチャンク順に固定）"""
    threads = min(get_thread_count(), len(chunks))
    if threads <= 1:
        return [worker(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(worker, chunks))


def _sum_partials(partials):
    return reduce(lambda left, right: tuple(a + b for a, b in zip(left, right)), partials)


def _node_chunks(count, size):
    return [slice(start, min(start + size, count)) for start in range(0, count, size)]


def _assemble_1d(basis, xi_max, level, config):
    nodes, wk, wg = _panel_nodes(xi_max, np.pi / basis.axis_length(0), level)
    chunks = _node_chunks(len(nodes), config["chunk_size"])

    if basis.family == "sine":
        def worker(chunk):
            x = nodes[chunk]
            values = axis_transforms(basis, 0, x)
            # 被積分関数の実部は ξ → −ξ で偶
            weight = 2.0 * wk[chunk] * x
            block = (values.real * weight) @ values.real.T + (values.imag * weight) @ values.imag.T
            gauss_diag = (np.abs(values) ** 2) @ (2.0 * wg[chunk] * x)
            return block, gauss_diag

        S, gauss_diag = _sum_partials(_parallel_map(worker, chunks))
        return S, gauss_diag

    h = basis.spacing(0)
    offsets = h * np.arange(basis.axis_size(0))

    def toeplitz_worker(chunk):
        x = nodes[chunk]
        profile = _hat_profile(h, x)
        column = np.cos(np.outer(offsets, x)) @ (2.0 * wk[chunk] * x * profile)
        return column, float(np.sum(2.0 * wg[chunk] * x * profile))

    column, gauss_zero = _sum_partials(_parallel_map(toeplitz_worker, chunks))
    S = toeplitz(column)
    return S, np.full(basis.size, gauss_zero)


def _axis_factors(basis, axis, nodes, wk, wg):
    """2次元組み立て用の軸因子 (K15 重み付き因子, G7 重み付き対角因子)"""
    if basis.family == "sine":
        values = axis_transforms(basis, axis, nodes)
        n = len(values)
        pairs = (np.einsum("ip,jp->ijp", values.real, values.real)
                 + np.einsum("ip,jp->ijp", values.imag, values.imag)).reshape(n * n, -1)
        return 2.0 * wk * pairs, 2.0 * wg * np.abs(values) ** 2

    h = basis.spacing(axis)
    profile = _hat_profile(h, nodes)
    offsets = h * np.arange(basis.axis_size(axis))
    factor = 2.0 * wk * profile * np.cos(np.outer(offsets, nodes))
    return factor, (2.0 * wg * profile)[None, :]


def _assemble_2d(basis, xi_max, level, config):
    grids = [_panel_nodes(xi_max, np.pi / basis.axis_length(axis), level) for axis in range(2)]
    (nodes_x, wkx, wgx), (nodes_y, wky, wgy) = grids
    x_factor, x_gauss = _axis_factors(basis, 0, nodes_x, wkx, wgx)
    y_factor, y_gauss = _axis_factors(basis, 1, nodes_y, wky, wgy)
    rows = max(1, config["chunk_elements"] // len(nodes_y))
    chunks = _node_chunks(len(nodes_x), rows)

    def worker(chunk):
        radius = np.hypot(nodes_x[chunk, None], nodes_y[None, :])
        # 第1象限の積分 × 4（各軸の因子が 2Re(...) を含む）
        block = x_factor[:, chunk] @ (radius @ y_factor.T)
        gauss = x_gauss[:, chunk] @ (radius @ y_gauss.T)
        return block, gauss

    block, gauss = _sum_partials(_parallel_map(worker, chunks))
    nx, ny = basis.shape

    if basis.family == "sine":
        S = block.reshape(nx, nx, ny, ny).transpose(0, 2, 1, 3).reshape(nx * ny, nx * ny)
        return S, gauss.ravel()

    ix = np.repeat(np.arange(nx), ny)
    iy = np.tile(np.arange(ny), nx)
    # ブロック Toeplitz: 成分は節点オフセット (|Δi|, |Δj|) のみに依存
    S = block[np.abs(ix[:, None] - ix[None, :]), np.abs(iy[:, None] - iy[None, :])]
    return S, np.full(basis.size, float(gauss[0, 0]))


def assemble_form_matrix(basis: BasisDescriptor, config_overrides=None) -> FormMatrices:
    """S[a][b] = ∫|ξ|·FT_a(ξ)·conj(FT_b(ξ))dξ と質量行列を組み立て

    |ξ| ≤ Ξ をパネル分割した Gauss-Kronrod 則で積分し、Ξ の外は解析的上界で評価する。
    G7 と K15 の対角成分の差が quad_tol を超える場合はパネル幅を半減する。
    """
    config = DEFAULT_SPECTRAL_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)

    xi_cutoff, tail = select_cutoff(basis, config)
    assemble = _assemble_1d if basis.dimension == 1 else _assemble_2d

    quad_error = math.inf
    for level in range(config["max_refinements"] + 1):
        S, gauss_diag = assemble(basis, xi_cutoff, level, config)
        diag = np.diag(S)
        quad_error = float(np.max(np.abs(diag - gauss_diag) / diag))
        if quad_error <= basis.quad_tol:
            break
        print_status(f"求積誤差 {quad_error:.2e} が許容値を超えたためパネルを細分化します", "warning")
    else:
        raise QuadratureConvergenceError(
            f"{config['max_refinements']} 回の細分化後も求積誤差 {quad_error:.3g} が "
            f"許容値 {basis.quad_tol:.3g} を超えています"
        )

    S = 0.5 * (S + S.T)
    return FormMatrices(S, mass_matrix(basis), basis.with_cutoff(xi_cutoff), xi_cutoff,
                        tail, quad_error, level)


# --- 固有値問題 ---

def _unpack_matrices(matrices):
    if isinstance(matrices, FormMatrices):
        return matrices.S, matrices.Mm, matrices.basis, matrices.xi_cutoff
    if isinstance(matrices, dict):
        return np.asarray(matrices["S"], float), np.asarray(matrices["Mm"], float), None, None
    S, Mm = matrices
    return np.asarray(S, float), np.asarray(Mm, float), None, None


def solve_spectrum(matrices, k: int, config_overrides=None) -> SpectrumResult:
    """一般化固有値問題 S v = β Mm v の最小 k 個の固有対

    Mm のコレスキー分解による合同変換で標準対称問題に帰着して解く。
    """
    config = DEFAULT_SPECTRAL_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)

    S, Mm, basis, xi_cutoff = _unpack_matrices(matrices)
    n = S.shape[0]
    if int(k) != k or not 1 <= k <= n:
        raise ValueError(f"k は 1 以上 {n} 以下である必要があります: {k}")

    try:
        lower = cholesky(Mm, lower=True)
    except LinAlgError as exc:
        raise MassMatrixError("質量行列が正定値ではありません") from exc

    reduced = solve_triangular(lower, S, lower=True)
    reduced = solve_triangular(lower, reduced.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)
    try:
        values, vectors = eigh(reduced, subset_by_index=[0, k - 1])
    except LinAlgError as exc:
        raise SolverConvergenceError("対称固有値ソルバーが収束しませんでした") from exc

    coefficients = solve_triangular(lower, vectors, lower=True, trans="T")
    # 符号を固定（絶対値最大の成分を正に）
    pivots = np.argmax(np.abs(coefficients), axis=0)
    signs = np.sign(coefficients[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    coefficients = coefficients * signs

    if not values[0] > 0:
        raise SolverConvergenceError(f"正でない固有値が得られました: {values[0]}")

    residuals = np.linalg.norm(S @ coefficients - (Mm @ coefficients) * values, axis=0)
    scale = np.linalg.norm(S, 2)
    worst = float(np.max(residuals))
    if worst > config["residual_tol"] * scale:
        raise SolverConvergenceError(f"残差 {worst:.3g} が許容値 {config['residual_tol'] * scale:.3g} を超えました")

    return SpectrumResult(
        domain=basis.domain if basis else None,
        basis=basis,
        eigenvalues=tuple(float(v) for v in values),
        coefficients=coefficients.T.copy(),
        k_retained=int(k),
        xi_cutoff=xi_cutoff,
        residuals=tuple(float(r) for r in residuals)
    )


def richardson_estimate(fine: SpectrumResult, coarse: SpectrumResult, order=None):
    """2解像度のリチャードソン誤差推定 |β_coarse − β_fine|/(2^p − 1)"""
    order = DEFAULT_SPECTRAL_CONFIG["richardson_order"] if order is None else order
    factor = 2.0 ** order - 1.0
    count = min(len(fine.eigenvalues), len(coarse.eigenvalues))
    estimates = [abs(c - f) / factor for f, c in zip(fine.eigenvalues[:count], coarse.eigenvalues[:count])]
    return estimates + [None] * (len(fine.eigenvalues) - count)


def compute_spectrum(domain: Domain, family: str, resolution=None, k: int = 1,
                     xi_cutoff=None, config_overrides=None) -> SpectrumResult:
    """組み立て + 求解。粗い解像度との比較による誤差推定を付加して返す"""
    if int(k) != k or k < 1:
        raise ValueError(f"k は 1 以上の整数である必要があります: {k}")
    if not domain.is_rectangular:
        raise UnsupportedDomainError("固有値ソルバーは区間・直方体のみ対応しています（球は非対応）")

    config = DEFAULT_SPECTRAL_CONFIG.copy()
    if config_overrides:
        config.update(config_overrides)
    validate_family(family)
    if resolution is None:
        resolution = default_resolution(family, domain.dimension, k)

    basis = BasisDescriptor(family, domain, resolution, xi_cutoff, config["quad_tol"])
    if k > basis.size:
        raise ValueError(f"k = {k} が基底の次元 {basis.size} を超えています")

    print_status(f"{family} 基底 {basis.resolution} で {domain.to_spec()} を組み立て中...")
    matrices = assemble_form_matrix(basis, config)
    fine = solve_spectrum(matrices, k, config)
    print_status(f"{family}: β₁ = {fine.eigenvalues[0]:.8g}（Ξ = {matrices.xi_cutoff:.6g}）", "success")

    family_config = get_family_config(family)
    coarse_resolution = tuple(r // family_config["coarsen_factor"] for r in basis.resolution)
    if any(r < family_config["min_resolution"] for r in coarse_resolution):
        print_status("粗い解像度が下限未満のため誤差推定を省略します", "warning")
        return fine.with_error_estimates(None)

    coarse_basis = BasisDescriptor(family, domain, coarse_resolution, matrices.xi_cutoff, config["quad_tol"])
    coarse_k = min(k, coarse_basis.size)
    coarse = solve_spectrum(assemble_form_matrix(coarse_basis, config), coarse_k, config)
    return fine.with_error_estimates(richardson_estimate(fine, coarse, config["richardson_order"]))


def combine_upper_estimates(results):
    """独立な基底族の Rayleigh-Ritz 値のモードごとの最小値（いずれも上からの推定）"""
    results = list(results)
    if not results:
        return ()
    count = min(len(result.eigenvalues) for result in results)
    return tuple(min(result.eigenvalues[j] for result in results) for j in range(count))
