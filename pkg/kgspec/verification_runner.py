#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
検証パイプライン
領域 → スペクトル（複数基底）→ フーリエ密度チェック → 固有値和の下界 → レポート
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

from .bounds import improved_kg_bound, kg_berezin_li_yau_bound, weyl_ratio, FULL
from .fourier_density import (
    FourierDensity, check_bessel_bound, check_equimeasurability, check_gradient_bound,
    check_h_monotonicity, check_normalization, check_phi0_bound, check_slope_condition,
    check_sum_identity, density_sample_points, gradient_fd_check, integrate_density,
    moments_bridge, profile_bound_chain, rearrange, sample_density_grid
)
from .geometry import Domain
from .kgspec_configs import (
    DEFAULT_VERIFY_CONFIG, LEMMA_DISCREPANCY_NOTE, TOOLKIT_VERSION,
    default_resolution, is_asserted_check, validate_family
)
from .lemma_lab import TabulatedDecreasingFn, fuzz_lemma, lemma_diagnostic
from .spectral import combine_upper_estimates, compute_spectrum
from .utils import calculate_basic_statistics, print_status, set_quiet

# レポートに添える補題の反例入力 φ(x) = (1 − x)_+
LEMMA_EXAMPLE = {"knots": [0.0, 1.0], "values": [1.0, 0.0], "m": 1.0}


class VerificationRunner:
    """1 つの領域と k に対する検証の実行と結果の集約"""

    def __init__(self, domain: Domain, k, config_overrides=None):
        """
        初期化

        Args:
            domain: 検証対象の領域（区間・直方体）
            k: 評価する固有値の本数
            config_overrides: DEFAULT_VERIFY_CONFIG を上書きする設定
        """
        if int(k) != k or k < 1:
            raise ValueError(f"k は 1 以上の整数である必要があります: {k}")

        self.domain = domain
        self.k = int(k)
        self.config = DEFAULT_VERIFY_CONFIG.copy()
        if config_overrides:
            self.config.update(config_overrides)
        for family in self.config["families"]:
            validate_family(family)
        set_quiet(self.config["quiet"])

        self.measures = domain.measures()
        self.spectra = {}
        self.table = []
        self.checks = {}
        self.lemma = {}
        self.profile = None

    def _resolution(self, family):
        resolution = self.config["resolution"]
        if resolution is None:
            return default_resolution(family, self.domain.dimension, self.k)
        return resolution

    def compute_spectra(self):
        """各基底ファミリーで Rayleigh-Ritz 固有値を計算"""
        families = self.config["families"]
        print_status(f"スペクトル計算開始: {self.domain.to_spec()}, k = {self.k}")

        for i, family in enumerate(families, 1):
            print_status(f"[{i}/{len(families)}] {family} 基底")
            self.spectra[family] = compute_spectrum(
                self.domain, family, self._resolution(family), self.k, self.config["xi_cutoff"]
            )

        if len(self.spectra) > 1:
            self.checks["cross_family"] = self._cross_family_agreement()
        return self.spectra

    def _cross_family_agreement(self):
        results = list(self.spectra.values())
        count = min(self.k, 5)
        deviations = []
        for j in range(count):
            values = [result.eigenvalues[j] for result in results]
            deviations.append((max(values) - min(values)) / min(values))
        return {
            "modes": count,
            "max_rel_diff": float(max(deviations)),
            "holds": bool(max(deviations) <= 0.01)
        }

    def eigenvalues(self):
        """ファミリー間のモードごとの最小値（いずれも上からの推定）"""
        return combine_upper_estimates(self.spectra.values())

    def density_source(self):
        """密度チェックに使うスペクトル（設定の先頭ファミリー）"""
        return self.spectra[self.config["families"][0]]

    def run_density_checks(self):
        """フーリエ密度の恒等式・上界・再配列チェック"""
        if not self.spectra:
            self.compute_spectra()

        source = self.density_source()
        fd = FourierDensity(source, self.k)
        print_status(f"フーリエ密度チェック（{source.family} 基底）")

        integrals = integrate_density(fd)
        self.checks["normalization"] = check_normalization(fd, self.config["normalization_tol"], integrals)
        self.checks["sum_identity"] = check_sum_identity(fd, self.config["sum_identity_tol"], integrals)

        grid = density_sample_points(fd, self.config["gradient_grid_points"])
        self.checks["bessel"] = check_bessel_bound(fd, self.domain, grid)

        # 差分比較の点は格子とは独立に乱数で選ぶ
        rng = np.random.default_rng(self.config["seed"])
        extent = 2.0 * fd.top_frequency()
        fd_points = rng.uniform(-extent, extent, size=(self.config["fd_points"], fd.dimension))
        if fd.dimension == 1:
            fd_points = fd_points[:, 0]
        bound = check_gradient_bound(fd, self.domain, grid)
        difference = gradient_fd_check(fd, fd_points)
        self.checks["gradient"] = {
            "bound": bound,
            "finite_difference": difference,
            "holds": bool(bound["holds"] and difference["holds"])
        }

        print_status("再配列プロファイルを構成中...")
        density_grid = sample_density_grid(fd)
        self.profile = rearrange(fd, self.domain, grid=density_grid)
        self.checks["slope"] = check_slope_condition(self.profile)
        self.checks["equimeasurability"] = check_equimeasurability(
            self.profile, density_grid[1], seed=self.config["seed"]
        )
        bridge = moments_bridge(self.profile)
        bridge["k"] = self.k
        bridge["sum_beta"] = source.eigenvalue_sum(self.k)
        self.checks["moments_bridge"] = bridge
        self.checks["phi0_bound"] = check_phi0_bound(self.profile, self.domain)

        chain = profile_bound_chain(self.profile, self.k, source.eigenvalue_sum(self.k),
                                    self.config["profile_tol"])
        self.checks["profile_first_term"] = {
            "phi0": chain["phi0"],
            "sum_beta": chain["sum_beta"],
            "first_term": chain["first_term"],
            "holds": chain["first_term_holds"]
        }
        self.checks["profile_full_bound"] = {
            "full_bound": chain["full_bound"],
            "holds": chain["full_bound_holds"]
        }

        self.checks["h_monotonicity"] = check_h_monotonicity(self.measures, self.k)
        return self.checks

    def evaluate_bounds(self):
        """k = 1..n の固有値和と下界のテーブルを作成"""
        if not self.spectra:
            self.compute_spectra()

        eigenvalues = self.eigenvalues()
        cumulative = np.cumsum(eigenvalues)
        self.table = []
        for kk in range(1, self.k + 1):
            sum_beta = float(cumulative[kk - 1])
            basic = kg_berezin_li_yau_bound(self.measures, kk)
            improved = improved_kg_bound(self.measures, kk)
            improved_total = improved.total if improved.applicability_flag == FULL else None
            self.table.append({
                "k": kk,
                "sum_beta": sum_beta,
                "eq5_bound": basic,
                "eq6_bound": improved_total,
                "margin5": sum_beta - basic,
                "margin6": None if improved_total is None else sum_beta - improved_total,
                "weyl_ratio": weyl_ratio(eigenvalues[kk - 1], self.measures, kk)
            })

        margins5 = [row["margin5"] for row in self.table]
        self.checks["eq5_margins"] = {"min_margin": min(margins5), "holds": bool(min(margins5) >= 0)}

        margins6 = [row["margin6"] for row in self.table if row["margin6"] is not None]
        if margins6:
            self.checks["eq6_margins"] = {"applicable": True, "min_margin": min(margins6),
                                          "holds": bool(min(margins6) >= 0)}
        else:
            self.checks["eq6_margins"] = {"applicable": False, "min_margin": None, "holds": True,
                                          "reason": "改良下界は d ≥ 2 でのみ定義されます"}

        ratios = calculate_basic_statistics([row["weyl_ratio"] for row in self.table])
        self.checks["weyl_ratio"] = {"min": ratios["min"], "max": ratios["max"], "mean": ratios["mean"]}
        return self.table

    def run_lemma_diagnostics(self):
        """補題の診断（報告のみ）"""
        d = max(self.domain.dimension, 2)
        example = lemma_diagnostic(TabulatedDecreasingFn.from_dict(LEMMA_EXAMPLE), d)
        fuzz = fuzz_lemma(d, self.config["lemma_trials"], self.config["seed"])
        self.lemma = {"example": example, "fuzz": fuzz, "note": LEMMA_DISCREPANCY_NOTE}
        self.checks["lemma"] = {
            "example_gap": example["lemma_gap"],
            "fuzz_violations": fuzz["violations"],
            "holds": bool(example["lemma_gap"] >= 0 and fuzz["violations"] == 0)
        }
        self.checks["step12"] = {"holds": example["step12"]["holds"]}
        return self.lemma

    def run(self):
        """全ステップを順に実行"""
        self.compute_spectra()
        self.run_density_checks()
        self.evaluate_bounds()
        if self.config["include_lemma"]:
            self.run_lemma_diagnostics()
        return self.failed_checks()

    def failed_checks(self):
        """失敗した断定チェックの名前"""
        return sorted(name for name, record in self.checks.items()
                      if is_asserted_check(name) and record.get("holds") is False)

    def build_report(self, include_timestamp=True):
        """VerificationReport を辞書として構築"""
        method = {
            "families": list(self.spectra),
            "density_family": self.config["families"][0],
            "spectra": {family: result.to_dict() for family, result in self.spectra.items()},
            "eigenvalues": list(self.eigenvalues()),
            "notes": [LEMMA_DISCREPANCY_NOTE]
        }
        if self.profile is not None:
            method["profile"] = self.profile.to_dict()

        report = {
            "version": TOOLKIT_VERSION,
            "domain": self.domain.to_dict(),
            "method": method,
            "table": self.table,
            "checks": self.checks,
            "lemma": self.lemma,
            "seeds": {"verify": self.config["seed"]}
        }
        if include_timestamp:
            report["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return report

    def print_summary(self):
        """検証結果のサマリーを表示"""
        print_status(f"{self.domain.to_spec()} の検証結果", "info")
        for name in sorted(self.checks):
            holds = self.checks[name].get("holds")
            if is_asserted_check(name):
                print_status(f"  {name:20}: {'OK' if holds else 'NG'}", "success" if holds else "error")
            else:
                print_status(f"  {name:20}: {holds}（報告のみ）", "info")

        failed = self.failed_checks()
        if failed:
            print_status(f"失敗した断定チェック: {', '.join(failed)}", "error")
        else:
            print_status("すべての断定チェックに合格しました", "success")
