#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Klein-Gordon スペクトル検証ツールキット

有界領域上の Klein-Gordon 作用素 |p| の固有値和に対する Berezin-Li-Yau 型下界と
その改良を、Rayleigh-Ritz 固有値とフーリエ密度の数値チェックで検証するパッケージ

主要モジュール:
- geometry: 領域（区間・直方体・球）と体積・重心・慣性モーメント
- bounds: 下界・Weyl 漸近・Riesz 平均と定数チェーン
- lemma_lab: モーメント補題の診断とファジング
- spectral: ガラーキン離散化と固有値計算
- fourier_density: フーリエ密度の恒等式・上界・再配列チェック
- verification_runner: 検証パイプライン
- harness_cli: コマンドライン実行スクリプト

使用例:
    from kgspec import VerificationRunner, parse_domain

    # 単位正方形で k = 6 まで検証
    runner = VerificationRunner(parse_domain('box:1x1'), 6)
    failed = runner.run()
    runner.print_summary()

    # または下界のみ
    from kgspec import improved_kg_bound
    improved_kg_bound(parse_domain('box:1x1'), 1).total
"""

from .kgspec_configs import TOOLKIT_VERSION

__version__ = TOOLKIT_VERSION
__author__ = 'pyonkichi499'

# 主要クラス・関数のインポート
from .geometry import Domain, DomainMeasures, parse_domain, volume, centroid, moment_of_inertia
from .bounds import (
    BoundBreakdown,
    improved_kg_bound,
    kg_berezin_li_yau_bound,
    li_yau_laplacian_bound,
    melas_laplacian_bound,
    riesz_mean,
    weyl_estimate
)
from .lemma_lab import TabulatedDecreasingFn, fuzz_lemma, lemma_diagnostic
from .spectral import BasisDescriptor, SpectrumResult, compute_spectrum
from .fourier_density import FourierDensity, RearrangedProfile, rearrange
from .verification_runner import VerificationRunner
from .kgspec_configs import (
    get_available_families,
    get_family_config,
    validate_family,
    BASIS_FAMILY_CONFIGS,
    CHECK_CATEGORIES
)

__all__ = [
    'Domain',
    'DomainMeasures',
    'parse_domain',
    'volume',
    'centroid',
    'moment_of_inertia',
    'BoundBreakdown',
    'improved_kg_bound',
    'kg_berezin_li_yau_bound',
    'li_yau_laplacian_bound',
    'melas_laplacian_bound',
    'riesz_mean',
    'weyl_estimate',
    'TabulatedDecreasingFn',
    'fuzz_lemma',
    'lemma_diagnostic',
    'BasisDescriptor',
    'SpectrumResult',
    'compute_spectrum',
    'FourierDensity',
    'RearrangedProfile',
    'rearrange',
    'VerificationRunner',
    'get_available_families',
    'get_family_config',
    'validate_family',
    'BASIS_FAMILY_CONFIGS',
    'CHECK_CATEGORIES'
]
