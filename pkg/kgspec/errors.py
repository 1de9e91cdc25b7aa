#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Klein-Gordon スペクトル検証ツールキット - 例外定義
各モジュールが送出するエラーの階層
"""


class KGSpecError(Exception):
    """ツールキット共通の基底例外"""


class DomainSpecError(KGSpecError, ValueError):
    """領域指定文字列の解析エラー（問題のトークンを保持）"""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


class UnsupportedDomainError(KGSpecError, ValueError):
    """固有値ソルバーが扱えない領域（球、3次元以上の直方体）"""


class DimensionUnsupportedError(KGSpecError, ValueError):
    """次元条件を満たさない（d = 1 での改良定数など）"""


class DivergentIntegralError(KGSpecError, ValueError):
    """コンパクト台を持たない関数のモーメント計算"""


class InvalidFunctionError(KGSpecError, ValueError):
    """区分線形減少関数の不変条件違反"""


class TailBoundError(KGSpecError):
    """周波数カットオフ外のテール評価が許容誤差を超えた"""


class QuadratureConvergenceError(KGSpecError):
    """適応求積が収束しなかった"""


class MassMatrixError(KGSpecError):
    """質量行列が正定値でない"""


class SolverConvergenceError(KGSpecError):
    """固有値ソルバーの残差・正値性チェック失敗"""
