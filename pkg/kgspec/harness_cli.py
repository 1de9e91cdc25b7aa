#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Klein-Gordon スペクトル検証ツールキット - 実行スクリプト
サブコマンドで下界評価・固有値計算・検証・補題診断・Riesz 平均を実行
"""

import argparse
import json
import os
import sys

import numpy as np

try:
    # パッケージとして実行される場合
    from .bounds import improved_kg_bound, kg_berezin_li_yau_bound, li_yau_laplacian_bound
    from .bounds import melas_laplacian_bound, riesz_mean, weyl_estimate
    from .errors import (
        DimensionUnsupportedError, DivergentIntegralError, DomainSpecError, InvalidFunctionError,
        MassMatrixError, QuadratureConvergenceError, SolverConvergenceError, TailBoundError,
        UnsupportedDomainError
    )
    from .geometry import parse_domain
    from .kgspec_configs import EXIT_CODES, TABLE_COLUMNS, TOOLKIT_VERSION, get_available_families
    from .lemma_lab import TabulatedDecreasingFn, fuzz_lemma, lemma_diagnostic
    from .spectral import compute_spectrum
    from .utils import dump_json, format_number, print_status, rows_to_csv, set_quiet, write_text
    from .verification_runner import VerificationRunner
except ImportError:
    # スクリプトとして直接実行される場合
    sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from kgspec.bounds import improved_kg_bound, kg_berezin_li_yau_bound, li_yau_laplacian_bound
    from kgspec.bounds import melas_laplacian_bound, riesz_mean, weyl_estimate
    from kgspec.errors import (
        DimensionUnsupportedError, DivergentIntegralError, DomainSpecError, InvalidFunctionError,
        MassMatrixError, QuadratureConvergenceError, SolverConvergenceError, TailBoundError,
        UnsupportedDomainError
    )
    from kgspec.geometry import parse_domain
    from kgspec.kgspec_configs import EXIT_CODES, TABLE_COLUMNS, TOOLKIT_VERSION, get_available_families
    from kgspec.lemma_lab import TabulatedDecreasingFn, fuzz_lemma, lemma_diagnostic
    from kgspec.spectral import compute_spectrum
    from kgspec.utils import dump_json, format_number, print_status, rows_to_csv, set_quiet, write_text
    from kgspec.verification_runner import VerificationRunner

BOUNDS_COLUMNS = ["k", "leading_term", "correction_term", "total", "applicability_flag", "kg_berezin_li_yau"]
MELAS_COLUMNS = ["li_yau_laplacian", "melas_laplacian"]


def positive_int(text):
    """1 以上の整数"""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"整数ではありません: {text}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"1 以上である必要があります: {text}")
    return value


def create_argument_parser():
    """コマンドライン引数パーサーを作成"""
    parser = argparse.ArgumentParser(
        prog="kgspec",
        description="Klein-Gordon 作用素 |p| の固有値和の下界を数値検証するツール",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用例:
  # 単位正方形の改良下界（主項 + 補正項）
  python -m kgspec bounds --domain box:1x1 --k 6 --format csv

  # 区間 (0, π) の固有値（正弦基底 64 モード）
  python -m kgspec eigs --domain interval:3.141592653589793 --family sine --resolution 64 --k 5

  # 長さ 2 の区間で k = 20 まで検証し、レポートを保存
  python -m kgspec verify --domain interval:2 --k 20 --out results/interval2.json

  # 補題の反例診断とファジング
  python -m kgspec lemma --phi '{"knots":[0,1],"values":[1,0],"m":1}' --d 2
  python -m kgspec lemma --d 2 --trials 10000 --seed 42

  # Riesz 平均
  python -m kgspec riesz --spectrum spectrum.json --z 2.5 --sigma 1
        """
    )

    # 全サブコマンド共通のオプション
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--quiet', '-q',
        action='store_true',
        help='進捗表示を抑制（標準出力のレポートのみ）'
    )
    common.add_argument(
        '--out', '-o',
        type=str,
        help='レポートの保存先（標準出力にも表示）'
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    bounds = subparsers.add_parser('bounds', parents=[common], help='固有値和の下界を評価')
    bounds.add_argument('--domain', required=True, help='領域指定（interval:L, box:L1xL2, ball:d,R）')
    bounds.add_argument('--k', type=positive_int, required=True, help='k = 1..n の行を出力')
    bounds.add_argument('--melas-md', type=float, help='ラプラシアン比較用の Melas 定数 M_d')
    bounds.add_argument('--format', choices=['json', 'csv'], default='json', help='出力形式（デフォルト: json）')
    bounds.add_argument('--strict', action='store_true', help='d = 1 で改良下界を要求した場合にエラー終了')

    eigs = subparsers.add_parser('eigs', parents=[common], help='Rayleigh-Ritz 固有値を計算')
    eigs.add_argument('--domain', required=True, help='領域指定（interval / box のみ）')
    eigs.add_argument('--family', choices=get_available_families(), default='sine', help='基底ファミリー')
    eigs.add_argument('--resolution', type=positive_int, help='軸あたりの解像度（省略時は自動）')
    eigs.add_argument('--k', type=positive_int, required=True, help='求める固有値の本数')
    eigs.add_argument('--xi-cutoff', type=float, help='周波数カットオフ Ξ（省略時は自動）')
    eigs.add_argument('--include-coefficients', action='store_true', help='係数ベクトルも出力')

    verify = subparsers.add_parser('verify', parents=[common], help='下界と密度恒等式を検証')
    verify.add_argument('--domain', required=True, help='領域指定（interval / box のみ）')
    verify.add_argument('--k', type=positive_int, required=True, help='検証する固有値の本数')
    verify.add_argument('--family', choices=get_available_families() + ['both'], default='both',
                        help='基底ファミリー（デフォルト: both）')
    verify.add_argument('--resolution', type=positive_int, help='軸あたりの解像度（省略時は自動）')
    verify.add_argument('--xi-cutoff', type=float, help='周波数カットオフ Ξ（省略時は自動）')
    verify.add_argument('--format', choices=['json', 'csv'], default='json',
                        help='出力形式（csv は k ごとのテーブルのみ）')
    verify.add_argument('--include-lemma', action='store_true', help='補題の診断をレポートに含める')
    verify.add_argument('--seed', type=int, default=None, help='乱数シード')
    verify.add_argument('--no-timestamp', action='store_true', help='タイムスタンプを出力しない')

    lemma = subparsers.add_parser('lemma', parents=[common], help='モーメント補題の診断・ファジング')
    lemma.add_argument('--d', type=int, required=True, help='次元（2 以上）')
    lemma.add_argument('--phi', type=str, help='φ の定義 JSON {"knots": [...], "values": [...], "m": ...}')
    lemma.add_argument('--trials', type=positive_int, default=1000, help='ファジングの試行回数（デフォルト: 1000）')
    lemma.add_argument('--seed', type=int, default=0, help='乱数シード（デフォルト: 0）')
    lemma.add_argument('--correction-scale', type=float, default=1.0, help='補正項の定数倍（--phi 使用時）')

    riesz = subparsers.add_parser('riesz', parents=[common], help='Riesz 平均 R_σ(z) を計算')
    riesz.add_argument('--spectrum', required=True, help='昇順の固有値を含む JSON ファイル')
    riesz.add_argument('--z', type=float, required=True, help='評価点 z')
    riesz.add_argument('--sigma', type=float, required=True, help='次数 σ ≥ 0')

    return parser


def build_config_overrides(args):
    """verify の引数から VerificationRunner の設定を構築"""
    overrides = {"quiet": args.quiet}
    if args.family == 'both':
        overrides["families"] = get_available_families()
    else:
        overrides["families"] = [args.family]
    if args.resolution is not None:
        overrides["resolution"] = args.resolution
    if args.xi_cutoff is not None:
        overrides["xi_cutoff"] = args.xi_cutoff
    if args.seed is not None:
        overrides["seed"] = args.seed
    overrides["include_lemma"] = args.include_lemma
    return overrides


def emit(text, args):
    """レポートを標準出力に書き、指定があればファイルにも保存"""
    print(text)
    if getattr(args, "out", None):
        write_text(args.out, text)


def handle_bounds(args):
    """bounds サブコマンド"""
    domain = parse_domain(args.domain)
    measures = domain.measures()
    if measures.d == 1:
        if args.strict:
            raise DimensionUnsupportedError("d = 1 では改良下界は定義されません（--strict）")
        print_status("d = 1 のため改良下界は主項のみです（leading_only）", "warning")

    rows = []
    for k in range(1, args.k + 1):
        row = improved_kg_bound(measures, k).to_dict()
        row["kg_berezin_li_yau"] = kg_berezin_li_yau_bound(measures, k)
        row["weyl_estimate"] = weyl_estimate(measures, k)
        if args.melas_md is not None:
            row["li_yau_laplacian"] = li_yau_laplacian_bound(measures, k)
            row["melas_laplacian"] = melas_laplacian_bound(measures, k, args.melas_md)
        rows.append(row)

    if args.format == 'csv':
        columns = BOUNDS_COLUMNS + (MELAS_COLUMNS if args.melas_md is not None else [])
        emit(rows_to_csv(rows, columns).rstrip("\n"), args)
    else:
        emit(dump_json({"version": TOOLKIT_VERSION, "domain": domain.to_dict(), "rows": rows}), args)
    print_status(f"{len(rows)} 行の下界を出力しました", "success")
    return EXIT_CODES["ok"]


def handle_eigs(args):
    """eigs サブコマンド"""
    domain = parse_domain(args.domain)
    result = compute_spectrum(domain, args.family, args.resolution, args.k, args.xi_cutoff)
    record = result.to_dict(include_coefficients=args.include_coefficients)
    record["version"] = TOOLKIT_VERSION
    emit(dump_json(record), args)
    return EXIT_CODES["ok"]


def handle_verify(args):
    """verify サブコマンド"""
    domain = parse_domain(args.domain)
    runner = VerificationRunner(domain, args.k, build_config_overrides(args))
    failed = runner.run()
    runner.print_summary()

    report = runner.build_report(include_timestamp=not args.no_timestamp)
    if args.format == 'csv':
        emit(rows_to_csv(report["table"], TABLE_COLUMNS).rstrip("\n"), args)
    else:
        emit(dump_json(report), args)
    return EXIT_CODES["assertion_failed"] if failed else EXIT_CODES["ok"]


def handle_lemma(args):
    """lemma サブコマンド"""
    if args.d < 2:
        print_status(f"補題は d ≥ 2 が必要です: d = {args.d}", "error")
        return EXIT_CODES["parse_error"]

    if args.phi is not None:
        try:
            phi = TabulatedDecreasingFn.from_dict(json.loads(args.phi))
        except (json.JSONDecodeError, TypeError) as exc:
            raise InvalidFunctionError(f"φ の JSON を解釈できません: {exc}") from exc
        record = lemma_diagnostic(phi, args.d, args.correction_scale)
        if record["lemma_gap"] < 0:
            print_status(f"補題の不等式が成り立ちません（gap = {record['lemma_gap']:.7g}）", "warning")
    else:
        print_status(f"補題ファジング: d = {args.d}, {args.trials} 試行, seed = {args.seed}")
        record = fuzz_lemma(args.d, args.trials, args.seed)
        print_status(f"違反 {record['violations']} 件 / 最小 gap = {record['min_gap']:.7g}", "info")

    record["version"] = TOOLKIT_VERSION
    emit(dump_json(record), args)
    return EXIT_CODES["ok"]


def load_spectrum(path):
    """固有値リスト（または "eigenvalues" キーを持つ JSON）を読み込み"""
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"スペクトルファイルを読み込めません: {path} ({exc})") from exc

    if isinstance(payload, dict):
        payload = payload.get("eigenvalues")
    try:
        values = np.asarray(payload, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"固有値は数値のリストである必要があります: {path}") from exc
    if values.ndim != 1:
        raise ValueError(f"固有値は数値のリストである必要があります: {path}")
    if np.any(np.diff(values) < 0):
        raise ValueError(f"固有値が昇順ではありません: {path}")
    return values


def handle_riesz(args):
    """riesz サブコマンド"""
    values = load_spectrum(args.spectrum)
    emit(format_number(riesz_mean(values, args.z, args.sigma)), args)
    return EXIT_CODES["ok"]


HANDLERS = {
    "bounds": handle_bounds,
    "eigs": handle_eigs,
    "verify": handle_verify,
    "lemma": handle_lemma,
    "riesz": handle_riesz
}


def main(argv=None):
    """メイン関数（終了コードを返す）"""
    parser = create_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CODES["parse_error"]

    set_quiet(args.quiet)
    try:
        return HANDLERS[args.command](args)
    except DomainSpecError as exc:
        print_status(f"領域指定エラー: {exc}（トークン: {exc.token!r}）", "error")
        return EXIT_CODES["parse_error"]
    except UnsupportedDomainError as exc:
        print_status(f"対応していない領域です: {exc}", "error")
        return EXIT_CODES["unsupported_domain"]
    except DimensionUnsupportedError as exc:
        print_status(str(exc), "error")
        return EXIT_CODES["strict_dimension"]
    except (MassMatrixError, SolverConvergenceError, QuadratureConvergenceError, TailBoundError) as exc:
        print_status(f"数値計算エラー: {exc}", "error")
        return EXIT_CODES["solver_failure"]
    except (InvalidFunctionError, DivergentIntegralError, ValueError) as exc:
        print_status(f"入力エラー: {exc}", "error")
        return EXIT_CODES["parse_error"]


if __name__ == "__main__":
    exit(main())
