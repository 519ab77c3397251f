#!/usr/bin/env python3
"""
Margin Screening 統合起動スクリプト
===================================

バッチスクリーニング・σスイープ・2者分散計算・REST API を起動するためのスクリプト
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import uvicorn

from conjunction_io import ingest_csv, read_ellipsoid_file, render_report, render_sweep_csv
from ellipsoid_margin.constants import FISTA_MAX_ITER, AgentRole, MarginMethod
from ellipsoid_margin.errors import MarginError, SchemaError, TransportFailure
from ellipsoid_margin.fista import FistaOptions
from ellipsoid_margin.wire import run_wire_session
from margin_operations import DEFAULT_SWEEP_SIGMAS, MarginConfig, MarginOperations
from network_utils import get_server_urls, parse_endpoint, resolve_hostname
from version import __version__, format_version_string

# ログ設定
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("margin-launcher")

EXIT_OK = 0
EXIT_ROW_ERRORS = 1
EXIT_SCHEMA = 2
EXIT_TRANSPORT = 3


def print_banner():
    """起動時のバナーを表示"""
    banner = f"""
============================================================
              Margin Screening 統合起動システム
                    FastAPI REST API
                    Version {__version__:^8}
============================================================
    """
    print(banner)
    print("\n" + "=" * 60)
    print(format_version_string())
    print("=" * 60 + "\n")


def _write_output(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"📝 出力: {path}")
    else:
        sys.stdout.write(text)


def _config_from_args(args) -> MarginConfig:
    """CLI引数 > 環境変数 > デフォルト"""
    return MarginConfig(
        method=getattr(args, "method", None),
        sigma=getattr(args, "sigma", None),
        tol_km=args.tol,
        max_iter=args.max_iter,
        threads=getattr(args, "threads", None),
        wire_timeout_sec=getattr(args, "timeout", None),
    )


def cmd_screen(args) -> int:
    """CSVをバッチスクリーニング"""
    try:
        ingest = ingest_csv(args.input)
    except SchemaError as e:
        logger.error(f"❌ スキーマエラー: {e}")
        return EXIT_SCHEMA

    config = _config_from_args(args)
    logger.info(f"📋 設定: {config}")
    operations = MarginOperations(config)
    report = operations.screen(ingest.conjunctions, oracle_check=args.oracle_check)

    _write_output(render_report(report.rows, args.output, args.deterministic), args.out)

    summary = report.summary
    if args.deterministic:
        summary = summary.model_copy(update={"elapsed_sec": None, "throughput_per_min": None})
    if args.summary:
        Path(args.summary).write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")

    logger.info(f"📊 件数: {summary.count}, 要注意: {summary.concern_count}, "
                f"交差: {summary.overlap_count}, エラー: {summary.error_count}, "
                f"拒否行: {len(ingest.rejections)}")
    if summary.throughput_per_min is not None:
        logger.info(f"⏱️  スループット: {summary.throughput_per_min:.0f} 件/分")
    if summary.pathology_count:
        logger.warning(f"margin > miss distance の行: {summary.pathology_count}件")
    if summary.max_abs_oracle_error_km is not None:
        logger.info(f"🔍 交互射影との最大誤差: {summary.max_abs_oracle_error_km * 1000.0:.3f} m")

    if ingest.rejections or summary.error_count:
        return EXIT_ROW_ERRORS
    return EXIT_OK


def cmd_sweep(args) -> int:
    """CSVの各行をσスイープ"""
    try:
        ingest = ingest_csv(args.input)
    except SchemaError as e:
        logger.error(f"❌ スキーマエラー: {e}")
        return EXIT_SCHEMA

    config = _config_from_args(args)
    operations = MarginOperations(config)
    sigmas = [float(s) for s in args.sigmas.split(",") if s.strip()]
    entries = []
    failed = bool(ingest.rejections)
    for c in ingest.conjunctions:
        try:
            for sigma, result in operations.sigma_sweep(c, sigmas):
                entries.append((c.id, sigma, result))
        except MarginError as e:
            logger.error(f"σスイープ失敗 {c.id}: {e}")
            failed = True

    _write_output(render_sweep_csv(entries), args.out)
    return EXIT_ROW_ERRORS if failed else EXIT_OK


def _run_distributed(args, mode: str, endpoint) -> int:
    config = _config_from_args(args)
    try:
        ellipsoid = read_ellipsoid_file(args.ellipsoid)
    except SchemaError as e:
        logger.error(f"❌ 楕円体ファイルエラー: {e}")
        return EXIT_SCHEMA
    except MarginError as e:
        logger.error(f"❌ 楕円体ファイルエラー: {e}")
        return EXIT_ROW_ERRORS

    role = AgentRole(args.role)
    opts = FistaOptions(tol_step=config.tol_km, max_iter=config.max_iter or FISTA_MAX_ITER)
    logger.info(f"🤝 分散FISTA ({role.value}, {mode} {endpoint[0]}:{endpoint[1]}, "
                f"tol={opts.tol_step} km, max_iter={opts.max_iter})")
    try:
        result = run_wire_session(mode, endpoint, ellipsoid, role, opts,
                                  timeout=config.wire_timeout_sec)
    except TransportFailure as e:
        logger.error(f"❌ 通信エラー: {e}")
        return EXIT_TRANSPORT

    _write_output(result.model_dump_json(indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    """待ち受け側として分散FISTAを実行"""
    return _run_distributed(args, "listen", parse_endpoint(args.listen))


def cmd_connect(args) -> int:
    """接続側として分散FISTAを実行"""
    host, port = parse_endpoint(args.address, default_host="127.0.0.1")
    try:
        host = resolve_hostname(host)
    except ValueError as e:
        logger.error(f"❌ 通信エラー: {e}")
        return EXIT_TRANSPORT
    return _run_distributed(args, "connect", (host, port))


def cmd_api(args) -> int:
    """FastAPI REST APIを起動"""
    print_banner()
    host = "0.0.0.0" if args.production else args.host
    if args.production:
        logger.info("  ⚠️  本番モード: 外部アクセス許可")
    else:
        logger.info("  🔒 開発モード: localhostのみアクセス可能")

    logger.info(f"🌐 FastAPI REST API を起動中... ({host}:{args.port})")
    logger.info("📚 APIドキュメント:")
    urls = get_server_urls(args.port) if args.production else [f"http://localhost:{args.port}"]
    for url in urls:
        logger.info(f"  - {url}/docs")

    uvicorn.run("gateway:app", host=host, port=args.port,
                log_level=args.log_level.lower(), reload=not args.no_reload)
    return EXIT_OK


def _add_solver_flags(parser: argparse.ArgumentParser, with_method: bool = True):
    if with_method:
        parser.add_argument(
            "--method",
            choices=[m.value for m in MarginMethod],
            default=None,
            help="計算手法 (デフォルト: 環境変数MARGIN_METHOD または fw)"
        )
    parser.add_argument("--tol", type=float, default=None,
                        help="停止許容値 km (デフォルト: 1e-3)")
    parser.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                        help="最大反復回数 (デフォルト: 手法ごと)")
    parser.add_argument("--out", default=None, help="出力ファイル (省略時は標準出力)")


def _add_distributed_flags(parser: argparse.ArgumentParser, default_role: AgentRole):
    parser.add_argument("--ellipsoid", required=True,
                        help="自分の楕円体ファイル (中心1行 + 共分散3行)")
    parser.add_argument("--role", choices=[r.value for r in AgentRole], default=default_role.value,
                        help=f"自分の役割 (デフォルト: {default_role.value})")
    parser.add_argument("--timeout", type=float, default=None,
                        help="ソケットタイムアウト秒数 (デフォルト: 30)")
    _add_solver_flags(parser, with_method=False)


def build_parser() -> argparse.ArgumentParser:
    """構成済みの引数パーサーを返す"""
    parser = argparse.ArgumentParser(
        prog="margin",
        description="楕円体マージン スクリーニングシステム",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用例:
  # CSVをFrank-Wolfeでスクリーニング
  python main.py screen conjunctions.csv --method fw --sigma 3

  # 交互射影との誤差つき
  python main.py screen conjunctions.csv --method rimon-boyd --oracle-check --output json

  # 2者分散計算（それぞれ自分の楕円体のみ保持）
  python main.py serve --listen 0.0.0.0:7100 --ellipsoid chaser.txt
  python main.py connect 192.168.1.10:7100 --ellipsoid target.txt

  # REST API
  python main.py api --port 8000

環境変数設定:
  MARGIN_METHOD=fw              # 計算手法
  MARGIN_SIGMA=1.0              # σスケーリング
  MARGIN_TOL_KM=1e-3            # 停止許容値
  MARGIN_THREADS=1              # ワーカー数
        """
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="INFO",
        help="ログレベル (デフォルト: INFO)"
    )
    parser.add_argument("--version", action="version", version=f"margin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    screen = sub.add_parser("screen", help="CSVのバッチスクリーニング")
    screen.add_argument("input", help="コンジャンクションCSV")
    _add_solver_flags(screen)
    screen.add_argument("--sigma", type=float, default=None, help="σスケーリング (デフォルト: 1)")
    screen.add_argument("--threads", type=int, default=None, help="ワーカー数 (デフォルト: 1)")
    screen.add_argument("--oracle-check", action="store_true", help="交互射影との誤差を付与")
    screen.add_argument("--deterministic", action="store_true", help="wall_time を出力しない")
    screen.add_argument("--output", choices=["csv", "json"], default="csv", help="出力形式")
    screen.add_argument("--summary", default=None, help="集計JSONの出力先")
    screen.set_defaults(handler=cmd_screen)

    sweep = sub.add_parser("sweep", help="σスイープ")
    sweep.add_argument("input", help="コンジャンクションCSV")
    _add_solver_flags(sweep)
    sweep.add_argument("--sigmas", default=",".join(str(s) for s in DEFAULT_SWEEP_SIGMAS),
                       help="σレベル (カンマ区切り、デフォルト: 3,2,1)")
    sweep.set_defaults(handler=cmd_sweep)

    serve = sub.add_parser("serve", help="分散FISTA (待ち受け側)")
    serve.add_argument("--listen", default="0.0.0.0:7100", help="待ち受けアドレス")
    _add_distributed_flags(serve, AgentRole.CHASER)
    serve.set_defaults(handler=cmd_serve)

    connect = sub.add_parser("connect", help="分散FISTA (接続側)")
    connect.add_argument("address", help="接続先 host:port")
    _add_distributed_flags(connect, AgentRole.TARGET)
    connect.set_defaults(handler=cmd_connect)

    api = sub.add_parser("api", help="FastAPI REST API を起動")
    api.add_argument("--host", default="127.0.0.1", help="バインドホスト (デフォルト: 127.0.0.1)")
    api.add_argument("--port", type=int, default=8000, help="ポート番号 (デフォルト: 8000)")
    api.add_argument("--no-reload", action="store_true", help="ホットリロードを無効にする")
    api.add_argument("--production", action="store_true",
                     help="本番モード: 外部からのアクセスを許可 (0.0.0.0でバインド)")
    api.set_defaults(handler=cmd_api, tol=None, max_iter=None)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """引数を指定してランチャーを実行し、終了コードを返す"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.getLogger().setLevel(getattr(logging, args.log_level))

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.info("キーボード割り込みを受信しました")
        return EXIT_OK
    except (MarginError, ValueError) as e:
        logger.error(f"❌ 設定エラー: {e}")
        return EXIT_ROW_ERRORS


if __name__ == "__main__":
    sys.exit(run())
