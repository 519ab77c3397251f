"""
Margin Operations
=================

マージン計算の共通ロジック
CLI と REST API で使用される処理
"""

import logging
import os
from typing import List, Optional, Sequence, Tuple

from batch_screener import BatchScreener, ScreeningReport
from ellipsoid_margin.constants import MarginMethod, WIRE_TIMEOUT_SEC
from ellipsoid_margin.geometry import Conjunction, MarginResult, scale_conjunction, scale_sigma
from margin_solvers.base_margin_solver import SolveSettings

logger = logging.getLogger(__name__)

DEFAULT_SWEEP_SIGMAS = (3.0, 2.0, 1.0)


def _env_float(name: str, default: str) -> float:
    value = os.getenv(name, default)
    try:
        return float(value)
    except ValueError as e:
        raise ValueError(f"環境変数 {name} が数値ではありません: {value!r}") from e


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError as e:
        raise ValueError(f"環境変数 {name} が整数ではありません: {value!r}") from e


class MarginConfig:
    """マージン計算設定クラス"""

    def __init__(self, method: str = None, sigma: float = None, tol_km: float = None,
                 max_iter: int = None, threads: int = None, wire_timeout_sec: float = None):
        """
        設定の初期化（引数 > 環境変数 > デフォルト）

        Args:
            method: 計算手法 (fw / fista / rimon-boyd / oracle)
            sigma: σスケーリング
            tol_km: 停止許容値 (km)
            max_iter: 最大反復回数（None なら手法ごとのデフォルト）
            threads: バッチのワーカー数
            wire_timeout_sec: 分散モードのソケットタイムアウト

        Raises:
            ValueError: 不正な値
        """
        self.method = MarginMethod(method or os.getenv("MARGIN_METHOD", "fw"))
        self.sigma = sigma if sigma is not None else _env_float("MARGIN_SIGMA", "1.0")
        self.tol_km = tol_km if tol_km is not None else _env_float("MARGIN_TOL_KM", "1e-3")
        self.max_iter = max_iter if max_iter is not None else _env_int("MARGIN_MAX_ITER")
        self.threads = threads if threads is not None else (_env_int("MARGIN_THREADS") or 1)
        self.wire_timeout_sec = (wire_timeout_sec if wire_timeout_sec is not None
                                 else _env_float("MARGIN_WIRE_TIMEOUT_SEC", str(WIRE_TIMEOUT_SEC)))

        if not self.tol_km > 0.0:
            raise ValueError(f"tol must be > 0, got {self.tol_km}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    def settings(self) -> SolveSettings:
        return SolveSettings(tol_step=self.tol_km, max_iter=self.max_iter)

    def __str__(self):
        max_iter = self.max_iter if self.max_iter is not None else "default"
        return (f"Margin(method={self.method.value}, sigma={self.sigma}, tol={self.tol_km} km, "
                f"max_iter={max_iter}, threads={self.threads})")


class MarginOperations:
    """マージン計算の共通ロジック"""

    def __init__(self, config: MarginConfig = None, screener: BatchScreener = None):
        self.config = config or MarginConfig()
        self.screener = screener or BatchScreener()

    def _resolve(self, method, settings: Optional[SolveSettings]) -> Tuple[MarginMethod, SolveSettings]:
        method = MarginMethod(method) if method is not None else self.config.method
        return method, settings or self.config.settings()

    def compute_margin(self, c: Conjunction, method=None, sigma: float = None,
                       settings: SolveSettings = None) -> MarginResult:
        """
        1件のマージンを計算

        Raises:
            MarginError: 計算失敗
            ValueError: 未対応の手法
        """
        method, settings = self._resolve(method, settings)
        sigma = self.config.sigma if sigma is None else sigma
        solver = self.screener.registry.get_solver(method)
        return solver.solve(scale_conjunction(c, sigma), settings)

    def screen(self, conjunctions: List[Conjunction], method=None, sigma: float = None,
               settings: SolveSettings = None, threads: int = None,
               oracle_check: bool = False) -> ScreeningReport:
        """バッチスクリーニング"""
        method, settings = self._resolve(method, settings)
        return self.screener.screen_batch(
            conjunctions, method=method,
            sigma=self.config.sigma if sigma is None else sigma,
            settings=settings,
            threads=threads or self.config.threads,
            oracle_check=oracle_check,
        )

    def sigma_sweep(self, c: Conjunction, sigmas: Sequence[float] = DEFAULT_SWEEP_SIGMAS,
                    method=None, settings: SolveSettings = None) -> List[Tuple[float, MarginResult]]:
        """
        複数のσレベルでマージンを計算（3σ → 2σ → 1σ の運用手順）

        Args:
            c: コンジャンクション
            sigmas: σレベル（指定順に計算）
            method: 計算手法
            settings: ソルバー設定

        Returns:
            list: (sigma, MarginResult) のリスト

        Raises:
            InvalidSigma: 不正なσを含む場合
        """
        method, settings = self._resolve(method, settings)
        for sigma in sigmas:
            scale_sigma(c.chaser, sigma)
        results = [(float(s), self.compute_margin(c, method, s, settings)) for s in sigmas]
        logger.info(f"σスイープ {c.id}: " + ", ".join(f"{s}σ={r.margin:.6f} km" for s, r in results))
        return results

    def get_supported_methods(self) -> List[str]:
        return self.screener.get_supported_methods()
