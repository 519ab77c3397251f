"""
Batch Screener
==============

複数コンジャンクションのバッチスクリーニングを管理するメインクラス
Strategy Patternで手法別ソルバーへ処理を委譲し、ワーカープールで並列実行する
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from ellipsoid_margin.constants import FEASIBILITY_TOL, MarginMethod
from ellipsoid_margin.errors import MarginError
from ellipsoid_margin.geometry import Conjunction, scale_conjunction, scale_sigma
from ellipsoid_margin.oracle import relative_error, solve_oracle
from margin_solvers import default_registry
from margin_solvers.base_margin_solver import ScreeningRow, SolveSettings, SolverRegistry

logger = logging.getLogger(__name__)

# 符号付き誤差のビン境界 (m)、範囲外は両端のビンへ
ORACLE_ERROR_EDGES_M = [-1e4, -1e3, -1e2, -1e1, -1.0, -1e-1, -1e-2, -1e-3,
                        1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4]
RISK_BIN_WIDTH = 0.5


class HistogramBin(BaseModel):
    lower: float
    upper: float
    count: int


class ScreeningSummary(BaseModel):
    """バッチ集計"""

    method: MarginMethod
    sigma: float
    count: int
    success_count: int
    error_count: int
    concern_count: int
    overlap_count: int
    pathology_count: int
    elapsed_sec: Optional[float] = None
    throughput_per_min: Optional[float] = None
    max_abs_oracle_error_km: Optional[float] = None
    oracle_error_histogram_m: Optional[List[HistogramBin]] = None
    concern_risk_histogram: Optional[List[HistogramBin]] = None


class ScreeningReport(BaseModel):
    rows: List[ScreeningRow]
    summary: ScreeningSummary


def histogram(values: List[float], edges: List[float]) -> List[HistogramBin]:
    """固定境界のヒストグラム（範囲外の値は端のビンに数える）"""
    clipped = np.clip(np.asarray(values, dtype=float), edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return [HistogramBin(lower=lo, upper=hi, count=int(n))
            for lo, hi, n in zip(edges[:-1], edges[1:], counts)]


def risk_edges(risks: List[float]) -> List[float]:
    """log10リスク用の0.5桁刻みビン境界（上端は0）"""
    lowest = math.floor(min(risks) / RISK_BIN_WIDTH) * RISK_BIN_WIDTH
    count = max(int(round(-lowest / RISK_BIN_WIDTH)), 1)
    return [lowest + i * RISK_BIN_WIDTH for i in range(count + 1)]


class BatchScreener:
    """バッチスクリーニングクラス（Strategy Pattern使用）"""

    def __init__(self, registry: Optional[SolverRegistry] = None):
        """ソルバーレジストリを初期化"""
        self.registry = registry or default_registry()
        logger.info(f"BatchScreener初期化完了 - サポート手法: {self.registry.get_supported_methods()}")

    def screen_batch(self, conjunctions: List[Conjunction], method=MarginMethod.FRANK_WOLFE,
                     sigma: float = 1.0, settings: Optional[SolveSettings] = None,
                     threads: int = 1, oracle_check: bool = False) -> ScreeningReport:
        """
        コンジャンクションをまとめてスクリーニング

        行ごとのエラーは記録してバッチを続行する。出力順は入力順。

        Args:
            conjunctions: コンジャンクションリスト
            method: 計算手法
            sigma: σスケーリング
            settings: ソルバー設定
            threads: ワーカー数
            oracle_check: True なら交互射影との差を各行に付与

        Returns:
            ScreeningReport: 行と集計

        Raises:
            InvalidSigma: sigma が不正な場合
            ValueError: 未対応の手法
        """
        method = MarginMethod(method)
        settings = settings or SolveSettings()
        solver = self.registry.get_solver(method)
        # 全行に適用する前に検証
        if conjunctions:
            scale_sigma(conjunctions[0].chaser, sigma)

        def work(c: Conjunction) -> ScreeningRow:
            scaled = scale_conjunction(c, sigma)
            row = solver.screen_single(scaled, settings)
            if oracle_check and row.success:
                row = self._attach_oracle_error(scaled, row)
            return row

        started = time.perf_counter()
        if threads > 1 and len(conjunctions) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                # map は入力順で結果を返す
                rows = list(pool.map(work, conjunctions))
        else:
            rows = [work(c) for c in conjunctions]
        elapsed = time.perf_counter() - started

        summary = self._summarize(rows, method, sigma, elapsed, oracle_check)
        logger.info(f"バッチスクリーニング完了: {summary.count}件, 成功: {summary.success_count}件, "
                    f"要注意: {summary.concern_count}件, 手法={method.value}, σ={sigma}")
        return ScreeningReport(rows=rows, summary=summary)

    def _attach_oracle_error(self, c: Conjunction, row: ScreeningRow) -> ScreeningRow:
        if row.method is MarginMethod.ORACLE:
            return row.model_copy(update={"error_vs_oracle": 0.0})
        try:
            truth = solve_oracle(c)
        except MarginError as e:
            logger.warning(f"交互射影による検証失敗 {c.id}: {e}")
            return row
        return row.model_copy(update={"error_vs_oracle": relative_error(row.margin, truth.margin)})

    def _summarize(self, rows: List[ScreeningRow], method: MarginMethod, sigma: float,
                   elapsed: float, oracle_check: bool) -> ScreeningSummary:
        succeeded = [r for r in rows if r.success]
        summary: Dict[str, object] = {
            "method": method,
            "sigma": sigma,
            "count": len(rows),
            "success_count": len(succeeded),
            "error_count": len(rows) - len(succeeded),
            "concern_count": sum(1 for r in succeeded if r.concern),
            "overlap_count": sum(1 for r in succeeded if r.overlap),
            "pathology_count": sum(1 for r in succeeded if r.miss_minus_margin < -FEASIBILITY_TOL),
            "elapsed_sec": elapsed,
            "throughput_per_min": len(rows) / elapsed * 60.0 if elapsed > 0 else None,
        }

        if oracle_check:
            errors = [r.error_vs_oracle for r in succeeded if r.error_vs_oracle is not None]
            if errors:
                summary["max_abs_oracle_error_km"] = max(abs(e) for e in errors)
                summary["oracle_error_histogram_m"] = histogram([e * 1000.0 for e in errors],
                                                                ORACLE_ERROR_EDGES_M)

        risks = [r.risk for r in succeeded if r.concern and r.risk is not None]
        if risks:
            summary["concern_risk_histogram"] = histogram(risks, risk_edges(risks))
        return ScreeningSummary(**summary)

    def get_supported_methods(self) -> List[str]:
        """サポート手法の一覧"""
        return self.registry.get_supported_methods()
