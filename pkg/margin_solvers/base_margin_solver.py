"""
Base Margin Solver
==================

マージンソルバーの基底クラスとスクリーニング行の定義
"""

import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional

from pydantic import BaseModel

from ellipsoid_margin.constants import FW_TOL_STEP_KM, MarginMethod
from ellipsoid_margin.errors import MarginError
from ellipsoid_margin.geometry import Conjunction, MarginResult, miss_distance
from ellipsoid_margin.rimon_boyd import RimonBoydForm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveSettings:
    """
    ソルバー共通設定

    max_iter が None のときは手法ごとのデフォルトを使う。
    tol_step は Frank-Wolfe / FISTA に適用される（交互射影は独自の許容値）。
    """

    tol_step: float = FW_TOL_STEP_KM
    max_iter: Optional[int] = None
    rb_form: RimonBoydForm = RimonBoydForm.CENTERED


class ScreeningRow(BaseModel):
    """スクリーニング結果の1行"""

    id: str
    miss_distance: float
    margin: Optional[float] = None
    method: MarginMethod
    converged: bool = False
    overlap: bool = False
    iterations: int = 0
    wall_time: Optional[float] = None
    concern: bool = False
    risk: Optional[float] = None
    error_vs_oracle: Optional[float] = None
    miss_minus_margin: Optional[float] = None
    success: bool = True
    error: Optional[str] = None

    @classmethod
    def from_result(cls, c: Conjunction, result: MarginResult,
                    wall_time_ms: Optional[float] = None) -> "ScreeningRow":
        """マージン結果から行を生成（concern = margin < 半径和）"""
        miss = miss_distance(c)
        if math.isnan(result.margin):
            return cls(id=c.id, miss_distance=miss, method=result.method, converged=False,
                       iterations=result.iterations, wall_time=wall_time_ms, risk=c.risk,
                       success=False, error=result.message or "margin is undefined")
        return cls(id=c.id, miss_distance=miss, margin=result.margin, method=result.method,
                   converged=result.converged, overlap=result.overlap,
                   iterations=result.iterations, wall_time=wall_time_ms,
                   concern=result.margin < c.combined_radius, risk=c.risk,
                   miss_minus_margin=miss - result.margin)

    @classmethod
    def failed(cls, c: Conjunction, method: MarginMethod, error: str) -> "ScreeningRow":
        return cls(id=c.id, miss_distance=miss_distance(c), method=method, risk=c.risk,
                   success=False, error=error)


class MarginSolver(ABC):
    """マージンソルバーの抽象基底クラス"""

    def __init__(self, method: MarginMethod):
        """
        ソルバーを初期化

        Args:
            method: 担当する計算手法
        """
        self.method = method

    def can_solve(self, method: MarginMethod) -> bool:
        """指定手法を担当するか"""
        return MarginMethod(method) is self.method

    @abstractmethod
    def solve(self, c: Conjunction, settings: SolveSettings) -> MarginResult:
        """
        1件のマージンを計算

        Args:
            c: コンジャンクション（σスケーリング済み）
            settings: ソルバー設定

        Returns:
            MarginResult: 計算結果
        """

    def screen_single(self, c: Conjunction, settings: SolveSettings) -> ScreeningRow:
        """
        1件をスクリーニング（例外は行エラーに変換）

        Returns:
            ScreeningRow: 失敗時は success=False
        """
        started = time.perf_counter()
        try:
            result = self.solve(c, settings)
        except MarginError as e:
            logger.error(f"マージン計算エラー {c.id} ({self.method.value}): {e}")
            return ScreeningRow.failed(c, self.method, str(e))
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return ScreeningRow.from_result(c, result, elapsed_ms)

    def screen_batch(self, conjunctions: List[Conjunction], settings: SolveSettings) -> List[ScreeningRow]:
        """複数件を順にスクリーニング"""
        return [self.screen_single(c, settings) for c in conjunctions]


class SolverRegistry:
    """ソルバー登録管理クラス"""

    def __init__(self):
        self._solvers: List[MarginSolver] = []

    def register(self, solver: MarginSolver):
        """
        ソルバーを登録

        Args:
            solver: 登録するソルバー
        """
        self._solvers.append(solver)

    def get_solver(self, method) -> MarginSolver:
        """
        手法に対応するソルバーを取得

        Raises:
            ValueError: 対応するソルバーが見つからない場合
        """
        method = MarginMethod(method)
        for solver in self._solvers:
            if solver.can_solve(method):
                return solver
        raise ValueError(f"No solver found for method: {method.value}")

    def get_supported_methods(self) -> List[str]:
        """登録済み手法名のリスト"""
        return [solver.method.value for solver in self._solvers]
