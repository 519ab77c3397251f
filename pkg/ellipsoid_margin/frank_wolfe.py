"""
Frank-Wolfe Margin Solver
=========================

集中型マージンソルバー
閉形式の線形最小化オラクル(LMO)と閉形式の厳密直線探索による
Frank-Wolfe法。射影を必要とせず、反復点は常に実行可能領域内にある。
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constants import DEGENERATE_NORM, FW_MAX_ITER, FW_TOL_GAP_KM2, FW_TOL_STEP_KM, MarginMethod
from .errors import CoincidentIterates, DegenerateDirection
from .geometry import Conjunction, MarginResult, to_tuple
from .overlap import overlap_test

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LmoPair:
    """LMOの解（各楕円体境界上の点）"""

    s1: np.ndarray
    s2: np.ndarray


@dataclass(frozen=True)
class FwState:
    """Frank-Wolfe反復状態"""

    x: np.ndarray
    y: np.ndarray
    k: int
    objective: float
    duality_gap: float = math.nan


@dataclass(frozen=True)
class FwOptions:
    """Frank-Wolfe設定"""

    tol_step: float = FW_TOL_STEP_KM
    tol_gap: float = FW_TOL_GAP_KM2
    max_iter: int = FW_MAX_ITER


def _support_point(center: np.ndarray, covariance: np.ndarray, d: np.ndarray) -> np.ndarray:
    # argmin_{s∈E} ⟨s, −d⟩ = center + Σd / ‖d‖_Σ
    sigma_d = covariance @ d
    return center + sigma_d / math.sqrt(float(d @ sigma_d))


def _lmo(center_x, cov_x, center_y, cov_y, x, y) -> LmoPair:
    d = y - x
    if float(np.linalg.norm(d)) < DEGENERATE_NORM:
        raise CoincidentIterates()
    return LmoPair(s1=_support_point(center_x, cov_x, d),
                   s2=_support_point(center_y, cov_y, -d))


def lmo(c: Conjunction, x, y) -> LmoPair:
    """
    線形最小化オラクル

    s1 = b + Σ_x d / ‖d‖_{Σ_x}（d = y − x）、s2 は d の符号を反転して同様に求める。

    Args:
        c: コンジャンクション
        x: chaser側の現在点
        y: target側の現在点

    Returns:
        LmoPair: 境界上の点 (s1, s2)

    Raises:
        CoincidentIterates: ‖x − y‖ < 1e-15 km の場合
    """
    return _lmo(c.chaser.center, c.chaser.covariance(), c.target.center, c.target.covariance(),
                np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def line_search_alpha(x, y, s1, s2) -> float:
    """
    閉形式の厳密直線探索

    α = clip((r − p)ᵀr / ‖r − p‖², 0, 1)、r = x − y、p = s1 − s2

    Raises:
        DegenerateDirection: ‖r − p‖ < 1e-15 の場合（任意のαが最適）
    """
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    u = r - (np.asarray(s1, dtype=float) - np.asarray(s2, dtype=float))
    denom = float(u @ u)
    if math.sqrt(denom) < DEGENERATE_NORM:
        raise DegenerateDirection()
    return min(max(float(u @ r) / denom, 0.0), 1.0)


def duality_gap(x, y, pair: LmoPair) -> float:
    """
    Frank-Wolfe双対ギャップ ∇f(z)ᵀ(z − s) = 2rᵀ(r − p)

    最適値との差の上界（km²）
    """
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(2.0 * (r @ (r - (pair.s1 - pair.s2))))


def solve_fw(c: Conjunction, opts: Optional[FwOptions] = None,
             on_iterate: Optional[Callable[[FwState], None]] = None) -> MarginResult:
    """
    Frank-Wolfe法によるマージン計算

    交差判定を先に行い、交差時は共有点 m_λ* を x* = y* として返す。
    非交差時は両楕円体の中心から反復し、直前のステップ max(‖Δx‖, ‖Δy‖) ≤ tol_step
    かつ現在点の双対ギャップ ≤ tol_gap となった時点で収束とする（margin − margin* ≤ √gap）。

    Args:
        c: コンジャンクション
        opts: 停止条件
        on_iterate: 各反復点の状態を受け取るコールバック（k = 0 は初期点）

    Returns:
        MarginResult: 未収束時は converged=False と最終反復点
    """
    opts = opts or FwOptions()
    report = overlap_test(c)
    if report.overlapping:
        point = report.shared_point
        return MarginResult(margin=0.0, x_star=point, y_star=point, iterations=0,
                            converged=True, overlap=True, method=MarginMethod.FRANK_WOLFE,
                            duality_gap=0.0)

    center_x, center_y = c.chaser.center, c.target.center
    cov_x, cov_y = c.chaser.covariance(), c.target.covariance()
    x = center_x.copy()
    y = center_y.copy()
    step = math.inf
    converged = False
    message = None
    k = 0

    while True:
        try:
            pair = _lmo(center_x, cov_x, center_y, cov_y, x, y)
            gap = duality_gap(x, y, pair)
        except CoincidentIterates:
            pair, gap = None, 0.0
        if on_iterate is not None:
            on_iterate(FwState(x=x.copy(), y=y.copy(), k=k,
                               objective=float((x - y) @ (x - y)), duality_gap=gap))
        if pair is None:
            converged = True
            message = "coincident iterates"
            break
        if step <= opts.tol_step and gap <= opts.tol_gap:
            converged = True
            break
        if k >= opts.max_iter:
            break
        try:
            alpha = line_search_alpha(x, y, pair.s1, pair.s2)
        except DegenerateDirection:
            converged = True
            break

        dx = alpha * (pair.s1 - x)
        dy = alpha * (pair.s2 - y)
        step = math.sqrt(max(float(dx @ dx), float(dy @ dy)))
        x = x + dx
        y = y + dy
        k += 1

    margin = float(np.linalg.norm(x - y))
    if not converged:
        logger.warning(f"Frank-Wolfe未収束 {c.id}: {opts.max_iter}回, margin={margin:.6f} km, "
                       f"gap={gap:.3e} km²")
        message = f"max_iter {opts.max_iter} reached"
    logger.debug(f"Frank-Wolfe {c.id}: margin={margin:.6f} km, 反復={k}, gap={gap:.3e}")

    return MarginResult(margin=margin, x_star=to_tuple(x), y_star=to_tuple(y), iterations=k,
                        converged=converged, overlap=False, method=MarginMethod.FRANK_WOLFE,
                        duality_gap=gap, message=message)
