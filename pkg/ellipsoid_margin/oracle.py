"""
Alternating Projections Oracle
==============================

検証用の信頼できるマージン計算
2つの楕円体へ交互に射影し、互いの射影となる点の組（最近接点）に収束させる。
低速だが最適性を自己検証できる。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import NEAR_TANGENT_BAND, ORACLE_MAX_ITER, ORACLE_TOL_KM, MarginMethod
from .geometry import Conjunction, MarginResult, to_tuple
from .overlap import OverlapReport, overlap_test
from .projection import EllipsoidProjector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleOptions:
    """交互射影の停止条件"""

    tol: float = ORACLE_TOL_KM
    max_iter: int = ORACLE_MAX_ITER


def solve_oracle(c: Conjunction, opts: Optional[OracleOptions] = None) -> MarginResult:
    """
    交互射影によるマージン計算

    chaser中心から y = P_target(x), x = P_chaser(y) を繰り返し、
    x の変化量が tol 以下で停止する。

    Args:
        c: コンジャンクション
        opts: 停止条件

    Returns:
        MarginResult: 交差時は margin=0 と共有点
    """
    opts = opts or OracleOptions()
    report = overlap_test(c)
    if report.overlapping:
        point = report.shared_point
        return MarginResult(margin=0.0, x_star=point, y_star=point, overlap=True,
                            method=MarginMethod.ORACLE)

    to_chaser = EllipsoidProjector(c.chaser)
    to_target = EllipsoidProjector(c.target)
    x = c.chaser.center.copy()
    converged = False
    k = 0
    while k < opts.max_iter:
        y = to_target.project(x)
        x_next = to_chaser.project(y)
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        k += 1
        if step <= opts.tol:
            converged = True
            break

    y = to_target.project(x)
    margin = float(np.linalg.norm(x - y))
    message = None
    if not converged:
        message = f"max_iter {opts.max_iter} reached"
        logger.warning(f"交互射影未収束 {c.id}: margin={margin:.9f} km")
    logger.debug(f"交互射影 {c.id}: margin={margin:.9f} km, 反復={k}")
    return MarginResult(margin=margin, x_star=to_tuple(x), y_star=to_tuple(y), iterations=k,
                        converged=converged, method=MarginMethod.ORACLE, message=message)


def relative_error(estimate: float, truth: float) -> float:
    """符号付き誤差 estimate − truth (km)"""
    return estimate - truth


def is_near_tangent(report: OverlapReport) -> bool:
    """|min K| < 1e-9 なら接触寸前とみなす（判定が数値的に不安定な帯）"""
    return abs(report.k_min) < NEAR_TANGENT_BAND
