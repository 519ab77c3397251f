"""
Overlap Test
============

凸スカラー関数 K(λ) の最小化による楕円体の交差判定
K の最小値が負なら交差しない、非負なら交差（接触を含む）
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar

from .constants import BRENT_MAX_ITER, BRENT_TOL, OVERLAP_TOL_K
from .errors import MaxIterationsExceeded, NotPositiveDefinite, SingularSigmaLambda
from .geometry import Conjunction, Vec3, to_tuple
from .linalg3 import cholesky

logger = logging.getLogger(__name__)


class OverlapReport(BaseModel):
    """交差判定結果"""

    overlapping: bool
    lambda_star: float = Field(ge=0.0, le=1.0)
    k_min: float
    evaluations: int
    # K(λ*) >= 0 のとき両楕円体に含まれる点 m_λ*
    shared_point: Optional[Vec3] = None


def _sigma_lambda(c: Conjunction, lam: float) -> np.ndarray:
    sigma_lambda = lam * c.chaser.shape + (1.0 - lam) * c.target.shape
    try:
        cholesky(sigma_lambda)
    except NotPositiveDefinite as e:
        raise SingularSigmaLambda(lam) from e
    return sigma_lambda


def k_of_lambda(c: Conjunction, lam: float) -> float:
    """
    K(λ) = 1 − λ(1 − λ)(c − b)ᵀ C Σ_λ⁻¹ B (c − b)

    Args:
        c: コンジャンクション（b, B = chaser / c, C = target）
        lam: λ ∈ [0, 1]

    Returns:
        float: K(λ)

    Raises:
        SingularSigmaLambda: Σ_λ が正定値でない場合
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    sigma_lambda = _sigma_lambda(c, lam)
    d = c.target.center - c.chaser.center
    solved = np.linalg.solve(sigma_lambda, c.chaser.shape @ d)
    return float(1.0 - lam * (1.0 - lam) * (d @ c.target.shape @ solved))


def shared_point(c: Conjunction, lam: float) -> np.ndarray:
    """m_λ = Σ_λ⁻¹ (λ B b + (1 − λ) C c)"""
    sigma_lambda = _sigma_lambda(c, lam)
    rhs = lam * (c.chaser.shape @ c.chaser.center) + (1.0 - lam) * (c.target.shape @ c.target.center)
    return np.linalg.solve(sigma_lambda, rhs)


def brent_minimize(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = BRENT_TOL, max_iter: int = BRENT_MAX_ITER) -> Tuple[float, float]:
    """
    有界区間でのBrent法による最小化

    Args:
        f: スカラー関数
        lo, hi: 区間 (lo < hi)
        tol: 引数の許容誤差
        max_iter: 最大反復回数

    Returns:
        tuple: (argmin, min)

    Raises:
        MaxIterationsExceeded: 収束しない場合
    """
    argmin, fmin, _ = _brent(f, lo, hi, tol, max_iter)
    return argmin, fmin


def _brent(f, lo, hi, tol, max_iter) -> Tuple[float, float, int]:
    if not lo < hi:
        raise ValueError(f"Invalid interval [{lo}, {hi}]")
    result = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                             options={"xatol": tol, "maxiter": max_iter})
    if not result.success:
        raise MaxIterationsExceeded("brent_minimize", max_iter)
    argmin = float(result.x)
    return argmin, float(f(argmin)), int(result.nfev) + 1


def overlap_test(c: Conjunction) -> OverlapReport:
    """
    楕円体の交差判定

    Args:
        c: コンジャンクション

    Returns:
        OverlapReport: λ*, K(λ*), 判定
    """
    lam, k_min, evaluations = _brent(lambda lam: k_of_lambda(c, lam), 0.0, 1.0,
                                     BRENT_TOL, BRENT_MAX_ITER)
    lam = min(max(lam, 0.0), 1.0)
    overlapping = k_min >= -OVERLAP_TOL_K
    point = to_tuple(shared_point(c, lam)) if overlapping else None

    logger.debug(f"交差判定 {c.id}: λ*={lam:.6f}, K(λ*)={k_min:.3e}, 交差={overlapping}")
    return OverlapReport(overlapping=overlapping, lambda_star=lam, k_min=k_min,
                         evaluations=evaluations, shared_point=point)
