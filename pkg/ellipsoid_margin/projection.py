"""
Projection onto Ellipsoid
=========================

点の楕円体への正射影
主軸座標へ回転し、軸平行楕円体に対するラグランジュ乗数 λ の
根方程式 ψ(λ) = 0 をニュートン法で解く
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .constants import BOUNDARY_RTOL, NEWTON_MAX_ITER, NEWTON_PSI_RTOL
from .errors import MaxIterationsExceeded, NotExterior
from .geometry import Ellipsoid
from .linalg3 import sym_eigen


@dataclass(frozen=True)
class AxisAlignedProjection:
    """軸平行楕円体 Σ wᵢ²(yᵢ − rᵢ)² ≤ ε² への射影結果"""

    w: tuple
    r: tuple
    epsilon: float
    lam: float
    newton_iters: int
    point: tuple


def _weighted_terms(w: Sequence[float], r: Sequence[float], x: Sequence[float]):
    w2 = [wi * wi for wi in w]
    a = [w2i * (xi - ri) ** 2 for w2i, xi, ri in zip(w2, x, r)]
    return w2, a


def newton_lambda(w: Sequence[float], r: Sequence[float], x: Sequence[float], epsilon: float,
                  history: Optional[List[float]] = None) -> float:
    """
    ψ(λ) = Σ wᵢ²(xᵢ − rᵢ)² / (1 + λwᵢ²)² − ε² の正根をニュートン法で求める

    λ₀ = 0 から単調非減少に収束する。

    Args:
        w: 重み (3,)
        r: 中心 (3,)
        x: 射影する点（厳密に外部）
        epsilon: 半径 ε > 0
        history: 指定時は反復列 λ_k を追記

    Returns:
        float: λ₊

    Raises:
        NotExterior: x が外部にない場合
        MaxIterationsExceeded: 収束しない場合
    """
    w2, a = _weighted_terms(w, r, x)
    eps2 = epsilon * epsilon
    if sum(a) <= eps2:
        raise NotExterior()

    threshold = NEWTON_PSI_RTOL * eps2
    lam = 0.0
    if history is not None:
        history.append(lam)
    for _ in range(NEWTON_MAX_ITER):
        psi = -eps2
        dpsi = 0.0
        for w2i, ai in zip(w2, a):
            denom = 1.0 + lam * w2i
            term = ai / (denom * denom)
            psi += term
            dpsi -= 2.0 * term * w2i / denom
        if abs(psi) <= threshold:
            return lam
        if dpsi == 0.0:
            break
        nxt = lam - psi / dpsi
        if nxt <= lam:
            # 浮動小数点精度で停滞
            return lam
        lam = nxt
        if history is not None:
            history.append(lam)
    raise MaxIterationsExceeded("newton_lambda", NEWTON_MAX_ITER)


def project_axis_aligned_detailed(w, r, x, epsilon: float) -> AxisAlignedProjection:
    """軸平行楕円体への射影（λ と反復回数つき）"""
    w2, a = _weighted_terms(w, r, x)
    eps2 = epsilon * epsilon
    if sum(a) <= eps2 * (1.0 + BOUNDARY_RTOL):
        return AxisAlignedProjection(tuple(w), tuple(r), epsilon, 0.0, 0, tuple(float(v) for v in x))

    history: List[float] = []
    lam = newton_lambda(w, r, x, epsilon, history)
    point = tuple((xi + lam * w2i * ri) / (1.0 + lam * w2i) for xi, w2i, ri in zip(x, w2, r))
    return AxisAlignedProjection(tuple(w), tuple(r), epsilon, lam, len(history) - 1, point)


def project_axis_aligned(w, r, x, epsilon: float) -> np.ndarray:
    """
    軸平行楕円体への射影

    内部・境界上の点はそのまま返す。外部の点は
    gᵢ = (xᵢ + λwᵢ²rᵢ) / (1 + λwᵢ²) を返す。
    """
    return np.array(project_axis_aligned_detailed(w, r, x, epsilon).point)


class EllipsoidProjector:
    """
    回転楕円体への射影器

    主軸分解を一度だけ行い、以降の射影で再利用する。
    """

    def __init__(self, ellipsoid: Ellipsoid):
        self.ellipsoid = ellipsoid
        values, vectors = sym_eigen(ellipsoid.shape)
        self._center = ellipsoid.center
        self._axes = vectors
        self._weights = tuple(math.sqrt(v) for v in values)
        self._origin = (0.0, 0.0, 0.0)

    def __call__(self, x) -> np.ndarray:
        return self.project(x)

    def project(self, x) -> np.ndarray:
        """
        点 x の楕円体への正射影

        Args:
            x: 点 (3,)

        Returns:
            np.ndarray: 射影点（内部の点はそのまま）
        """
        x = np.asarray(x, dtype=float)
        local = self._axes.T @ (x - self._center)
        detail = project_axis_aligned_detailed(self._weights, self._origin, local.tolist(), 1.0)
        if detail.newton_iters == 0 and detail.lam == 0.0:
            return x.copy()
        return self._center + self._axes @ np.array(detail.point)


def project_ellipsoid(e: Ellipsoid, x) -> np.ndarray:
    """楕円体 e への点 x の正射影"""
    return EllipsoidProjector(e).project(x)
