"""
Geometry
========

楕円体・コンジャンクション・マージン結果の型定義と基本演算
"""

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import FEASIBILITY_TOL, MarginMethod
from .errors import InvalidSigma
from .linalg3 import cholesky, sym_eigen, sym_pow, symmetrize

Vec3 = Tuple[float, float, float]


def as_vec3(values) -> np.ndarray:
    """3次元ベクトルへ変換（有限値チェック付き）"""
    vec = np.asarray(values, dtype=float).reshape(3)
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"vector entries must be finite: {values!r}")
    return vec


def to_tuple(vec) -> Vec3:
    return (float(vec[0]), float(vec[1]), float(vec[2]))


class Ellipsoid(BaseModel):
    """
    楕円体 { p : (p − center)ᵀ shape (p − center) ≤ 1 }

    center は km、shape は km⁻²（= Σ⁻¹）
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    center: np.ndarray
    shape: np.ndarray

    @field_validator("center", mode="before")
    @classmethod
    def _coerce_center(cls, value):
        vec = as_vec3(value)
        vec.setflags(write=False)
        return vec

    @field_validator("shape", mode="before")
    @classmethod
    def _coerce_shape(cls, value):
        mat = symmetrize(np.asarray(value, dtype=float).reshape(3, 3))
        cholesky(mat)
        mat.setflags(write=False)
        return mat

    @classmethod
    def from_covariance(cls, center, covariance) -> "Ellipsoid":
        """
        共分散 Σ (km²) から楕円体を生成（逆行列はここで一度だけ計算）

        Raises:
            NotPositiveDefinite: 共分散が正定値でない場合
        """
        return cls(center=center, shape=sym_pow(np.asarray(covariance, dtype=float), -1))

    @classmethod
    def sphere(cls, center, radius: float) -> "Ellipsoid":
        """半径 radius の球"""
        return cls(center=center, shape=np.eye(3) / float(radius) ** 2)

    def covariance(self) -> np.ndarray:
        """Σ = shape⁻¹"""
        return sym_pow(self.shape, -1)

    def semi_axes(self) -> np.ndarray:
        """半軸長（昇順の固有値に対応）"""
        values, _ = sym_eigen(self.shape)
        return 1.0 / np.sqrt(values)

    def quadratic_form(self, p) -> float:
        offset = as_vec3(p) - self.center
        return float(offset @ self.shape @ offset)


class Conjunction(BaseModel):
    """コンジャンクション（chaser / target の楕円体ペア）"""

    model_config = ConfigDict(frozen=True)

    id: str
    chaser: Ellipsoid
    target: Ellipsoid
    chaser_radius: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    target_radius: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    risk: Optional[float] = Field(None, le=0.0, allow_inf_nan=False)

    @property
    def combined_radius(self) -> float:
        return self.chaser_radius + self.target_radius


class MarginResult(BaseModel):
    """マージン計算結果"""

    margin: float
    x_star: Vec3
    y_star: Vec3
    iterations: int = 0
    converged: bool = True
    overlap: bool = False
    method: MarginMethod
    duality_gap: Optional[float] = None
    message: Optional[str] = None

    @model_validator(mode="after")
    def _check_margin(self):
        if not math.isnan(self.margin) and self.margin < 0.0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")
        if self.overlap and self.margin != 0.0:
            raise ValueError("overlapping result must carry margin 0")
        return self


def scale_sigma(e: Ellipsoid, sigma: float) -> Ellipsoid:
    """
    σスケーリング（半軸を sigma 倍、shape を sigma² で割る）

    Raises:
        InvalidSigma: sigma <= 0 または非有限
    """
    try:
        valid = math.isfinite(sigma) and sigma > 0.0
    except TypeError:
        valid = False
    if not valid:
        raise InvalidSigma(sigma)
    if sigma == 1.0:
        return e
    return Ellipsoid(center=e.center, shape=e.shape / float(sigma) ** 2)


def scale_conjunction(c: Conjunction, sigma: float) -> Conjunction:
    """両楕円体に同じσスケーリングを適用"""
    if sigma == 1.0:
        return c
    return c.model_copy(update={
        "chaser": scale_sigma(c.chaser, sigma),
        "target": scale_sigma(c.target, sigma),
    })


def contains(e: Ellipsoid, p, tol: float = 0.0) -> bool:
    """二次形式 <= 1 + tol なら True"""
    return e.quadratic_form(p) <= 1.0 + tol


def miss_distance(c: Conjunction) -> float:
    """中心間距離 ‖chaser.center − target.center‖"""
    return float(np.linalg.norm(c.chaser.center - c.target.center))


def is_feasible_pair(c: Conjunction, x, y, tol: float = FEASIBILITY_TOL) -> bool:
    """x が chaser、y が target に含まれるか"""
    return contains(c.chaser, x, tol) and contains(c.target, y, tol)
