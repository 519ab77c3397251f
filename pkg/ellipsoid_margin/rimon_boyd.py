"""
Rimon-Boyd Margin
=================

固有値に基づく解析的マージン推定（ベンチマーク用）
6×6非正規行列の最小実固有値から最近接点を求める。
非正規行列の固有値は条件が悪く、大きな誤差を生じうることを再現するため、
安定化・補正は一切行わない。グラウンドトゥルースには使用しない。

形式:
  CENTERED  2段目を y* 基準の相対座標で構成する導出（デフォルト）
  PRINTED   記号を文字どおりに読んだ形式（c̄→c̃, B̄→B̃, b は絶対座標）
            球同士でも解析解と一致しないため比較用にのみ提供
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .constants import MarginMethod
from .errors import NoRealEigenvalue
from .geometry import Conjunction, MarginResult, to_tuple
from .linalg3 import commutator_norm, eigen6_min_real, sym_pow
from .overlap import overlap_test

logger = logging.getLogger(__name__)

_I3 = np.eye(3)
_NAN3 = (math.nan, math.nan, math.nan)


class RimonBoydForm(str, Enum):
    """x*, y* の構成式"""

    CENTERED = "centered"
    PRINTED = "printed"


@dataclass(frozen=True)
class RbIntermediates:
    """中間量（C̄, C̃, c̃, B̃, b̃, λ₁, μ₁, M1, M2）"""

    C_bar: np.ndarray
    C_tilde: np.ndarray
    c_tilde: np.ndarray
    B_tilde: np.ndarray
    b_tilde: np.ndarray
    lambda1: float
    mu1: float
    M1: np.ndarray
    M2: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray


def block_matrix(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """[[A, −I], [−v vᵀ, A]] (6×6)"""
    return np.block([[a, -_I3], [-np.outer(v, v), a]])


def _first_stage(c: Conjunction):
    b, big_b = c.chaser.center, c.chaser.shape
    b_half = sym_pow(big_b, 0.5)
    b_neg_half = sym_pow(big_b, -0.5)
    c_bar = b_neg_half @ c.target.shape @ b_neg_half
    c_bar = 0.5 * (c_bar + c_bar.T)
    c_tilde = sym_pow(c_bar, -1)
    c_hat = b_half @ (c.target.center - b)
    c_vec = sym_pow(c_bar, -0.5) @ c_hat
    return b, big_b, b_half, b_neg_half, c_bar, c_tilde, c_hat, c_vec


def rb_intermediates(c: Conjunction, form: RimonBoydForm = RimonBoydForm.CENTERED) -> RbIntermediates:
    """
    全中間量を計算

    Raises:
        NoRealEigenvalue: M1 または M2 に実固有値がない場合
        np.linalg.LinAlgError: レゾルベントが特異な場合
    """
    b, big_b, b_half, b_neg_half, c_bar, c_tilde, c_hat, c_vec = _first_stage(c)

    m1 = block_matrix(c_tilde, c_vec)
    lambda1 = eigen6_min_real(m1)
    rhs = c_hat if form is RimonBoydForm.CENTERED else c_vec
    y_star = b + lambda1 * (b_neg_half @ np.linalg.solve(lambda1 * _I3 - c_tilde, rhs))

    b_tilde = sym_pow(big_b, -1)
    offset = b - y_star if form is RimonBoydForm.CENTERED else b
    b_vec = (b_neg_half if form is RimonBoydForm.CENTERED else b_half) @ offset
    m2 = block_matrix(b_tilde, b_vec)
    mu1 = eigen6_min_real(m2)
    x_star = y_star + mu1 * np.linalg.solve(mu1 * _I3 - b_tilde, offset)

    return RbIntermediates(C_bar=c_bar, C_tilde=c_tilde, c_tilde=c_vec, B_tilde=b_tilde,
                           b_tilde=b_vec, lambda1=lambda1, mu1=mu1, M1=m1, M2=m2,
                           x_star=x_star, y_star=y_star)


def rb_margin(c: Conjunction, form: RimonBoydForm = RimonBoydForm.CENTERED) -> MarginResult:
    """
    Rimon-Boyd法によるマージン推定

    交差時は0。結果は補正しない（margin > miss distance となる場合もそのまま返す）。
    実固有値が得られない等の破綻時は margin=NaN, converged=False を返す。

    Args:
        c: コンジャンクション
        form: 構成式

    Returns:
        MarginResult: method=rimon_boyd
    """
    report = overlap_test(c)
    if report.overlapping:
        point = report.shared_point
        return MarginResult(margin=0.0, x_star=point, y_star=point, overlap=True,
                            method=MarginMethod.RIMON_BOYD)

    try:
        inter = rb_intermediates(c, form)
    except (NoRealEigenvalue, np.linalg.LinAlgError) as e:
        logger.warning(f"Rimon-Boyd失敗 {c.id}: {e}")
        return MarginResult(margin=math.nan, x_star=_NAN3, y_star=_NAN3, converged=False,
                            method=MarginMethod.RIMON_BOYD, message=str(e))

    margin = float(np.linalg.norm(inter.x_star - inter.y_star))
    if not math.isfinite(margin):
        return MarginResult(margin=math.nan, x_star=_NAN3, y_star=_NAN3, converged=False,
                            method=MarginMethod.RIMON_BOYD, message="non-finite closest points")

    logger.debug(f"Rimon-Boyd {c.id}: margin={margin:.6f} km, λ1={inter.lambda1:.6e}, "
                 f"μ1={inter.mu1:.6e}")
    return MarginResult(margin=margin, x_star=to_tuple(inter.x_star), y_star=to_tuple(inter.y_star),
                        method=MarginMethod.RIMON_BOYD)


def rb_nonnormality_witness(c: Conjunction, c_tilde: Optional[np.ndarray] = None) -> float:
    """
    M1 の非正規性 ‖M1 M1ᵀ − M1ᵀ M1‖_F

    Args:
        c: コンジャンクション
        c_tilde: 指定時は c̃ を置き換える（ゼロベクトルでも √6 となる）

    Returns:
        float: 常に正
    """
    _, _, _, _, _, matrix_c_tilde, _, c_vec = _first_stage(c)
    vec = c_vec if c_tilde is None else np.asarray(c_tilde, dtype=float)
    return commutator_norm(block_matrix(matrix_c_tilde, vec))
