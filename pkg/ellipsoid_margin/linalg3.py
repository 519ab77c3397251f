"""
Small Dense Linear Algebra
==========================

3×3対称行列と6×6一般行列の小規模線形代数
numpy(LAPACK)を薄くラップし、許容誤差の扱いを統一する
"""

from typing import Tuple

import numpy as np

from .constants import REAL_EIGEN_IMAG_RTOL, SPD_PIVOT_RTOL
from .errors import NoRealEigenvalue, NotPositiveDefinite

_ALLOWED_EXPONENTS = (-1.0, 0.5, -0.5)


def sym_from_upper(xx: float, xy: float, xz: float,
                   yy: float, yz: float, zz: float) -> np.ndarray:
    """
    上三角6成分から対称3×3行列を生成

    Args:
        xx, xy, xz, yy, yz, zz: 上三角成分

    Returns:
        np.ndarray: 対称行列 (3, 3)
    """
    return np.array([[xx, xy, xz],
                     [xy, yy, yz],
                     [xz, yz, zz]], dtype=float)


def upper_entries(m: np.ndarray) -> Tuple[float, float, float, float, float, float]:
    """対称行列の上三角6成分 (xx, xy, xz, yy, yz, zz)"""
    return (float(m[0, 0]), float(m[0, 1]), float(m[0, 2]),
            float(m[1, 1]), float(m[1, 2]), float(m[2, 2]))


def symmetrize(m: np.ndarray) -> np.ndarray:
    """丸め誤差で崩れた対称性を復元"""
    return 0.5 * (m + m.T)


def cholesky(m: np.ndarray) -> np.ndarray:
    """
    Cholesky分解（SPD検証を兼ねる）

    Args:
        m: 対称3×3行列

    Returns:
        np.ndarray: 下三角因子 L (L·Lᵀ = m)

    Raises:
        NotPositiveDefinite: 正定値でない場合
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite(detail="non-finite entries")
    scale = float(np.max(np.diag(m)))
    if scale <= 0.0:
        raise NotPositiveDefinite(pivot=scale)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(detail=str(e)) from e

    # ピボット = L_ii²
    pivots = np.diag(lower) ** 2
    smallest = float(np.min(pivots))
    if smallest <= SPD_PIVOT_RTOL * scale:
        raise NotPositiveDefinite(pivot=smallest)
    return lower


def sym_eigen(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    対称行列の固有値分解

    Returns:
        (昇順の固有値 (3,), 正規直交固有ベクトル行列 (3, 3) 列ベクトル)
    """
    values, vectors = np.linalg.eigh(symmetrize(np.asarray(m, dtype=float)))
    return values, vectors


def sym_pow(m: np.ndarray, exponent: float) -> np.ndarray:
    """
    SPD行列のべき乗（-1, 1/2, -1/2 のみ）

    Args:
        m: SPD行列
        exponent: 指数

    Returns:
        np.ndarray: m^exponent (SPD)

    Raises:
        NotPositiveDefinite: 正定値でない場合
        ValueError: 未対応の指数
    """
    if float(exponent) not in _ALLOWED_EXPONENTS:
        raise ValueError(f"Unsupported exponent: {exponent}")
    cholesky(m)
    values, vectors = sym_eigen(m)
    return symmetrize((vectors * values ** float(exponent)) @ vectors.T)


def eigen6_min_real(m: np.ndarray) -> float:
    """
    6×6一般実行列の最小実固有値

    LAPACKのHessenberg縮約 + シフト付きQR反復（geev）を使用する。
    非正規行列では虚部に微小な誤差が現れるため、相対許容値で実数判定する。

    Args:
        m: 6×6実行列（非対称・非正規で可）

    Returns:
        float: 最小の実固有値

    Raises:
        NoRealEigenvalue: 実固有値が存在しない／反復が収束しない場合
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (6, 6) or not np.all(np.isfinite(m)):
        raise NoRealEigenvalue("matrix must be a finite 6x6 array")
    try:
        eigenvalues = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as e:
        raise NoRealEigenvalue(f"LAPACK geev did not converge: {e}") from e

    real_mask = np.abs(eigenvalues.imag) <= REAL_EIGEN_IMAG_RTOL * (1.0 + np.abs(eigenvalues.real))
    if not np.any(real_mask):
        raise NoRealEigenvalue(f"all eigenvalues complex: {eigenvalues}")
    return float(np.min(eigenvalues.real[real_mask]))


def commutator_norm(m: np.ndarray) -> float:
    """非正規性の指標 ‖M Mᵀ − Mᵀ M‖_F"""
    m = np.asarray(m, dtype=float)
    return float(np.linalg.norm(m @ m.T - m.T @ m, ord="fro"))
