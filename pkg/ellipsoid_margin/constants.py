"""
Ellipsoid Margin Constants
==========================

数値許容誤差と各ソルバーのデフォルト値
"""

from enum import Enum


class MarginMethod(str, Enum):
    """マージン計算手法"""

    FRANK_WOLFE = "fw"
    RIMON_BOYD = "rimon-boyd"
    FISTA = "fista"
    ORACLE = "oracle"


class AgentRole(str, Enum):
    """分散FISTAのエージェント種別"""

    CHASER = "chaser"
    TARGET = "target"

    @property
    def peer(self) -> "AgentRole":
        return AgentRole.TARGET if self is AgentRole.CHASER else AgentRole.CHASER


# ──────────────────── linalg3 ────────────────────
# Choleskyピボットは最大対角成分に対する相対値で判定
SPD_PIVOT_RTOL = 1e-13
# |Im| <= rtol * (1 + |Re|) の固有値を実数とみなす
REAL_EIGEN_IMAG_RTOL = 1e-8

# ──────────────────── overlap ────────────────────
OVERLAP_TOL_K = 1e-12
BRENT_TOL = 1e-10
BRENT_MAX_ITER = 200
NEAR_TANGENT_BAND = 1e-9

# ──────────────────── projection ────────────────────
NEWTON_PSI_RTOL = 1e-12
NEWTON_MAX_ITER = 100
BOUNDARY_RTOL = 1e-12

# ──────────────────── 共通 ────────────────────
FEASIBILITY_TOL = 1e-9
DEGENERATE_NORM = 1e-15

# ──────────────────── Frank-Wolfe ────────────────────
FW_TOL_STEP_KM = 1e-3
FW_MAX_ITER = 10_000
# 収束判定に使う双対ギャップの上限 (km²)。f − f* ≤ gap より margin誤差 ≤ √gap
FW_TOL_GAP_KM2 = 1e-6

# ──────────────────── FISTA ────────────────────
FISTA_TOL_STEP_KM = 1e-3
FISTA_MAX_ITER = 50_000
# ∇²f のスペクトルノルム
FISTA_LIPSCHITZ = 4.0
FISTA_HALT_ROUNDS = 2
# 各エージェントの局所双対ギャップの上限 (km²)、2者合計で FW_TOL_GAP_KM2
FISTA_TOL_GAP_KM2 = FW_TOL_GAP_KM2 / 2.0

# ──────────────────── oracle ────────────────────
ORACLE_TOL_KM = 1e-9
ORACLE_MAX_ITER = 1_000_000

# ──────────────────── wire ────────────────────
WIRE_PROTOCOL_VERSION = 1
WIRE_TIMEOUT_SEC = 30.0
WIRE_ENCODING = "utf-8"
