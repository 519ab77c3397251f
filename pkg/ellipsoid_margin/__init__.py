"""
Ellipsoid Margin Library
========================

位置不確かさ楕円体間のマージン（最小ユークリッド距離）計算ライブラリ

主要コンポーネント:
- overlap_test: K(λ) 最小化による交差判定
- solve_fw: Frank-Wolfe法（集中型）
- solve_fista / run_wire_session: 2エージェント分散FISTA
- rb_margin: Rimon-Boyd法（ベンチマーク）
- solve_oracle: 交互射影（検証用）
- MarginError: エラー処理

Version: 1.0.0
Author: Margin Screening Project
"""

__version__ = '1.0.0'
__author__ = 'Margin Screening Project'

from .constants import AgentRole, MarginMethod
from .errors import MarginError
from .fista import FistaOptions, solve_fista
from .frank_wolfe import FwOptions, solve_fw
from .geometry import Conjunction, Ellipsoid, MarginResult, scale_conjunction, scale_sigma
from .oracle import OracleOptions, solve_oracle
from .overlap import OverlapReport, overlap_test
from .rimon_boyd import RimonBoydForm, rb_margin
from .wire import run_wire_session

__all__ = [
    'AgentRole', 'MarginMethod', 'MarginError',
    'Ellipsoid', 'Conjunction', 'MarginResult', 'OverlapReport',
    'scale_sigma', 'scale_conjunction', 'overlap_test',
    'FwOptions', 'solve_fw', 'FistaOptions', 'solve_fista', 'run_wire_session',
    'RimonBoydForm', 'rb_margin', 'OracleOptions', 'solve_oracle',
]
