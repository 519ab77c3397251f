"""
Centralized Solvers
===================

両楕円体を1か所で扱うソルバー（Frank-Wolfe / Rimon-Boyd / 交互射影）
"""

import logging

from ellipsoid_margin.constants import FW_MAX_ITER, ORACLE_MAX_ITER, MarginMethod
from ellipsoid_margin.frank_wolfe import FwOptions, solve_fw
from ellipsoid_margin.geometry import Conjunction, MarginResult
from ellipsoid_margin.oracle import OracleOptions, solve_oracle
from ellipsoid_margin.rimon_boyd import rb_margin
from margin_solvers.base_margin_solver import MarginSolver, SolveSettings

logger = logging.getLogger(__name__)


class FrankWolfeSolver(MarginSolver):
    """Frank-Wolfe法ソルバー"""

    def __init__(self):
        super().__init__(MarginMethod.FRANK_WOLFE)

    def solve(self, c: Conjunction, settings: SolveSettings) -> MarginResult:
        opts = FwOptions(tol_step=settings.tol_step, max_iter=settings.max_iter or FW_MAX_ITER)
        return solve_fw(c, opts)


class RimonBoydSolver(MarginSolver):
    """Rimon-Boyd法ソルバー（ベンチマーク）"""

    def __init__(self):
        super().__init__(MarginMethod.RIMON_BOYD)

    def solve(self, c: Conjunction, settings: SolveSettings) -> MarginResult:
        return rb_margin(c, settings.rb_form)


class OracleSolver(MarginSolver):
    """交互射影ソルバー（検証用、低速）"""

    def __init__(self):
        super().__init__(MarginMethod.ORACLE)

    def solve(self, c: Conjunction, settings: SolveSettings) -> MarginResult:
        return solve_oracle(c, OracleOptions(max_iter=settings.max_iter or ORACLE_MAX_ITER))
