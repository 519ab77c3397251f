"""
Distributed Solver
==================

2エージェント分散FISTAソルバー（プロセス内トランスポート）
"""

from ellipsoid_margin.constants import FISTA_MAX_ITER, MarginMethod
from ellipsoid_margin.fista import FistaOptions, solve_fista
from ellipsoid_margin.geometry import Conjunction, MarginResult
from margin_solvers.base_margin_solver import MarginSolver, SolveSettings


class FistaSolver(MarginSolver):
    """分散FISTAソルバー"""

    def __init__(self):
        super().__init__(MarginMethod.FISTA)

    def solve(self, c: Conjunction, settings: SolveSettings) -> MarginResult:
        opts = FistaOptions(tol_step=settings.tol_step, max_iter=settings.max_iter or FISTA_MAX_ITER)
        return solve_fista(c, opts)
