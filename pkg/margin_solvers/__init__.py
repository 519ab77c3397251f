"""
Margin Solvers
==============

手法別マージンソルバー（Strategy Pattern）
"""

from margin_solvers.base_margin_solver import MarginSolver, ScreeningRow, SolveSettings, SolverRegistry
from margin_solvers.centralized_solvers import FrankWolfeSolver, OracleSolver, RimonBoydSolver
from margin_solvers.distributed_solver import FistaSolver


def default_registry() -> SolverRegistry:
    """全手法を登録したレジストリ"""
    registry = SolverRegistry()
    registry.register(FrankWolfeSolver())
    registry.register(FistaSolver())
    registry.register(RimonBoydSolver())
    registry.register(OracleSolver())
    return registry


__all__ = ['MarginSolver', 'ScreeningRow', 'SolveSettings', 'SolverRegistry',
           'FrankWolfeSolver', 'FistaSolver', 'RimonBoydSolver', 'OracleSolver',
           'default_registry']
