"""
Ellipsoid Margin Error Handling
===============================

マージン計算ライブラリのエラー定義
"""

from typing import Optional


class MarginError(Exception):
    """マージン計算の基本エラークラス"""


class NotPositiveDefinite(MarginError):
    """正定値でない行列（共分散・形状行列の不正）"""

    def __init__(self, pivot: Optional[float] = None, row: Optional[int] = None,
                 detail: str = ""):
        self.pivot = pivot
        self.row = row
        message = "Matrix is not positive definite"
        if pivot is not None:
            message += f" (pivot {pivot:.3e})"
        if row is not None:
            message += f" at line {row}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class NoRealEigenvalue(MarginError):
    """実固有値が見つからない（Rimon-Boyd法の既知の破綻モード）"""

    def __init__(self, detail: str = ""):
        super().__init__(f"No real eigenvalue found{': ' + detail if detail else ''}")


class InvalidSigma(MarginError):
    """σスケーリング値の不正"""

    def __init__(self, sigma: float):
        self.sigma = sigma
        super().__init__(f"sigma must be finite and > 0, got {sigma!r}")


class SingularSigmaLambda(MarginError):
    """Σ_λ のCholesky分解失敗（入力破損）"""

    def __init__(self, lam: float):
        self.lam = lam
        super().__init__(f"Sigma_lambda is singular at lambda={lam!r}")


class MaxIterationsExceeded(MarginError):
    """反復回数上限超過"""

    def __init__(self, routine: str, max_iter: int):
        self.routine = routine
        self.max_iter = max_iter
        super().__init__(f"{routine} did not converge within {max_iter} iterations")


class NotExterior(MarginError):
    """射影対象の点が楕円体の外部にない"""

    def __init__(self):
        super().__init__("Point is not strictly exterior to the ellipsoid")


class CoincidentIterates(MarginError):
    """Frank-Wolfe反復点の一致（勾配ゼロ）"""

    def __init__(self):
        super().__init__("Iterates coincide; gradient is zero (margin is 0)")


class DegenerateDirection(MarginError):
    """直線探索方向の縮退（任意のαが最適）"""

    def __init__(self):
        super().__init__("Line search direction is degenerate (r == p)")


class IterationMismatch(MarginError):
    """ロックステップ反復番号の不一致（プロトコル違反）"""

    def __init__(self, expected: int, received: int):
        self.expected = expected
        self.received = received
        super().__init__(f"Lockstep violation: expected iteration {expected}, received {received}")


class TransportFailure(MarginError):
    """エージェント間通信エラー"""

    def __init__(self, message: str):
        super().__init__(f"Transport failure: {message}")


class ConnectionLost(TransportFailure):
    """通信相手が 'done' 前に切断"""

    def __init__(self, message: str = "peer closed the stream before 'done'"):
        super().__init__(message)


class HandshakeMismatch(TransportFailure):
    """ハンドシェイク不一致（プロトコルバージョン・オプション）"""

    def __init__(self, field: str, local, remote):
        self.field = field
        super().__init__(f"Handshake mismatch on '{field}': local={local!r}, remote={remote!r}")


class SchemaError(MarginError):
    """入力ファイルのスキーマエラー"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Schema error{where}: {message}")
