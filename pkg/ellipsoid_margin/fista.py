"""
Distributed FISTA Margin Solver
===============================

分散型マージンソルバー
chaser / target の2エージェントが自身の楕円体のみを保持し、
外挿点 p だけをロックステップで交換しながらFISTAを実行する。
共分散・形状行列は一切送信しない。
"""

import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Deque, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .constants import (FISTA_HALT_ROUNDS, FISTA_LIPSCHITZ, FISTA_MAX_ITER, FISTA_TOL_GAP_KM2,
                        FISTA_TOL_STEP_KM, AgentRole, MarginMethod)
from .errors import ConnectionLost, IterationMismatch, TransportFailure
from .geometry import Conjunction, Ellipsoid, MarginResult, Vec3, to_tuple
from .overlap import overlap_test
from .projection import EllipsoidProjector

logger = logging.getLogger(__name__)

IterateCallback = Callable[[AgentRole, int, np.ndarray], None]


# ──────────────────── メッセージ ────────────────────

class AgentMessage(BaseModel):
    """
    ラウンドメッセージ {"k", "p", "halt"}

    エージェント間で共有されるのは反復番号と外挿点のみ。
    agent_id はローカル診断用でワイヤには載らない。
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    iteration: int = Field(alias="k", ge=0)
    point: Vec3 = Field(alias="p")
    halt: bool = False
    agent_id: Optional[AgentRole] = Field(None, exclude=True)


class FinalMessage(BaseModel):
    """終了メッセージ {"k", "x", "done": true}"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    iteration: int = Field(alias="k", ge=0)
    x: Vec3
    done: bool = True


WireMessage = Union[AgentMessage, FinalMessage]


def parse_message(data: dict) -> WireMessage:
    """受信辞書をメッセージへ変換（"done" の有無で判別）"""
    if "done" in data:
        return FinalMessage.model_validate(data)
    return AgentMessage.model_validate(data)


# ──────────────────── トランスポート ────────────────────

class Transport(ABC):
    """2エージェント間の順序保証・無損失の双方向チャネル"""

    @abstractmethod
    def send(self, message: WireMessage) -> None:
        """メッセージ送信"""

    @abstractmethod
    def recv(self) -> WireMessage:
        """
        メッセージ受信

        Raises:
            ConnectionLost: 相手が 'done' 前に切断した場合
        """

    def close(self) -> None:
        """チャネルを閉じる"""


class InMemoryTransport(Transport):
    """プロセス内トランスポート（方向ごとのFIFO）"""

    def __init__(self, outbox: Deque[WireMessage], inbox: Deque[WireMessage]):
        self._outbox = outbox
        self._inbox = inbox
        self._closed = False

    @classmethod
    def pair(cls) -> Tuple["InMemoryTransport", "InMemoryTransport"]:
        """接続済みの端点ペアを生成"""
        a_to_b: Deque[WireMessage] = deque()
        b_to_a: Deque[WireMessage] = deque()
        return cls(a_to_b, b_to_a), cls(b_to_a, a_to_b)

    def send(self, message: WireMessage) -> None:
        if self._closed:
            raise TransportFailure("send on closed in-memory channel")
        self._outbox.append(message)

    def recv(self) -> WireMessage:
        if not self._inbox:
            raise ConnectionLost("in-memory channel is empty")
        return self._inbox.popleft()

    def close(self) -> None:
        self._closed = True


# ──────────────────── エージェント ────────────────────

@dataclass(frozen=True)
class AgentState:
    """エージェント状態（楕円体はエージェント外へ出ない）"""

    agent_id: AgentRole
    ellipsoid: Ellipsoid
    x: np.ndarray
    p: np.ndarray
    t: float = 1.0
    k: int = 0

    @classmethod
    def initial(cls, agent_id: AgentRole, ellipsoid: Ellipsoid) -> "AgentState":
        """楕円体の中心から開始"""
        center = ellipsoid.center.copy()
        return cls(agent_id=agent_id, ellipsoid=ellipsoid, x=center, p=center.copy())


@dataclass(frozen=True)
class FistaOptions:
    """FISTA設定（両エージェントで一致している必要がある）"""

    tol_step: float = FISTA_TOL_STEP_KM
    max_iter: int = FISTA_MAX_ITER


def next_momentum(t: float) -> float:
    """t⁺ = (1 + √(1 + 4t²)) / 2"""
    return (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0


def agent_step(state: AgentState, peer_point, peer_iteration: Optional[int] = None,
               projector: Optional[EllipsoidProjector] = None) -> AgentState:
    """
    1エージェントの1反復

    x⁺ = P(p − (2/L)(p − p_peer))、L = 4
    p⁺ = x⁺ + ((t − 1)/t⁺)(x⁺ − x)

    Args:
        state: 現在の状態
        peer_point: 相手の同一ラウンドの外挿点
        peer_iteration: 相手の反復番号（指定時はロックステップを検証）
        projector: 自楕円体の射影器（省略時は生成）

    Returns:
        AgentState: k + 1 の状態

    Raises:
        IterationMismatch: 反復番号が一致しない場合
    """
    if peer_iteration is not None and peer_iteration != state.k:
        raise IterationMismatch(state.k, peer_iteration)
    projector = projector or EllipsoidProjector(state.ellipsoid)
    peer = np.asarray(peer_point, dtype=float)

    x_next = projector.project(state.p - (2.0 / FISTA_LIPSCHITZ) * (state.p - peer))
    t_next = next_momentum(state.t)
    p_next = x_next + ((state.t - 1.0) / t_next) * (x_next - state.x)
    return replace(state, x=x_next, p=p_next, t=t_next, k=state.k + 1)


def local_duality_gap(ellipsoid: Ellipsoid, covariance: np.ndarray, x, peer_point) -> float:
    """
    自楕円体側の双対ギャップ 2(x − q)ᵀ(x − s)

    q は相手の最新の外挿点、s は方向 q − x への支持点。
    両エージェントの値の和が集中型の双対ギャップに一致する（q = 相手の x のとき）。
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(peer_point, dtype=float) - x
    sigma_d = covariance @ d
    norm = math.sqrt(float(d @ sigma_d))
    if norm == 0.0:
        return 0.0
    support = ellipsoid.center + sigma_d / norm
    return float(2.0 * (d @ (support - x)))


class FistaAgent:
    """
    ロックステッププロトコルの1エージェント

    各ラウンドで broadcast() を送信し、相手のメッセージを absorb() に渡す。
    両者の停止フラグが2ラウンド連続で揃ったら停止する。
    停止フラグはステップ長 ≤ tol_step かつ局所双対ギャップ ≤ FISTA_TOL_GAP_KM2
    （相手の外挿点との距離が tol_step 以下なら不要）で立つ。
    """

    def __init__(self, role: AgentRole, ellipsoid: Ellipsoid, opts: Optional[FistaOptions] = None,
                 on_iterate: Optional[IterateCallback] = None):
        self.role = role
        self.opts = opts or FistaOptions()
        self.state = AgentState.initial(role, ellipsoid)
        self.converged = False
        self._projector = EllipsoidProjector(ellipsoid)
        self._covariance = ellipsoid.covariance()
        self._on_iterate = on_iterate
        self._halt = False
        self._agreed_rounds = 0

    @property
    def halt(self) -> bool:
        """直前の自ステップが停止条件を満たしたか"""
        return self._halt

    def broadcast(self) -> AgentMessage:
        """現在ラウンドの送信メッセージ"""
        return AgentMessage(iteration=self.state.k, point=to_tuple(self.state.p),
                            halt=self._halt, agent_id=self.role)

    def absorb(self, message: AgentMessage) -> bool:
        """
        相手のラウンドメッセージを処理

        Returns:
            bool: 停止すべきなら True

        Raises:
            IterationMismatch: ロックステップ違反
        """
        if message.iteration != self.state.k:
            raise IterationMismatch(self.state.k, message.iteration)

        if self._halt and message.halt:
            self._agreed_rounds += 1
        else:
            self._agreed_rounds = 0
        if self._agreed_rounds >= FISTA_HALT_ROUNDS:
            self.converged = True
            return True
        if self.state.k >= self.opts.max_iter:
            return True

        previous = self.state.x
        self.state = agent_step(self.state, message.point, projector=self._projector)
        self._halt = self._step_certified(previous, message.point)
        if self._on_iterate is not None:
            self._on_iterate(self.role, self.state.k, self.state.x.copy())
        return False

    def _step_certified(self, previous: np.ndarray, peer_point) -> bool:
        x = self.state.x
        if float(np.linalg.norm(x - previous)) > self.opts.tol_step:
            return False
        if float(np.linalg.norm(np.asarray(peer_point, dtype=float) - x)) <= self.opts.tol_step:
            return True
        gap = local_duality_gap(self.state.ellipsoid, self._covariance, x, peer_point)
        return gap <= FISTA_TOL_GAP_KM2

    def final_message(self) -> FinalMessage:
        return FinalMessage(iteration=self.state.k, x=to_tuple(self.state.x))

    def check_final(self, message: WireMessage) -> np.ndarray:
        """相手の終了メッセージを検証し、相手の最終点を返す"""
        if not isinstance(message, FinalMessage):
            raise TransportFailure(f"expected final message, got {type(message).__name__}")
        if message.iteration != self.state.k:
            raise IterationMismatch(self.state.k, message.iteration)
        return np.array(message.x, dtype=float)


def run_agent(agent: FistaAgent, transport: Transport) -> np.ndarray:
    """
    1エージェント分のプロトコルを最後まで実行（ワイヤセッション用）

    Returns:
        np.ndarray: 相手の最終点
    """
    while True:
        transport.send(agent.broadcast())
        message = transport.recv()
        if not isinstance(message, AgentMessage):
            raise TransportFailure("peer sent 'done' before the halting round")
        if agent.absorb(message):
            break
    transport.send(agent.final_message())
    return agent.check_final(transport.recv())


def assemble_result(chaser_x, target_x, iterations: int, converged: bool,
                    overlap: bool) -> MarginResult:
    """両エージェントの最終点から結果を組み立て（交差時はマージンを0に丸める）"""
    chaser_x = np.asarray(chaser_x, dtype=float)
    target_x = np.asarray(target_x, dtype=float)
    margin = 0.0 if overlap else float(np.linalg.norm(chaser_x - target_x))
    message = None if converged else "max_iter reached"
    return MarginResult(margin=margin, x_star=to_tuple(chaser_x), y_star=to_tuple(target_x),
                        iterations=iterations, converged=converged, overlap=overlap,
                        method=MarginMethod.FISTA, message=message)


def solve_fista(c: Conjunction, opts: Optional[FistaOptions] = None,
                transports: Optional[Tuple[Transport, Transport]] = None,
                on_iterate: Optional[IterateCallback] = None) -> MarginResult:
    """
    分散FISTAによるマージン計算（単一スレッドで両エージェントを交互実行）

    Args:
        c: コンジャンクション
        opts: 停止条件
        transports: (chaser側, target側) の端点。省略時はプロセス内トランスポート
        on_iterate: 各エージェントの更新ごとに (role, k, x) を受け取るコールバック

    Returns:
        MarginResult: 交差判定が真ならマージンは0

    Raises:
        TransportFailure: 通信エラー
    """
    opts = opts or FistaOptions()
    chaser_link, target_link = transports or InMemoryTransport.pair()
    chaser = FistaAgent(AgentRole.CHASER, c.chaser, opts, on_iterate)
    target = FistaAgent(AgentRole.TARGET, c.target, opts, on_iterate)

    try:
        while True:
            chaser_link.send(chaser.broadcast())
            target_link.send(target.broadcast())
            stop_chaser = chaser.absorb(chaser_link.recv())
            stop_target = target.absorb(target_link.recv())
            if stop_chaser != stop_target:
                raise TransportFailure("agents disagree on termination")
            if stop_chaser:
                break
        chaser_link.send(chaser.final_message())
        target_link.send(target.final_message())
        target_x = chaser.check_final(chaser_link.recv())
        chaser_x = target.check_final(target_link.recv())
    finally:
        chaser_link.close()
        target_link.close()

    converged = chaser.converged and target.converged
    report = overlap_test(c)
    result = assemble_result(chaser_x, target_x, chaser.state.k, converged, report.overlapping)
    if not converged:
        logger.warning(f"FISTA未収束 {c.id}: {opts.max_iter}回, margin={result.margin:.6f} km")
    logger.debug(f"FISTA {c.id}: margin={result.margin:.6f} km, 反復={chaser.state.k}")
    return result
