"""
Wire Transport
==============

分散FISTAのTCPトランスポート
1行1メッセージのJSON（UTF-8）を信頼性のあるバイトストリーム上で交換する。

  handshake: {"v":1,"role":"chaser"|"target","tol":<float>,"max_iter":<int>}
  round:     {"k":<int>,"p":[<f>,<f>,<f>],"halt":<bool>}
  final:     {"k":<int>,"x":[<f>,<f>,<f>],"done":true}

浮動小数点数は最短往復表現で書き出すため、受信値は送信値とビット単位で一致する。
"""

import logging
import socket
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, TypeAdapter, ValidationError

from .constants import WIRE_ENCODING, WIRE_PROTOCOL_VERSION, WIRE_TIMEOUT_SEC, AgentRole
from .errors import ConnectionLost, HandshakeMismatch, TransportFailure
from .fista import (FistaAgent, FistaOptions, IterateCallback, Transport, WireMessage,
                    assemble_result, run_agent)
from .geometry import Ellipsoid, MarginResult

logger = logging.getLogger(__name__)

Endpoint = Tuple[str, int]

# 相手の楕円体がないため交差判定 (K) は行わず、最終距離から推定する
INFERRED_OVERLAP_NOTE = "overlap inferred from final distance <= tol_step (no overlap test on the wire)"

_MESSAGE = TypeAdapter(WireMessage)


class Handshake(BaseModel):
    """接続直後に交換する設定（楕円体情報は含まない）"""

    v: int = WIRE_PROTOCOL_VERSION
    role: AgentRole
    tol: float
    max_iter: int


class WireTransport(Transport):
    """TCPソケット上のJSON行トランスポート"""

    def __init__(self, timeout: float = WIRE_TIMEOUT_SEC, capture: Optional[List[bytes]] = None):
        self._sock: Optional[socket.socket] = None
        self._timeout = timeout
        self._buffer = b""
        self._is_connected = False
        self._sockbufsize = 4096
        self._capture = capture
        self._debug = False

    def set_debug(self, debug: bool = False) -> None:
        """デバッグモード設定（送受信行をDEBUGログへ出力）"""
        self._debug = debug

    def connect(self, host: str, port: int) -> None:
        """
        相手へ接続

        Raises:
            TransportFailure: 接続できない場合
        """
        try:
            self._sock = socket.create_connection((host, port), timeout=self._timeout)
            self._is_connected = True
        except OSError as e:
            raise TransportFailure(f"Failed to connect to {host}:{port} - {e}") from e

    def listen(self, host: str, port: int,
               on_ready: Optional[Callable[[Endpoint], None]] = None) -> None:
        """
        待ち受けて1接続を受け入れる

        Args:
            host: バインドアドレス
            port: ポート番号（0 なら自動割り当て）
            on_ready: バインド完了後に実アドレスを受け取るコールバック
        """
        try:
            listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            listener.bind((host, port))
            listener.listen(1)
            listener.settimeout(self._timeout)
        except OSError as e:
            raise TransportFailure(f"Failed to listen on {host}:{port} - {e}") from e

        try:
            bound = listener.getsockname()
            logger.info(f"待ち受け開始: {bound[0]}:{bound[1]}")
            if on_ready is not None:
                on_ready((bound[0], bound[1]))
            conn, peer = listener.accept()
        except socket.timeout as e:
            raise TransportFailure(f"No peer connected within {self._timeout}s") from e
        except OSError as e:
            raise TransportFailure(f"Accept failed - {e}") from e
        finally:
            listener.close()

        conn.settimeout(self._timeout)
        self._sock = conn
        self._is_connected = True
        logger.info(f"接続受付: {peer[0]}:{peer[1]}")

    def close(self) -> None:
        """接続を閉じる"""
        if self._sock:
            try:
                self._sock.close()
            finally:
                self._sock = None
        self._is_connected = False

    def _send(self, data: bytes) -> None:
        if not self._is_connected or not self._sock:
            raise TransportFailure("Socket is not connected")
        if self._debug:
            logger.debug(f"Send: {data!r}")
        if self._capture is not None:
            self._capture.append(data)
        try:
            self._sock.sendall(data)
        except OSError as e:
            raise ConnectionLost(f"send failed - {e}") from e

    def _recv_line(self) -> bytes:
        if not self._is_connected or not self._sock:
            raise TransportFailure("Socket is not connected")
        while b"\n" not in self._buffer:
            try:
                chunk = self._sock.recv(self._sockbufsize)
            except socket.timeout as e:
                raise TransportFailure(f"No message within {self._timeout}s") from e
            except OSError as e:
                raise ConnectionLost(f"receive failed - {e}") from e
            if not chunk:
                raise ConnectionLost()
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        if self._debug:
            logger.debug(f"Recv: {line!r}")
        return line

    def _send_model(self, model: BaseModel) -> None:
        payload = model.model_dump_json(by_alias=True)
        self._send(payload.encode(WIRE_ENCODING) + b"\n")

    def send(self, message: WireMessage) -> None:
        self._send_model(message)

    def recv(self) -> WireMessage:
        line = self._recv_line()
        try:
            return _MESSAGE.validate_json(line)
        except ValidationError as e:
            raise TransportFailure(f"malformed message: {line!r}") from e

    def exchange_handshake(self, local: Handshake) -> Handshake:
        """
        ハンドシェイク交換と検証

        Raises:
            HandshakeMismatch: バージョン・オプション・役割が整合しない場合
        """
        self._send_model(local)
        line = self._recv_line()
        try:
            remote = Handshake.model_validate_json(line)
        except ValidationError as e:
            raise TransportFailure(f"malformed handshake: {line!r}") from e

        if remote.v != local.v:
            raise HandshakeMismatch("v", local.v, remote.v)
        if remote.tol != local.tol:
            raise HandshakeMismatch("tol", local.tol, remote.tol)
        if remote.max_iter != local.max_iter:
            raise HandshakeMismatch("max_iter", local.max_iter, remote.max_iter)
        if remote.role != local.role.peer:
            raise HandshakeMismatch("role", local.role.value, remote.role.value)
        return remote

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def run_wire_session(mode: str, endpoint: Endpoint, ellipsoid: Ellipsoid, role: AgentRole,
                     opts: Optional[FistaOptions] = None,
                     on_ready: Optional[Callable[[Endpoint], None]] = None,
                     on_iterate: Optional[IterateCallback] = None,
                     capture: Optional[List[bytes]] = None,
                     timeout: float = WIRE_TIMEOUT_SEC) -> MarginResult:
    """
    ワイヤ越しの分散FISTAセッション（1エージェント分）

    自分の楕円体だけを持ち、相手とは外挿点のみを交換する。
    相手の楕円体を知らないため交差判定は行えず、
    マージンが tol_step 以下なら交差とみなして0に丸める。

    Args:
        mode: "listen" または "connect"
        endpoint: (host, port)
        ellipsoid: 自分の楕円体
        role: 自分の役割
        opts: 停止条件（相手と一致必須）
        on_ready: listen時、バインド済みアドレスの通知
        on_iterate: 各反復の (role, k, x) コールバック
        capture: 指定時は送信バイト列を追記
        timeout: ソケットタイムアウト秒数

    Returns:
        MarginResult: x_star は chaser、y_star は target の最終点

    Raises:
        ConnectionLost: 相手が 'done' 前に切断
        HandshakeMismatch: 設定不一致
        TransportFailure: その他の通信エラー
    """
    opts = opts or FistaOptions()
    host, port = endpoint
    agent = FistaAgent(role, ellipsoid, opts, on_iterate)

    with WireTransport(timeout=timeout, capture=capture) as transport:
        transport.set_debug(logger.isEnabledFor(logging.DEBUG))
        if mode == "listen":
            transport.listen(host, port, on_ready)
        elif mode == "connect":
            transport.connect(host, port)
        else:
            raise ValueError(f"Invalid mode '{mode}'. Use 'listen' or 'connect'.")

        transport.exchange_handshake(Handshake(role=role, tol=opts.tol_step, max_iter=opts.max_iter))
        peer_x = run_agent(agent, transport)

    own_x = agent.state.x
    chaser_x, target_x = (own_x, peer_x) if role is AgentRole.CHASER else (peer_x, own_x)
    overlap = float(np.linalg.norm(chaser_x - target_x)) <= opts.tol_step
    result = assemble_result(chaser_x, target_x, agent.state.k, agent.converged, overlap)
    if overlap:
        notes = [note for note in (result.message, INFERRED_OVERLAP_NOTE) if note]
        result = result.model_copy(update={"message": "; ".join(notes)})
    logger.info(f"ワイヤセッション終了 ({role.value}): margin={result.margin:.6f} km, "
                f"反復={agent.state.k}, 収束={agent.converged}")
    return result
