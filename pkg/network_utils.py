"""
ネットワークユーティリティ
==========================

分散モードのエンドポイント解析と、サーバーのアドレス表示に使う共通関数
"""

import logging
import socket
from typing import Tuple

logger = logging.getLogger(__name__)

DEFAULT_WIRE_PORT = 7100


def parse_endpoint(text: str, default_host: str = "0.0.0.0",
                   default_port: int = DEFAULT_WIRE_PORT) -> Tuple[str, int]:
    """
    "host:port" / "host" / ":port" 形式のエンドポイントを解析

    Args:
        text: エンドポイント文字列
        default_host: ホスト省略時の値
        default_port: ポート省略時の値

    Returns:
        tuple: (host, port)

    Raises:
        ValueError: ポート番号が不正な場合
    """
    text = text.strip()
    if text.startswith("[") and "]" in text:
        host, _, rest = text[1:].partition("]")
        port_text = rest.lstrip(":")
    elif text.count(":") == 1:
        host, port_text = text.split(":", 1)
    else:
        host, port_text = text, ""

    host = host or default_host
    if not port_text:
        return host, default_port
    try:
        port = int(port_text)
    except ValueError as e:
        raise ValueError(f"Invalid port in endpoint '{text}'") from e
    if not 0 <= port <= 65535:
        raise ValueError(f"Port out of range in endpoint '{text}': {port}")
    return host, port


def resolve_hostname(host: str) -> str:
    """
    ホスト名をIPアドレスに解決

    Raises:
        ValueError: ホスト名解決失敗
    """
    try:
        socket.inet_aton(host)
        return host
    except OSError:
        try:
            return socket.gethostbyname(host)
        except socket.gaierror as e:
            raise ValueError(f"ホスト名 '{host}' を解決できません: {e}") from e


def get_local_ip() -> str:
    """
    ローカルIPアドレスを取得

    Returns:
        str: ローカルIPアドレス（取得失敗時は127.0.0.1を返す）
    """
    try:
        # UDPなので実際には接続しない
        with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as s:
            s.connect(("8.8.8.8", 80))
            return s.getsockname()[0]
    except Exception as e:
        logger.warning(f"IPアドレス取得失敗: {e}")
        return "127.0.0.1"


def get_hostname() -> str:
    """ホスト名を取得（取得失敗時はlocalhost）"""
    try:
        return socket.gethostname()
    except Exception as e:
        logger.warning(f"ホスト名取得失敗: {e}")
        return "localhost"


def get_server_urls(port: int = 8000, include_localhost: bool = True) -> list:
    """
    サーバーアクセス用のURLリストを生成

    Args:
        port: サーバーポート番号
        include_localhost: localhostを含めるか
    """
    urls = []
    if include_localhost:
        urls.append(f"http://localhost:{port}")

    local_ip = get_local_ip()
    if local_ip != "127.0.0.1":
        urls.append(f"http://{local_ip}:{port}")

    hostname = get_hostname()
    if hostname != "localhost":
        urls.append(f"http://{hostname}:{port}")
    return urls

