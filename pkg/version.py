"""
Margin Screening バージョン情報
===============================

プロジェクト全体のバージョン情報を管理
"""

__version__ = "1.0.0"
__release_date__ = "2026-10-18"
__author__ = "Margin Screening Development Team"

# コンポーネントバージョン
COMPONENT_VERSIONS = {
    "ellipsoid_margin": "1.0.0",
    "batch_screener": "1.0.0",
    "rest_api": "1.0.0",
}

# 機能リリース情報
FEATURES = {
    "1.0.0": [
        "交差判定・Frank-Wolfe・分散FISTA・Rimon-Boyd・交互射影",
        "CSVバッチスクリーニングとσスイープ",
        "TCP越しの2者分散計算",
    ]
}


def get_version_info() -> dict:
    """
    詳細なバージョン情報を取得

    Returns:
        dict: バージョン情報の辞書
    """
    import platform
    import sys

    lib_versions = {}
    for name in ("numpy", "scipy", "pydantic", "fastapi", "uvicorn", "ellipsoid_margin"):
        try:
            module = __import__(name)
            lib_versions[name] = getattr(module, "__version__", "不明")
        except ImportError:
            lib_versions[name] = "未インストール"

    return {
        "margin_version": __version__,
        "release_date": __release_date__,
        "python_version": f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
        "platform": platform.platform(),
        "components": COMPONENT_VERSIONS,
        "libraries": lib_versions,
        "latest_features": FEATURES.get(__version__, []),
    }


def format_version_string() -> str:
    """
    フォーマット済みのバージョン文字列を生成

    Returns:
        str: バージョン表示用文字列
    """
    info = get_version_info()

    lines = [
        f"Margin Screening v{info['margin_version']} ({info['release_date']})",
        f"Python {info['python_version']} on {info['platform']}",
        "",
        "コンポーネント:",
    ]
    lines.extend(f"  - {comp}: v{ver}" for comp, ver in info['components'].items())
    lines.append("")
    lines.append("依存ライブラリ:")
    lines.extend(f"  - {lib}: {ver}" for lib, ver in info['libraries'].items())
    return "\n".join(lines)


if __name__ == "__main__":
    print(format_version_string())
