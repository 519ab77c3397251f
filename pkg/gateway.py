# ------------------------------------------------------------
# gateway.py
# FastAPI Gateway ─ Ellipsoid Margin Screening
# ------------------------------------------------------------
import logging
from typing import List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from batch_screener import ScreeningSummary
from ellipsoid_margin.constants import MarginMethod
from ellipsoid_margin.errors import MarginError
from ellipsoid_margin.geometry import Conjunction, Ellipsoid, MarginResult
from margin_operations import DEFAULT_SWEEP_SIGMAS, MarginConfig, MarginOperations
from margin_solvers.base_margin_solver import ScreeningRow, SolveSettings
from version import __version__

logger = logging.getLogger(__name__)

# ──────────────────── 環境変数 ────────────────────
CONFIG = MarginConfig()
operations = MarginOperations(CONFIG)

# ──────────────────── FastAPI ────────────────────
app = FastAPI(
    title="Ellipsoid Margin API",
    description="位置不確かさ楕円体間のマージン（最小距離）を計算するAPI。",
    version=__version__,
    license_info={
        "name": "MIT License",
        "url": "https://opensource.org/licenses/MIT"
    }
)

# ──────────────────── CORS設定 ────────────────────
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class EllipsoidIn(BaseModel):
    center: List[float] = Field(..., min_length=3, max_length=3, description="中心 (km)")
    covariance: List[List[float]] = Field(..., description="共分散 3×3 (km²)")


class ConjunctionIn(BaseModel):
    id: str = "api"
    chaser: EllipsoidIn
    target: EllipsoidIn
    chaser_radius: float = 0.0
    target_radius: float = 0.0
    risk: Optional[float] = None


class SolveOptionsIn(BaseModel):
    method: Optional[MarginMethod] = None  # 未指定時は環境変数MARGIN_METHOD
    tol: Optional[float] = Field(None, gt=0.0)
    max_iter: Optional[int] = Field(None, ge=1)


class MarginRequest(SolveOptionsIn):
    conjunction: ConjunctionIn
    sigma: Optional[float] = None


class ScreenRequest(SolveOptionsIn):
    conjunctions: List[ConjunctionIn]
    sigma: Optional[float] = None
    oracle_check: bool = False


class SweepRequest(SolveOptionsIn):
    conjunction: ConjunctionIn
    sigmas: List[float] = list(DEFAULT_SWEEP_SIGMAS)


class ScreenResponse(BaseModel):
    rows: List[ScreeningRow]
    summary: ScreeningSummary


class SweepEntry(BaseModel):
    sigma: float
    result: MarginResult


class SweepResponse(BaseModel):
    id: str
    results: List[SweepEntry]


def _to_conjunction(req: ConjunctionIn) -> Conjunction:
    return Conjunction(
        id=req.id,
        chaser=Ellipsoid.from_covariance(req.chaser.center, req.chaser.covariance),
        target=Ellipsoid.from_covariance(req.target.center, req.target.covariance),
        chaser_radius=req.chaser_radius,
        target_radius=req.target_radius,
        risk=req.risk,
    )


def _settings(req: SolveOptionsIn) -> SolveSettings:
    """リクエスト > 環境変数 > デフォルト"""
    return SolveSettings(tol_step=req.tol or CONFIG.tol_km,
                         max_iter=req.max_iter or CONFIG.max_iter)


@app.post("/api/margin", tags=["Margin"],
          response_model=MarginResult,
          operation_id="compute_margin",
          summary="単一コンジャンクションのマージン計算",
          description="指定した手法で2つの楕円体間のマージンを計算します")
def api_margin(req: MarginRequest):
    try:
        return operations.compute_margin(_to_conjunction(req.conjunction), req.method,
                                         req.sigma, _settings(req))
    except (MarginError, ValueError) as ex:
        raise HTTPException(status_code=400, detail=str(ex))
    except Exception as ex:
        logger.error(f"マージン計算エラー: {ex}")
        raise HTTPException(status_code=500, detail=str(ex))


@app.post("/api/screen", tags=["Batch Operations"],
          response_model=ScreenResponse,
          operation_id="screen_conjunctions",
          summary="複数コンジャンクション一括スクリーニング",
          description="行ごとのエラーは結果に記録され、バッチ全体は継続します")
def api_screen(req: ScreenRequest):
    try:
        conjunctions = [_to_conjunction(c) for c in req.conjunctions]
        report = operations.screen(conjunctions, req.method, req.sigma, _settings(req),
                                   oracle_check=req.oracle_check)
        return ScreenResponse(rows=report.rows, summary=report.summary)
    except (MarginError, ValueError) as ex:
        raise HTTPException(status_code=400, detail=str(ex))
    except Exception as ex:
        logger.error(f"スクリーニングエラー: {ex}")
        raise HTTPException(status_code=500, detail=str(ex))


@app.post("/api/sweep", tags=["Margin"],
          response_model=SweepResponse,
          operation_id="sigma_sweep",
          summary="σスイープ",
          description="複数のσレベル（デフォルト 3, 2, 1）でマージンを計算します")
def api_sweep(req: SweepRequest):
    try:
        c = _to_conjunction(req.conjunction)
        results = operations.sigma_sweep(c, req.sigmas, req.method, _settings(req))
        return SweepResponse(id=c.id, results=[SweepEntry(sigma=s, result=r) for s, r in results])
    except (MarginError, ValueError) as ex:
        raise HTTPException(status_code=400, detail=str(ex))
    except Exception as ex:
        logger.error(f"σスイープエラー: {ex}")
        raise HTTPException(status_code=500, detail=str(ex))


@app.get("/api/methods", tags=["System Status"],
         summary="対応手法の確認",
         description="利用可能な計算手法と現在の設定を取得します")
def api_methods():
    return {
        "available": True,
        "supported_methods": operations.get_supported_methods(),
        "default_method": CONFIG.method.value,
        "config": str(CONFIG),
        "version": __version__,
    }


# ──────────────────── 起動時処理 ────────────────────
@app.on_event("startup")
async def startup_event():
    """アプリケーション起動時の処理"""
    logger.info("Ellipsoid Margin API を起動中...")
    logger.info(f"設定: {CONFIG}")
