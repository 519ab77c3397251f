"""共通フィクスチャとランダム生成器"""

import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from ellipsoid_margin.fista import solve_fista  # noqa: E402
from ellipsoid_margin.frank_wolfe import solve_fw  # noqa: E402
from ellipsoid_margin.geometry import Conjunction, Ellipsoid, MarginResult  # noqa: E402
from ellipsoid_margin.oracle import is_near_tangent, solve_oracle  # noqa: E402
from ellipsoid_margin.overlap import OverlapReport, overlap_test  # noqa: E402
from ellipsoid_margin.projection import EllipsoidProjector  # noqa: E402


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """一様ランダムな回転行列 (det = +1)"""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_covariance(rng: np.random.Generator, lo: float = 0.01, hi: float = 10.0,
                      max_ratio: float = 100.0) -> np.ndarray:
    """半軸が対数一様 [lo, hi] km、軸比 ≤ max_ratio（共分散の条件数 ≤ max_ratio²）"""
    axes = np.exp(rng.uniform(np.log(lo), np.log(hi), size=3))
    axes = np.maximum(axes, axes.max() / max_ratio)
    rot = random_rotation(rng)
    return rot @ np.diag(axes ** 2) @ rot.T


def random_ellipsoid(rng: np.random.Generator, spread: float = 50.0, **kwargs) -> Ellipsoid:
    center = rng.uniform(-spread, spread, size=3)
    return Ellipsoid.from_covariance(center, random_covariance(rng, **kwargs))


def random_conjunction(rng: np.random.Generator, index: int = 0, spread: float = 50.0,
                       **kwargs) -> Conjunction:
    return Conjunction(
        id=f"rand-{index:04d}",
        chaser=random_ellipsoid(rng, spread, **kwargs),
        target=random_ellipsoid(rng, spread, **kwargs),
        chaser_radius=float(rng.uniform(0.0, 0.05)),
        target_radius=float(rng.uniform(0.0, 0.05)),
    )


def sphere_conjunction(distance: float, r1: float = 1.0, r2: float = 1.0,
                       direction=(1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0),
                       conjunction_id: str = "sphere", **kwargs) -> Conjunction:
    """中心間距離 distance の球ペア"""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return Conjunction(
        id=conjunction_id,
        chaser=Ellipsoid.sphere(origin, r1),
        target=Ellipsoid.sphere(origin + distance * direction, r2),
        **kwargs,
    )


def analytic_sphere_margin(c: Conjunction, r1: float, r2: float) -> float:
    return max(0.0, float(np.linalg.norm(c.target.center - c.chaser.center)) - r1 - r2)


def random_sphere_cases(rng: np.random.Generator, count: int):
    """(conjunction, r1, r2) のリスト"""
    cases = []
    for i in range(count):
        r1, r2 = rng.uniform(0.5, 5.0, size=2)
        distance = rng.uniform(0.1, 60.0)
        c = sphere_conjunction(distance, r1, r2, direction=rng.standard_normal(3),
                               origin=rng.uniform(-20.0, 20.0, size=3),
                               conjunction_id=f"sphere-{i:03d}")
        cases.append((c, float(r1), float(r2)))
    return cases


def separated_conjunction(rng: np.random.Generator, index: int = 0) -> Conjunction:
    """明確に離れた、条件の良い非交差ペア"""
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    chaser = Ellipsoid.from_covariance(rng.uniform(-5.0, 5.0, size=3),
                                       random_covariance(rng, 0.5, 5.0, max_ratio=10.0))
    target = Ellipsoid.from_covariance(chaser.center + rng.uniform(30.0, 50.0) * direction,
                                       random_covariance(rng, 0.5, 5.0, max_ratio=10.0))
    return Conjunction(id=f"sep-{index:03d}", chaser=chaser, target=target)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def unit_spheres_3km():
    return sphere_conjunction(3.0)


@pytest.fixture
def identical_ellipsoids():
    e = Ellipsoid.from_covariance([1.0, 2.0, 3.0], np.diag([4.0, 1.0, 0.25]))
    return Conjunction(id="same", chaser=e, target=e)


def write_ellipsoid_file(e: Ellipsoid, path, comment: Optional[str] = None) -> None:
    """楕円体を中心1行 + 共分散3行の形式で書き出す"""
    lines = [f"# {comment}"] if comment else []
    lines.append(" ".join(repr(float(v)) for v in e.center))
    for row in e.covariance():
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ──────────────────── ランダムスイート ────────────────────
# 半軸は対数一様 [0.01, 10] km、共分散の条件数 ≤ 1e4、中心間距離 ≤ 50 km

SUITE_SIZE = 1000
SUITE_SEED = 20240611
FISTA_SUITE_SIZE = 100


def suite_conjunction(rng: np.random.Generator, index: int) -> Conjunction:
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    chaser_center = rng.uniform(-50.0, 50.0, size=3)
    target_center = chaser_center + rng.uniform(0.0, 50.0) * direction
    return Conjunction(
        id=f"suite-{index:04d}",
        chaser=Ellipsoid.from_covariance(chaser_center, random_covariance(rng)),
        target=Ellipsoid.from_covariance(target_center, random_covariance(rng)),
        chaser_radius=float(rng.uniform(0.0, 0.05)),
        target_radius=float(rng.uniform(0.0, 0.05)),
    )


@dataclass(frozen=True)
class SuiteCase:
    conjunction: Conjunction
    report: OverlapReport
    # 接触寸前の組では None
    oracle: Optional[MarginResult]

    @property
    def near_tangent(self) -> bool:
        return is_near_tangent(self.report)


@dataclass(frozen=True)
class SuiteRun:
    results: List[MarginResult]
    elapsed: float


def timed_run(solver, cases: List[SuiteCase]) -> SuiteRun:
    start = time.perf_counter()
    results = [solver(case.conjunction) for case in cases]
    return SuiteRun(results=results, elapsed=time.perf_counter() - start)


def alternating_distance(c: Conjunction, start, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """start から交互射影を行い、最終的な2楕円体間の距離を返す"""
    to_chaser = EllipsoidProjector(c.chaser)
    to_target = EllipsoidProjector(c.target)
    x = np.asarray(start, dtype=float)
    for _ in range(max_iter):
        x_next = to_chaser.project(to_target.project(x))
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        if step <= tol:
            break
    return float(np.linalg.norm(x - to_target.project(x)))


@pytest.fixture(scope="session")
def acceptance_suite() -> List[SuiteCase]:
    rng = np.random.default_rng(SUITE_SEED)
    cases = []
    for i in range(SUITE_SIZE):
        c = suite_conjunction(rng, i)
        report = overlap_test(c)
        oracle = None if is_near_tangent(report) else solve_oracle(c)
        cases.append(SuiteCase(conjunction=c, report=report, oracle=oracle))
    return cases


@pytest.fixture(scope="session")
def fw_suite_run(acceptance_suite) -> SuiteRun:
    return timed_run(solve_fw, acceptance_suite)


@pytest.fixture(scope="session")
def fista_suite_run(acceptance_suite) -> SuiteRun:
    return timed_run(solve_fista, acceptance_suite[:FISTA_SUITE_SIZE])
