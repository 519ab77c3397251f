"""
Conjunction I/O
===============

コンジャンクションCSVの読み込み・書き出し、スクリーニングレポート出力、
分散モード用の楕円体ファイル読み込み

CSVヘッダー（完全一致）:
  id,cx,cy,cz,cxx,cxy,cxz,cyy,cyz,czz,tx,ty,tz,txx,txy,txz,tyy,tyz,tzz,cr,tr,risk
位置は km、共分散は km²（Σ の上三角、Σ⁻¹ ではない）、半径は km、risk は空欄可
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, List, Union

from pydantic import TypeAdapter, ValidationError

from ellipsoid_margin.errors import MarginError, NotPositiveDefinite, SchemaError
from ellipsoid_margin.geometry import Conjunction, Ellipsoid
from ellipsoid_margin.linalg3 import sym_from_upper, upper_entries
from margin_solvers.base_margin_solver import ScreeningRow

logger = logging.getLogger(__name__)

CSV_HEADER = ["id", "cx", "cy", "cz", "cxx", "cxy", "cxz", "cyy", "cyz", "czz",
              "tx", "ty", "tz", "txx", "txy", "txz", "tyy", "tyz", "tzz", "cr", "tr", "risk"]

REPORT_COLUMNS = list(ScreeningRow.model_fields.keys())

_ROWS = TypeAdapter(List[ScreeningRow])

PathLike = Union[str, Path]


@dataclass(frozen=True)
class RowRejection:
    """取り込みを拒否した行"""

    line: int
    id: str
    error: str


@dataclass
class IngestResult:
    """CSV取り込み結果"""

    conjunctions: List[Conjunction] = field(default_factory=list)
    rejections: List[RowRejection] = field(default_factory=list)


def _parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ValueError(f"column '{name}' is not a number: {text!r}") from e
    if not math.isfinite(value):
        raise ValueError(f"column '{name}' must be finite: {text!r}")
    return value


def _ellipsoid(record: dict, prefix: str, line: int) -> Ellipsoid:
    names = [f"{prefix}{axis}" for axis in "xyz"]
    cov_names = [f"{prefix}{pair}" for pair in ("xx", "xy", "xz", "yy", "yz", "zz")]
    center = [_parse_float(record[n], n) for n in names]
    covariance = sym_from_upper(*(_parse_float(record[n], n) for n in cov_names))
    try:
        return Ellipsoid.from_covariance(center, covariance)
    except NotPositiveDefinite as e:
        raise NotPositiveDefinite(pivot=e.pivot, row=line, detail=f"{prefix} covariance") from e


def parse_row(record: dict, line: int) -> Conjunction:
    """
    CSV 1行をコンジャンクションへ変換

    Raises:
        NotPositiveDefinite: 共分散が正定値でない場合（行番号つき）
        ValueError: 数値・値域の不正
    """
    risk_text = (record.get("risk") or "").strip()
    try:
        return Conjunction(
            id=record["id"],
            chaser=_ellipsoid(record, "c", line),
            target=_ellipsoid(record, "t", line),
            chaser_radius=_parse_float(record["cr"], "cr"),
            target_radius=_parse_float(record["tr"], "tr"),
            risk=_parse_float(risk_text, "risk") if risk_text else None,
        )
    except ValidationError as e:
        raise ValueError(e.errors()[0]["msg"]) from e


def read_conjunctions(stream: IO[str]) -> IngestResult:
    """
    ストリームからコンジャンクションを読み込む

    ヘッダー不一致は SchemaError、行単位のエラーは rejections に記録して続行する。

    Raises:
        SchemaError: ヘッダーが一致しない・列数が合わない場合
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise SchemaError("missing header", line=1)
    if [h.strip() for h in header] != CSV_HEADER:
        raise SchemaError(f"header must be '{','.join(CSV_HEADER)}'", line=1)

    result = IngestResult()
    for values in reader:
        line = reader.line_num
        if not values or all(not v.strip() for v in values):
            continue
        if len(values) != len(CSV_HEADER):
            raise SchemaError(f"expected {len(CSV_HEADER)} columns, got {len(values)}", line=line)
        record = dict(zip(CSV_HEADER, values))
        try:
            result.conjunctions.append(parse_row(record, line))
        except (MarginError, ValueError) as e:
            logger.warning(f"行 {line} を拒否 ({record['id']}): {e}")
            result.rejections.append(RowRejection(line=line, id=record["id"], error=str(e)))

    logger.info(f"CSV取り込み完了: {len(result.conjunctions)}件, 拒否: {len(result.rejections)}件")
    return result


def ingest_csv(path: PathLike) -> IngestResult:
    """
    コンジャンクションCSVファイルを読み込む

    Args:
        path: CSVファイルパス

    Returns:
        IngestResult: 取り込み成功分と拒否行
    """
    with open(path, newline="", encoding="utf-8") as f:
        return read_conjunctions(f)


def _conjunction_record(c: Conjunction) -> List[str]:
    values: List[object] = [c.id]
    for e in (c.chaser, c.target):
        values.extend(float(v) for v in e.center)
        values.extend(upper_entries(e.covariance()))
    values.extend([c.chaser_radius, c.target_radius, "" if c.risk is None else c.risk])
    return [v if isinstance(v, str) else repr(float(v)) for v in values]


def write_csv(conjunctions: Iterable[Conjunction], path: PathLike) -> None:
    """コンジャンクションをCSVへ書き出す（浮動小数点は往復可能な表現）"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in conjunctions:
            writer.writerow(_conjunction_record(c))


def _report_rows(rows: Iterable[ScreeningRow], deterministic: bool) -> List[ScreeningRow]:
    if not deterministic:
        return list(rows)
    return [row.model_copy(update={"wall_time": None}) for row in rows]


def render_report_csv(rows: Iterable[ScreeningRow], deterministic: bool = False) -> str:
    """スクリーニングレポートをCSV文字列へ変換"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in _report_rows(rows, deterministic):
        data = row.model_dump(mode="json")
        writer.writerow({k: "" if v is None else v for k, v in data.items()})
    return buffer.getvalue()


def render_report_json(rows: Iterable[ScreeningRow], deterministic: bool = False) -> str:
    """スクリーニングレポートをJSON配列へ変換"""
    return _ROWS.dump_json(_report_rows(rows, deterministic), indent=2).decode("utf-8") + "\n"


def render_report(rows: Iterable[ScreeningRow], output: str = "csv", deterministic: bool = False) -> str:
    """
    レポート出力

    Args:
        rows: スクリーニング行
        output: "csv" または "json"
        deterministic: True なら wall_time を出力しない
    """
    if output == "csv":
        return render_report_csv(rows, deterministic)
    if output == "json":
        return render_report_json(rows, deterministic)
    raise ValueError(f"Invalid output format '{output}'. Use 'csv' or 'json'.")


def read_ellipsoid_file(path: PathLike) -> Ellipsoid:
    """
    4行形式の楕円体ファイルを読み込む

    1行目: 中心 (km)
    2〜4行目: 共分散の各行 (km²)
    空白またはカンマ区切り、'#' 以降はコメント

    Raises:
        SchemaError: 形式不正
        NotPositiveDefinite: 共分散が正定値でない場合
    """
    rows: List[List[float]] = []
    with open(path, encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.split("#", 1)[0].replace(",", " ").strip()
            if not text:
                continue
            try:
                values = [float(v) for v in text.split()]
            except ValueError as e:
                raise SchemaError(f"not a number: {text!r}", line=number) from e
            if len(values) != 3:
                raise SchemaError(f"expected 3 values, got {len(values)}", line=number)
            rows.append(values)

    if len(rows) != 4:
        raise SchemaError(f"expected 4 lines (center + 3 covariance rows), got {len(rows)}")
    return Ellipsoid.from_covariance(rows[0], rows[1:])


def render_sweep_csv(entries) -> str:
    """
    σスイープ結果をCSV文字列へ変換

    Args:
        entries: (id, sigma, MarginResult) の反復
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["id", "sigma", "margin", "converged", "overlap", "iterations"])
    for conjunction_id, sigma, result in entries:
        writer.writerow([conjunction_id, repr(float(sigma)), repr(result.margin),
                         result.converged, result.overlap, result.iterations])
    return buffer.getvalue()
