import json

import numpy as np
import pytest

from conftest import random_conjunction, sphere_conjunction, write_ellipsoid_file
from conjunction_io import (CSV_HEADER, REPORT_COLUMNS, ingest_csv, read_ellipsoid_file, render_report,
                            render_sweep_csv, write_csv)
from ellipsoid_margin.errors import NotPositiveDefinite, SchemaError
from ellipsoid_margin.frank_wolfe import solve_fw
from margin_solvers.base_margin_solver import ScreeningRow

HEADER = ",".join(CSV_HEADER)
SPHERE_ROW = "s1,0,0,0,1,0,0,1,0,1,3,0,0,1,0,0,1,0,1,0.01,0.02,-4.5"


def write_lines(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestIngest:
    def test_reads_sphere_row(self, tmp_path):
        result = ingest_csv(write_lines(tmp_path / "in.csv", HEADER, SPHERE_ROW))
        assert not result.rejections
        c = result.conjunctions[0]
        assert c.id == "s1"
        np.testing.assert_allclose(c.target.center, [3.0, 0.0, 0.0])
        np.testing.assert_allclose(c.chaser.shape, np.eye(3))
        assert c.chaser_radius == pytest.approx(0.01)
        assert c.risk == pytest.approx(-4.5)

    def test_blank_risk(self, tmp_path):
        row = SPHERE_ROW.rsplit(",", 1)[0] + ","
        c = ingest_csv(write_lines(tmp_path / "in.csv", HEADER, row)).conjunctions[0]
        assert c.risk is None

    def test_header_mismatch(self, tmp_path):
        with pytest.raises(SchemaError):
            ingest_csv(write_lines(tmp_path / "in.csv", HEADER.replace("cxx", "sxx"), SPHERE_ROW))

    def test_missing_header(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(SchemaError):
            ingest_csv(path)

    def test_column_count(self, tmp_path):
        with pytest.raises(SchemaError) as info:
            ingest_csv(write_lines(tmp_path / "in.csv", HEADER, SPHERE_ROW + ",extra"))
        assert info.value.line == 2

    def test_non_spd_row_rejected_with_line(self, tmp_path):
        bad = "bad,0,0,0,1,0,0,1,0,-1,3,0,0,1,0,0,1,0,1,0,0,"
        result = ingest_csv(write_lines(tmp_path / "in.csv", HEADER, SPHERE_ROW, bad, SPHERE_ROW.replace("s1", "s3")))
        assert [c.id for c in result.conjunctions] == ["s1", "s3"]
        assert len(result.rejections) == 1
        rejection = result.rejections[0]
        assert rejection.id == "bad"
        assert rejection.line == 3
        assert "line 3" in rejection.error

    def test_non_numeric_rejected(self, tmp_path):
        bad = SPHERE_ROW.replace("s1,0,0,0", "s2,zero,0,0")
        result = ingest_csv(write_lines(tmp_path / "in.csv", HEADER, bad))
        assert "cx" in result.rejections[0].error

    def test_positive_risk_rejected(self, tmp_path):
        bad = SPHERE_ROW.replace("-4.5", "0.5")
        assert len(ingest_csv(write_lines(tmp_path / "in.csv", HEADER, bad)).rejections) == 1

    def test_write_then_read_preserves_values(self, tmp_path, rng):
        originals = [random_conjunction(rng, i) for i in range(5)]
        path = tmp_path / "out.csv"
        write_csv(originals, path)
        loaded = ingest_csv(path).conjunctions
        for a, b in zip(originals, loaded):
            np.testing.assert_array_equal(a.chaser.center, b.chaser.center)
            np.testing.assert_allclose(a.target.covariance(), b.target.covariance(), rtol=1e-9, atol=1e-12)


class TestReport:
    def _rows(self):
        c = sphere_conjunction(3.0, conjunction_id="r1", chaser_radius=0.5, target_radius=0.6)
        return [ScreeningRow.from_result(c, solve_fw(c), wall_time_ms=1.25)]

    def test_csv_columns(self):
        text = render_report(self._rows(), "csv")
        header, row = text.splitlines()
        assert header.split(",") == REPORT_COLUMNS
        assert row.startswith("r1,3.0,")

    def test_deterministic_drops_wall_time(self):
        data = json.loads(render_report(self._rows(), "json", deterministic=True))
        assert data[0]["wall_time"] is None
        assert data[0]["concern"] is True

    def test_json_keeps_wall_time(self):
        assert json.loads(render_report(self._rows(), "json"))[0]["wall_time"] == pytest.approx(1.25)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(self._rows(), "xml")

    def test_sweep_csv(self, unit_spheres_3km):
        text = render_sweep_csv([("u", 3.0, solve_fw(unit_spheres_3km))])
        assert text.splitlines()[0] == "id,sigma,margin,converged,overlap,iterations"
        assert text.splitlines()[1].startswith("u,3.0,")


class TestEllipsoidFile:
    def test_round_trip(self, tmp_path, rng):
        e = random_conjunction(rng).chaser
        path = tmp_path / "e.txt"
        write_ellipsoid_file(e, path, comment="chaser")
        loaded = read_ellipsoid_file(path)
        np.testing.assert_array_equal(loaded.center, e.center)
        np.testing.assert_allclose(loaded.covariance(), e.covariance(), rtol=1e-9, atol=1e-12)

    def test_comments_and_commas(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("# own ellipsoid\n1, 2, 3\n4 0 0  # xx\n0 1 0\n0 0 9\n", encoding="utf-8")
        e = read_ellipsoid_file(path)
        np.testing.assert_allclose(e.center, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(sorted(e.semi_axes()), [1.0, 2.0, 3.0])

    def test_wrong_line_count(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0 0 0\n1 0 0\n0 1 0\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            read_ellipsoid_file(path)

    def test_wrong_width(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0 0\n1 0 0\n0 1 0\n0 0 1\n", encoding="utf-8")
        with pytest.raises(SchemaError) as info:
            read_ellipsoid_file(path)
        assert info.value.line == 1

    def test_not_spd(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0 0 0\n1 0 0\n0 -1 0\n0 0 1\n", encoding="utf-8")
        with pytest.raises(NotPositiveDefinite):
            read_ellipsoid_file(path)
