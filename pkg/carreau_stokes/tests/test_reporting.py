"""
Tests for CSV tables, SVG plots and metadata files
"""

import math
import xml.etree.ElementTree as ET

import pytest
import yaml

from ..harness import series_eocs
from ..manufactured import eoc
from ..reporting import (CSV_HEADER, emit_csv, emit_loglog_svg, format_csv, read_csv, reference_slope,
                         write_metadata)
from ..stokes_types import ConvergenceReport, ConvergenceRow, ReportError, RunStatus

SVG = "{http://www.w3.org/2000/svg}"


def _row(level, h, err, status=RunStatus.OK):
    return ConvergenceRow(level=level, h=h, ndof_u=10 * level, ndof_p=level, ndof_t=5 * level, iters=3,
                          err_u_l2=err / 10, err_u_w1s=err, err_pi=2 * err, err_t_h1=err,
                          status=status)


@pytest.fixture
def two_level_report():
    return ConvergenceReport(case="test1", p=1.6, sigma=0.0, degree=2,
                             rows=[_row(2, 0.5, 1e-2), _row(4, 0.25, 2.5e-3)])


@pytest.fixture
def three_level_report():
    report = ConvergenceReport(case="test1", p=1.6, sigma=0.0, degree=2,
                               rows=[_row(8, 0.17677669529663687, 3.1e-3),
                                     _row(16, 0.088388347648318433, 8.2e-4),
                                     _row(32, 0.044194173824159216, 2.05e-4)])
    report.eocs = series_eocs(report.rows)
    return report


class TestCsv:
    def test_header(self):
        row = ConvergenceRow(level=2, h=0.5, ndof_u=50, ndof_p=9, ndof_t=25, iters=3, err_u_l2=0.25,
                             err_u_w1s=0.5, err_pi=0.125, err_t_h1=0.0625)
        report = ConvergenceReport(case="test1", p=1.6, sigma=0.0, degree=2, rows=[row])
        lines = format_csv(report).splitlines()
        assert CSV_HEADER == "level,h,ndof_u,ndof_p,ndof_t,iters,err_u_l2,err_u_w1s,err_pi,err_t_h1"
        assert lines[0] == CSV_HEADER + ",status"
        assert lines[1] == "2,0.5,50,9,25,3,0.25,0.5,0.125,0.0625,0"

    def test_failed_row_written_as_nan(self):
        failed = ConvergenceRow(level=8, h=0.25, ndof_u=1, ndof_p=1, ndof_t=1, iters=100,
                                status=RunStatus.NON_CONVERGENCE)
        report = ConvergenceReport(case="test2", p=1.2, sigma=0.0, degree=2, rows=[failed])
        assert format_csv(report).splitlines()[1] == "8,0.25,1,1,1,100,NaN,NaN,NaN,NaN,1"

    def test_round_trip(self, three_level_report, tmp_path):
        path = tmp_path / "series.csv"
        emit_csv(three_level_report, path)
        rows = read_csv(path)
        assert [r.level for r in rows] == [8, 16, 32]
        assert [r.err_u_w1s for r in rows] == [r.err_u_w1s for r in three_level_report.rows]
        assert all(r.status == RunStatus.OK for r in rows)

    def test_orders_recomputed_from_file(self, three_level_report, tmp_path):
        path = tmp_path / "series.csv"
        emit_csv(three_level_report, path)
        rows = read_csv(path)
        for family, orders in three_level_report.eocs.items():
            recomputed = eoc([r.error(family) for r in rows], [r.h for r in rows])
            assert max(abs(a - b) for a, b in zip(orders, recomputed)) <= 1e-12

    def test_nan_round_trip(self, tmp_path):
        failed = ConvergenceRow(level=4, h=0.5, ndof_u=1, ndof_p=1, ndof_t=1, iters=0,
                                status=RunStatus.SINGULAR)
        path = tmp_path / "failed.csv"
        emit_csv(ConvergenceReport(case="test1", p=1.6, sigma=0.0, degree=2, rows=[failed]), path)
        row = read_csv(path)[0]
        assert math.isnan(row.err_pi)
        assert row.status == RunStatus.SINGULAR

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("level,h\n1,0.5\n")
        with pytest.raises(ReportError, match="missing columns"):
            read_csv(path)


class TestSvg:
    def test_two_level_plot(self, two_level_report, tmp_path):
        path = tmp_path / "plot.svg"
        emit_loglog_svg(two_level_report, path)
        root = ET.parse(path).getroot()
        assert root.tag == f"{SVG}svg"

        families = [p.get("data-family") for p in root.iter(f"{SVG}polyline") if p.get("class") == "family"]
        assert families == ["err_u_l2", "err_u_w1s", "err_pi", "err_t_h1"]
        references = [p for p in root.iter(f"{SVG}polyline") if p.get("class") == "reference"]
        assert len(references) == 1
        assert references[0].get("stroke-dasharray")

        texts = list(root.iter(f"{SVG}text"))
        slope = [t.text for t in texts if t.get("class") == "slope"]
        assert slope == ["slope 2.00"]
        xticks = [int(t.get("data-exponent")) for t in texts if t.get("class") == "xtick"]
        yticks = [int(t.get("data-exponent")) for t in texts if t.get("class") == "ytick"]
        assert xticks == [-1, 0]
        assert yticks == [-4, -3, -2, -1]

    def test_reference_series_sets_slope(self, two_level_report, three_level_report, tmp_path):
        path = tmp_path / "plot.svg"
        emit_loglog_svg(two_level_report, path, reference=three_level_report)
        expected = f"slope {reference_slope(three_level_report):.2f}"
        assert expected in path.read_text()

    def test_failed_rows_are_skipped(self, two_level_report, tmp_path):
        two_level_report.rows.append(ConvergenceRow(level=8, h=0.125, ndof_u=1, ndof_p=1, ndof_t=1,
                                                    iters=100, status=RunStatus.NON_CONVERGENCE))
        path = tmp_path / "plot.svg"
        emit_loglog_svg(two_level_report, path)
        assert "NaN" not in path.read_text()

    def test_needs_two_levels(self, tmp_path):
        report = ConvergenceReport(case="test1", p=1.6, sigma=0.0, degree=2, rows=[_row(2, 0.5, 1e-2)])
        with pytest.raises(ReportError):
            emit_loglog_svg(report, tmp_path / "plot.svg")
        assert not (tmp_path / "plot.svg").exists()

    def test_reference_slope(self, three_level_report):
        assert reference_slope(three_level_report) == pytest.approx(
            math.log(8.2e-4 / 2.05e-4) / math.log(2.0))


class TestMetadata:
    def test_yaml_is_plain(self, three_level_report, tmp_path):
        three_level_report.metadata = {"s": 2.0, "eoc": three_level_report.eocs,
                                       "missing": math.nan, "status": [0, 0, 0]}
        path = tmp_path / "series.meta.yaml"
        write_metadata(three_level_report, path)
        data = yaml.safe_load(path.read_text())
        assert data["label"] == "test1_P2_p1.6_sigma0"
        assert data["missing"] is None
        assert data["eoc"]["err_u_w1s"] == pytest.approx(three_level_report.eocs["err_u_w1s"])
        assert list(data)[:2] == ["label", "s"]
