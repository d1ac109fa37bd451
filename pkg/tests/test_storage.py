import logging

import pytest

from persistent_storage import REPORT_COLUMNS, ReportStorage
from verifier import Outcome, VerificationReport


@pytest.fixture
def storage(tmp_path):
    return ReportStorage(tmp_path / "data")


@pytest.fixture
def report():
    return VerificationReport(
        model="models/worker_controller_1.tinv",
        property="safe",
        verdict=Outcome.PROVED,
        timings={"reach": 0.5, "check": 0.25},
        glue=["e"],
    )


class TestReportStorage:
    @staticmethod
    def test_empty(storage):
        assert storage.load_reports() == []
        assert not storage.has_stored_data()
        assert list(storage.load_frame().columns) == REPORT_COLUMNS

    @staticmethod
    def test_save_and_load(storage, report):
        assert storage.save_report(report)
        assert storage.save_report(report)
        assert storage.load_reports() == [report, report]
        assert storage.has_stored_data()
        assert storage.load_metadata()["reports"] == 2

    @staticmethod
    def test_frame(storage, report):
        storage.save_report(report)
        row = storage.load_frame().iloc[0]
        assert row["model"] == "worker_controller_1.tinv"
        assert row["verdict"] == "PROVED"
        assert row["glue"] == "e"
        assert row["heuristics"] == "none"
        assert row["t"] == pytest.approx(0.75)
        assert row["t_solver"] == pytest.approx(0.25)

    @staticmethod
    def test_corrupt_file(storage, caplog):
        storage.reports_file.write_text("{not json", encoding="utf-8")
        with caplog.at_level(logging.ERROR):
            assert storage.load_reports() == []
        assert "Error loading reports" in caplog.text

    @staticmethod
    def test_clear(storage, report):
        storage.save_report(report)
        assert storage.clear_all_data()
        assert not storage.has_stored_data()
        assert storage.load_metadata() == {}
