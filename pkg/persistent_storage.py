"""Persistent storage module for tinv verification reports."""

import json
import logging
from datetime import datetime
from pathlib import Path

import pandas as pd

from config import REPORTS_DIR
from verifier import VerificationReport

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["created_at", "model", "property", "verdict", "glue", "heuristics", "solver", "t", "t_solver"]


class ReportStorage:
    """Handle persistent storage of verification reports."""

    def __init__(self, data_dir=REPORTS_DIR):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

        # File paths
        self.reports_file = self.data_dir / "reports.json"
        self.metadata_file = self.data_dir / "metadata.json"

    def _read(self):
        if not self.reports_file.exists():
            return []
        try:
            with open(self.reports_file, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"❌ Error loading reports: {e}")
            return []

    def save_report(self, report):
        """Append one report to the archive."""
        records = self._read()
        records.append(report.to_dict())
        try:
            with open(self.reports_file, 'w', encoding='utf-8') as f:
                json.dump(records, f, ensure_ascii=False, indent=2, default=str)
        except OSError as e:
            logger.error(f"❌ Error saving report: {e}")
            return False
        self.save_metadata({"reports": len(records)})
        logger.info(f"✅ Report for {report.property} saved to {self.reports_file}")
        return True

    def load_reports(self):
        """All archived reports, oldest first."""
        return [VerificationReport.from_dict(r) for r in self._read()]

    def load_frame(self):
        """Archived reports as a DataFrame, one row per run."""
        rows = []
        for r in self._read():
            timings = r.get("timings") or {}
            rows.append({
                "created_at": r.get("created_at"),
                "model": Path(r.get("model", "")).name,
                "property": r.get("property"),
                "verdict": r.get("verdict"),
                "glue": ",".join(r.get("glue") or []) or "none",
                "heuristics": ",".join(r.get("heuristics") or []) or "none",
                "solver": r.get("solver"),
                "t": sum(timings.values()),
                "t_solver": timings.get("check", 0.0),
            })
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def save_metadata(self, metadata):
        """Save metadata (last updated, counts)."""
        try:
            metadata['last_updated'] = datetime.now().isoformat()
            with open(self.metadata_file, 'w', encoding='utf-8') as f:
                json.dump(metadata, f, ensure_ascii=False, indent=2, default=str)
            return True
        except OSError as e:
            logger.error(f"❌ Error saving metadata: {e}")
            return False

    def load_metadata(self):
        if self.metadata_file.exists():
            try:
                with open(self.metadata_file, 'r', encoding='utf-8') as f:
                    return json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                logger.error(f"❌ Error loading metadata: {e}")
        return {}

    def clear_all_data(self):
        """Remove every archived report."""
        try:
            for file_path in (self.reports_file, self.metadata_file):
                if file_path.exists():
                    file_path.unlink()
            return True
        except OSError as e:
            logger.error(f"❌ Error clearing data: {e}")
            return False

    def has_stored_data(self):
        return self.reports_file.exists() and self.reports_file.stat().st_size > 0
