import json
import os
import sqlite3
from typing import List, Optional

from harness.io import to_jsonable
from harness.models import VERSION, ExperimentReport

DB_PATH = os.getenv("GDNN_REPORT_DB", "gdnn_reports.db")


def init_db():
    conn = sqlite3.connect(DB_PATH)
    c = conn.cursor()
    c.execute(
        """
        CREATE TABLE IF NOT EXISTS experiment_report (
            id TEXT PRIMARY KEY,
            data TEXT
        )
    """
    )
    conn.commit()
    conn.close()


init_db()


def save_report(report: ExperimentReport):
    conn = sqlite3.connect(DB_PATH)
    c = conn.cursor()
    c.execute(
        "REPLACE INTO experiment_report (id, data) VALUES (?, ?)",
        (report.id, json.dumps(to_jsonable(report.to_dict()))),
    )
    conn.commit()
    conn.close()


def load_report(report_id: str) -> Optional[ExperimentReport]:
    conn = sqlite3.connect(DB_PATH)
    c = conn.cursor()
    c.execute("SELECT data FROM experiment_report WHERE id = ?", (report_id,))
    row = c.fetchone()
    conn.close()

    if not row:
        return None

    raw = json.loads(row[0])
    # reports written before findings and params existed
    raw.setdefault("records", [])
    raw.setdefault("summary", {})
    raw.setdefault("findings", [])
    raw.setdefault("version", VERSION)
    raw.setdefault("params", None)
    return ExperimentReport(**raw)


def list_reports() -> List[dict]:
    conn = sqlite3.connect(DB_PATH)
    c = conn.cursor()
    c.execute("SELECT id, data FROM experiment_report ORDER BY id")
    rows = c.fetchall()
    conn.close()

    out = []
    for report_id, data in rows:
        raw = json.loads(data)
        out.append({
            "id": report_id,
            "kind": raw.get("kind"),
            "seed": raw.get("seed"),
            "findings": len(raw.get("findings", [])),
        })
    return out
