import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

VERSION = "0.1.0"

NN_MAX_N = 5
RELAXATION_MAX_N = 30
DEFAULT_WORKERS = int(os.getenv("GDNN_WORKERS", "1"))

CRITICAL = "critical"
WARNING = "warning"
INFO = "info"

SKIPPED = "skipped"
FAILED = "failed"


class Rejected(ValueError):
    pass


@dataclass
class ExperimentReport:
    id: str
    kind: str
    seed: int
    records: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    findings: List[Dict[str, Any]] = field(default_factory=list)
    version: str = VERSION
    params: Optional[Dict[str, Any]] = None

    def add_finding(self, severity: str, category: str, message: str):
        self.findings.append({"severity": severity, "category": category, "message": message})

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "seed": self.seed,
            "records": self.records,
            "summary": self.summary,
            "findings": self.findings,
            "version": self.version,
            "params": self.params,
        }
