"""Run reports and their storage."""

import dataclasses
import json
import logging
import os
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..core.measure import format_fraction

logger = logging.getLogger(__name__)


def jsonable(value: Any) -> Any:
    """Convert results into plain JSON values; rationals become "num/den" strings."""
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return jsonable(dataclasses.asdict(value))
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


class Report(BaseModel):
    """Outcome of one command.

    `verdicts` maps every asserted check to its outcome; the inputs of each
    check, both sides of an inequality included, sit under `results`.
    `rows` holds curve points for CSV output.
    """

    command: str
    config: Dict[str, Any]
    passed: bool = True
    verdicts: Dict[str, bool] = Field(default_factory=dict)
    results: Dict[str, Any] = Field(default_factory=dict)
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    error: Optional[str] = None
    wall_time: Optional[float] = None

    def record(self, name: str, holds: bool, details: Any = None) -> bool:
        """Store a verdict and its details; a failing verdict fails the report."""
        self.verdicts[name] = bool(holds)
        if details is not None:
            self.results[name] = jsonable(details)
        if not holds:
            self.passed = False
            logger.warning(f"Check {name} failed")
        return bool(holds)

    def to_json(self) -> str:
        data = jsonable(self.model_dump(exclude_none=True))
        return json.dumps(data, sort_keys=True, indent=2) + "\n"

    def to_dataframe(self) -> pd.DataFrame:
        """Curve rows flattened into columns such as `plain.mean`."""
        if not self.rows:
            return pd.DataFrame({"check": list(self.verdicts), "holds": list(self.verdicts.values())})
        frame = pd.json_normalize(jsonable(self.rows))
        return frame[sorted(frame.columns)]

    def render(self, fmt: str = "json") -> str:
        if fmt == "csv":
            return self.to_dataframe().to_csv(index=False)
        return self.to_json()


class ReportWriter:
    """Stores reports under passed/ and failed/ sub-directories."""

    def __init__(self, report_dir: Optional[str] = None):
        """Initialize the writer.

        Args:
            report_dir: Directory to store reports. Defaults to './reports'
        """
        self.report_dir = report_dir or os.path.join(os.getcwd(), "reports")
        self.passed_dir = os.path.join(self.report_dir, "passed")
        self.failed_dir = os.path.join(self.report_dir, "failed")
        os.makedirs(self.passed_dir, exist_ok=True)
        os.makedirs(self.failed_dir, exist_ok=True)

    def save(self, report: Report, name: Optional[str] = None, fmt: str = "json") -> str:
        """Write a report and return its path.

        Args:
            report: The report
            name: File stem; defaults to the command and a timestamp
            fmt: "json" or "csv"
        """
        stem = name or f"{report.command}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        stem = "".join(c if c.isalnum() or c in "-_" else "_" for c in stem)
        save_dir = self.passed_dir if report.passed else self.failed_dir
        save_path = os.path.join(save_dir, f"{stem}.{fmt}")
        try:
            with open(save_path, "w") as f:
                f.write(report.render(fmt))
            logger.info(f"Saved report to {save_path}")
            return save_path
        except OSError as e:
            logger.error(f"Failed to save report: {e}")
            raise

    def list_reports(self, passed_only: bool = False) -> List[str]:
        dirs = [self.passed_dir] if passed_only else [self.passed_dir, self.failed_dir]
        return sorted(os.path.join(d, f) for d in dirs for f in os.listdir(d))
