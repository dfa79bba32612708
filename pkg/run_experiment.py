"""Script to run a batch of experiments from an experiments/*.json file."""

import json
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from main import setup_logging
from stochastic_lifts.config import get_settings
from stochastic_lifts.experimentation.config import ExperimentConfig
from stochastic_lifts.experimentation.report import ReportWriter
from stochastic_lifts.experimentation.runner import EXIT_INPUT, run

DEFAULT_BATCH = "experiments/acceptance.json"


def load_batch(path: str) -> Dict[str, Any]:
    with open(path) as f:
        batch = json.load(f)
    if not isinstance(batch.get("runs"), list):
        raise ValueError(f"Batch {path} has no list of runs")
    return batch


def run_batch(path: str, report_dir: Optional[str] = None) -> pd.DataFrame:
    """Run every entry of a batch and store each report.

    Args:
        path: Batch file with a "runs" list of experiment configs
        report_dir: Where reports go (default: ./reports/<batch name>)

    Returns:
        One summary row per run
    """
    batch = load_batch(path)
    writer = ReportWriter(report_dir or f"reports/{batch.get('name', 'batch')}")
    rows: List[Dict[str, Any]] = []
    for i, entry in enumerate(batch["runs"]):
        name = entry.get("name") or f"{i:02d}_{entry.get('command', 'unknown')}"
        try:
            config = ExperimentConfig.model_validate(entry)
        except ValidationError as e:
            print(f"Skipping {name}: {e}")
            rows.append({"run": name, "command": entry.get("command"), "exit_code": EXIT_INPUT, "checks": 0, "failed": 0})
            continue
        print(f"\nRunning {name}")
        report, code = run(config)
        writer.save(report, name=name, fmt=config.format)
        rows.append({
            "run": name,
            "command": config.command,
            "exit_code": code,
            "checks": len(report.verdicts),
            "failed": sum(not v for v in report.verdicts.values()),
        })
    return pd.DataFrame(rows)


if __name__ == "__main__":
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_dir)
    summary = run_batch(sys.argv[1] if len(sys.argv) > 1 else DEFAULT_BATCH)
    print("\n=== Batch Results ===")
    print(summary.to_string(index=False))
    sys.exit(int(summary["exit_code"].max()) if len(summary) else 0)
