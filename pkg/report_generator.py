# report_generator.py
"""
Module for writing experiment outputs: ratio report CSVs, instance and
bounds JSON files, and markdown summaries of runs and sweeps.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from benchmarks import REPORT_COLUMNS, RatioReport
from core import JobInstance, format_time


class ReportGenerator:
    """Writes deterministic CSV / JSON / markdown outputs into one directory"""

    def __init__(self, output_dir: str = "results"):
        self.logger = logging.getLogger(__name__)
        self.reports_dir = Path(output_dir)
        self.reports_dir.mkdir(parents=True, exist_ok=True)

    def build_frame(self, rows: List[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Rows to a DataFrame with a fixed column order"""
        if columns is None:
            columns = list(rows[0].keys()) if rows else list(REPORT_COLUMNS)
        return pd.DataFrame(rows, columns=list(columns))

    def save_csv(self, rows: List[Dict[str, Any]], filename: str, columns: Optional[Sequence[str]] = None) -> Path:
        path = self.reports_dir / filename
        frame = self.build_frame(rows, columns)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
        self.logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def load_csv(self, filename: str) -> pd.DataFrame:
        return pd.read_csv(self.reports_dir / filename, dtype=str, keep_default_na=False)

    def save_json(self, data: Dict[str, Any], filename: str) -> Path:
        path = self.reports_dir / filename
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.logger.info(f"Wrote {path}")
        return path

    def save_trace(self, report: RatioReport, filename: str) -> Path:
        """Events, completions and a readable timeline of one policy run"""
        data = {
            "instance_id": report.instance_id,
            "policy": report.policy.to_dict(),
            "policy_total": format_time(report.policy_total),
            **report.trace.to_dict(),
            "timeline": report.trace.timeline().splitlines(),
        }
        return self.save_json(data, filename)

    def save_instance(self, instance: JobInstance, name: str) -> Path:
        path = self.reports_dir / f"{name}.json"
        path.write_text(instance.to_json(), encoding="utf-8")
        self.logger.info(f"Wrote instance with {instance.n} jobs to {path}")
        return path

    def summarize(self, rows: List[Dict[str, Any]]) -> pd.DataFrame:
        """Per-policy ratio statistics (decimal ratios; exact values stay in the CSV)"""
        if not rows:
            return pd.DataFrame(columns=["policy", "rows", "min", "mean", "max", "violations", "errors"])
        frame = self.build_frame(rows)
        ratios = pd.to_numeric(frame["ratio_decimal"], errors="coerce")
        frame = frame.assign(ratio=ratios, violated=~frame["bound_ok"].astype(bool), failed=frame["error"] != "")
        summary = []
        for policy, group in frame.groupby("policy_json", sort=True):
            values = group["ratio"].dropna().to_numpy(dtype=float)
            summary.append({
                "policy": policy,
                "rows": len(group),
                "min": float(np.min(values)) if values.size else float("nan"),
                "mean": float(np.mean(values)) if values.size else float("nan"),
                "max": float(np.max(values)) if values.size else float("nan"),
                "violations": int((group["violated"] & ~group["failed"]).sum()),
                "errors": int(group["failed"].sum()),
            })
        return pd.DataFrame(summary)

    def generate_markdown_summary(self, rows: List[Dict[str, Any]], title: str) -> str:
        """Generate a markdown summary for quick viewing"""
        summary = self.summarize(rows)

        md = f"# {title}\n\n"
        md += f"- **Rows**: {len(rows)}\n"
        md += f"- **Bound violations**: {int(summary['violations'].sum()) if len(summary) else 0}\n"
        md += f"- **Errors**: {int(summary['errors'].sum()) if len(summary) else 0}\n\n"

        md += "## Ratios by Policy\n\n"
        md += "| Policy | Rows | Min | Mean | Max | Violations | Errors |\n"
        md += "|--------|------|-----|------|-----|------------|--------|\n"
        for _, row in summary.iterrows():
            md += (
                f"| `{row['policy']}` | {row['rows']} | {row['min']:.4f} | {row['mean']:.4f} | "
                f"{row['max']:.4f} | {row['violations']} | {row['errors']} |\n"
            )
        md += "\n"

        flagged = [r for r in rows if not r.get("bound_ok", True)]
        if flagged:
            md += "## Failed Rows\n\n"
            for r in flagged:
                reason = r["error"] or f"ratio {r['ratio_num']}/{r['ratio_den']} exceeds {r['bound_name']} bound {r['claimed_bound']}"
                md += f"- **{r['instance_id']}** `{r['policy_json']}`: {reason}\n"
        return md

    def save_markdown(self, rows: List[Dict[str, Any]], filename: str, title: str) -> Path:
        path = self.reports_dir / filename
        path.write_text(self.generate_markdown_summary(rows, title), encoding="utf-8")
        self.logger.info(f"Markdown summary saved to {path}")
        return path
