# tests/test_report_generator.py
import unittest
import json
import math
import shutil
import tempfile
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from benchmarks import REPORT_COLUMNS, competitive_ratio, failed_report, srpt_reduced
from core import Stalled, make_instance
from policies import GIPP, SLQ, PolicySpec
from report_generator import ReportGenerator


class TestReportGenerator(unittest.TestCase):
    """Test suite for ReportGenerator"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.mkdtemp()
        self.generator = ReportGenerator(str(Path(self.tmp) / "out"))

        instance = make_instance(1, 2, [(0, 1, 1)])
        self.instance = instance
        self.rows = [
            competitive_ratio(PolicySpec(family=GIPP), instance, instance_id="one-job").to_row(),
            competitive_ratio(PolicySpec(family=SLQ), instance, instance_id="one-job").to_row(),
            failed_report(PolicySpec(family=SLQ), "broken", srpt_reduced(instance), Stalled("no progress")).to_row(),
        ]

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_output_dir_created(self):
        """Test the output directory is created on construction"""
        self.assertTrue(self.generator.reports_dir.is_dir())

    def test_save_csv_fixed_columns_and_newlines(self):
        """Test CSV output keeps column order and LF line endings"""
        path = self.generator.save_csv(self.rows, "report.csv", REPORT_COLUMNS)
        data = path.read_bytes()
        self.assertNotIn(b"\r\n", data)
        lines = data.decode("utf-8").splitlines()
        self.assertEqual(lines[0], ",".join(REPORT_COLUMNS))
        self.assertEqual(len(lines), 4)

        loaded = self.generator.load_csv("report.csv")
        self.assertEqual(list(loaded.columns), REPORT_COLUMNS)
        self.assertEqual(loaded.loc[0, "ratio_decimal"], "4.000000")
        self.assertEqual(loaded.loc[0, "bound_ok"], "True")
        self.assertEqual(loaded.loc[2, "policy_total"], "")

    def test_save_trace(self):
        """Test a policy run's trace is written with its timeline"""
        report = competitive_ratio(PolicySpec(family=GIPP), self.instance, instance_id="one-job")
        path = self.generator.save_trace(report, "gipp.trace.json")
        data = json.loads(path.read_text())
        self.assertEqual(data["instance_id"], "one-job")
        self.assertEqual(data["policy"], {"family": "gipp"})
        self.assertEqual(data["completions"], {"0": "4/1"})
        self.assertEqual(data["timeline"][0], report.trace.events[0].describe())
        self.assertEqual(len(data["events"]), len(report.trace.events))

    def test_save_csv_is_byte_stable(self):
        """Test saving the same rows twice gives identical bytes"""
        first = self.generator.save_csv(self.rows, "a.csv", REPORT_COLUMNS).read_bytes()
        second = self.generator.save_csv(self.rows, "b.csv", REPORT_COLUMNS).read_bytes()
        self.assertEqual(first, second)

    def test_empty_csv_has_header(self):
        """Test an empty report still writes the header"""
        path = self.generator.save_csv([], "empty.csv")
        self.assertEqual(path.read_text().strip(), ",".join(REPORT_COLUMNS))

    def test_save_json_and_instance(self):
        """Test JSON outputs are sorted, indented and newline terminated"""
        path = self.generator.save_json({"b": 1, "a": [1, 2]}, "data.json")
        text = path.read_text()
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(json.loads(text), {"a": [1, 2], "b": 1})

        instance_path = self.generator.save_instance(self.instance, "one-job")
        self.assertEqual(instance_path.name, "one-job.json")
        self.assertEqual(instance_path.read_text(), self.instance.to_json())

    def test_summarize(self):
        """Test per-policy statistics"""
        summary = self.generator.summarize(self.rows).set_index("policy")
        gipp = summary.loc[PolicySpec(family=GIPP).to_json()]
        slq = summary.loc[PolicySpec(family=SLQ).to_json()]
        self.assertEqual(gipp["rows"], 1)
        self.assertAlmostEqual(gipp["mean"], 4.0)
        self.assertEqual(gipp["violations"], 0)
        self.assertEqual(slq["rows"], 2)
        self.assertAlmostEqual(slq["max"], 3.0)
        self.assertEqual(slq["errors"], 1)
        self.assertEqual(slq["violations"], 0)

    def test_summarize_empty(self):
        """Test summary of no rows"""
        summary = self.generator.summarize([])
        self.assertEqual(len(summary), 0)
        self.assertIn("violations", summary.columns)

    def test_summarize_only_errors(self):
        """Test a policy without ratios gets NaN statistics"""
        summary = self.generator.summarize(self.rows[2:])
        self.assertTrue(math.isnan(summary.loc[0, "mean"]))

    def test_generate_markdown_summary(self):
        """Test markdown summary generation"""
        md = self.generator.generate_markdown_summary(self.rows, "One job")
        self.assertTrue(md.startswith("# One job\n"))
        self.assertIn("- **Rows**: 3", md)
        self.assertIn("- **Errors**: 1", md)
        self.assertIn("## Ratios by Policy", md)
        self.assertIn("## Failed Rows", md)
        self.assertIn("Stalled: no progress", md)

    def test_markdown_without_failures(self):
        """Test the failed section is omitted when every row passes"""
        md = self.generator.generate_markdown_summary(self.rows[:2], "Clean")
        self.assertNotIn("## Failed Rows", md)

        path = self.generator.save_markdown(self.rows[:2], "clean.md", "Clean")
        self.assertEqual(path.read_text(), md)


if __name__ == '__main__':
    unittest.main()
