# tests/test_core.py
import unittest
from fractions import Fraction
import json
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core import (
    UNBOUNDED,
    EventKind,
    InvalidInstance,
    InvalidQueue,
    InvalidTime,
    InvalidParameter,
    Job,
    JobInstance,
    ScheduleTrace,
    UnservedJob,
    derive_params,
    format_time,
    is_bounded,
    make_instance,
    pure_completion,
    to_time,
    total_completion,
    validate,
)


class TestTimeValues(unittest.TestCase):
    """Parsing and formatting of exact time values"""

    def test_to_time_accepts_int_fraction_and_string(self):
        self.assertEqual(to_time(3), Fraction(3))
        self.assertEqual(to_time(Fraction(7, 2)), Fraction(7, 2))
        self.assertEqual(to_time("7/2"), Fraction(7, 2))

    def test_to_time_rejects_floats_booleans_and_negatives(self):
        with self.assertRaises(InvalidTime):
            to_time(0.5)
        with self.assertRaises(InvalidTime):
            to_time(True)
        with self.assertRaises(InvalidTime):
            to_time(-1)
        with self.assertRaises(InvalidTime):
            to_time("abc")

    def test_format_time(self):
        self.assertEqual(format_time(Fraction(3)), "3/1")
        self.assertEqual(format_time(Fraction(6, 4)), "3/2")


class TestInstances(unittest.TestCase):
    """Instance construction, validation and JSON codec"""

    def setUp(self):
        """Set up test fixtures"""
        self.instance = make_instance(2, 1, [(2, 1, 1), (0, "1/2", 2), (0, 3, 1)])

    def test_jobs_sorted_by_release_then_id(self):
        self.assertEqual([job.id for job in self.instance.jobs], [1, 2, 0])
        self.assertEqual(self.instance.n, 3)
        self.assertEqual(self.instance.job(1).work, Fraction(1, 2))

    def test_invalid_queue(self):
        with self.assertRaises(InvalidQueue):
            make_instance(2, 1, [(0, 1, 3)])
        with self.assertRaises(InvalidQueue):
            make_instance(2, 1, [(0, 1, 0)])

    def test_invalid_k_and_duplicate_ids(self):
        with self.assertRaises(InvalidInstance):
            make_instance(0, 1, [])
        duplicate = JobInstance(k=1, tau=Fraction(1), jobs=(Job(0, Fraction(0), Fraction(1), 1),) * 2)
        with self.assertRaises(InvalidInstance):
            validate(duplicate)

    def test_queue_error_is_an_instance_error(self):
        self.assertTrue(issubclass(InvalidQueue, InvalidInstance))
        self.assertTrue(issubclass(InvalidTime, InvalidInstance))

    def test_json_round_trip(self):
        text = self.instance.to_json()
        data = json.loads(text)
        self.assertEqual(data["tau"], "1/1")
        self.assertEqual(data["jobs"][0], {"r": "2/1", "p": "1/1", "q": 1})
        self.assertEqual(JobInstance.from_json(text), self.instance)
        self.assertEqual(JobInstance.from_json(text).to_json(), text)

    def test_from_json_rejects_malformed_documents(self):
        with self.assertRaises(InvalidInstance):
            JobInstance.from_json("not json")
        with self.assertRaises(InvalidInstance):
            JobInstance.from_json('{"k": 1, "tau": "0", "jobs": [{"r": "0"}]}')
        with self.assertRaises(InvalidInstance):
            JobInstance.from_json('{"tau": "0"}')

    def test_is_clearing(self):
        self.assertFalse(self.instance.is_clearing())
        self.assertTrue(make_instance(2, 1, [(0, 1, 1), (0, 2, 2)]).is_clearing())


class TestDerivedParameters(unittest.TestCase):
    """Workload spread and setup ratio with their zero conventions"""

    def test_regular_instance(self):
        params = derive_params(make_instance(2, 2, [(0, 1, 1), (0, 2, 2), (1, 3, 1)]))
        self.assertEqual(params.p_min, 1)
        self.assertEqual(params.p_max, 3)
        self.assertEqual(params.gamma, 3)
        self.assertEqual(params.theta, 2)

    def test_zero_work_conventions(self):
        all_zero = derive_params(make_instance(1, 0, [(0, 0, 1)]))
        self.assertEqual(all_zero.gamma, 1)
        self.assertEqual(all_zero.theta, 1)

        mixed = derive_params(make_instance(1, 1, [(0, 0, 1), (0, 2, 1)]))
        self.assertIs(mixed.gamma, UNBOUNDED)
        self.assertIs(mixed.theta, UNBOUNDED)
        self.assertFalse(is_bounded(mixed.gamma))

    def test_pure_completion(self):
        self.assertEqual(pure_completion(0), 0)
        self.assertEqual(pure_completion(4), 10)
        self.assertEqual(pure_completion(100), 5050)
        with self.assertRaises(InvalidParameter):
            pure_completion(-1)


class TestScheduleTrace(unittest.TestCase):
    """Trace accessors and the completion-time objective"""

    def setUp(self):
        """Set up test fixtures"""
        self.trace = ScheduleTrace(job_ids=(0, 1))
        self.trace.record(EventKind.SETUP_START, Fraction(0), queue=1)
        self.trace.record(EventKind.SETUP_END, Fraction(1), queue=1)
        self.trace.record(EventKind.SERVE_START, Fraction(1), queue=1, job=1)
        self.trace.record(EventKind.SERVE_END, Fraction(3, 2), queue=1, job=1)
        self.trace.record(EventKind.SERVE_START, Fraction(3, 2), queue=1, job=0)
        self.trace.record(EventKind.SERVE_END, Fraction(5, 2), queue=1, job=0)

    def test_total_completion(self):
        self.assertEqual(total_completion(self.trace), 4)
        self.assertEqual(self.trace.service_order(), [1, 0])
        self.assertEqual(self.trace.count(EventKind.SETUP_START), 1)

    def test_unserved_job(self):
        trace = ScheduleTrace(job_ids=(0, 1, 2))
        trace.events = list(self.trace.events)
        with self.assertRaises(UnservedJob):
            total_completion(trace)

    def test_timeline_and_dict(self):
        lines = self.trace.timeline().splitlines()
        self.assertEqual(lines[0], "t=0 SETUP_START q=1")
        self.assertEqual(lines[3], "t=3/2 SERVE_END job=1 q=1")
        data = self.trace.to_dict()
        self.assertEqual(data["completions"], {"0": "5/2", "1": "3/2"})
        self.assertEqual(data["events"][2], {"event": "SERVE_START", "t": "1/1", "job": 1, "q": 1})


if __name__ == '__main__':
    unittest.main()
