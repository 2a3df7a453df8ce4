# tests/test_benchmarks.py
import unittest
from fractions import Fraction
import itertools
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from benchmarks import (
    BRUTE_FORCE,
    CONSTRUCTED,
    SRPT_REDUCED,
    benchmark_for,
    brute_force_optimal,
    competitive_ratio,
    failed_report,
    order_total,
    registered_bounds,
    schedule_order,
    srpt_reduced,
)
from core import EventKind, InvalidParameter, TooLarge, UnservedJob, make_instance
from engine import check_trace
from experiment import random_instance
from policies import (
    CYCLIC_EXHAUSTIVE,
    FOLLOWER,
    ONE_MACHINE,
    SETUP_AUGMENTED,
    SLQ,
    SRPT_ORDER,
    PolicySpec,
)


def permutation_optimum(instance):
    """Independent oracle: earliest-start cost of every job order"""
    best = None
    for perm in itertools.permutations(instance.jobs):
        t, last, total = Fraction(0), None, Fraction(0)
        for job in perm:
            start = max(t + (instance.tau if job.queue != last else 0), job.release)
            t = start + job.work
            total += t
            last = job.queue
        if best is None or total < best:
            best = total
    return best if best is not None else Fraction(0)


class TestSrptReduced(unittest.TestCase):
    """Preemptive setup-free lower bound"""

    def test_preemption(self):
        result = srpt_reduced(make_instance(2, 5, [(0, 3, 1), (1, 1, 2)]))
        self.assertEqual(result.kind, SRPT_REDUCED)
        self.assertEqual(result.completions, {1: 2, 0: 4})
        self.assertEqual(result.total, 6)
        self.assertFalse(result.exact)

    def test_empty_instance(self):
        self.assertEqual(srpt_reduced(make_instance(1, 1, [])).total, 0)


class TestScheduleOrder(unittest.TestCase):
    """Earliest-start schedules of fixed job orders"""

    def test_setup_runs_ahead_of_release(self):
        instance = make_instance(1, 2, [(5, 1, 1)])
        trace = schedule_order(instance, [0])
        self.assertEqual(
            [(e.kind, e.t) for e in trace.events],
            [
                (EventKind.SETUP_START, 3),
                (EventKind.SETUP_END, 5),
                (EventKind.SERVE_START, 5),
                (EventKind.SERVE_END, 6),
            ],
        )
        check_trace(trace, instance)

    def test_queue_changes_pay_setups(self):
        instance = make_instance(2, 1, [(0, 1, 1), (0, 1, 2), (0, 1, 1)])
        self.assertEqual(order_total(instance, [0, 2, 1]), 2 + 3 + 5)
        self.assertEqual(order_total(instance, [0, 1, 2]), 2 + 4 + 6)

    def test_rejects_non_permutations(self):
        instance = make_instance(2, 1, [(0, 1, 1), (0, 1, 2)])
        with self.assertRaises(InvalidParameter):
            schedule_order(instance, [0, 0])


class TestBruteForce(unittest.TestCase):
    """Exact offline optimum"""

    def test_matches_independent_oracle(self):
        for seed in range(12):
            instance = random_instance(seed, n=5, k=2 + seed % 2, tau=seed % 3)
            expected = permutation_optimum(instance)
            pruned = brute_force_optimal(instance)
            plain = brute_force_optimal(instance, prune=False)
            self.assertEqual(pruned.total, expected, f"seed {seed}")
            self.assertEqual(plain.total, expected, f"seed {seed}")
            self.assertEqual(order_total(instance, pruned.order), expected)
            self.assertLessEqual(srpt_reduced(instance).total, expected)
            check_trace(pruned.schedule, instance)

    def test_exhaustive_restriction(self):
        # leaving queue 1 before its long job is served beats every exhaustive order
        instance = make_instance(2, 1, [(0, 1, 1), (0, 10, 1), (0, 1, 2), (0, 1, 2), (0, 1, 2)])
        self.assertEqual(brute_force_optimal(instance).total, 34)
        self.assertEqual(brute_force_optimal(instance, exhaustive_only=True).total, 37)
        self.assertEqual(brute_force_optimal(instance, exhaustive_only=True, prune=False).total, 37)

    def test_unit_work_optimum_is_exhaustive(self):
        for seed in range(8):
            instance = random_instance(seed, n=6, k=2, tau=1, work_min=1, work_max=1)
            self.assertEqual(
                brute_force_optimal(instance).total,
                brute_force_optimal(instance, exhaustive_only=True).total,
            )

    def test_size_cap(self):
        instance = random_instance(0, n=4)
        with self.assertRaises(TooLarge):
            brute_force_optimal(instance, max_n=3)

    def test_empty_instance(self):
        result = brute_force_optimal(make_instance(2, 1, []))
        self.assertEqual(result.total, 0)
        self.assertEqual(result.order, ())


class TestCompetitiveRatio(unittest.TestCase):
    """Policy-vs-benchmark reports and registered bounds"""

    def test_single_job_srpt_follow_bound_is_tight(self):
        instance = make_instance(1, 2, [(0, 1, 1)])
        report = competitive_ratio(PolicySpec(family=ONE_MACHINE), instance, benchmark_kind=SRPT_REDUCED)
        self.assertEqual(report.ratio, 4)
        self.assertEqual(report.bound_name, "srpt_follow")
        self.assertTrue(report.bound_ok)
        row = report.to_row()
        self.assertEqual(row["ratio_num"], 4)
        self.assertEqual(row["ratio_den"], 1)
        self.assertEqual(row["ratio_decimal"], "4.000000")
        self.assertEqual(row["claimed_bound"], "4/1")
        self.assertEqual(row["error"], "")

    def test_zero_benchmark(self):
        report = competitive_ratio(PolicySpec(family=CYCLIC_EXHAUSTIVE), make_instance(2, 1, []))
        self.assertTrue(report.zero_benchmark)
        self.assertTrue(report.bound_ok)
        self.assertEqual(report.to_row()["ratio_decimal"], "ZeroBenchmark")

    def test_tightest_bound_is_reported(self):
        instance = make_instance(3, 1, [(0, 1, 1), (0, 1, 2), (0, 1, 3)])
        report = competitive_ratio(PolicySpec(family=CYCLIC_EXHAUSTIVE), instance, benchmark_kind=BRUTE_FORCE)
        self.assertEqual(report.policy_total, 12)
        self.assertEqual(report.benchmark.total, 12)
        self.assertEqual(report.ratio, 1)
        self.assertEqual(report.bound_name, "work_conserving")
        self.assertEqual(report.claimed_bound, 2)

    def test_registered_bounds(self):
        instance = make_instance(2, 1, [(0, 1, 1), (0, 2, 2)])
        exhaustive = PolicySpec(family=CYCLIC_EXHAUSTIVE)
        against_optimum = dict(registered_bounds(exhaustive, instance, BRUTE_FORCE))
        self.assertEqual(against_optimum, {"cyclic_kappa": 3, "work_conserving": 3})
        self.assertEqual(registered_bounds(exhaustive, instance, SRPT_REDUCED), [])
        self.assertEqual(registered_bounds(PolicySpec(family=SLQ), instance, BRUTE_FORCE), [("work_conserving", 3)])

        follower = PolicySpec(family=FOLLOWER, transform=SETUP_AUGMENTED, base=PolicySpec(family=SRPT_ORDER))
        self.assertEqual(registered_bounds(follower, instance, SRPT_REDUCED), [("setup_augmented_follower", 4)])

    def test_clearing_bound_needs_clearing_instance(self):
        spec = PolicySpec(family=ONE_MACHINE, clearing=True)
        clearing = make_instance(2, 1, [(0, 1, 1), (0, 2, 2)])
        released = make_instance(2, 1, [(0, 1, 1), (1, 2, 2)])
        self.assertEqual(registered_bounds(spec, clearing, SRPT_REDUCED), [("clearing_srpt_follow", 2)])
        self.assertEqual(registered_bounds(spec, released, SRPT_REDUCED), [])

    def test_benchmark_selection_errors(self):
        instance = make_instance(1, 1, [(0, 1, 1)])
        with self.assertRaises(InvalidParameter):
            benchmark_for(instance, CONSTRUCTED)
        with self.assertRaises(InvalidParameter):
            benchmark_for(instance, "lp")
        with self.assertRaises(TooLarge):
            competitive_ratio(PolicySpec(family=SLQ), random_instance(1, n=5), benchmark_kind=BRUTE_FORCE, max_n=4)

    def test_failed_report_row(self):
        instance = make_instance(1, 1, [(0, 1, 1)])
        report = failed_report(PolicySpec(family=SLQ), "case", srpt_reduced(instance), UnservedJob("job 0 left"))
        row = report.to_row()
        self.assertFalse(row["bound_ok"])
        self.assertEqual(row["error"], "UnservedJob: job 0 left")
        self.assertEqual(row["policy_total"], "")
        self.assertEqual(row["benchmark_total"], "1/1")


if __name__ == '__main__':
    unittest.main()
