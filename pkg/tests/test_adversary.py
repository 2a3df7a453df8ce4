# tests/test_adversary.py
import unittest
from fractions import Fraction
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from adversary import (
    FAMILY_REGISTRY,
    JOB_PRIORITY,
    QUEUE_LENGTH,
    batch_tightness,
    generate,
    largest_queue_gap,
    limited_service_gap,
    priority_class_instances,
    single_job,
    static_routing_adversary,
    unbounded_workload,
)
from benchmarks import CONSTRUCTED, competitive_ratio, schedule_order
from core import InvalidParameter, ParamsViolateRegime, total_completion
from engine import check_trace, simulate
from policies import CYCLIC_EXHAUSTIVE, L_LIMITED, SLQ, PolicySpec, build_policy


def simulated_total(spec, instance):
    trace = simulate(build_policy(spec, instance), instance)
    check_trace(trace, instance)
    return total_completion(trace)


class TestClosedForms(unittest.TestCase):
    """Online and offline costs of each family"""

    def test_limited_service(self):
        family = limited_service_gap(2, 2, 1, 1)
        self.assertEqual(family.online_bound, 20)
        self.assertEqual(family.offline_bound, 16)
        self.assertEqual(family.target_policy.family, L_LIMITED)
        self.assertEqual(simulated_total(family.target_policy, family.instance), 20)
        self.assertEqual(simulated_total(PolicySpec(family=CYCLIC_EXHAUSTIVE), family.instance), 16)
        self.assertEqual(family.extras["exhaustive_total"], 16)

    def test_largest_queue(self):
        family = largest_queue_gap(2, 3, 1)
        self.assertEqual(family.instance.n, 3)
        self.assertEqual(family.online_bound, 14)
        self.assertEqual(family.offline_bound, 7)
        self.assertEqual(family.ratio, 2)
        self.assertEqual(simulated_total(PolicySpec(family=SLQ), family.instance), 14)

    def test_largest_queue_ratio_grows(self):
        ratios = [largest_queue_gap(n, n).ratio for n in (10, 100, 1000)]
        self.assertLess(ratios[0], ratios[1])
        self.assertLess(ratios[1], ratios[2])

    def test_queue_length_class(self):
        family = priority_class_instances(QUEUE_LENGTH, 2, 10, 1)
        self.assertEqual(family.online_bound, 23)
        self.assertEqual(family.offline_bound, 13)
        self.assertEqual(simulated_total(family.target_policy, family.instance), 23)

    def test_job_priority_class(self):
        family = priority_class_instances(JOB_PRIORITY, 2, 10, 1)
        self.assertEqual(family.instance.n, 11)
        self.assertEqual(family.online_bound, 21)
        self.assertEqual(family.offline_bound, 12)

    def test_unknown_priority_kind(self):
        with self.assertRaises(InvalidParameter):
            priority_class_instances("round_robin", 2, 1)

    def test_batch_tightness_approaches_four(self):
        family = batch_tightness(k=3, gamma=1, n=200)
        self.assertEqual(family.instance.tau, 40000)
        self.assertEqual(family.online_bound, 32260706)
        self.assertEqual(family.offline_bound, 8260807)
        self.assertGreater(family.ratio, Fraction(39, 10))

    def test_batch_tightness_small_case_is_exact(self):
        family = batch_tightness(k=2, gamma=1, n=2)
        self.assertEqual(simulated_total(family.target_policy, family.instance), family.online_bound)
        report = competitive_ratio(
            family.target_policy,
            family.instance,
            benchmark_kind=CONSTRUCTED,
            benchmark=family.constructed_benchmark(),
        )
        self.assertEqual(report.ratio, family.ratio)

    def test_batch_tightness_regime(self):
        with self.assertRaises(ParamsViolateRegime):
            batch_tightness(k=2, gamma=3)
        with self.assertRaises(ParamsViolateRegime):
            batch_tightness(k=2, n=1, eps=5)
        with self.assertRaises(InvalidParameter):
            batch_tightness(k=1)

    def test_unbounded_workload(self):
        family = unbounded_workload(2, 10)
        self.assertEqual(family.parameters["p"], 100)
        self.assertEqual(family.online_bound, 1121)
        self.assertEqual(family.offline_bound, Fraction(235, 2))

    def test_static_routing_cyclic_table(self):
        family = static_routing_adversary([1, 2, 3], 50)
        self.assertTrue(family.online_exact)
        self.assertEqual(family.online_bound, 383878)
        self.assertEqual(family.offline_bound, 138878)

    def test_static_routing_small_case_simulates(self):
        family = static_routing_adversary([1, 2, 3], 2)
        self.assertEqual(family.instance.tau, 4)
        self.assertEqual(family.online_bound, 46)
        self.assertEqual(family.offline_bound, 38)
        self.assertEqual(simulated_total(family.target_policy, family.instance), 46)

    def test_static_routing_table_checks(self):
        with self.assertRaises(InvalidParameter):
            static_routing_adversary([1, 1, 2], 3)
        with self.assertRaises(InvalidParameter):
            static_routing_adversary([2, 1, 2], 3)
        self.assertFalse(static_routing_adversary([2, 1, 3], 2).online_exact)

    def test_single_job(self):
        family = single_job(2)
        self.assertEqual(family.online_bound, 3)
        self.assertEqual(family.ratio, 1)
        self.assertFalse(family.online_exact)
        self.assertEqual(family.extras, {"srpt_total": 1, "srpt_follow_total": 4})


class TestGenerate(unittest.TestCase):
    """Registry lookup and sidecar output"""

    def test_registry_names(self):
        self.assertEqual(
            sorted(FAMILY_REGISTRY),
            [
                "batch-tightness",
                "job-priority-class",
                "largest-queue",
                "limited-service",
                "queue-length-class",
                "single-job",
                "static-routing",
                "unbounded-workload",
            ],
        )

    def test_generate_ignores_unset_and_foreign_parameters(self):
        family = generate("largest-queue", n=2, p=3, tau=None, k=7)
        self.assertEqual(family.offline_bound, 7)

    def test_static_routing_defaults_to_cyclic_table(self):
        family = generate("static-routing", k=3, n_k=2)
        self.assertEqual(family.parameters["routing_table"], [1, 2, 3])

    def test_generate_errors(self):
        with self.assertRaises(InvalidParameter):
            generate("zigzag")
        with self.assertRaises(InvalidParameter):
            generate("limited-service", k=2, n=2)
        with self.assertRaises(InvalidParameter):
            generate("static-routing", n_k=2)

    def test_sidecar(self):
        family = generate("limited-service", k=2, n=2, l=1, tau="1/2")
        sidecar = family.sidecar()
        self.assertEqual(
            set(sidecar),
            {
                "family", "parameters", "online_bound", "online_exact", "offline_bound",
                "offline_order", "offline_schedule", "target_policy", "limit_behavior", "extras",
            },
        )
        self.assertEqual(sidecar["parameters"]["tau"], "1/2")
        self.assertEqual(sidecar["offline_order"], [0, 1, 2, 3])
        self.assertEqual(sidecar["target_policy"]["family"], L_LIMITED)
        self.assertEqual(sidecar["offline_bound"], "13/1")
        self.assertEqual(sidecar["extras"], {"exhaustive_total": "13/1"})

class TestOfflineSchedules(unittest.TestCase):
    """Every family's constructed offline schedule is a legal schedule of its instance"""

    def setUp(self):
        """Set up test fixtures"""
        self.params = {
            "batch-tightness": {"k": 2, "n": 2},
            "unbounded-workload": {"k": 2, "n": 10},
            "limited-service": {"k": 2, "n": 2, "l": 1},
            "largest-queue": {"n": 2, "p": 3},
            "static-routing": {"k": 3, "n_k": 2},
            "queue-length-class": {"k": 2, "p": 10},
            "job-priority-class": {"k": 2, "n": 10},
            "single-job": {"theta": 2},
        }

    def test_every_family_is_covered(self):
        self.assertEqual(sorted(self.params), sorted(FAMILY_REGISTRY))

    def test_offline_schedules_are_legal(self):
        for name, params in sorted(self.params.items()):
            with self.subTest(family=name):
                family = generate(name, **params)
                check_trace(family.offline_schedule, family.instance)
                rebuilt = schedule_order(family.instance, family.offline_order)
                check_trace(rebuilt, family.instance)
                self.assertEqual(rebuilt.to_dict(), family.offline_schedule.to_dict())
                self.assertEqual(total_completion(rebuilt), family.offline_bound)



if __name__ == '__main__':
    unittest.main()
