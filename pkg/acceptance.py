# acceptance.py
"""
The acceptance suite behind `main.py verify`.

Exact checks compare rationals with zero tolerance; the randomized suites
are seed-deterministic and fan out over the experiment worker pool.
"""

import logging
import tempfile
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from adversary import batch_tightness, generate, largest_queue_gap, limited_service_gap, single_job
from benchmarks import (
    BRUTE_FORCE,
    CONSTRUCTED,
    REPORT_COLUMNS,
    SRPT_REDUCED,
    brute_force_optimal,
    competitive_ratio,
    srpt_reduced,
)
from core import (
    InstanceParams,
    JobInstance,
    PollBenchError,
    ZERO,
    Time,
    UnboundedTransform,
    derive_params,
    is_bounded,
    total_completion,
)
from engine import DEFAULT_MAX_EPOCHS, check_trace, simulate
from experiment import (
    RANDOM_DEFAULTS,
    SOURCE_FAMILY,
    SOURCE_RANDOM,
    ExperimentConfig,
    mixed_trial_instance,
    random_instance,
    run_experiment,
    run_pool,
    sweep,
)
from policies import (
    CYCLIC_EXHAUSTIVE,
    FOLLOWER,
    GIPP,
    MIXED,
    ONE_MACHINE,
    SETUP_AUGMENTED,
    SETUP_REDUCED,
    SLQ,
    SRPT_ORDER,
    WORKLOAD_AUGMENTED,
    WORKLOAD_REDUCED,
    PolicySpec,
    build_policy,
    mixed_ratio_bound,
    standard_policy_specs,
)
from report_generator import ReportGenerator

logger = logging.getLogger(__name__)

SUITE_MAX_JOBS = 8
SUITE_QUEUES = (2, 3)
SUITE_SETUPS = (0, 1, 2)
SUITE_RELEASE_MAX = 10
SUITE_WORKS = (0, 4)
UNIT_SUITE_SIZE = 200

LIMITED_SERVICE_GRID = ((2, 2, 1, 1), (2, 3, 1, 1), (3, 2, 2, 2), (3, 1, 3, 1))
LARGEST_QUEUE_SCALES = (10, 100, 1000)
SINGLE_JOB_THETAS = (Fraction(0), Fraction(1), Fraction(2), Fraction(7, 2))
BATCH_THRESHOLD = Fraction(39, 10)

MIXED_K = 2
MIXED_THETA = Fraction(2)
MIXED_ETA = Fraction(2)
MIXED_MU = 0.9
MIXED_JOBS = 10
MIXED_SLACK = 0.05


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0


@dataclass(frozen=True)
class SuiteCase:
    """Everything the random-suite checks need from one instance"""
    index: int
    instance: JobInstance
    params: InstanceParams
    optimum: Time
    srpt_total: Time
    totals: Dict[str, Time] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)
    clearing_srpt: Optional[Time] = None
    clearing_totals: Dict[str, Time] = field(default_factory=dict)


WORKLOAD_FOLLOWER_SPECS = (
    PolicySpec(family=FOLLOWER, transform=WORKLOAD_REDUCED, base=PolicySpec(family=CYCLIC_EXHAUSTIVE)),
    PolicySpec(family=FOLLOWER, transform=WORKLOAD_AUGMENTED, base=PolicySpec(family=CYCLIC_EXHAUSTIVE)),
)


def suite_policy_specs() -> List[PolicySpec]:
    """The standard variants plus followers and the mixed strategy"""
    srpt = PolicySpec(family=SRPT_ORDER)
    return standard_policy_specs() + [
        *WORKLOAD_FOLLOWER_SPECS,
        PolicySpec(family=FOLLOWER, transform=SETUP_REDUCED, base=srpt),
        PolicySpec(family=FOLLOWER, transform=SETUP_AUGMENTED, base=srpt),
        PolicySpec(family=MIXED, eta=MIXED_ETA),
    ]


def suite_instance(seed: int, index: int, unit_work: bool = False) -> JobInstance:
    """Instance `index` of the random suite: n <= 8, k in {2, 3}, tau in {0, 1, 2}"""
    rng = np.random.default_rng([seed, index])
    n = int(rng.integers(1, SUITE_MAX_JOBS + 1))
    k = int(rng.choice(SUITE_QUEUES))
    tau = int(rng.choice(SUITE_SETUPS))
    work_min, work_max = (1, 1) if unit_work else SUITE_WORKS
    return random_instance(
        seed=int(rng.integers(0, 2**31 - 1)),
        n=n,
        k=k,
        tau=tau,
        release_max=SUITE_RELEASE_MAX,
        work_min=work_min,
        work_max=work_max,
    )


def _policy_total(spec: PolicySpec, instance: JobInstance, max_epochs: int) -> Time:
    trace = simulate(build_policy(spec, instance), instance, max_epochs=max_epochs)
    check_trace(trace, instance)
    return total_completion(trace)


def _suite_case(item: Tuple[int, int, int]) -> SuiteCase:
    seed, index, max_epochs = item
    instance = suite_instance(seed, index)
    totals: Dict[str, Time] = {}
    errors: Dict[str, str] = {}
    for spec in suite_policy_specs():
        try:
            totals[spec.label] = _policy_total(spec, instance, max_epochs)
        except UnboundedTransform:
            continue
        except PollBenchError as e:
            errors[spec.label] = f"{type(e).__name__}: {e}"

    cleared = instance.with_jobs(replace(job, release=ZERO) for job in instance.jobs)
    clearing_totals: Dict[str, Time] = {}
    for family in (ONE_MACHINE, GIPP):
        spec = PolicySpec(family=family, clearing=True)
        try:
            clearing_totals[spec.label] = _policy_total(spec, cleared, max_epochs)
        except PollBenchError as e:
            errors[f"{spec.label} (cleared)"] = f"{type(e).__name__}: {e}"

    return SuiteCase(
        index=index,
        instance=instance,
        params=derive_params(instance),
        optimum=brute_force_optimal(instance, max_n=SUITE_MAX_JOBS).total,
        srpt_total=srpt_reduced(instance).total,
        totals=totals,
        errors=errors,
        clearing_srpt=srpt_reduced(cleared).total,
        clearing_totals=clearing_totals,
    )


def _unit_case(item: Tuple[int, int]) -> Optional[str]:
    seed, index = item
    instance = suite_instance(seed, index, unit_work=True)
    best = brute_force_optimal(instance, max_n=SUITE_MAX_JOBS).total
    exhaustive = brute_force_optimal(instance, max_n=SUITE_MAX_JOBS, exhaustive_only=True).total
    if best != exhaustive:
        return f"instance {index}: optimum {best}, best exhaustive order {exhaustive}"
    return None


def _mixed_trial(item: Tuple[int, int, int]) -> Tuple[int, Optional[Fraction], str]:
    seed, index, max_epochs = item
    instance = mixed_trial_instance(
        seed=seed * 100003 + index, n=MIXED_JOBS, k=MIXED_K, theta=MIXED_THETA, mu=MIXED_MU, eta=MIXED_ETA, p_min=1
    )
    spec = PolicySpec(family=MIXED, eta=MIXED_ETA, p_min=Fraction(1))
    try:
        total = _policy_total(spec, instance, max_epochs)
        optimum = brute_force_optimal(instance, max_n=MIXED_JOBS).total
    except PollBenchError as e:
        return index, None, f"{type(e).__name__}: {e}"
    if optimum == 0:
        return index, None, "zero optimum"
    return index, total / optimum, ""


def _summarize_failures(failures: Sequence[str], limit: int = 5) -> str:
    if not failures:
        return ""
    shown = "; ".join(failures[:limit])
    more = f" (+{len(failures) - limit} more)" if len(failures) > limit else ""
    return f": {shown}{more}"


class AcceptanceSuite:
    """Runs the named acceptance checks; random-suite results are computed once and shared"""

    def __init__(self, seed: int = 0, suite_size: int = 500, workers: int = 1, max_epochs: int = DEFAULT_MAX_EPOCHS):
        self.logger = logging.getLogger(__name__)
        self.seed = seed
        self.suite_size = suite_size
        self.workers = workers
        self.max_epochs = max_epochs
        self._cases: Optional[List[SuiteCase]] = None

    @property
    def cases(self) -> List[SuiteCase]:
        if self._cases is None:
            items = [(self.seed, index, self.max_epochs) for index in range(self.suite_size)]
            self.logger.info(f"Building random suite of {len(items)} instances")
            self._cases = run_pool(_suite_case, items, self.workers)
        return self._cases

    def checks(self) -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
        return [
            ("oracle_dominance", self.check_oracle_dominance),
            ("limited_service_exact", self.check_limited_service),
            ("largest_queue_divergence", self.check_largest_queue),
            ("srpt_follow_tight", self.check_srpt_follow_tight),
            ("cyclic_kappa_bound", self.check_cyclic_kappa),
            ("batch_tightness_scale", self.check_batch_tightness),
            ("exhaustive_orders_optimal", self.check_exhaustive_orders),
            ("work_conserving_bound", self.check_work_conserving),
            ("workload_follower_bound", self.check_workload_followers),
            ("mixed_strategy_mean", self.check_mixed_strategy),
            ("determinism", self.check_determinism),
        ]

    def run(self, only: Optional[Sequence[str]] = None) -> List[CheckResult]:
        results = []
        for name, check in self.checks():
            if only and name not in only:
                continue
            self.logger.info(f"Running check {name}")
            started = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as e:
                self.logger.error(f"Check {name} raised: {str(e)}", exc_info=True)
                passed, detail = False, f"{type(e).__name__}: {e}"
            elapsed = time.perf_counter() - started
            level = logging.INFO if passed else logging.ERROR
            self.logger.log(level, f"{name}: {'PASS' if passed else 'FAIL'} ({elapsed:.1f}s) {detail}")
            results.append(CheckResult(name=name, passed=passed, detail=detail, elapsed=elapsed))
        return results

    def check_oracle_dominance(self) -> Tuple[bool, str]:
        failures = []
        runs = 0
        for case in self.cases:
            if case.srpt_total > case.optimum:
                failures.append(f"instance {case.index}: srpt {case.srpt_total} > optimum {case.optimum}")
            for label, total in case.totals.items():
                runs += 1
                if total < case.optimum:
                    failures.append(f"instance {case.index}: {label} total {total} < optimum {case.optimum}")
            for label, error in case.errors.items():
                failures.append(f"instance {case.index}: {label} failed with {error}")
        detail = f"{len(self.cases)} instances, {runs} policy runs, {len(failures)} failures"
        return not failures, detail + _summarize_failures(failures)

    def check_limited_service(self) -> Tuple[bool, str]:
        failures = []
        for k, n, l, tau in LIMITED_SERVICE_GRID:
            family = limited_service_gap(k, n, l, tau)
            limited = _policy_total(family.target_policy, family.instance, self.max_epochs)
            exhaustive = _policy_total(PolicySpec(family=CYCLIC_EXHAUSTIVE), family.instance, self.max_epochs)
            if limited != family.online_bound or exhaustive != family.offline_bound:
                failures.append(
                    f"(k={k}, n={n}, l={l}, tau={tau}): limited {limited} vs {family.online_bound}, "
                    f"exhaustive {exhaustive} vs {family.offline_bound}"
                )
        return not failures, f"{len(LIMITED_SERVICE_GRID)} grid points" + _summarize_failures(failures)

    def check_largest_queue(self) -> Tuple[bool, str]:
        small = largest_queue_gap(2, 3, 1)
        online = _policy_total(PolicySpec(family=SLQ), small.instance, self.max_epochs)
        if online != 14 or small.offline_bound != 7:
            return False, f"n=2, p=3: online {online}, offline {small.offline_bound}, expected 14 and 7"
        ratios = []
        for scale in LARGEST_QUEUE_SCALES:
            family = largest_queue_gap(scale, scale, 1)
            report = competitive_ratio(
                PolicySpec(family=SLQ),
                family.instance,
                benchmark_kind=CONSTRUCTED,
                benchmark=family.constructed_benchmark(),
                max_epochs=self.max_epochs,
            )
            ratios.append(report.ratio)
        increasing = all(a < b for a, b in zip(ratios, ratios[1:]))
        shown = ", ".join(f"{float(r):.3f}" for r in ratios)
        return increasing, f"14 vs 7 at n=2; ratios over n=p in {LARGEST_QUEUE_SCALES}: {shown}"

    def check_srpt_follow_tight(self) -> Tuple[bool, str]:
        failures = []
        for theta in SINGLE_JOB_THETAS:
            family = single_job(theta)
            for spec in (PolicySpec(family=ONE_MACHINE), PolicySpec(family=GIPP)):
                report = competitive_ratio(spec, family.instance, benchmark_kind=SRPT_REDUCED, max_epochs=self.max_epochs)
                if report.ratio != 2 + theta:
                    failures.append(f"{spec.family} at theta={theta}: ratio {report.ratio}, expected {2 + theta}")
        return not failures, f"{len(SINGLE_JOB_THETAS)} setup values" + _summarize_failures(failures)

    def check_cyclic_kappa(self) -> Tuple[bool, str]:
        failures = []
        checked = 0
        specs = [spec for spec in suite_policy_specs() if spec.is_cyclic]
        for case in self.cases:
            p_min, p_max = case.params.p_min, case.params.p_max
            if p_min <= 0:
                continue
            if p_max == p_min:
                gamma = 1
            elif p_max <= 2 * p_min:
                gamma = 2
            else:
                continue
            kappa = max(Fraction(3, 2) * gamma, Fraction(case.instance.k + 1))
            for spec in specs:
                total = case.totals.get(spec.label)
                if total is None:
                    continue
                checked += 1
                if total > kappa * case.optimum:
                    failures.append(f"instance {case.index}: {spec.label} {total} > {kappa} * {case.optimum}")
        return not failures, f"{checked} cyclic runs in the gamma <= 2 slice" + _summarize_failures(failures)

    def check_batch_tightness(self) -> Tuple[bool, str]:
        family = batch_tightness(k=3, gamma=1, n=200)
        report = competitive_ratio(
            family.target_policy,
            family.instance,
            benchmark_kind=CONSTRUCTED,
            benchmark=family.constructed_benchmark(),
            max_epochs=self.max_epochs,
        )
        ratio = report.ratio
        return ratio is not None and ratio > BATCH_THRESHOLD, f"k=3, n=200: ratio {ratio} ({float(ratio or 0):.4f})"

    def check_exhaustive_orders(self) -> Tuple[bool, str]:
        items = [(self.seed, index) for index in range(min(self.suite_size, UNIT_SUITE_SIZE))]
        failures = [f for f in run_pool(_unit_case, items, self.workers) if f]
        return not failures, f"{len(items)} unit-work instances" + _summarize_failures(failures)

    def check_work_conserving(self) -> Tuple[bool, str]:
        failures = []
        checked = 0
        specs = [spec for spec in suite_policy_specs() if spec.work_conserving]
        clearing = [PolicySpec(family=ONE_MACHINE, clearing=True), PolicySpec(family=GIPP, clearing=True)]
        for case in self.cases:
            gamma, theta = case.params.gamma, case.params.theta
            if not is_bounded(theta):
                continue
            for spec in specs:
                total = case.totals.get(spec.label)
                if total is None or not is_bounded(gamma):
                    continue
                checked += 1
                if total > (gamma + theta) * case.optimum:
                    failures.append(f"instance {case.index}: {spec.label} {total} > ({gamma}+{theta}) * {case.optimum}")
            for spec in clearing:
                total = case.clearing_totals.get(spec.label)
                if total is None:
                    continue
                checked += 1
                if total > (1 + theta) * case.clearing_srpt:
                    failures.append(
                        f"instance {case.index} cleared: {spec.label} {total} > (1+{theta}) * {case.clearing_srpt}"
                    )
        return not failures, f"{checked} bounded runs" + _summarize_failures(failures)

    def check_workload_followers(self) -> Tuple[bool, str]:
        failures = []
        checked = 0
        for case in self.cases:
            gamma = case.params.gamma
            if not is_bounded(gamma):
                continue
            bound = gamma * (case.instance.k + 1)
            for spec in WORKLOAD_FOLLOWER_SPECS:
                total = case.totals.get(spec.label)
                if total is None:
                    continue
                checked += 1
                if total > bound * case.optimum:
                    failures.append(f"instance {case.index}: {spec.transform} follower {total} > {bound} * {case.optimum}")
        return not failures, f"{checked} follower runs" + _summarize_failures(failures)

    def check_mixed_strategy(self) -> Tuple[bool, str]:
        items = [(self.seed, index, self.max_epochs) for index in range(self.suite_size)]
        outcomes = run_pool(_mixed_trial, items, self.workers)
        failures = [f"trial {index}: {error}" for index, ratio, error in outcomes if ratio is None]
        ratios = np.array([float(ratio) for _, ratio, _ in outcomes if ratio is not None])
        if failures or not ratios.size:
            return False, f"{len(failures)} failed trials" + _summarize_failures(failures)
        bound = float(mixed_ratio_bound(MIXED_ETA, MIXED_K, MIXED_THETA, MIXED_MU, MIXED_JOBS))
        mean = float(np.mean(ratios))
        return mean <= bound + MIXED_SLACK, f"{ratios.size} trials, mean ratio {mean:.4f}, bound {bound:.4f} + {MIXED_SLACK}"

    def check_determinism(self) -> Tuple[bool, str]:
        outputs = [self._write_outputs() for _ in range(2)]
        differing = sorted(name for name in outputs[0] if outputs[0][name] != outputs[1].get(name))
        if set(outputs[0]) != set(outputs[1]):
            differing.append("file sets differ")
        return not differing, f"{len(outputs[0])} files compared" + _summarize_failures(differing)

    def _write_outputs(self) -> Dict[str, bytes]:
        family_params = {"n": 2, "p": 3, "tau": 1}
        family_config = ExperimentConfig(
            source=SOURCE_FAMILY,
            family="largest-queue",
            family_params=family_params,
            policies=[PolicySpec(family=SLQ), PolicySpec(family=GIPP)],
            benchmark=CONSTRUCTED,
        )
        random_config = ExperimentConfig(
            source=SOURCE_RANDOM,
            random_params={**RANDOM_DEFAULTS, "seed": self.seed},
            policies=standard_policy_specs(),
            benchmark=BRUTE_FORCE,
        )
        sweep_config = ExperimentConfig(
            source=SOURCE_FAMILY,
            family="largest-queue",
            family_params=family_params,
            policies=[PolicySpec(family=SLQ)],
            benchmark=CONSTRUCTED,
            sweep_axis="n",
            sweep_values=[2, 3, 4],
            sweep_tied=["p"],
        )
        with tempfile.TemporaryDirectory() as tmp:
            reports = ReportGenerator(tmp)
            rows = [r.to_row() for r in run_experiment(family_config, self.max_epochs)]
            rows += [r.to_row() for r in run_experiment(random_config, self.max_epochs)]
            reports.save_csv(rows, "run.csv", REPORT_COLUMNS)
            reports.save_csv(sweep(sweep_config, workers=self.workers, max_epochs=self.max_epochs), "sweep.csv")
            family = generate("largest-queue", **family_params)
            reports.save_instance(family.instance, "largest-queue")
            reports.save_json(family.sidecar(), "largest-queue.bounds.json")
            return {path.name: path.read_bytes() for path in sorted(Path(tmp).iterdir())}


def run_acceptance(seed: int = 0, suite_size: int = 500, workers: int = 1,
                   max_epochs: int = DEFAULT_MAX_EPOCHS, only: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """Run the acceptance checks (all of them unless `only` names some)"""
    suite = AcceptanceSuite(seed=seed, suite_size=suite_size, workers=workers, max_epochs=max_epochs)
    return suite.run(only=only)
