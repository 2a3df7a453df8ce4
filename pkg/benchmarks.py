# benchmarks.py
"""
Offline benchmarks and competitive-ratio reports.

Two reference costs are available: preemptive SRPT on the setup-free copy
of an instance (a lower bound on the offline optimum) and the exact offline
optimum by exhaustive search over service orders, feasible for small n.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core import (
    EventKind,
    InvalidParameter,
    JobInstance,
    ScheduleTrace,
    Time,
    TooLarge,
    ZERO,
    derive_params,
    format_time,
    is_bounded,
    total_completion,
    validate,
)
from engine import DEFAULT_MAX_EPOCHS, check_trace, simulate
from policies import (
    FOLLOWER,
    GIPP,
    ONE_MACHINE,
    SETUP_AUGMENTED,
    SETUP_REDUCED,
    SRPT_ORDER,
    WORKLOAD_AUGMENTED,
    WORKLOAD_REDUCED,
    PolicySpec,
    build_policy,
    srpt_completions,
)

SRPT_REDUCED = "srpt"
BRUTE_FORCE = "brute"
CONSTRUCTED = "constructed"
BENCHMARK_KINDS = (SRPT_REDUCED, BRUTE_FORCE, CONSTRUCTED)

DEFAULT_MAX_N = 10

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkResult:
    kind: str
    total: Time
    schedule: Optional[ScheduleTrace] = None
    exact: bool = False
    order: Optional[Tuple[int, ...]] = None
    completions: Optional[Dict[int, Time]] = None


def srpt_reduced(instance: JobInstance) -> BenchmarkResult:
    """Preemptive SRPT on the instance with tau = 0"""
    instance = validate(instance)
    done = srpt_completions(instance.jobs)
    completions = {job.id: t for t, job in done}
    return BenchmarkResult(
        kind=SRPT_REDUCED,
        total=sum(completions.values(), ZERO),
        completions=completions,
    )


def schedule_order(instance: JobInstance, order: Sequence[int]) -> ScheduleTrace:
    """Earliest-start schedule serving jobs in the given id order.

    Each job starts at max(previous completion + tau on a queue change, release);
    the first job always pays a setup. Setups end exactly at the service start.
    """
    instance = validate(instance)
    ids = [job.id for job in instance.jobs]
    if sorted(order) != sorted(ids):
        raise InvalidParameter(f"Order {list(order)} is not a permutation of job ids {sorted(ids)}")
    trace = ScheduleTrace(job_ids=tuple(ids))
    t = ZERO
    last: Optional[int] = None
    for job_id in order:
        job = instance.job(job_id)
        change = job.queue != last
        start = max(t + (instance.tau if change else ZERO), job.release)
        if change:
            trace.record(EventKind.SETUP_START, start - instance.tau, queue=job.queue)
            trace.record(EventKind.SETUP_END, start, queue=job.queue)
        trace.record(EventKind.SERVE_START, start, queue=job.queue, job=job.id)
        t = start + job.work
        trace.record(EventKind.SERVE_END, t, queue=job.queue, job=job.id)
        last = job.queue
    return trace


def order_total(instance: JobInstance, order: Sequence[int]) -> Time:
    return total_completion(schedule_order(instance, order))


def _is_exhaustive(instance: JobInstance, order: Sequence[int]) -> bool:
    """No queue is left while one of its jobs released by the departure instant is still unserved"""
    jobs = [instance.job(j) for j in order]
    t = ZERO
    last: Optional[int] = None
    for i, job in enumerate(jobs):
        if last is not None and job.queue != last:
            if any(other.queue == last and other.release <= t for other in jobs[i:]):
                return False
        t = max(t + (instance.tau if job.queue != last else ZERO), job.release) + job.work
        last = job.queue
    return True


def brute_force_optimal(
    instance: JobInstance,
    max_n: int = DEFAULT_MAX_N,
    exhaustive_only: bool = False,
    prune: bool = True,
) -> BenchmarkResult:
    """Exact offline optimum over all service orders (earliest-start per order).

    With prune=True the order tree is searched depth first with a dominance
    memo on (served set, last queue) and a lower bound cut; prune=False
    enumerates every permutation.
    """
    instance = validate(instance)
    n = instance.n
    if n > max_n:
        raise TooLarge(f"Instance has {n} jobs, exact search is capped at {max_n}")
    if n == 0:
        return BenchmarkResult(kind=BRUTE_FORCE, total=ZERO, schedule=ScheduleTrace(job_ids=()), exact=True, order=())

    if prune:
        best_total, best_order = _search(instance, exhaustive_only)
    else:
        best_total, best_order = None, None
        for perm in itertools.permutations([job.id for job in instance.jobs]):
            if exhaustive_only and not _is_exhaustive(instance, perm):
                continue
            total = order_total(instance, perm)
            if best_total is None or total < best_total:
                best_total, best_order = total, tuple(perm)

    schedule = schedule_order(instance, best_order)
    logger.debug(f"Exact optimum {best_total} over {n} jobs (order {best_order})")
    return BenchmarkResult(kind=BRUTE_FORCE, total=best_total, schedule=schedule, exact=True, order=best_order)


def _search(instance: JobInstance, exhaustive_only: bool) -> Tuple[Time, Tuple[int, ...]]:
    jobs = sorted(instance.jobs, key=lambda j: (j.release, j.work, j.id))
    n = len(jobs)
    tau = instance.tau
    full = (1 << n) - 1
    best: List[Any] = [None, None]
    frontier: Dict[Tuple[int, Optional[int]], List[Tuple[Time, Time]]] = {}
    path: List[int] = []

    def lower_bound(mask: int, last: Optional[int], t: Time) -> Time:
        rest = [jobs[i] for i in range(n) if not mask & (1 << i)]
        separate = sum(
            (max(t + (tau if j.queue != last else ZERO), j.release) + j.work for j in rest),
            ZERO,
        )
        t0 = t if any(j.queue == last for j in rest) else t + tau
        t0 = max(t0, min(j.release for j in rest))
        chain = ZERO
        running = t0
        for work in sorted(j.work for j in rest):
            running += work
            chain += running
        return max(separate, chain)

    def leaves_behind(mask: int, last: int, t: Time) -> bool:
        return any(
            not mask & (1 << i) and jobs[i].queue == last and jobs[i].release <= t
            for i in range(n)
        )

    def dfs(mask: int, last: Optional[int], t: Time, cost: Time):
        if mask == full:
            if best[0] is None or cost < best[0]:
                best[0] = cost
                best[1] = tuple(jobs[i].id for i in path)
            return
        if best[0] is not None and cost + lower_bound(mask, last, t) >= best[0]:
            return
        seen = frontier.setdefault((mask, last), [])
        for t_seen, cost_seen in seen:
            if t_seen <= t and cost_seen <= cost:
                return
        seen[:] = [(ts, cs) for ts, cs in seen if not (t <= ts and cost <= cs)]
        seen.append((t, cost))

        blocked = exhaustive_only and last is not None and leaves_behind(mask, last, t)
        for i, job in enumerate(jobs):
            if mask & (1 << i):
                continue
            if blocked and job.queue != last:
                continue
            start = max(t + (tau if job.queue != last else ZERO), job.release)
            done = start + job.work
            path.append(i)
            dfs(mask | (1 << i), job.queue, done, cost + done)
            path.pop()

    dfs(0, None, ZERO, ZERO)
    return best[0], best[1]


@dataclass(frozen=True)
class RatioReport:
    policy: PolicySpec
    instance_id: str
    policy_total: Time
    benchmark: BenchmarkResult
    ratio: Optional[Fraction]
    claimed_bound: Optional[Fraction]
    bound_name: Optional[str]
    bound_ok: bool
    error: Optional[str] = None
    trace: Optional[ScheduleTrace] = field(default=None, compare=False, repr=False)

    @property
    def zero_benchmark(self) -> bool:
        return self.error is None and self.ratio is None

    def to_row(self) -> Dict[str, Any]:
        ratio = self.ratio
        return {
            "instance_id": self.instance_id,
            "policy_json": self.policy.to_json(),
            "policy_total": format_time(self.policy_total) if self.policy_total is not None else "",
            "benchmark_kind": self.benchmark.kind if self.benchmark else "",
            "benchmark_total": format_time(self.benchmark.total) if self.benchmark else "",
            "ratio_num": ratio.numerator if ratio is not None else "",
            "ratio_den": ratio.denominator if ratio is not None else "",
            "ratio_decimal": f"{float(ratio):.6f}" if ratio is not None else ("ZeroBenchmark" if self.zero_benchmark else ""),
            "claimed_bound": format_time(self.claimed_bound) if self.claimed_bound is not None else "",
            "bound_name": self.bound_name or "",
            "bound_ok": self.bound_ok,
            "error": self.error or "",
        }


REPORT_COLUMNS = [
    "instance_id",
    "policy_json",
    "policy_total",
    "benchmark_kind",
    "benchmark_total",
    "ratio_num",
    "ratio_den",
    "ratio_decimal",
    "claimed_bound",
    "bound_name",
    "bound_ok",
    "error",
]


def registered_bounds(spec: PolicySpec, instance: JobInstance, benchmark_kind: str) -> List[Tuple[str, Fraction]]:
    """Known worst-case ratio guarantees that apply to this policy, instance and benchmark.

    Guarantees stated against SRPT on the setup-free instance also hold against
    the exact optimum and any constructed schedule; guarantees stated against
    the optimum do not transfer to the SRPT benchmark.
    """
    params = derive_params(instance)
    gamma, theta, k = params.gamma, params.theta, instance.k
    against_optimum = benchmark_kind in (BRUTE_FORCE, CONSTRUCTED)
    bounds: List[Tuple[str, Fraction]] = []

    if against_optimum and spec.is_cyclic and k >= 2 and is_bounded(gamma):
        bounds.append(("cyclic_kappa", max(Fraction(3, 2) * gamma, Fraction(k + 1))))
    if against_optimum and spec.work_conserving and is_bounded(gamma) and is_bounded(theta):
        bounds.append(("work_conserving", gamma + theta))

    if spec.family in (ONE_MACHINE, GIPP) and is_bounded(theta):
        if spec.clearing:
            if instance.is_clearing():
                bounds.append(("clearing_srpt_follow", 1 + theta))
        else:
            bounds.append(("srpt_follow", 2 + theta))

    if spec.family == FOLLOWER and spec.base is not None:
        base = spec.base
        if (
            against_optimum
            and base.is_cyclic
            and spec.transform in (WORKLOAD_REDUCED, WORKLOAD_AUGMENTED)
            and is_bounded(gamma)
            and spec.p_min is None
            and spec.p_max is None
        ):
            bounds.append(("workload_follower", gamma * (k + 1)))
        if base.family == SRPT_ORDER and is_bounded(theta):
            if spec.transform == SETUP_REDUCED:
                bounds.append(("setup_reduced_follower", 2 + theta))
            elif spec.transform == SETUP_AUGMENTED:
                bounds.append(("setup_augmented_follower", 2 * (1 + theta)))
    return bounds


def benchmark_for(instance: JobInstance, kind: str, max_n: int = DEFAULT_MAX_N,
                  constructed: Optional[BenchmarkResult] = None) -> BenchmarkResult:
    if kind == SRPT_REDUCED:
        return srpt_reduced(instance)
    if kind == BRUTE_FORCE:
        return brute_force_optimal(instance, max_n=max_n)
    if kind == CONSTRUCTED:
        if constructed is None:
            raise InvalidParameter("The constructed benchmark needs an adversarial family's offline schedule")
        return constructed
    raise InvalidParameter(f"Unknown benchmark kind {kind!r}, expected one of {', '.join(BENCHMARK_KINDS)}")


def competitive_ratio(
    spec: PolicySpec,
    instance: JobInstance,
    benchmark_kind: str = SRPT_REDUCED,
    instance_id: str = "",
    max_n: int = DEFAULT_MAX_N,
    benchmark: Optional[BenchmarkResult] = None,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
) -> RatioReport:
    """Simulate the policy, compare against the benchmark and the tightest registered bound"""
    instance = validate(instance)
    if benchmark is None or benchmark.kind != benchmark_kind:
        benchmark = benchmark_for(instance, benchmark_kind, max_n=max_n, constructed=benchmark)

    trace = simulate(build_policy(spec, instance), instance, max_epochs=max_epochs)
    check_trace(trace, instance)
    policy_total = total_completion(trace)

    ratio: Optional[Fraction] = policy_total / benchmark.total if benchmark.total > 0 else None
    bounds = registered_bounds(spec, instance, benchmark.kind)
    bound_name, claimed = (None, None)
    if bounds:
        bound_name, claimed = min(bounds, key=lambda b: b[1])

    if claimed is None:
        bound_ok = True
    elif ratio is None:
        bound_ok = policy_total == 0
    else:
        bound_ok = ratio <= claimed

    if not bound_ok:
        logger.warning(f"{spec.label} on {instance_id or 'instance'}: ratio {ratio} exceeds {bound_name} bound {claimed}")
    return RatioReport(
        policy=spec,
        instance_id=instance_id,
        policy_total=policy_total,
        benchmark=benchmark,
        ratio=ratio,
        claimed_bound=claimed,
        bound_name=bound_name,
        bound_ok=bound_ok,
        trace=trace,
    )


def failed_report(spec: PolicySpec, instance_id: str, benchmark: Optional[BenchmarkResult], error: Exception) -> RatioReport:
    """Row for a policy run that raised; counts as a failed check"""
    return RatioReport(
        policy=spec,
        instance_id=instance_id,
        policy_total=None,
        benchmark=benchmark,
        ratio=None,
        claimed_bound=None,
        bound_name=None,
        bound_ok=False,
        error=f"{type(error).__name__}: {error}",
    )
