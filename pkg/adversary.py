# adversary.py
"""
Worst-case instance families for the online policies.

Every generator returns the instance, the cost its target policy pays
(exact where the construction pins it down, otherwise a lower bound), an
explicit offline service order with its closed-form total (an upper bound
on the offline optimum), and how the ratio behaves along the family.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from core import (
    InvalidParameter,
    JobInstance,
    ParamsViolateRegime,
    ScheduleTrace,
    Time,
    TimeLike,
    format_time,
    make_instance,
    pure_completion,
    to_time,
    total_completion,
)
from benchmarks import CONSTRUCTED, BenchmarkResult, schedule_order
from policies import CYCLIC_EXHAUSTIVE, GIPP, L_LIMITED, SLQ, PolicySpec, cyclic_routing_table

DEFAULT_EPS = Fraction(1, 2)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdversarialFamily:
    name: str
    parameters: Dict[str, Any]
    instance: JobInstance
    online_bound: Time
    offline_bound: Time
    offline_order: Tuple[int, ...]
    offline_schedule: ScheduleTrace
    target_policy: PolicySpec
    limit_behavior: str
    online_exact: bool = True
    extras: Dict[str, Time] = field(default_factory=dict)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.offline_bound == 0:
            return None
        return self.online_bound / self.offline_bound

    def constructed_benchmark(self) -> BenchmarkResult:
        return BenchmarkResult(
            kind=CONSTRUCTED,
            total=self.offline_bound,
            schedule=self.offline_schedule,
            order=self.offline_order,
        )

    def sidecar(self) -> Dict[str, Any]:
        def render(value):
            if isinstance(value, Fraction):
                return format_time(value)
            if isinstance(value, (list, tuple)):
                return [render(v) for v in value]
            return value

        return {
            "family": self.name,
            "parameters": {key: render(value) for key, value in self.parameters.items()},
            "online_bound": format_time(self.online_bound),
            "online_exact": self.online_exact,
            "offline_bound": format_time(self.offline_bound),
            "offline_order": list(self.offline_order),
            "offline_schedule": self.offline_schedule.to_dict(),
            "target_policy": self.target_policy.to_dict(),
            "limit_behavior": self.limit_behavior,
            "extras": {key: format_time(value) for key, value in sorted(self.extras.items())},
        }


def _family(name, parameters, instance, online, offline, order, target, limit, online_exact=True, extras=None):
    schedule = schedule_order(instance, order)
    realized = total_completion(schedule)
    if realized != offline:
        # closed form and explicit schedule must agree
        raise ParamsViolateRegime(f"{name}: offline schedule costs {realized}, closed form gives {offline}")
    logger.debug(f"Generated {name} with {instance.n} jobs: online {online}, offline {offline}")
    return AdversarialFamily(
        name=name,
        parameters=parameters,
        instance=instance,
        online_bound=online,
        offline_bound=offline,
        offline_order=tuple(order),
        offline_schedule=schedule,
        target_policy=target,
        limit_behavior=limit,
        online_exact=online_exact,
        extras=extras or {},
    )


def _require(condition: bool, message: str):
    if not condition:
        raise InvalidParameter(message)


def batch_tightness(k: int, gamma: TimeLike = 1, n: int = 1, eps: TimeLike = DEFAULT_EPS,
                    tau: Optional[TimeLike] = None) -> AdversarialFamily:
    """One job of work gamma at queue 1 and a unit job at every other queue at time 0;
    a batch of n unit jobs reaches queue 1 just after the server has left it.

    tau defaults to n^2. Exact cost of the skipping exhaustive policy.
    """
    _require(isinstance(k, int) and k >= 2, f"k must be an integer >= 2, got {k!r}")
    _require(isinstance(n, int) and n >= 1, f"n must be an integer >= 1, got {n!r}")
    gamma, eps = to_time(gamma), to_time(eps)
    tau = to_time(n * n if tau is None else tau)
    _require(gamma >= 1, f"gamma must be >= 1, got {gamma}")
    if Fraction(3, 2) * gamma > k + 1:
        raise ParamsViolateRegime(f"3/2 * gamma = {Fraction(3, 2) * gamma} exceeds k + 1 = {k + 1}")
    if not 0 < eps < tau:
        raise ParamsViolateRegime(f"eps must lie in (0, tau) = (0, {tau}), got {eps}")

    jobs = [(0, gamma, 1)] + [(0, 1, q) for q in range(2, k + 1)] + [(gamma + tau + eps, 1, 1)] * n
    instance = make_instance(k, tau, jobs)

    online = (
        tau * k * (k + 1) / 2 + k * gamma + Fraction(k * (k - 1), 2)
        + n * ((k + 1) * tau + gamma + k - 1) + pure_completion(n)
    )
    offline = (
        n * tau + tau * k * (k + 1) / 2 + eps * (n + k - 1) + k * gamma + n * gamma
        + pure_completion(n) + (k - 1) * n + Fraction(k * (k - 1), 2)
    )
    batch = list(range(k, k + n))
    order = [0] + batch + list(range(1, k))
    return _family(
        "batch-tightness",
        {"k": k, "gamma": gamma, "n": n, "eps": eps, "tau": tau},
        instance, online, offline, order,
        PolicySpec(family=CYCLIC_EXHAUSTIVE, skip_empty=True),
        "ratio tends to max(3/2 gamma, k + 1) as n grows with tau = n^2",
    )


def unbounded_workload(k: int, n: int, eps: TimeLike = DEFAULT_EPS, tau: TimeLike = 1,
                       p: Optional[TimeLike] = None) -> AdversarialFamily:
    """A job of work p = n^2 at each of queues 2..k at time 0; n zero-work jobs reach queue 1 at tau + eps"""
    _require(isinstance(k, int) and k >= 2, f"k must be an integer >= 2, got {k!r}")
    _require(isinstance(n, int) and n >= 0, f"n must be an integer >= 0, got {n!r}")
    eps, tau = to_time(eps), to_time(tau)
    p = to_time(n * n if p is None else p)
    if n >= 1 and not 0 < eps < p:
        raise ParamsViolateRegime(f"eps must lie in (0, p) = (0, {p}), got {eps}")

    jobs = [(0, p, q) for q in range(2, k + 1)] + [(tau + eps, 0, 1)] * n
    instance = make_instance(k, tau, jobs)

    seeds = list(range(k - 1))
    batch = list(range(k - 1, k - 1 + n))
    online = p * k * (k - 1) / 2 + n * (k - 1) * p + tau * (k * n + Fraction(k * (k - 1), 2))
    if n == 0:
        offline = (tau + p) * k * (k - 1) / 2
    else:
        offline = p * k * (k - 1) / 2 + tau * (n + k - 1 + Fraction(k * (k - 1), 2)) + eps * (n + k - 1)
    return _family(
        "unbounded-workload",
        {"k": k, "n": n, "eps": eps, "tau": tau, "p": p},
        instance, online, offline, batch + seeds,
        PolicySpec(family=CYCLIC_EXHAUSTIVE, skip_empty=True),
        "ratio grows without bound in n (workload spread unbounded)",
    )


def limited_service_gap(k: int, n: int, l: int, tau: TimeLike = 1) -> AdversarialFamily:
    """l * n unit jobs at every queue at time 0; the l-limited policy pays a setup every l jobs"""
    _require(isinstance(k, int) and k >= 2, f"k must be an integer >= 2, got {k!r}")
    _require(isinstance(n, int) and n >= 1, f"n must be an integer >= 1, got {n!r}")
    _require(isinstance(l, int) and l >= 1, f"l must be an integer >= 1, got {l!r}")
    tau = to_time(tau)
    per_queue = l * n
    jobs = [(0, 1, q) for q in range(1, k + 1) for _ in range(per_queue)]
    instance = make_instance(k, tau, jobs)

    total_jobs = k * per_queue
    online = pure_completion(total_jobs) + tau * l * pure_completion(k * n)
    offline = pure_completion(total_jobs) + tau * per_queue * pure_completion(k)
    return _family(
        "limited-service",
        {"k": k, "n": n, "l": l, "tau": tau},
        instance, online, offline, list(range(total_jobs)),
        PolicySpec(family=L_LIMITED, l=l, skip_empty=True),
        "ratio grows without bound in n when tau scales with n",
        extras={"exhaustive_total": offline},
    )


def largest_queue_gap(n: int, p: TimeLike, tau: TimeLike = 1) -> AdversarialFamily:
    """Queue 1 holds one job of work p at time 0; n zero-work jobs reach queue 2 at tau"""
    _require(isinstance(n, int) and n >= 1, f"n must be an integer >= 1, got {n!r}")
    p, tau = to_time(p), to_time(tau)
    jobs = [(0, p, 1)] + [(tau, 0, 2)] * n
    instance = make_instance(2, tau, jobs)
    online = tau + 2 * n * tau + p + n * p
    offline = n * tau + 2 * tau + p
    return _family(
        "largest-queue",
        {"n": n, "p": p, "tau": tau},
        instance, online, offline, list(range(1, n + 1)) + [0],
        PolicySpec(family=SLQ),
        "ratio grows without bound along p = n",
    )


def static_routing_adversary(routing_table: Sequence[int], n_k: int,
                             tau: Optional[TimeLike] = None) -> AdversarialFamily:
    """Releases a unit job at each visited queue as its setup completes, and n_k unit jobs
    at the table's final queue at time 0. tau defaults to n_k^2.
    """
    table = list(routing_table)
    _require(len(table) >= 2, "routing table needs at least two visits")
    _require(all(isinstance(q, int) and q >= 1 for q in table), f"routing table entries must be queue ids, got {table}")
    _require(all(a != b for a, b in zip(table, table[1:])), "routing table repeats a queue on consecutive visits")
    _require(table[-1] not in table[:-1], "the final queue of the routing table must not be visited earlier")
    _require(isinstance(n_k, int) and n_k >= 1, f"n_k must be an integer >= 1, got {n_k!r}")
    tau = to_time(n_k * n_k if tau is None else tau)
    k = max(table)
    visits = len(table)

    jobs = [(0, 1, table[-1])] * n_k
    jobs += [((m - 1) * (tau + 1) + tau, 1, table[m - 1]) for m in range(1, visits)]
    instance = make_instance(k, tau, jobs)

    cost_of_visits = (tau + 1) * Fraction(visits * (visits - 1), 2)
    online = cost_of_visits + n_k * (visits * tau + visits - 1) + pure_completion(n_k)
    offline = cost_of_visits + n_k * tau + pure_completion(n_k) + (visits - 1) * (n_k + tau)
    return _family(
        "static-routing",
        {"routing_table": table, "n_k": n_k, "tau": tau},
        instance, online, offline, list(range(visits - 1 + n_k)),
        PolicySpec(family=CYCLIC_EXHAUSTIVE, skip_empty=False),
        "ratio tends to the number of visits in the table; cyclic tables give k",
        online_exact=table == cyclic_routing_table(k),
    )


QUEUE_LENGTH = "queue_length"
JOB_PRIORITY = "job_priority"


def priority_class_instances(kind: str, k: int, p_or_n, tau: TimeLike = 1) -> AdversarialFamily:
    """Instances that mislead queue-length and job-priority rules.

    queue_length: work p at queue 1, a zero-work job at each other queue.
    job_priority: zero-work jobs, one at each of queues 1..k-1 and a batch of n at queue k.
    """
    _require(isinstance(k, int) and k >= 2, f"k must be an integer >= 2, got {k!r}")
    tau = to_time(tau)
    if kind == QUEUE_LENGTH:
        p = to_time(p_or_n)
        instance = make_instance(k, tau, [(0, p, 1)] + [(0, 0, q) for q in range(2, k + 1)])
        online = k * p + tau * pure_completion(k)
        offline = p + tau * pure_completion(k)
        return _family(
            "queue-length-class",
            {"k": k, "p": p, "tau": tau},
            instance, online, offline, list(range(1, k)) + [0],
            PolicySpec(family=SLQ),
            "ratio tends to k as p grows",
        )
    if kind == JOB_PRIORITY:
        n = p_or_n
        _require(isinstance(n, int) and n >= 1, f"n must be an integer >= 1, got {n!r}")
        jobs = [(0, 0, q) for q in range(1, k)] + [(0, 0, k)] * n
        instance = make_instance(k, tau, jobs)
        online = tau * (k * n + Fraction(k * (k - 1), 2))
        offline = tau * (n + pure_completion(k) - 1)
        batch = list(range(k - 1, k - 1 + n))
        return _family(
            "job-priority-class",
            {"k": k, "n": n, "tau": tau},
            instance, online, offline, batch + list(range(k - 1)),
            PolicySpec(family=GIPP),
            "ratio tends to k as n grows",
        )
    raise InvalidParameter(f"kind must be {QUEUE_LENGTH} or {JOB_PRIORITY}, got {kind!r}")


def single_job(theta: TimeLike) -> AdversarialFamily:
    """One unit job at queue 1 with tau = theta; every policy pays at least 1 + theta"""
    theta = to_time(theta)
    instance = make_instance(1, theta, [(0, 1, 1)])
    bound = 1 + theta
    return _family(
        "single-job",
        {"theta": theta},
        instance, bound, bound, [0],
        PolicySpec(family=GIPP),
        "ratio against the setup-free SRPT benchmark is at least 1 + theta",
        online_exact=False,
        extras={"srpt_total": Fraction(1), "srpt_follow_total": 2 + theta},
    )


@dataclass(frozen=True)
class FamilyEntry:
    build: Callable[..., AdversarialFamily]
    params: Tuple[str, ...]
    required: Tuple[str, ...]


FAMILY_REGISTRY: Dict[str, FamilyEntry] = {
    "batch-tightness": FamilyEntry(batch_tightness, ("k", "gamma", "n", "eps", "tau"), ("k",)),
    "unbounded-workload": FamilyEntry(unbounded_workload, ("k", "n", "eps", "tau", "p"), ("k", "n")),
    "limited-service": FamilyEntry(limited_service_gap, ("k", "n", "l", "tau"), ("k", "n", "l")),
    "largest-queue": FamilyEntry(largest_queue_gap, ("n", "p", "tau"), ("n", "p")),
    "static-routing": FamilyEntry(static_routing_adversary, ("routing_table", "n_k", "tau"), ("n_k",)),
    "queue-length-class": FamilyEntry(
        lambda k, p, tau=1: priority_class_instances(QUEUE_LENGTH, k, p, tau), ("k", "p", "tau"), ("k", "p")
    ),
    "job-priority-class": FamilyEntry(
        lambda k, n, tau=1: priority_class_instances(JOB_PRIORITY, k, n, tau), ("k", "n", "tau"), ("k", "n")
    ),
    "single-job": FamilyEntry(single_job, ("theta",), ("theta",)),
}


def generate(name: str, **params) -> AdversarialFamily:
    """Build a registered family from keyword parameters; None values fall back to defaults"""
    entry = FAMILY_REGISTRY.get(name)
    if entry is None:
        raise InvalidParameter(f"Unknown family {name!r}, expected one of {', '.join(sorted(FAMILY_REGISTRY))}")
    given = {key: value for key, value in params.items() if value is not None and key in entry.params}
    if name == "static-routing" and "routing_table" not in given:
        if params.get("k") is None:
            raise InvalidParameter("static-routing needs --routing-table or --k for the cyclic table")
        given["routing_table"] = cyclic_routing_table(params["k"])
    missing = [key for key in entry.required if key not in given]
    if missing:
        raise InvalidParameter(f"Family {name} needs parameters: {', '.join(missing)}")
    return entry.build(**given)
