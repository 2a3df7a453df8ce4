# policies.py
"""
Online polling policies. Each policy is a deterministic decision function
over engine.DecisionContext; policies own per-run state and are bound to
one simulation at a time.
"""

import heapq
import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple

from core import (
    EventKind,
    InvalidParameter,
    Job,
    JobInstance,
    Time,
    UnboundedTransform,
    ZERO,
    derive_params,
    format_time,
    is_bounded,
    to_time,
    validate,
)
from engine import (
    IDLE,
    AbortSetupAndStay,
    Activity,
    CauseKind,
    DecisionContext,
    Policy,
    PolicyAction,
    Serve,
    SetAlarm,
    SwitchAndCycle,
    SwitchTo,
    WaitUntil,
    simulate,
)

logger = logging.getLogger(__name__)

CYCLIC_EXHAUSTIVE = "cyclic_exhaustive"
CYCLIC_GATED = "cyclic_gated"
L_LIMITED = "l_limited"
SLQ = "slq"
ONE_MACHINE = "one_machine"
GIPP = "gipp"
MIXED = "mixed"
FOLLOWER = "follower"
SRPT_ORDER = "srpt_order"

FAMILIES = (CYCLIC_EXHAUSTIVE, CYCLIC_GATED, L_LIMITED, SLQ, ONE_MACHINE, GIPP, MIXED, FOLLOWER, SRPT_ORDER)
FAMILY_ALIASES = {"om": ONE_MACHINE, "exhaustive": CYCLIC_EXHAUSTIVE, "gated": CYCLIC_GATED, "srpt": SRPT_ORDER}

FCFS = "fcfs"
SPT = "spt"

NO_WAIT = "no_wait"
STAY_BUDGET = "stay_budget"

WORKLOAD_REDUCED = "workload_reduced"
WORKLOAD_AUGMENTED = "workload_augmented"
SETUP_REDUCED = "setup_reduced"
SETUP_AUGMENTED = "setup_augmented"
TRANSFORMS = (WORKLOAD_REDUCED, WORKLOAD_AUGMENTED, SETUP_REDUCED, SETUP_AUGMENTED)


def _optional_time(value) -> Optional[Time]:
    return None if value is None else to_time(value)


@dataclass(frozen=True)
class PolicySpec:
    """Serializable policy selection"""
    family: str
    skip_empty: bool = True
    order: str = FCFS
    l: Optional[int] = None
    eta: Optional[Time] = None
    p_min: Optional[Time] = None
    p_max: Optional[Time] = None
    wait_rule: str = NO_WAIT
    transform: Optional[str] = None
    base: Optional["PolicySpec"] = None
    clearing: bool = False

    def __post_init__(self):
        errors = []
        if self.family not in FAMILIES:
            errors.append(f"unknown family {self.family!r}")
        if self.order not in (FCFS, SPT):
            errors.append(f"order must be fcfs or spt, got {self.order!r}")
        if self.wait_rule not in (NO_WAIT, STAY_BUDGET):
            errors.append(f"wait_rule must be no_wait or stay_budget, got {self.wait_rule!r}")
        if self.wait_rule == STAY_BUDGET and self.family != CYCLIC_EXHAUSTIVE:
            errors.append("stay_budget waiting applies to cyclic_exhaustive only")
        if self.family == L_LIMITED and (not isinstance(self.l, int) or self.l < 1):
            errors.append(f"l_limited needs an integer l >= 1, got {self.l!r}")
        if self.family == MIXED and (self.eta is None or self.eta <= 0):
            errors.append(f"mixed needs eta > 0, got {self.eta!r}")
        if self.family == FOLLOWER:
            if self.transform not in TRANSFORMS:
                errors.append(f"follower transform must be one of {', '.join(TRANSFORMS)}, got {self.transform!r}")
            if self.base is None or self.base.family in (FOLLOWER, MIXED):
                errors.append("follower needs a base policy that is neither a follower nor mixed")
        if self.family == MIXED and self.base is not None and self.base.family not in (CYCLIC_EXHAUSTIVE, CYCLIC_GATED):
            errors.append("mixed base must be a cyclic exhaustive or gated policy")
        if errors:
            raise InvalidParameter("Invalid policy spec:\n" + "\n".join(f"  - {e}" for e in errors))

    @property
    def work_conserving(self) -> bool:
        if self.family == SLQ:
            return True
        if self.family == CYCLIC_EXHAUSTIVE:
            return self.skip_empty and self.wait_rule == NO_WAIT
        if self.family in (CYCLIC_GATED, L_LIMITED):
            return self.skip_empty
        return False

    @property
    def is_cyclic(self) -> bool:
        return self.family in (CYCLIC_EXHAUSTIVE, CYCLIC_GATED)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"family": self.family}
        if self.family in (CYCLIC_EXHAUSTIVE, CYCLIC_GATED, L_LIMITED):
            out["skip_empty"] = self.skip_empty
            out["order"] = self.order
        if self.family == L_LIMITED:
            out["l"] = self.l
        if self.family == CYCLIC_EXHAUSTIVE and self.wait_rule != NO_WAIT:
            out["wait_rule"] = self.wait_rule
        if self.family == SLQ and self.order != FCFS:
            out["order"] = self.order
        if self.family in (ONE_MACHINE, GIPP) and self.clearing:
            out["clearing"] = True
        if self.family == MIXED:
            out["eta"] = format_time(self.eta)
        if self.family == FOLLOWER:
            out["transform"] = self.transform
        if self.family in (MIXED, FOLLOWER):
            if self.base is not None:
                out["base"] = self.base.to_dict()
            if self.p_min is not None:
                out["p_min"] = format_time(self.p_min)
            if self.p_max is not None and self.family == FOLLOWER:
                out["p_max"] = format_time(self.p_max)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def label(self) -> str:
        return self.to_json()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PolicySpec":
        if not isinstance(data, dict) or "family" not in data:
            raise InvalidParameter(f"Policy spec needs a 'family' field: {data!r}")
        family = FAMILY_ALIASES.get(data["family"], data["family"])
        base = data.get("base")
        try:
            return cls(
                family=family,
                skip_empty=bool(data.get("skip_empty", True)),
                order=data.get("order", FCFS),
                l=data.get("l"),
                eta=_optional_time(data.get("eta")),
                p_min=_optional_time(data.get("p_min")),
                p_max=_optional_time(data.get("p_max")),
                wait_rule=data.get("wait_rule", NO_WAIT),
                transform=data.get("transform"),
                base=cls.from_dict(base) if base is not None else None,
                clearing=bool(data.get("clearing", False)),
            )
        except InvalidParameter:
            raise
        except Exception as e:
            raise InvalidParameter(f"Malformed policy spec {data!r}: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "PolicySpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"Policy spec is not valid JSON: {text!r}") from e


def standard_policy_specs() -> List[PolicySpec]:
    """Every non-parametric policy variant, used by the random suites"""
    specs = []
    for family in (CYCLIC_EXHAUSTIVE, CYCLIC_GATED):
        for skip in (True, False):
            for order in (FCFS, SPT):
                specs.append(PolicySpec(family=family, skip_empty=skip, order=order))
    specs.append(PolicySpec(family=CYCLIC_EXHAUSTIVE, skip_empty=True, wait_rule=STAY_BUDGET))
    specs.append(PolicySpec(family=L_LIMITED, l=1, skip_empty=True))
    specs.append(PolicySpec(family=L_LIMITED, l=2, skip_empty=False))
    specs.append(PolicySpec(family=SLQ))
    for clearing in (False, True):
        specs.append(PolicySpec(family=ONE_MACHINE, clearing=clearing))
        specs.append(PolicySpec(family=GIPP, clearing=clearing))
    return specs


def cyclic_routing_table(k: int) -> List[int]:
    """Visit table of the non-skipping cyclic policies up to the first visit of queue k"""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    return list(range(1, k + 1))


def _order_key(order: str) -> Callable[[Job], tuple]:
    if order == SPT:
        return lambda j: (j.work, j.release, j.id)
    return lambda j: (j.release, j.id)


class CyclicPolicy(Policy):
    """Shared visiting logic of the cyclic disciplines"""

    def __init__(self, skip_empty: bool = True, order: str = FCFS):
        self.skip_empty = skip_empty
        self.order = order
        self._key = _order_key(order)

    def pick(self, jobs: Sequence[Job]) -> Job:
        return min(jobs, key=self._key)

    def next_nonempty(self, ctx: DecisionContext, after: int) -> Optional[int]:
        """First non-empty queue after `after` in cyclic order; `after` itself is checked last"""
        for step in range(1, ctx.k + 1):
            q = (after - 1 + step) % ctx.k + 1
            if ctx.waiting(q):
                return q
        return None

    def leave_dock(self, ctx: DecisionContext) -> PolicyAction:
        if self.skip_empty:
            q = self.next_nonempty(ctx, ctx.k)
            return SwitchTo(q) if q is not None else IDLE
        if ctx.tau == 0 and ctx.total_waiting == 0:
            return IDLE
        return SwitchTo(1)

    def move_on(self, ctx: DecisionContext, current: int) -> PolicyAction:
        """Switching rule once the visit at `current` is over"""
        if self.skip_empty:
            q = self.next_nonempty(ctx, current)
            if q is None:
                self.on_empty_system()
                return IDLE
            return SwitchTo(q)
        if ctx.k == 1 or (ctx.tau == 0 and ctx.total_waiting == 0):
            self.on_empty_system()
            return IDLE
        if ctx.system_empty:
            return SwitchAndCycle(current % ctx.k + 1)
        return SwitchTo(current % ctx.k + 1)

    def on_empty_system(self):
        pass


class CyclicExhaustivePolicy(CyclicPolicy):
    """Exhaustive service, cyclic routing; skip_empty selects between the skipping and non-skipping variant"""

    def __init__(self, skip_empty: bool = True, order: str = FCFS, wait_rule: str = NO_WAIT):
        super().__init__(skip_empty, order)
        self.wait_rule = wait_rule
        self.budget_constrained = wait_rule == STAY_BUDGET
        self.name = f"cyclic_exhaustive({'skip' if skip_empty else 'no_skip'},{order})"

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        if ctx.server.busy:
            return IDLE
        loc = ctx.server.location
        if loc is None:
            return self.leave_dock(ctx)
        waiting = ctx.waiting(loc)
        if waiting:
            return Serve(self.pick(waiting).id)
        if self.wait_rule == STAY_BUDGET:
            if ctx.server.activity is Activity.WAITING:
                return IDLE
            budget = ctx.visit.budget_until
            if budget is not None and budget > ctx.clock:
                return WaitUntil(budget)
        return self.move_on(ctx, loc)


class CyclicGatedPolicy(CyclicPolicy):
    """Serves only the jobs present when the visited queue's setup completed"""

    def __init__(self, skip_empty: bool = False, order: str = FCFS):
        super().__init__(skip_empty, order)
        self.name = f"cyclic_gated({'skip' if skip_empty else 'no_skip'},{order})"

    def reset(self, k, tau):
        super().reset(k, tau)
        self._gate: Set[int] = set()
        self._idle_empty = False

    def on_empty_system(self):
        self._idle_empty = True

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        if ctx.server.busy:
            return IDLE
        loc = ctx.server.location
        if loc is None:
            return self.leave_dock(ctx)

        waiting = ctx.waiting(loc)
        cause = ctx.cause
        if cause.kind is CauseKind.SETUP_DONE and cause.queue == loc:
            self._gate = {j.id for j in waiting}
            self._idle_empty = False
        elif self._idle_empty and cause.kind is CauseKind.ARRIVAL and cause.queue == loc:
            # idle in place with nothing gated: the arrival opens a fresh gate
            self._gate = {j.id for j in waiting}
            self._idle_empty = False

        gated = [j for j in waiting if j.id in self._gate]
        if gated:
            return Serve(self.pick(gated).id)
        if ctx.k == 1 and waiting:
            self._gate = {j.id for j in waiting}
            return Serve(self.pick(waiting).id)
        action = self.move_on(ctx, loc)
        if isinstance(action, SwitchTo):
            self._idle_empty = False
        return action


class LimitedServicePolicy(CyclicPolicy):
    """At most l jobs per visit, then a cyclic switch"""

    def __init__(self, l: int, skip_empty: bool = True, order: str = FCFS):
        if l < 1:
            raise InvalidParameter(f"l must be >= 1, got {l}")
        super().__init__(skip_empty, order)
        self.l = l
        self.name = f"l_limited(l={l},{'skip' if skip_empty else 'no_skip'})"

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        if ctx.server.busy:
            return IDLE
        loc = ctx.server.location
        if loc is None:
            return self.leave_dock(ctx)
        waiting = ctx.waiting(loc)
        if waiting and (ctx.k == 1 or ctx.visit.served < self.l):
            return Serve(self.pick(waiting).id)
        return self.move_on(ctx, loc)


class LargestQueuePolicy(Policy):
    """Exhaustive service; on exhaustion switch to the queue with the most waiting jobs"""

    name = "slq"

    def __init__(self, order: str = FCFS):
        self._key = _order_key(order)

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        if ctx.server.busy:
            return IDLE
        loc = ctx.server.location
        if loc is not None and ctx.waiting(loc):
            return Serve(min(ctx.waiting(loc), key=self._key).id)
        if ctx.total_waiting == 0:
            return IDLE
        longest = max(range(1, ctx.k + 1), key=lambda q: (ctx.queue_length(q), -q))
        return SwitchTo(longest)


def srpt_completions(jobs: Sequence[Job], origin: Time = ZERO) -> List[Tuple[Time, Job]]:
    """Preemptive SRPT without setups; (completion, job) in completion sequence.

    Releases earlier than `origin` are moved to `origin`. Equal remaining work
    goes to the earlier release, then the lower id.
    """
    def start(job: Job) -> Time:
        return max(job.release, origin)

    pending = sorted(jobs, key=lambda j: (start(j), j.id))
    heap: List[tuple] = []
    done: List[Tuple[Time, Job]] = []
    t = origin
    i = 0
    while i < len(pending) or heap:
        if not heap and start(pending[i]) > t:
            t = start(pending[i])
        while i < len(pending) and start(pending[i]) <= t:
            job = pending[i]
            heapq.heappush(heap, (job.work, start(job), job.id, job))
            i += 1
        remaining, released, job_id, job = heap[0]
        next_arrival = start(pending[i]) if i < len(pending) else None
        finish = t + remaining
        if next_arrival is None or finish <= next_arrival:
            heapq.heappop(heap)
            t = finish
            done.append((t, job))
        else:
            heapq.heapreplace(heap, (remaining - (next_arrival - t), released, job_id, job))
            t = next_arrival
    return done


class VirtualSchedulePolicy(Policy):
    """Releases jobs to the real server in the order a virtual schedule commits them.

    The virtual schedule is recomputed whenever a new job is revealed. A commit
    at time c is final once the clock passes c, or at c itself outside arrival
    epochs (all arrivals at c are processed first). Alarms wake the policy at
    the next pending commit.
    """

    def reset(self, k, tau):
        super().reset(k, tau)
        self._revealed: Dict[int, Job] = {}
        self._served: Set[int] = set()
        self._commits: List[Tuple[Time, Job]] = []
        self._alarms: Set[Time] = set()

    def virtual_commits(self, jobs: List[Job]) -> List[Tuple[Time, Job]]:
        raise NotImplementedError

    def choose(self, eligible: List[Job], ctx: DecisionContext) -> Job:
        return eligible[0]

    def _observe(self, ctx: DecisionContext):
        fresh = [job for job in ctx.waiting_jobs() if job.id not in self._revealed]
        if fresh:
            for job in fresh:
                self._revealed[job.id] = job
            self._commits = self.virtual_commits(list(self._revealed.values()))

    def _final(self, t: Time, ctx: DecisionContext) -> bool:
        return t < ctx.clock or (t == ctx.clock and ctx.cause.kind is not CauseKind.ARRIVAL)

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        self._observe(ctx)
        pending = [t for t, job in self._commits if job.id not in self._served and not self._final(t, ctx)]
        if pending:
            wake = min(pending)
            if wake not in self._alarms:
                self._alarms.add(wake)
                return SetAlarm(wake, tag=self.name)
        if ctx.server.busy:
            return IDLE
        eligible = [job for t, job in self._commits if job.id not in self._served and self._final(t, ctx)]
        if not eligible:
            return IDLE
        job = self.choose(eligible, ctx)
        if ctx.server.location == job.queue:
            self._served.add(job.id)
            return Serve(job.id)
        return SwitchTo(job.queue)


class OneMachinePolicy(VirtualSchedulePolicy):
    """Serves jobs non-preemptively in the completion order of a virtual setup-free SRPT"""

    def __init__(self, clearing: bool = False, origin: Time = ZERO):
        self.clearing = clearing
        self.origin = origin
        self.name = "one_machine_clearing" if clearing else "one_machine"

    def virtual_commits(self, jobs):
        if self.clearing:
            return sorted(((max(j.release, self.origin), j) for j in jobs), key=lambda c: (c[0], c[1].work, c[1].id))
        return srpt_completions(jobs, origin=self.origin)

    def choose(self, eligible, ctx):
        if self.clearing:
            return min(eligible, key=lambda j: (j.work, j.release, j.id))
        return eligible[0]


def gittins_key(job: Job, location: Optional[int], tau: Time) -> tuple:
    """Sort key, smallest first: largest index 1/(p + setup), then smaller p, lower queue, lower id"""
    denominator = job.work + (ZERO if location == job.queue else tau)
    if denominator == 0:
        index_rank = (0, ZERO)
    else:
        index_rank = (1, denominator)  # smaller denominator means larger index
    return (index_rank, job.work, job.queue, job.id)


class GittinsIndexPolicy(OneMachinePolicy):
    """Same eligibility as the one-machine policy; serves the eligible job with the largest index"""

    def __init__(self, clearing: bool = False, origin: Time = ZERO):
        super().__init__(clearing=clearing, origin=origin)
        self.name = "gipp_clearing" if clearing else "gipp"

    def choose(self, eligible, ctx):
        return min(eligible, key=lambda j: gittins_key(j, ctx.server.location, ctx.tau))


def transform_job(job: Job, transform: str, tau: Time, p_min: Optional[Time], p_max: Optional[Time]) -> Job:
    if transform == WORKLOAD_REDUCED:
        return replace(job, work=p_min)
    if transform == WORKLOAD_AUGMENTED:
        return replace(job, work=p_max)
    if transform == SETUP_AUGMENTED:
        return replace(job, work=job.work + tau)
    return job


class FollowerPolicy(VirtualSchedulePolicy):
    """Follows the order a base policy produces on a transformed copy of the revealed jobs.

    Cyclic and other engine-driven bases commit a job when the virtual server
    starts it; the SRPT order commits at virtual completion.
    """

    def __init__(self, base: PolicySpec, transform: str, p_min: Optional[Time] = None, p_max: Optional[Time] = None):
        if transform == WORKLOAD_REDUCED and p_min is None:
            raise InvalidParameter("workload_reduced follower needs p_min")
        if transform == WORKLOAD_AUGMENTED and p_max is None:
            raise InvalidParameter("workload_augmented follower needs p_max")
        self.base = base
        self.transform = transform
        self.p_min = p_min
        self.p_max = p_max
        self.name = f"follower({transform},{base.family})"

    def virtual_tau(self) -> Time:
        return ZERO if self.transform in (SETUP_REDUCED, SETUP_AUGMENTED) else self.tau

    def virtual_commits(self, jobs):
        virtual = [transform_job(j, self.transform, self.tau, self.p_min, self.p_max) for j in jobs]
        real = {j.id: j for j in jobs}
        if self.base.family == SRPT_ORDER:
            return [(t, real[j.id]) for t, j in srpt_completions(virtual)]
        instance = validate(JobInstance(k=self.k, tau=self.virtual_tau(), jobs=tuple(virtual)))
        trace = simulate(build_policy(self.base), instance)
        return [(e.t, real[e.job]) for e in trace.events if e.kind is EventKind.SERVE_START]


class MixedStrategyPolicy(Policy):
    """Cyclic base policy until a job larger than eta * p_min arrives, then the index policy for the busy period"""

    def __init__(self, eta: Time, p_min: Time, base: Optional[PolicySpec] = None):
        if eta <= 0:
            raise InvalidParameter(f"eta must be > 0, got {eta}")
        self.eta = eta
        self.p_min = p_min
        self.base_spec = base or PolicySpec(family=CYCLIC_EXHAUSTIVE, skip_empty=True, order=SPT)
        self.threshold = eta * p_min
        self.budget_constrained = self.base_spec.wait_rule == STAY_BUDGET
        self.name = f"mixed(eta={format_time(eta)})"
        self.logger = logging.getLogger(__name__)

    def reset(self, k, tau):
        super().reset(k, tau)
        self.base = build_policy(self.base_spec)
        self.base.reset(k, tau)
        self.index_phase: Optional[GittinsIndexPolicy] = None
        self.triggers: List[Time] = []

    def decide(self, ctx: DecisionContext) -> PolicyAction:
        if self.index_phase is not None and ctx.system_empty:
            self.index_phase = None
            self.base.reset(self.k, self.tau)

        if self.index_phase is None:
            cause = ctx.cause
            if cause.kind is CauseKind.ARRIVAL and cause.job.work > self.threshold:
                self.triggers.append(ctx.clock)
                self.index_phase = GittinsIndexPolicy(origin=ctx.clock)
                self.index_phase.reset(self.k, self.tau)
                self.logger.debug(f"Large arrival (job {cause.job.id}, p={cause.job.work}) at t={ctx.clock}")
                if ctx.server.activity is Activity.SETTING:
                    return AbortSetupAndStay()
            else:
                return self.base.decide(ctx)
        return self.index_phase.decide(ctx)


def _exact(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(str(value))


def mixed_ratio_bound(eta, k: int, theta, mu, n: int) -> Fraction:
    """Expected-ratio bound of the mixed strategy: kappa(eta) mu^n + (theta + 2)(1 - mu^n), exact.

    Float arguments are read through their decimal repr, so 0.9 means 9/10.
    """
    kappa = max(Fraction(3, 2) * _exact(eta), Fraction(k + 1))
    mu_n = _exact(mu) ** n
    return kappa * mu_n + (_exact(theta) + 2) * (1 - mu_n)


def optimal_eta(k: int, theta, mu: Callable[[Fraction], Any], n: int, grid: int = 200) -> Fraction:
    """Threshold minimizing mixed_ratio_bound on [2/3 (k+1), min(2/3 (theta+2), theta)] by grid search.

    Library only: mu is a callable, which the command line cannot express.
    """
    if not is_bounded(theta):
        raise InvalidParameter("optimal_eta needs a bounded theta")
    theta = Fraction(theta)
    lo = Fraction(2, 3) * (k + 1)
    hi = min(Fraction(2, 3) * (theta + 2), theta)
    if hi <= lo:
        return lo
    candidates = [lo + (hi - lo) * Fraction(i, grid) for i in range(grid + 1)]
    return min(candidates, key=lambda eta: mixed_ratio_bound(eta, k, theta, mu(eta), n))


def build_policy(spec: PolicySpec, instance: Optional[JobInstance] = None) -> Policy:
    """Instantiate a policy; p_min / p_max default to the instance's values when not configured"""
    family = spec.family
    if family == CYCLIC_EXHAUSTIVE:
        policy: Policy = CyclicExhaustivePolicy(spec.skip_empty, spec.order, spec.wait_rule)
    elif family == CYCLIC_GATED:
        policy = CyclicGatedPolicy(spec.skip_empty, spec.order)
    elif family == L_LIMITED:
        policy = LimitedServicePolicy(spec.l, spec.skip_empty, spec.order)
    elif family == SLQ:
        policy = LargestQueuePolicy(spec.order)
    elif family == ONE_MACHINE:
        policy = OneMachinePolicy(clearing=spec.clearing)
    elif family == GIPP:
        policy = GittinsIndexPolicy(clearing=spec.clearing)
    elif family in (MIXED, FOLLOWER):
        p_min, p_max = spec.p_min, spec.p_max
        if instance is not None and (p_min is None or p_max is None):
            params = derive_params(instance)
            p_min = params.p_min if p_min is None else p_min
            p_max = params.p_max if p_max is None else p_max
        if family == MIXED:
            if p_min is None:
                raise InvalidParameter("mixed strategy needs p_min (configure it or pass the instance)")
            policy = MixedStrategyPolicy(spec.eta, p_min, spec.base)
        else:
            if spec.transform == WORKLOAD_AUGMENTED and p_min == 0 and p_max is not None and p_max > 0:
                raise UnboundedTransform("workload_augmented needs a bounded workload ratio (p_min > 0)")
            policy = FollowerPolicy(spec.base, spec.transform, p_min=p_min, p_max=p_max)
    else:
        raise InvalidParameter(f"{family} is only usable as a follower base")
    logger.debug(f"Built policy {policy.name} from {spec.label}")
    return policy
