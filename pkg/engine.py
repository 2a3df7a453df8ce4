# engine.py
"""
Deterministic event-driven execution of an online polling policy against
a job instance.

The server starts at a neutral dock. Setups take tau, are non-resumable and
may be aborted; service is non-preemptive. The policy is consulted at every
decision epoch (arrival, service completion, setup completion, wait timer,
alarm) and only ever sees jobs released at or before the current clock.
"""

import heapq
import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from core import (
    EventKind,
    IllegalAction,
    Job,
    JobInstance,
    ScheduleTrace,
    Stalled,
    Time,
    TraceViolation,
    ZERO,
    validate,
)

DEFAULT_MAX_EPOCHS = 5_000_000
INSTANT_ACTION_LIMIT = 64

logger = logging.getLogger(__name__)


class Activity(Enum):
    IDLE = "idle"
    SETTING = "setting"
    SERVING = "serving"
    WAITING = "waiting"


@dataclass(frozen=True)
class ServerState:
    location: Optional[int]  # None while docked
    activity: Activity
    clock: Time
    target: Optional[int] = None  # queue being set up
    job: Optional[Job] = None
    started_at: Optional[Time] = None
    until: Optional[Time] = None

    @property
    def docked(self) -> bool:
        return self.location is None

    @property
    def busy(self) -> bool:
        return self.activity in (Activity.SETTING, Activity.SERVING)


class CauseKind(Enum):
    ARRIVAL = "arrival"
    SERVE_DONE = "serve_done"
    SETUP_DONE = "setup_done"
    WAIT_TIMER_FIRED = "wait_timer_fired"
    ALARM_FIRED = "alarm_fired"


@dataclass(frozen=True)
class Cause:
    kind: CauseKind
    job: Optional[Job] = None
    queue: Optional[int] = None
    tag: Optional[str] = None


@dataclass(frozen=True)
class VisitInfo:
    queue: Optional[int]
    started_at: Optional[Time]  # setup completion that opened the visit
    served: int
    number: int  # visits paid to this queue so far, current one included
    budget_until: Optional[Time]


@dataclass(frozen=True)
class DecisionContext:
    clock: Time
    k: int
    tau: Time
    server: ServerState
    queues: Tuple[Tuple[Job, ...], ...]
    cause: Cause
    visit: VisitInfo
    p_max_seen: Time

    def waiting(self, q: int) -> Tuple[Job, ...]:
        return self.queues[q - 1]

    def queue_length(self, q: int) -> int:
        return len(self.queues[q - 1])

    @property
    def total_waiting(self) -> int:
        return sum(len(q) for q in self.queues)

    @property
    def system_empty(self) -> bool:
        return self.total_waiting == 0 and self.server.activity is not Activity.SERVING

    def nonempty_queues(self) -> List[int]:
        return [q for q in range(1, self.k + 1) if self.queues[q - 1]]

    def waiting_jobs(self) -> List[Job]:
        return [job for queue in self.queues for job in queue]


@dataclass(frozen=True)
class Serve:
    job_id: int


@dataclass(frozen=True)
class SwitchTo:
    queue: int


@dataclass(frozen=True)
class SwitchAndCycle(SwitchTo):
    """SwitchTo that carries on through queue, queue + 1, ... (cyclically) while the system stays empty.

    The engine runs every such setup that ends before the next pending event
    in one step; the trace matches issuing one SwitchTo per setup.
    """


@dataclass(frozen=True)
class WaitUntil:
    until: Time


@dataclass(frozen=True)
class SetAlarm:
    at: Time
    tag: str = ""


@dataclass(frozen=True)
class AbortSetupAndStay:
    pass


@dataclass(frozen=True)
class IdleUntilNextEvent:
    pass


PolicyAction = Union[Serve, SwitchTo, SwitchAndCycle, WaitUntil, SetAlarm, AbortSetupAndStay, IdleUntilNextEvent]
IDLE = IdleUntilNextEvent()


class Policy(ABC):
    """Online decision function bound to one simulation at a time"""

    name = "policy"
    budget_constrained = False

    def reset(self, k: int, tau: Time):
        self.k = k
        self.tau = tau

    @abstractmethod
    def decide(self, ctx: DecisionContext) -> PolicyAction:
        ...


# heap priorities at equal time: arrivals first, so every epoch at t sees all jobs released at t
_ARRIVAL, _COMPLETION, _TIMER, _ALARM = 0, 1, 2, 3


class Simulation:
    """One run of one policy on one instance"""

    def __init__(self, policy: Policy, instance: JobInstance, max_epochs: int = DEFAULT_MAX_EPOCHS):
        self.logger = logging.getLogger(__name__)
        self.instance = validate(instance)
        self.policy = policy
        self.max_epochs = max_epochs
        self.instant_limit = 1000 + 200 * (self.instance.n + self.instance.k)

        self.trace = ScheduleTrace(job_ids=tuple(j.id for j in self.instance.jobs))
        self._heap: List[tuple] = []
        self._seq = itertools.count()
        self._token = 0

        self._clock: Time = ZERO
        self._location: Optional[int] = None
        self._activity = Activity.IDLE
        self._target: Optional[int] = None
        self._job: Optional[Job] = None
        self._started_at: Optional[Time] = None
        self._until: Optional[Time] = None
        self._idle_open = False

        self._queues: List[List[Job]] = [[] for _ in range(self.instance.k)]
        self._served = 0
        self._p_max_seen: Time = ZERO
        self._visit_started: Optional[Time] = None
        self._visit_served = 0
        self._visit_counts: Dict[int, int] = {}

        self._epochs = 0
        self._instant_epochs = 0

        for job in sorted(self.instance.jobs, key=lambda j: (j.release, j.queue, j.id)):
            self._push(job.release, _ARRIVAL, "arrival", job, None)

    def _push(self, t: Time, priority: int, kind: str, payload, token: Optional[int]):
        heapq.heappush(self._heap, (t, priority, next(self._seq), kind, payload, token))

    def _server_state(self) -> ServerState:
        return ServerState(
            location=self._location,
            activity=self._activity,
            clock=self._clock,
            target=self._target,
            job=self._job,
            started_at=self._started_at,
            until=self._until,
        )

    def _budget_until(self) -> Optional[Time]:
        if self._location is None or self._visit_started is None:
            return None
        jobs = self._visit_served + len(self._queues[self._location - 1])
        return self._visit_started + jobs * self._p_max_seen

    def _context(self, cause: Cause) -> DecisionContext:
        loc = self._location
        visit = VisitInfo(
            queue=loc,
            started_at=self._visit_started,
            served=self._visit_served,
            number=self._visit_counts.get(loc, 0) if loc is not None else 0,
            budget_until=self._budget_until(),
        )
        return DecisionContext(
            clock=self._clock,
            k=self.instance.k,
            tau=self.instance.tau,
            server=self._server_state(),
            queues=tuple(tuple(q) for q in self._queues),
            cause=cause,
            visit=visit,
            p_max_seen=self._p_max_seen,
        )

    def next_decision_epoch(self) -> Optional[DecisionContext]:
        """Advance to the next live event and return its context, or None once every job is served"""
        while True:
            if self._served == self.instance.n:
                return None
            if not self._heap:
                raise Stalled(
                    f"{self._served}/{self.instance.n} jobs served at t={self._clock}, "
                    f"no pending events and the policy is idling"
                )
            t, _, _, kind, payload, token = heapq.heappop(self._heap)
            if token is not None and token != self._token:
                continue

            if t != self._clock:
                self._clock = t
                self._instant_epochs = 0
            self._epochs += 1
            self._instant_epochs += 1
            if self._epochs > self.max_epochs:
                raise Stalled(f"Epoch cap {self.max_epochs} exceeded at t={self._clock}")
            if self._instant_epochs > self.instant_limit:
                raise Stalled(f"No progress: {self._instant_epochs} epochs at t={self._clock}")

            cause = self._apply_event(kind, payload)
            if self._served == self.instance.n:
                return None
            return self._context(cause)

    def _apply_event(self, kind: str, payload) -> Cause:
        t = self._clock
        if kind == "arrival":
            job: Job = payload
            self._queues[job.queue - 1].append(job)
            if job.work > self._p_max_seen:
                self._p_max_seen = job.work
            return Cause(CauseKind.ARRIVAL, job=job, queue=job.queue)

        if kind == "serve_done":
            job = self._job
            self.trace.record(EventKind.SERVE_END, t, queue=job.queue, job=job.id)
            self._served += 1
            self._visit_served += 1
            self._set_activity(Activity.IDLE)
            return Cause(CauseKind.SERVE_DONE, job=job, queue=job.queue)

        if kind == "setup_done":
            q = payload
            self.trace.record(EventKind.SETUP_END, t, queue=q)
            self._location = q
            self._visit_started = t
            self._visit_served = 0
            self._visit_counts[q] = self._visit_counts.get(q, 0) + 1
            self._set_activity(Activity.IDLE)
            return Cause(CauseKind.SETUP_DONE, queue=q)

        if kind == "wait_timer":
            self.trace.record(EventKind.WAIT_END, t, queue=self._location)
            self._set_activity(Activity.IDLE)
            return Cause(CauseKind.WAIT_TIMER_FIRED, queue=self._location)

        return Cause(CauseKind.ALARM_FIRED, tag=payload)

    def _set_activity(self, activity: Activity, target=None, job=None, until=None):
        self._token += 1
        self._activity = activity
        self._target = target
        self._job = job
        self._started_at = self._clock if activity is not Activity.IDLE else None
        self._until = until

    def _close_idle_or_wait(self):
        if self._activity is Activity.WAITING:
            self.trace.record(EventKind.WAIT_END, self._clock, queue=self._location)
            self._set_activity(Activity.IDLE)
        if self._idle_open:
            self.trace.record(EventKind.IDLE_END, self._clock)
            self._idle_open = False

    def consult(self, ctx: DecisionContext):
        """Ask the policy until it commits; alarms and aborts take effect instantly and re-consult"""
        for _ in range(INSTANT_ACTION_LIMIT):
            action = self.policy.decide(ctx)
            if self.logger.isEnabledFor(logging.DEBUG):
                self.logger.debug(f"t={ctx.clock} cause={ctx.cause.kind.value} action={action}")
            if isinstance(action, SetAlarm):
                if action.at < self._clock:
                    raise IllegalAction(f"Alarm at {action.at} lies before the clock {self._clock}")
                self._push(action.at, _ALARM, "alarm", action.tag, None)
                ctx = self._context(ctx.cause)
                continue
            if isinstance(action, AbortSetupAndStay):
                self._abort_setup()
                ctx = self._context(ctx.cause)
                continue
            self._commit(action)
            return
        raise IllegalAction(f"Policy issued more than {INSTANT_ACTION_LIMIT} instantaneous actions at t={self._clock}")

    def _abort_setup(self):
        if self._activity is not Activity.SETTING:
            raise IllegalAction(f"AbortSetupAndStay while {self._activity.value} at t={self._clock}")
        self.trace.record(EventKind.SETUP_ABORT, self._clock, queue=self._target)
        self._set_activity(Activity.IDLE)

    def _commit(self, action: PolicyAction):
        t = self._clock
        if isinstance(action, IdleUntilNextEvent):
            if self._activity is Activity.IDLE and not self._idle_open:
                self.trace.record(EventKind.IDLE_START, t)
                self._idle_open = True
            return

        if self._activity in (Activity.SETTING, Activity.SERVING):
            raise IllegalAction(f"{action} issued while {self._activity.value} at t={t}")

        if isinstance(action, Serve):
            job = self._find_waiting(action.job_id)
            self._close_idle_or_wait()
            self._queues[job.queue - 1].remove(job)
            self.trace.record(EventKind.SERVE_START, t, queue=job.queue, job=job.id)
            self._set_activity(Activity.SERVING, job=job)
            self._push(t + job.work, _COMPLETION, "serve_done", None, self._token)
            return

        if isinstance(action, SwitchTo):
            q = action.queue
            if not isinstance(q, int) or not 1 <= q <= self.instance.k:
                raise IllegalAction(f"SwitchTo({q!r}) outside queues 1..{self.instance.k}")
            self._close_idle_or_wait()
            if isinstance(action, SwitchAndCycle):
                q = self._run_empty_cycles(q)
                t = self._clock
            self.trace.record(EventKind.SETUP_START, t, queue=q)
            self._set_activity(Activity.SETTING, target=q)
            self._push(t + self.instance.tau, _COMPLETION, "setup_done", q, self._token)
            return

        if isinstance(action, WaitUntil):
            if self._location is None:
                raise IllegalAction("WaitUntil issued while docked")
            if action.until <= t:
                raise IllegalAction(f"WaitUntil({action.until}) does not lie after t={t}")
            if self.policy.budget_constrained:
                budget = self._budget_until()
                if budget is None or action.until > budget:
                    raise IllegalAction(f"WaitUntil({action.until}) exceeds the visit budget {budget}")
            self._close_idle_or_wait()
            self.trace.record(EventKind.WAIT_START, t, queue=self._location)
            self._set_activity(Activity.WAITING, until=action.until)
            self._push(action.until, _TIMER, "wait_timer", None, self._token)
            return

        raise IllegalAction(f"Unknown action {action!r}")

    def _next_event_time(self) -> Optional[Time]:
        while self._heap and self._heap[0][5] is not None and self._heap[0][5] != self._token:
            heapq.heappop(self._heap)
        return self._heap[0][0] if self._heap else None

    def _run_empty_cycles(self, q: int) -> int:
        """Complete the back-to-back setups that end strictly before the next event; return the queue still to set up"""
        tau = self.instance.tau
        horizon = self._next_event_time()
        if tau == 0 or horizon is None or any(self._queues):
            return q
        skipped = max(0, math.ceil((horizon - self._clock) / tau) - 1)
        if skipped == 0:
            return q
        for _ in range(skipped):
            self.trace.record(EventKind.SETUP_START, self._clock, queue=q)
            self._clock += tau
            self.trace.record(EventKind.SETUP_END, self._clock, queue=q)
            self._visit_counts[q] = self._visit_counts.get(q, 0) + 1
            self._location = q
            q = q % self.instance.k + 1
        self._visit_started = self._clock
        self._visit_served = 0
        self.logger.debug(f"Ran {skipped} empty setups, now at queue {self._location} at t={self._clock}")
        return q

    def _find_waiting(self, job_id: int) -> Job:
        for q, queue in enumerate(self._queues, start=1):
            for job in queue:
                if job.id != job_id:
                    continue
                if self._location != q:
                    where = "dock" if self._location is None else f"queue {self._location}"
                    raise IllegalAction(f"Serve(job {job_id}) at queue {q} while established at {where}")
                return job
        raise IllegalAction(f"Serve(job {job_id}): job is not waiting at t={self._clock}")

    def run(self) -> ScheduleTrace:
        self.policy.reset(self.instance.k, self.instance.tau)
        while True:
            ctx = self.next_decision_epoch()
            if ctx is None:
                break
            self.consult(ctx)
        self.logger.debug(
            f"{getattr(self.policy, 'name', 'policy')} finished {self.instance.n} jobs "
            f"at t={self._clock} after {self._epochs} epochs"
        )
        return self.trace


def simulate(policy: Policy, instance: JobInstance, max_epochs: int = DEFAULT_MAX_EPOCHS) -> ScheduleTrace:
    return Simulation(policy, instance, max_epochs=max_epochs).run()


def check_trace(trace: ScheduleTrace, instance: JobInstance) -> None:
    """Raise TraceViolation unless the trace is a legal non-preemptive schedule of the instance"""
    jobs = {job.id: job for job in instance.jobs}
    problems: List[str] = []
    last_t: Optional[Time] = None
    established: Optional[int] = None
    setting: Optional[Tuple[int, Time]] = None
    serving: Optional[Tuple[int, Time]] = None
    started = set()
    finished = set()

    for i, e in enumerate(trace.events):
        where = f"event {i} ({e.describe()})"
        if last_t is not None and e.t < last_t:
            problems.append(f"{where}: time goes backwards")
        last_t = e.t

        if e.kind is EventKind.SETUP_START:
            if serving or setting:
                problems.append(f"{where}: setup starts while busy")
            setting = (e.queue, e.t)
        elif e.kind is EventKind.SETUP_END:
            if not setting or setting[0] != e.queue:
                problems.append(f"{where}: no matching setup in progress")
            elif e.t - setting[1] != instance.tau:
                problems.append(f"{where}: setup lasted {e.t - setting[1]}, expected {instance.tau}")
            else:
                established = e.queue
            setting = None
        elif e.kind is EventKind.SETUP_ABORT:
            if not setting or setting[0] != e.queue:
                problems.append(f"{where}: abort without a matching setup")
            setting = None
        elif e.kind is EventKind.SERVE_START:
            job = jobs.get(e.job)
            if job is None:
                problems.append(f"{where}: unknown job")
                continue
            if e.job in started:
                problems.append(f"{where}: job served twice")
            started.add(e.job)
            if serving or setting:
                problems.append(f"{where}: service starts while busy")
            if established != job.queue:
                problems.append(f"{where}: server not established at queue {job.queue}")
            if e.t < job.release:
                problems.append(f"{where}: service starts before release {job.release}")
            serving = (e.job, e.t)
        elif e.kind is EventKind.SERVE_END:
            if not serving or serving[0] != e.job:
                problems.append(f"{where}: no matching service in progress")
            else:
                duration = e.t - serving[1]
                if duration != jobs[e.job].work:
                    problems.append(f"{where}: service lasted {duration}, work is {jobs[e.job].work}")
                finished.add(e.job)
            serving = None
        elif e.kind in (EventKind.WAIT_START, EventKind.IDLE_START):
            if serving or setting:
                problems.append(f"{where}: server idles or waits while busy")

    missing = sorted(set(jobs) - finished)
    if missing:
        problems.append(f"jobs never completed: {missing}")
    extra = sorted(finished - set(jobs))
    if extra:
        problems.append(f"trace serves jobs outside the instance: {extra}")
    if problems:
        raise TraceViolation("Illegal schedule:\n" + "\n".join(f"  - {p}" for p in problems))


def check_online_causality(make_policy: Callable[[], Policy], instance: JobInstance) -> None:
    """Replay on arrival-truncated instances; service starts before the next release must not change"""
    instance = validate(instance)
    full = simulate(make_policy(), instance)
    releases = sorted({job.release for job in instance.jobs})
    for i, r in enumerate(releases):
        horizon = releases[i + 1] if i + 1 < len(releases) else None
        visible = instance.with_jobs(j for j in instance.jobs if j.release <= r)
        partial = simulate(make_policy(), visible)

        def starts(trace: ScheduleTrace) -> List[Tuple[int, Time]]:
            return [
                (e.job, e.t)
                for e in trace.events
                if e.kind is EventKind.SERVE_START and (horizon is None or e.t < horizon)
            ]

        if starts(full) != starts(partial):
            raise TraceViolation(
                f"Decisions before t={horizon} depend on jobs released after t={r}: "
                f"{starts(full)} vs {starts(partial)}"
            )
