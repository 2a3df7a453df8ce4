# core.py
"""
Domain types shared by the simulator, the benchmarks and the adversary
generators: exact rational time, jobs, instances, derived instance
parameters and schedule traces.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

Time = Fraction
TimeLike = Union[int, str, Fraction]

ZERO = Fraction(0)


class PollBenchError(Exception):
    """Base class for every domain failure"""


class InvalidInstance(PollBenchError):
    """Instance data violates the instance invariants"""


class InvalidQueue(InvalidInstance):
    """Job references a queue outside 1..k"""


class InvalidTime(InvalidInstance):
    """Time value is negative or unparsable"""


class UnservedJob(PollBenchError):
    """Trace lacks a service completion for some job"""


class IllegalAction(PollBenchError):
    """Policy returned an action that is not legal in the current state"""


class Stalled(PollBenchError):
    """Simulation cannot make progress while jobs remain"""


class TraceViolation(PollBenchError):
    """Trace breaks one of the schedule invariants"""


class TooLarge(PollBenchError):
    """Instance exceeds the exact-search ceiling"""


class InvalidParameter(PollBenchError):
    """Generator or policy parameter outside its documented range"""


class ParamsViolateRegime(InvalidParameter):
    """Parameters fall outside the regime a construction is valid for"""


class UnboundedTransform(PollBenchError):
    """Virtual-instance transform needs a bounded workload ratio"""


def to_time(value: TimeLike) -> Time:
    """Parse an int, Fraction or "num/den" string into a non-negative Time"""
    if isinstance(value, bool):
        raise InvalidTime(f"Boolean is not a time value: {value!r}")
    if isinstance(value, float):
        raise InvalidTime(f"Floating point time rejected, use 'num/den': {value!r}")
    try:
        t = Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise InvalidTime(f"Cannot parse time value {value!r}: {e}") from e
    if t < 0:
        raise InvalidTime(f"Time must be non-negative, got {value!r}")
    return t


def format_time(t: Fraction) -> str:
    return f"{t.numerator}/{t.denominator}"


@dataclass(frozen=True)
class Job:
    id: int
    release: Time
    work: Time
    queue: int

    def to_dict(self) -> Dict[str, Any]:
        return {"r": format_time(self.release), "p": format_time(self.work), "q": self.queue}


@dataclass(frozen=True)
class JobInstance:
    """k queues sharing one setup time tau; jobs sorted by (release, id) once validated"""
    k: int
    tau: Time
    jobs: Tuple[Job, ...] = ()

    @property
    def n(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        for job in self.jobs:
            if job.id == job_id:
                return job
        raise KeyError(job_id)

    def with_jobs(self, jobs: Iterable[Job], tau: Optional[Time] = None) -> "JobInstance":
        return JobInstance(k=self.k, tau=self.tau if tau is None else tau, jobs=tuple(jobs))

    def is_clearing(self) -> bool:
        return all(job.release == 0 for job in self.jobs)

    def to_dict(self) -> Dict[str, Any]:
        # Canonical field order; jobs are written in id order so that ids survive a round trip
        ordered = sorted(self.jobs, key=lambda j: j.id)
        return {
            "k": self.k,
            "tau": format_time(self.tau),
            "jobs": [job.to_dict() for job in ordered],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "JobInstance":
        try:
            k = data["k"]
            tau = to_time(data.get("tau", 0))
            raw_jobs = data.get("jobs", [])
        except (KeyError, TypeError) as e:
            raise InvalidInstance(f"Malformed instance document: {e}") from e
        if not isinstance(k, int) or isinstance(k, bool):
            raise InvalidInstance(f"k must be an integer, got {k!r}")
        jobs = []
        for i, raw in enumerate(raw_jobs):
            try:
                jobs.append(Job(id=i, release=to_time(raw["r"]), work=to_time(raw["p"]), queue=raw["q"]))
            except KeyError as e:
                raise InvalidInstance(f"Job {i} is missing field {e}") from e
        return validate(cls(k=k, tau=tau, jobs=tuple(jobs)))

    @classmethod
    def from_json(cls, text: str) -> "JobInstance":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidInstance(f"Instance is not valid JSON: {e}") from e
        return cls.from_dict(data)


def make_instance(k: int, tau: TimeLike, jobs: Sequence[Tuple[TimeLike, TimeLike, int]]) -> JobInstance:
    """Build a validated instance from (release, work, queue) triples; ids follow input order"""
    built = [Job(id=i, release=to_time(r), work=to_time(p), queue=q) for i, (r, p, q) in enumerate(jobs)]
    return validate(JobInstance(k=k, tau=to_time(tau), jobs=tuple(built)))


def validate(instance: JobInstance) -> JobInstance:
    """Check instance invariants and return a copy with jobs sorted by (release, id)"""
    if not isinstance(instance.k, int) or instance.k < 1:
        raise InvalidInstance(f"Queue count k must be >= 1, got {instance.k!r}")
    if not isinstance(instance.tau, Fraction) or instance.tau < 0:
        raise InvalidTime(f"Setup time must be a non-negative rational, got {instance.tau!r}")
    seen = set()
    for job in instance.jobs:
        if job.id in seen:
            raise InvalidInstance(f"Duplicate job id {job.id}")
        seen.add(job.id)
        if not isinstance(job.queue, int) or isinstance(job.queue, bool) or not 1 <= job.queue <= instance.k:
            raise InvalidQueue(f"Job {job.id} targets queue {job.queue!r}, valid range is 1..{instance.k}")
        if not isinstance(job.release, Fraction) or job.release < 0:
            raise InvalidTime(f"Job {job.id} has invalid release {job.release!r}")
        if not isinstance(job.work, Fraction) or job.work < 0:
            raise InvalidTime(f"Job {job.id} has invalid work {job.work!r}")
    ordered = tuple(sorted(instance.jobs, key=lambda j: (j.release, j.id)))
    return JobInstance(k=instance.k, tau=instance.tau, jobs=ordered)


class Unbounded:
    """Tag for a ratio parameter that has no finite value"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unbounded"

    def __str__(self):
        return "unbounded"

    def __reduce__(self):
        return (Unbounded, ())


UNBOUNDED = Unbounded()
Ratio = Union[Fraction, Unbounded]


def is_bounded(value: Any) -> bool:
    return value is not UNBOUNDED and value is not None


@dataclass(frozen=True)
class InstanceParams:
    p_min: Time
    p_max: Time
    gamma: Ratio
    theta: Ratio


def derive_params(instance: JobInstance) -> InstanceParams:
    """Workload spread (gamma) and setup-to-work ratio (theta) with the zero conventions"""
    works = [job.work for job in instance.jobs]
    p_min = min(works) if works else ZERO
    p_max = max(works) if works else ZERO
    tau = instance.tau

    if p_min > 0:
        gamma: Ratio = p_max / p_min
    elif p_max == 0:
        gamma = Fraction(1)
    else:
        gamma = UNBOUNDED

    if p_min > 0:
        theta: Ratio = tau / p_min
    elif tau == 0:
        theta = Fraction(1)
    else:
        theta = UNBOUNDED

    return InstanceParams(p_min=p_min, p_max=p_max, gamma=gamma, theta=theta)


def pure_completion(n: int) -> int:
    """Total completion of n back-to-back unit jobs: n(n+1)/2"""
    if n < 0:
        raise InvalidParameter(f"n must be >= 0, got {n}")
    return n * (n + 1) // 2


class EventKind(Enum):
    SETUP_START = "SETUP_START"
    SETUP_END = "SETUP_END"
    SETUP_ABORT = "SETUP_ABORT"
    SERVE_START = "SERVE_START"
    SERVE_END = "SERVE_END"
    WAIT_START = "WAIT_START"
    WAIT_END = "WAIT_END"
    IDLE_START = "IDLE_START"
    IDLE_END = "IDLE_END"


@dataclass(frozen=True)
class TraceEvent:
    kind: EventKind
    t: Time
    queue: Optional[int] = None
    job: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"event": self.kind.value, "t": format_time(self.t)}
        if self.job is not None:
            out["job"] = self.job
        if self.queue is not None:
            out["q"] = self.queue
        return out

    def describe(self) -> str:
        t = self.t
        text = f"t={t.numerator}" if t.denominator == 1 else f"t={t.numerator}/{t.denominator}"
        text += f" {self.kind.value}"
        if self.job is not None:
            text += f" job={self.job}"
        if self.queue is not None:
            text += f" q={self.queue}"
        return text


@dataclass
class ScheduleTrace:
    """Ordered service/setup/wait/idle events of one schedule over a fixed job set"""
    job_ids: Tuple[int, ...]
    events: List[TraceEvent] = field(default_factory=list)

    def record(self, kind: EventKind, t: Time, queue: Optional[int] = None, job: Optional[int] = None):
        self.events.append(TraceEvent(kind=kind, t=t, queue=queue, job=job))

    @property
    def completions(self) -> Dict[int, Time]:
        return {e.job: e.t for e in self.events if e.kind is EventKind.SERVE_END}

    def service_order(self) -> List[int]:
        return [e.job for e in self.events if e.kind is EventKind.SERVE_START]

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind is kind)

    def timeline(self) -> str:
        return "".join(e.describe() + "\n" for e in self.events)

    def to_dict(self) -> Dict[str, Any]:
        completions = self.completions
        return {
            "events": [e.to_dict() for e in self.events],
            "completions": {str(j): format_time(completions[j]) for j in sorted(completions)},
        }


def total_completion(trace: ScheduleTrace) -> Time:
    """Sum of completion times; every job of the trace's job set must have finished"""
    completions = trace.completions
    missing = [j for j in trace.job_ids if j not in completions]
    if missing:
        raise UnservedJob(f"Jobs without a service completion: {missing}")
    return sum((completions[j] for j in trace.job_ids), ZERO)
