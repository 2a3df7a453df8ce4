# experiment.py
"""
Experiment plumbing: configuration, seeded random instances, and the
run / sweep drivers that turn (instance, policy) pairs into RatioReports.
"""

import json
import logging
import multiprocessing
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from adversary import generate
from benchmarks import (
    BENCHMARK_KINDS,
    CONSTRUCTED,
    DEFAULT_MAX_N,
    SRPT_REDUCED,
    BenchmarkResult,
    RatioReport,
    benchmark_for,
    competitive_ratio,
    failed_report,
)
from core import (
    InvalidParameter,
    JobInstance,
    PollBenchError,
    TimeLike,
    format_time,
    make_instance,
    to_time,
)
from engine import DEFAULT_MAX_EPOCHS
from policies import PolicySpec

logger = logging.getLogger(__name__)

SOURCE_FILE = "file"
SOURCE_FAMILY = "family"
SOURCE_RANDOM = "random"

RANDOM_DEFAULTS = {"n": 6, "k": 2, "tau": 1, "seed": 0, "release_max": 10, "work_min": 0, "work_max": 4}


def random_instance(seed: int, n: int = 6, k: int = 2, tau: TimeLike = 1, release_max: int = 10,
                    work_min: int = 0, work_max: int = 4) -> JobInstance:
    """Integer releases in [0, release_max], works in [work_min, work_max], queues uniform over 1..k"""
    if n < 0 or k < 1 or release_max < 0 or not 0 <= work_min <= work_max:
        raise InvalidParameter(
            f"Invalid random instance ranges: n={n}, k={k}, release_max={release_max}, works=[{work_min}, {work_max}]"
        )
    rng = np.random.default_rng(seed)
    releases = rng.integers(0, release_max + 1, size=n)
    works = rng.integers(work_min, work_max + 1, size=n)
    queues = rng.integers(1, k + 1, size=n)
    return make_instance(k, tau, [(int(r), int(p), int(q)) for r, p, q in zip(releases, works, queues)])


def mixed_trial_instance(seed: int, n: int = 10, k: int = 2, theta: TimeLike = 2, mu: float = 0.9,
                         eta: TimeLike = 2, p_min: TimeLike = 1, release_max: int = 10,
                         large_factor: int = 3) -> JobInstance:
    """Works are small (p_min .. eta * p_min) with probability mu, large (up to large_factor * eta * p_min) otherwise"""
    p_min, eta, theta = to_time(p_min), to_time(eta), to_time(theta)
    threshold = eta * p_min
    if p_min <= 0 or threshold < p_min:
        raise InvalidParameter(f"Mixed trials need p_min > 0 and eta >= 1, got p_min={p_min}, eta={eta}")
    rng = np.random.default_rng(seed)
    small_max = int(threshold // p_min)
    large_min = small_max + 1
    large_max = max(large_min, int(large_factor * threshold // p_min))
    jobs = []
    for _ in range(n):
        release = int(rng.integers(0, release_max + 1))
        if rng.random() < mu:
            units = int(rng.integers(1, small_max + 1))
        else:
            units = int(rng.integers(large_min, large_max + 1))
        queue = int(rng.integers(1, k + 1))
        jobs.append((release, units * p_min, queue))
    return make_instance(k, theta * p_min, jobs)


@dataclass
class ExperimentConfig:
    """Where instances come from, which policies run, and against which benchmark"""
    source: str = SOURCE_RANDOM
    instance_path: Optional[str] = None
    family: Optional[str] = None
    family_params: Dict[str, Any] = field(default_factory=dict)
    random_params: Dict[str, Any] = field(default_factory=lambda: dict(RANDOM_DEFAULTS))
    policies: List[PolicySpec] = field(default_factory=list)
    benchmark: str = SRPT_REDUCED
    max_n: int = DEFAULT_MAX_N
    output: Optional[str] = None
    sweep_axis: Optional[str] = None
    sweep_values: List[Any] = field(default_factory=list)
    sweep_tied: List[str] = field(default_factory=list)

    def __post_init__(self):
        errors = []
        if self.source not in (SOURCE_FILE, SOURCE_FAMILY, SOURCE_RANDOM):
            errors.append(f"source must be file, family or random, got {self.source!r}")
        if self.source == SOURCE_FILE and not self.instance_path:
            errors.append("file source needs instance_path")
        if self.source == SOURCE_FAMILY and not self.family:
            errors.append("family source needs a family name")
        if self.benchmark not in BENCHMARK_KINDS:
            errors.append(f"benchmark must be one of {', '.join(BENCHMARK_KINDS)}, got {self.benchmark!r}")
        if self.benchmark == CONSTRUCTED and self.source != SOURCE_FAMILY:
            errors.append("the constructed benchmark needs a family source")
        if self.sweep_axis and not self.sweep_values:
            errors.append(f"sweep axis {self.sweep_axis} has no values")
        if errors:
            raise InvalidParameter("Experiment configuration errors:\n" + "\n".join(f"  - {e}" for e in errors))

    def to_dict(self) -> Dict[str, Any]:
        def render(value):
            if isinstance(value, Fraction):
                return format_time(value)
            if isinstance(value, (list, tuple)):
                return [render(v) for v in value]
            return value

        return {
            "source": self.source,
            "instance_path": self.instance_path,
            "family": self.family,
            "family_params": {key: render(value) for key, value in sorted(self.family_params.items())},
            "random_params": {key: render(value) for key, value in sorted(self.random_params.items())},
            "policies": [spec.to_dict() for spec in self.policies],
            "benchmark": self.benchmark,
            "max_n": self.max_n,
            "output": self.output,
            "sweep_axis": self.sweep_axis,
            "sweep_values": [render(v) for v in self.sweep_values],
            "sweep_tied": list(self.sweep_tied),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        random_params = dict(RANDOM_DEFAULTS)
        random_params.update(data.get("random_params") or {})
        return cls(
            source=data.get("source", SOURCE_RANDOM),
            instance_path=data.get("instance_path"),
            family=data.get("family"),
            family_params=dict(data.get("family_params") or {}),
            random_params=random_params,
            policies=[PolicySpec.from_dict(p) for p in data.get("policies", [])],
            benchmark=data.get("benchmark", SRPT_REDUCED),
            max_n=int(data.get("max_n", DEFAULT_MAX_N)),
            output=data.get("output"),
            sweep_axis=data.get("sweep_axis"),
            sweep_values=list(data.get("sweep_values") or []),
            sweep_tied=list(data.get("sweep_tied") or []),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"Experiment configuration is not valid JSON: {e}") from e

    def with_axis_value(self, value) -> "ExperimentConfig":
        """Copy with the sweep axis (and every tied parameter) set to value"""
        names = [self.sweep_axis] + list(self.sweep_tied)
        if self.source == SOURCE_FAMILY:
            params = dict(self.family_params)
            params.update({name: value for name in names})
            return replace(self, family_params=params, sweep_axis=None, sweep_values=[], sweep_tied=[])
        if self.source == SOURCE_RANDOM:
            params = dict(self.random_params)
            params.update({name: value for name in names})
            return replace(self, random_params=params, sweep_axis=None, sweep_values=[], sweep_tied=[])
        raise InvalidParameter("Sweeps need a family or random instance source")


@dataclass(frozen=True)
class Task:
    """One instance with the policies to evaluate on it; picklable for the worker pool"""
    instance_id: str
    instance: JobInstance
    policies: Tuple[PolicySpec, ...]
    benchmark: str
    max_n: int = DEFAULT_MAX_N
    constructed: Optional[BenchmarkResult] = None
    max_epochs: int = DEFAULT_MAX_EPOCHS


def load_instance(config: ExperimentConfig) -> Tuple[str, JobInstance, Optional[BenchmarkResult]]:
    """Resolve the configured source to (instance id, instance, constructed offline benchmark)"""
    if config.source == SOURCE_FILE:
        path = Path(config.instance_path)
        return path.stem, JobInstance.from_json(path.read_text()), None
    if config.source == SOURCE_FAMILY:
        family = generate(config.family, **config.family_params)
        label = ",".join(f"{key}={value}" for key, value in sorted(family.sidecar()["parameters"].items()))
        return f"{family.name}[{label}]", family.instance, family.constructed_benchmark()
    params = dict(RANDOM_DEFAULTS)
    params.update(config.random_params)
    instance = random_instance(
        seed=int(params["seed"]),
        n=int(params["n"]),
        k=int(params["k"]),
        tau=params["tau"],
        release_max=int(params["release_max"]),
        work_min=int(params["work_min"]),
        work_max=int(params["work_max"]),
    )
    return f"random[seed={params['seed']},n={params['n']},k={params['k']}]", instance, None


def evaluate(task: Task) -> List[RatioReport]:
    """Benchmark once, then run every policy; a failing policy yields an error row"""
    try:
        benchmark = benchmark_for(task.instance, task.benchmark, max_n=task.max_n, constructed=task.constructed)
    except PollBenchError as e:
        logger.error(f"Benchmark {task.benchmark} failed on {task.instance_id}: {e}")
        return [failed_report(spec, task.instance_id, None, e) for spec in task.policies]

    reports = []
    for spec in task.policies:
        try:
            reports.append(
                competitive_ratio(
                    spec,
                    task.instance,
                    benchmark_kind=task.benchmark,
                    instance_id=task.instance_id,
                    max_n=task.max_n,
                    benchmark=benchmark,
                    max_epochs=task.max_epochs,
                )
            )
        except PollBenchError as e:
            logger.error(f"{spec.label} failed on {task.instance_id}: {e}")
            reports.append(failed_report(spec, task.instance_id, benchmark, e))
    return reports


def run_pool(func: Callable, tasks: Sequence, workers: int = 1) -> List:
    """Map func over tasks, in a process pool when workers > 1; results keep task order"""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with multiprocessing.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(func, tasks)


def run_experiment(config: ExperimentConfig, max_epochs: int = DEFAULT_MAX_EPOCHS) -> List[RatioReport]:
    instance_id, instance, constructed = load_instance(config)
    logger.info(f"Running {len(config.policies)} policies on {instance_id} ({instance.n} jobs) vs {config.benchmark}")
    task = Task(
        instance_id=instance_id,
        instance=instance,
        policies=tuple(config.policies),
        benchmark=config.benchmark,
        max_n=config.max_n,
        constructed=constructed,
        max_epochs=max_epochs,
    )
    return evaluate(task)


def _sweep_point(item: Tuple[str, Any, ExperimentConfig, int]) -> List[Dict[str, Any]]:
    axis, value, point, max_epochs = item
    try:
        reports = run_experiment(point, max_epochs=max_epochs)
    except PollBenchError as e:
        logger.error(f"Sweep point {value} failed: {e}")
        reports = [failed_report(spec, f"{point.family or point.source}", None, e) for spec in point.policies]
    return [{"axis": axis, "value": value, **report.to_row()} for report in reports]


def sweep(config: ExperimentConfig, workers: int = 1, max_epochs: int = DEFAULT_MAX_EPOCHS) -> List[Dict[str, Any]]:
    """One row per (axis value, policy), ordered by axis value as given"""
    if not config.sweep_axis:
        raise InvalidParameter("sweep needs a sweep axis")
    items = [(config.sweep_axis, value, config.with_axis_value(value), max_epochs) for value in config.sweep_values]
    logger.info(f"Sweeping {config.sweep_axis} over {len(items)} values with {workers} worker(s)")
    return [row for point_rows in run_pool(_sweep_point, items, workers) for row in point_rows]


def parse_axis_values(text: str) -> List[Any]:
    """Comma separated values; integers stay integers, rationals stay strings for to_time"""
    values: List[Any] = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        try:
            values.append(int(token))
        except ValueError:
            to_time(token)
            values.append(token)
    return values
