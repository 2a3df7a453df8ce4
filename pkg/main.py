# main.py
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

# Add project root to path
sys.path.append(str(Path(__file__).parent))

from acceptance import run_acceptance
from adversary import FAMILY_REGISTRY, generate
from benchmarks import BENCHMARK_KINDS, REPORT_COLUMNS, SRPT_REDUCED
from config import VALID_LOG_LEVELS, Config
from core import InvalidInstance, InvalidParameter
from experiment import (
    RANDOM_DEFAULTS,
    SOURCE_FAMILY,
    SOURCE_FILE,
    SOURCE_RANDOM,
    ExperimentConfig,
    parse_axis_values,
    random_instance,
    run_experiment,
    sweep,
)
from policies import PolicySpec, standard_policy_specs
from report_generator import ReportGenerator

RANDOM_FAMILY = "random"
FAMILY_PARAMS = ("k", "n", "l", "p", "tau", "gamma", "eps", "theta", "n_k", "routing_table")
RANDOM_PARAMS = ("seed", "n", "k", "tau", "release_max", "work_min", "work_max")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def setup_logging(level: Optional[str] = None):
    """Configure logging to a timestamped file under logs/ and stdout"""
    log_dir = Path("logs")
    log_dir.mkdir(exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = log_dir / f"pollbench_{timestamp}.log"

    level = (level or os.getenv('LOG_LEVEL', 'INFO')).upper()
    logging.basicConfig(
        level=level if level in VALID_LOG_LEVELS else 'INFO',
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stdout)
        ]
    )
    return logging.getLogger(__name__)


def _queue_list(text: str) -> List[int]:
    try:
        return [int(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated queue ids, got {text!r}")


def _add_instance_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("instance parameters")
    group.add_argument("--k", type=int, help="number of queues")
    group.add_argument("--n", type=int, help="number of jobs (random) or family size parameter")
    group.add_argument("--l", type=int, help="jobs per visit of the limited-service policy")
    group.add_argument("--p", help="large work value (rational, e.g. 7/2)")
    group.add_argument("--tau", help="setup time (rational)")
    group.add_argument("--gamma", help="workload spread (rational)")
    group.add_argument("--eps", help="arrival offset epsilon (rational)")
    group.add_argument("--theta", help="setup-to-work ratio (rational)")
    group.add_argument("--n-k", dest="n_k", type=int, help="batch size at the last queue of a routing table")
    group.add_argument("--routing-table", dest="routing_table", type=_queue_list, help="comma separated visit table")
    group.add_argument("--seed", type=int, help="random instance seed")
    group.add_argument("--release-max", dest="release_max", type=int, help="largest random release")
    group.add_argument("--work-min", dest="work_min", type=int, help="smallest random work")
    group.add_argument("--work-max", dest="work_max", type=int, help="largest random work")


def _add_source_flags(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--instance", help="instance JSON file")
    source.add_argument("--family", choices=sorted(FAMILY_REGISTRY), help="adversarial family")
    parser.add_argument("--policy", action="append", default=[], help="policy spec JSON (repeatable)")
    parser.add_argument("--policies-file", dest="policies_file", help="JSON file holding a list of policy specs")
    parser.add_argument("--benchmark", choices=BENCHMARK_KINDS, default=SRPT_REDUCED, help="offline benchmark")
    parser.add_argument("--max-n", dest="max_n", type=int, help="largest instance for the exact search")
    _add_instance_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pollbench",
        description="Simulate online polling policies with setup times and measure their competitive ratios",
    )
    parser.add_argument("--output-dir", dest="output_dir", help="directory for outputs (default POLLBENCH_OUTPUT_DIR)")
    parser.add_argument("--workers", type=int, help="worker processes (default POLLBENCH_WORKERS)")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="write an instance JSON (and bounds sidecar for families)")
    gen.add_argument("family", choices=sorted(FAMILY_REGISTRY) + [RANDOM_FAMILY])
    gen.add_argument("--name", help="output file stem")
    _add_instance_flags(gen)

    run = commands.add_parser("run", help="run policies on one instance and write the ratio report CSV")
    _add_source_flags(run)
    run.add_argument("--output", default="report.csv", help="report file name inside the output directory")
    run.add_argument("--trace-dir", dest="trace_dir", help="also write one trace JSON per policy run into this directory")

    sweep_parser = commands.add_parser("sweep", help="run policies along one parameter axis")
    sweep_parser.add_argument("--config", help="ExperimentConfig JSON file (flags below are ignored)")
    _add_source_flags(sweep_parser)
    sweep_parser.add_argument("--axis", help="parameter to sweep")
    sweep_parser.add_argument("--values", help="comma separated axis values")
    sweep_parser.add_argument("--tie", action="append", default=[], help="parameter set equal to the axis value")
    sweep_parser.add_argument("--output", default="sweep.csv", help="sweep file name inside the output directory")

    verify = commands.add_parser("verify", help="run the acceptance suite")
    verify.add_argument("--seed", type=int, help="base seed (default POLLBENCH_SEED)")
    verify.add_argument("--suite-size", dest="suite_size", type=int, help="instances per randomized suite")
    verify.add_argument("--only", help="comma separated check names")
    verify.add_argument("--output", default="acceptance.csv", help="results file name inside the output directory")
    return parser


def _family_params(args) -> Dict[str, Any]:
    return {key: getattr(args, key) for key in FAMILY_PARAMS if getattr(args, key, None) is not None}


def _random_params(args) -> Dict[str, Any]:
    params = dict(RANDOM_DEFAULTS)
    params.update({key: getattr(args, key) for key in RANDOM_PARAMS if getattr(args, key, None) is not None})
    return params


def _policies(args) -> List[PolicySpec]:
    specs = [PolicySpec.from_json(text) for text in args.policy]
    if args.policies_file:
        data = json.loads(Path(args.policies_file).read_text())
        if not isinstance(data, list):
            raise InvalidParameter(f"{args.policies_file} must hold a JSON list of policy specs")
        specs.extend(PolicySpec.from_dict(item) for item in data)
    return specs or standard_policy_specs()


def _experiment_config(args, config: Config) -> ExperimentConfig:
    if args.instance:
        source = SOURCE_FILE
    elif args.family:
        source = SOURCE_FAMILY
    else:
        source = SOURCE_RANDOM
    return ExperimentConfig(
        source=source,
        instance_path=args.instance,
        family=args.family,
        family_params=_family_params(args),
        random_params=_random_params(args),
        policies=_policies(args),
        benchmark=args.benchmark,
        max_n=args.max_n if args.max_n is not None else config.MAX_N,
        output=args.output,
    )


def _failed_rows(rows: List[Dict[str, Any]]) -> int:
    return sum(1 for row in rows if not row["bound_ok"])


def cmd_gen(args, config: Config, reports: ReportGenerator) -> int:
    logger = logging.getLogger(__name__)
    try:
        if args.family == RANDOM_FAMILY:
            params = _random_params(args)
            instance = random_instance(**params)
            name = args.name or f"random-seed{params['seed']}-n{params['n']}-k{params['k']}"
            reports.save_instance(instance, name)
            return EXIT_OK

        family = generate(args.family, **_family_params(args))
        name = args.name or family.name
        reports.save_instance(family.instance, name)
        reports.save_json(family.sidecar(), f"{name}.bounds.json")
        logger.info(f"{family.name}: online {family.online_bound}, offline {family.offline_bound}")
        return EXIT_OK
    except Exception as e:
        logger.error(f"gen {args.family} failed: {str(e)}", exc_info=True)
        raise


def cmd_run(args, config: Config, reports: ReportGenerator) -> int:
    logger = logging.getLogger(__name__)
    try:
        experiment = _experiment_config(args, config)
        results = run_experiment(experiment, max_epochs=config.MAX_EPOCHS)
        rows = [report.to_row() for report in results]
        reports.save_csv(rows, args.output, REPORT_COLUMNS)
        if args.trace_dir:
            traces = ReportGenerator(args.trace_dir)
            for index, report in enumerate(results):
                if report.trace is not None:
                    traces.save_trace(report, f"trace-{index:02d}.json")
        reports.save_markdown(rows, f"{Path(args.output).stem}.md", "Ratio Report")
        failed = _failed_rows(rows)
        if failed:
            logger.warning(f"{failed} of {len(rows)} rows violate a bound or failed")
            return EXIT_FAILED
        return EXIT_OK
    except Exception as e:
        logger.error(f"run failed: {str(e)}", exc_info=True)
        raise


def cmd_sweep(args, config: Config, reports: ReportGenerator, workers: int) -> int:
    logger = logging.getLogger(__name__)
    try:
        if args.config:
            experiment = ExperimentConfig.from_json(Path(args.config).read_text())
        else:
            if not args.axis or not args.values:
                raise InvalidParameter("sweep needs --axis and --values (or --config)")
            experiment = replace(
                _experiment_config(args, config),
                sweep_axis=args.axis,
                sweep_values=parse_axis_values(args.values),
                sweep_tied=list(args.tie),
            )
        rows = sweep(experiment, workers=workers, max_epochs=config.MAX_EPOCHS)
        output = experiment.output if args.config and experiment.output else args.output
        reports.save_csv(rows, output, ["axis", "value"] + REPORT_COLUMNS)
        reports.save_markdown(rows, f"{Path(output).stem}.md", f"Sweep over {experiment.sweep_axis}")
        failed = _failed_rows(rows)
        if failed:
            logger.warning(f"{failed} of {len(rows)} sweep rows violate a bound or failed")
            return EXIT_FAILED
        return EXIT_OK
    except Exception as e:
        logger.error(f"sweep failed: {str(e)}", exc_info=True)
        raise


def cmd_verify(args, config: Config, reports: ReportGenerator, workers: int) -> int:
    logger = logging.getLogger(__name__)
    try:
        only = [name.strip() for name in args.only.split(",") if name.strip()] if args.only else None
        results = run_acceptance(
            seed=args.seed if args.seed is not None else config.SEED,
            suite_size=args.suite_size or config.SUITE_SIZE,
            workers=workers,
            max_epochs=config.MAX_EPOCHS,
            only=only,
        )
        rows = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
        reports.save_csv(rows, args.output, ["check", "passed", "detail"])
        for r in results:
            print(f"  {'✓' if r.passed else '✗'} {r.name} ({r.elapsed:.1f}s): {r.detail}")
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.error(f"Acceptance failed: {', '.join(failed)}")
            return EXIT_FAILED
        logger.info(f"All {len(results)} acceptance checks passed")
        return EXIT_OK
    except Exception as e:
        logger.error(f"verify failed: {str(e)}", exc_info=True)
        raise


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logger = setup_logging()

    try:
        config = Config()
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE

    workers = args.workers if args.workers is not None else config.WORKERS
    reports = ReportGenerator(args.output_dir or config.OUTPUT_DIR)
    logger.info(f"pollbench {args.command} (workers={workers}, output={reports.reports_dir})")

    try:
        if args.command == "gen":
            return cmd_gen(args, config, reports)
        if args.command == "run":
            return cmd_run(args, config, reports)
        if args.command == "sweep":
            return cmd_sweep(args, config, reports, workers)
        return cmd_verify(args, config, reports, workers)
    except (InvalidParameter, InvalidInstance, FileNotFoundError, json.JSONDecodeError):
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
