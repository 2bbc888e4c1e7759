"""Command-line front end: run, resume, report.

Exit codes: 0 success, 2 configuration error, 3 run aborted.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys

from .backends import GenomeRecombinerBackend, HttpBackend, LMBackend, MockBackend
from .engine import SearchEngine, SelectionMode, run_search
from .errors import BackendError, ConfigError, EvoSearchError, LedgerError, RunAbortedError
from .harness import EvaluatorCommand
from .ledger import load_snapshot
from .model import Candidate, SearchConfig
from . import reports

logger = logging.getLogger(__name__)

_MODES = {
    "evo": SelectionMode.FITNESS_TOP,
    "random-parents": SelectionMode.RANDOM_PARENTS,
    "naive": SelectionMode.NAIVE_SINGLE_ROUND,
}


def _load_config(path: str | None) -> SearchConfig:
    if path is None:
        return SearchConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return SearchConfig.from_dict(data)


def _collect_seeds(args: argparse.Namespace) -> list[str]:
    seeds: list[str] = list(args.seed or [])
    for path in args.seed_file or []:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                seeds.append(fh.read().rstrip("\n"))
        except OSError as exc:
            raise ConfigError(f"cannot read seed file {path}: {exc}") from exc
    if not seeds:
        raise ConfigError("no seeds given; use --seed and/or --seed-file")
    return seeds


def _build_backend(args: argparse.Namespace) -> LMBackend:
    if args.backend == "genome":
        return GenomeRecombinerBackend()
    if args.backend == "mock":
        if not args.mock_script:
            raise ConfigError("mock backend needs --mock-script")
        try:
            with open(args.mock_script, "r", encoding="utf-8") as fh:
                script = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load mock script {args.mock_script}: {exc}") from exc
        return MockBackend(script)
    if args.backend == "http":
        if not args.backend_url:
            raise ConfigError("http backend needs --backend-url")
        return HttpBackend(
            args.backend_url,
            tune_url=args.tune_url,
            auth_token=os.environ.get("EVOSEARCH_API_TOKEN"),
        )
    raise ConfigError(f"unknown backend {args.backend!r}")


def _evaluator_command(spec: str) -> EvaluatorCommand:
    argv = shlex.split(spec)
    if not argv:
        raise ConfigError("evaluator command is empty")
    return EvaluatorCommand(argv=tuple(argv))


def _print_top(top: list[Candidate], budget_used: int | None = None) -> None:
    print("final top candidates:")
    for candidate in top:
        metrics = candidate.metrics
        size = metrics.num_params if metrics else "?"
        error = metrics.val_error if metrics else "?"
        print(
            f"  id={candidate.id} round={candidate.round} fitness={candidate.fitness} "
            f"num_params={size} val_error={error}"
        )
        print(f"    code: {candidate.code!r}")
    if budget_used is not None:
        print(f"budget used: {budget_used}")


def cmd_run(args: argparse.Namespace) -> int:
    if os.path.exists(args.ledger) and os.path.getsize(args.ledger) > 0 and not args.overwrite:
        raise ConfigError(f"ledger {args.ledger} already exists; use --overwrite to replace it")
    config = _load_config(args.config)
    backend = _build_backend(args)
    evaluator = _evaluator_command(args.evaluator)
    seeds = _collect_seeds(args)
    top = run_search(
        config,
        _MODES[args.mode],
        backend,
        evaluator,
        seeds,
        args.ledger,
        overwrite=args.overwrite,
    )
    snapshot = load_snapshot(args.ledger)
    final = snapshot.final_result or {}
    _print_top(top, final.get("budget_used"))
    return 0


def cmd_resume(args: argparse.Namespace) -> int:
    evaluator = None
    if args.evaluator:
        from .harness import SubprocessEvaluator

        snapshot = load_snapshot(args.ledger)
        evaluator = SubprocessEvaluator(
            _evaluator_command(args.evaluator), timeout=snapshot.config.eval_timeout
        )
    top = SearchEngine.resume(args.ledger, evaluator=evaluator)
    snapshot = load_snapshot(args.ledger)
    final = snapshot.final_result or {}
    _print_top(top, final.get("budget_used"))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.ledger)
    if args.kind == "pareto":
        points = reports.pareto_frontier(reports.evaluated_points(snapshot, top=args.top))
        reports.write_pareto_csv(points, args.out)
        if args.plot:
            reports.plot_pareto(points, args.plot)
        print(f"pareto frontier: {len(points)} points -> {args.out}")
    elif args.kind == "curve":
        fitnesses = reports.fitnesses_in_generation_order(snapshot)
        if not fitnesses:
            raise ConfigError("ledger holds no evaluated candidates to build a curve from")
        grid = range(1, len(fitnesses) + 1, args.step) if args.step > 1 else None
        points = reports.bootstrap_max_fitness_curve(
            fitnesses,
            num_bootstrap=args.bootstrap,
            sample_size=args.sample_size,
            rng_seed=args.seed,
            x_grid=grid,
        )
        reports.write_curve_csv(points, args.out)
        if args.plot:
            reports.plot_curve(points, args.plot)
        print(f"bootstrap curve: {len(points)} points -> {args.out}")
    else:
        points = reports.round_trajectory(snapshot)
        reports.write_trajectory_csv(points, args.out)
        if args.plot:
            reports.plot_trajectory(points, args.plot)
        print(f"round trajectory: {len(points)} rounds -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evosearch",
        description="Evolutionary program search with a generative crossover operator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="start a fresh search")
    run_p.add_argument("--config", help="JSON file mirroring the SearchConfig fields")
    run_p.add_argument("--mode", choices=sorted(_MODES), default="evo")
    run_p.add_argument("--backend", choices=["http", "mock", "genome"], default="genome")
    run_p.add_argument(
        "--evaluator",
        required=True,
        help="evaluator command line, e.g. 'python -m evosearch.genome'",
    )
    run_p.add_argument("--ledger", required=True, help="output ledger path (JSONL)")
    run_p.add_argument("--seed", action="append", help="literal seed code (repeatable)")
    run_p.add_argument("--seed-file", action="append", help="file whose content is one seed")
    run_p.add_argument("--backend-url", help="generation endpoint (http backend)")
    run_p.add_argument("--tune-url", help="adaptation endpoint (http backend)")
    run_p.add_argument("--mock-script", help="JSON completions for the mock backend")
    run_p.add_argument("--overwrite", action="store_true", help="replace an existing ledger")
    run_p.set_defaults(func=cmd_run)

    resume_p = sub.add_parser("resume", help="continue an interrupted run")
    resume_p.add_argument("--ledger", required=True)
    resume_p.add_argument(
        "--evaluator", help="override the evaluator command recorded in the ledger"
    )
    resume_p.set_defaults(func=cmd_resume)

    report_p = sub.add_parser("report", help="analysis artifacts from a ledger")
    report_p.add_argument("kind", choices=["pareto", "curve", "trajectory"])
    report_p.add_argument("--ledger", required=True)
    report_p.add_argument("--out", required=True, help="CSV output path")
    report_p.add_argument("--plot", help="optional plot image path (needs matplotlib)")
    report_p.add_argument("--top", type=int, help="pareto: restrict to the top-N by fitness")
    report_p.add_argument("--bootstrap", type=int, default=100, help="curve: resample count")
    report_p.add_argument("--sample-size", type=int, default=20, help="curve: resample size")
    report_p.add_argument("--seed", type=int, default=0, help="curve: bootstrap RNG seed")
    report_p.add_argument("--step", type=int, default=1, help="curve: x-grid stride")
    report_p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (RunAbortedError, LedgerError, BackendError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3
    except EvoSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
