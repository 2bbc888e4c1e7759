"""Produce the three analysis artifacts from a finished run ledger.

Runs a quick search first (unless --ledger points at an existing one),
then writes the Pareto frontier, the bootstrap expected-max-fitness
curve, and the per-round trajectory as CSV, plus PNG plots when
matplotlib is importable.

Usage:
    python3 demos/make_reports.py [--ledger path] [--outdir /tmp/evodemo]
"""

from __future__ import annotations

import argparse
import logging
import os

from evosearch import (
    CallableEvaluator,
    GenomeRecombinerBackend,
    SearchConfig,
    SelectionMode,
    load_snapshot,
    parse_genome,
    run_search,
    synthetic_metrics,
)
from evosearch import reports

SEEDS = ["64:64:64:64:64", "32:32:32:32:32", "8:64:8:64:8", "16:24:32:40:48"]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ledger", help="reuse an existing run ledger")
    parser.add_argument("--outdir", default="/tmp/evodemo")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)
    os.makedirs(args.outdir, exist_ok=True)

    ledger_path = args.ledger
    if not ledger_path:
        ledger_path = os.path.join(args.outdir, "report_source.jsonl")
        run_search(
            SearchConfig(num_rounds=6, completion_stub="", rng_seed=42),
            SelectionMode.FITNESS_TOP,
            GenomeRecombinerBackend(),
            CallableEvaluator(lambda code: synthetic_metrics(parse_genome(code)), name="genome"),
            SEEDS,
            ledger_path,
            overwrite=True,
        )
        print(f"ran a fresh search -> {ledger_path}")

    snapshot = load_snapshot(ledger_path)
    evaluated = snapshot.evaluated_candidates()
    print(f"{len(evaluated)} evaluated candidates in the ledger")

    frontier = reports.pareto_frontier(reports.evaluated_points(snapshot))
    pareto_csv = os.path.join(args.outdir, "pareto.csv")
    reports.write_pareto_csv(frontier, pareto_csv)
    print(f"pareto frontier: {len(frontier)} points -> {pareto_csv}")
    for point in frontier[:5]:
        print(f"  id={point.candidate_id} size={point.num_params} error={point.val_error:.4f}")

    fitnesses = reports.fitnesses_in_generation_order(snapshot)
    curve = reports.bootstrap_max_fitness_curve(fitnesses, num_bootstrap=100, sample_size=20)
    curve_csv = os.path.join(args.outdir, "curve.csv")
    reports.write_curve_csv(curve, curve_csv)
    print(f"bootstrap curve: {len(curve)} points -> {curve_csv}")

    trajectory = reports.round_trajectory(snapshot)
    trajectory_csv = os.path.join(args.outdir, "trajectory.csv")
    reports.write_trajectory_csv(trajectory, trajectory_csv)
    print(f"round trajectory: {len(trajectory)} rounds -> {trajectory_csv}")
    for point in trajectory:
        if point.empty:
            print(f"  round {point.round}: no evaluated candidates")
        else:
            print(
                f"  round {point.round}: mean size {point.mean_num_params:.0f}, "
                f"mean error {point.mean_val_error:.4f} over {point.count}"
            )

    try:
        reports.plot_pareto(frontier, os.path.join(args.outdir, "pareto.png"))
        reports.plot_curve(curve, os.path.join(args.outdir, "curve.png"))
        reports.plot_trajectory(trajectory, os.path.join(args.outdir, "trajectory.png"))
        print(f"plots written under {args.outdir}")
    except ImportError:
        print("matplotlib not installed; skipped the plots")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
