"""Drive an evaluator as a real child process, the way production runs do.

The contract is deliberately small: the evaluator gets the candidate's
code as a file path argument, prints a JSON metrics object as its last
stdout line, and exits 0. Nonzero exit means untrainable. Here the
bundled genome evaluator plays that role via `python3 -m evosearch.genome`.

Usage:
    python3 demos/subprocess_evaluator.py
"""

from __future__ import annotations

import logging
import sys

from evosearch import (
    Candidate,
    EvalHarness,
    EvaluatorCommand,
    Origin,
    SubprocessEvaluator,
)


def main() -> int:
    logging.basicConfig(level=logging.WARNING)
    command = EvaluatorCommand(argv=(sys.executable, "-m", "evosearch.genome"))
    print(f"evaluator command: {' '.join(command.argv)} <code_path>")

    harness = EvalHarness(SubprocessEvaluator(command, timeout=30), alpha=0.5, parallelism=4)
    batch = [
        Candidate(id=i + 1, round=1, origin=Origin.GENERATED, code=code)
        for i, code in enumerate(
            [
                "8:8:8:8:8",        # the true optimum of the synthetic space
                "64:64:64:64:64",   # biggest legal genome
                "8:8:8:8:8",        # duplicate: deduplicated, not re-run
                "16:24:32:40:48",
                "not a genome",     # untrainable: evaluator exits nonzero
            ]
        )
    ]
    kept = harness.filter_and_eval(batch)

    print(f"\nevaluator invocations: {harness.invocations} (5 candidates, 1 duplicate)")
    for candidate in batch:
        line = f"id={candidate.id} status={candidate.status.value:11s} code={candidate.code!r}"
        if candidate.metrics:
            line += (
                f" num_params={candidate.metrics.num_params}"
                f" val_error={candidate.metrics.val_error:.4f}"
                f" fitness={candidate.fitness:.4f}"
            )
        print(line)
    print(f"\nkept (error < alpha): {[c.id for c in kept]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
