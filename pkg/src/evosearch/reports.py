"""Analysis over finished runs: Pareto frontier, bootstrap max-fitness
curves, and per-round trajectories. Pure functions over ledger snapshots;
CSV and optional plot output live at the edges.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ledger import LedgerSnapshot
from .model import Candidate, Status

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParetoPoint:
    candidate_id: int
    num_params: int
    val_error: float


@dataclass(frozen=True)
class FitnessCurvePoint:
    x: int
    mean_max_fitness: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class TrajectoryPoint:
    round: int
    mean_num_params: float | None
    mean_val_error: float | None
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0


def pareto_frontier(points: Iterable[tuple[int, int, float]]) -> list[ParetoPoint]:
    """Non-dominated set under (minimize size, minimize error).

    A point is dominated when some other point is no worse on both axes
    and strictly better on at least one; exact duplicates survive together.
    """
    items = list(points)
    if not items:
        return []
    ids = [int(i) for i, _, _ in items]
    sizes = np.array([s for _, s, _ in items], dtype=float)
    errors = np.array([e for _, _, e in items], dtype=float)
    if np.any(sizes < 1):
        raise ValueError("sizes must be at least 1")
    if np.any((errors < 0) | (errors > 1)):
        raise ValueError("errors must lie in [0, 1]")

    le_size = sizes[:, None] <= sizes[None, :]
    le_error = errors[:, None] <= errors[None, :]
    strictly_better = (sizes[:, None] < sizes[None, :]) | (errors[:, None] < errors[None, :])
    dominated = np.any(le_size & le_error & strictly_better, axis=0)

    frontier = [
        ParetoPoint(ids[i], int(sizes[i]), float(errors[i]))
        for i in range(len(items))
        if not dominated[i]
    ]
    frontier.sort(key=lambda p: (p.num_params, p.val_error, p.candidate_id))
    return frontier


def bootstrap_max_fitness_curve(
    fitnesses_in_generation_order: Sequence[float],
    num_bootstrap: int = 100,
    sample_size: int = 20,
    rng_seed: int = 0,
    x_grid: Sequence[int] | None = None,
) -> list[FitnessCurvePoint]:
    """Expected best-of-`sample_size` fitness as the run progresses.

    For each grid point x: resample `sample_size` draws (with replacement)
    from the first x fitnesses, `num_bootstrap` times, and record the mean
    and the empirical 2.5/97.5 percentiles of the per-resample maxima.
    """
    values = np.asarray(list(fitnesses_in_generation_order), dtype=float)
    if values.size == 0:
        raise ValueError("need at least one fitness value")
    if num_bootstrap < 1 or sample_size < 1:
        raise ValueError("num_bootstrap and sample_size must be positive")
    grid = range(1, values.size + 1) if x_grid is None else x_grid

    rng = np.random.default_rng(rng_seed)
    curve = []
    for x in grid:
        x = int(x)
        if x < 1 or x > values.size:
            continue
        indices = rng.integers(0, x, size=(num_bootstrap, sample_size))
        maxima = values[indices].max(axis=1)
        mean = float(maxima.mean())
        low, high = (float(v) for v in np.percentile(maxima, [2.5, 97.5]))
        # Heavy one-sided skew can push the mean past an empirical percentile;
        # widen the band so it always brackets the mean.
        curve.append(FitnessCurvePoint(x, mean, min(low, mean), max(high, mean)))
    return curve


def round_trajectory(
    source: LedgerSnapshot | Iterable[Candidate],
    rounds: Sequence[int] | None = None,
) -> list[TrajectoryPoint]:
    """Per-round means of evaluated candidates' size and error.

    Rounds that produced no evaluated candidate appear with an empty
    marker (count 0, means None) rather than being silently skipped.
    """
    if isinstance(source, LedgerSnapshot):
        candidates = list(source.candidates.values())
        recorded = [entry["round"] for entry in source.round_begins]
        if rounds is None and (candidates or recorded):
            highest = max([c.round for c in candidates] + recorded, default=0)
            lowest = min([c.round for c in candidates] + recorded, default=0)
            rounds = range(lowest, highest + 1)
    else:
        candidates = list(source)

    if rounds is None:
        if not candidates:
            return []
        rounds = range(min(c.round for c in candidates), max(c.round for c in candidates) + 1)

    by_round: dict[int, list[Candidate]] = {}
    for candidate in candidates:
        if candidate.status is Status.EVALUATED:
            by_round.setdefault(candidate.round, []).append(candidate)

    trajectory = []
    for round_ in rounds:
        members = by_round.get(round_, [])
        if members:
            sizes = [c.require_metrics().num_params for c in members]
            errors = [c.require_metrics().val_error for c in members]
            trajectory.append(
                TrajectoryPoint(
                    round=round_,
                    mean_num_params=float(np.mean(sizes)),
                    mean_val_error=float(np.mean(errors)),
                    count=len(members),
                )
            )
        else:
            trajectory.append(TrajectoryPoint(round_, None, None, 0))
    return trajectory


def evaluated_points(snapshot: LedgerSnapshot, top: int | None = None) -> list[tuple[int, int, float]]:
    """(id, size, error) triples of evaluated candidates, optionally only
    the top `top` by fitness (ties to lower id)."""
    evaluated = snapshot.evaluated_candidates()
    if top is not None:
        evaluated = sorted(evaluated, key=lambda c: (-(c.fitness or 0.0), c.id))[:top]
        evaluated.sort(key=lambda c: c.id)
    return [(c.id, c.require_metrics().num_params, c.require_metrics().val_error) for c in evaluated]


def fitnesses_in_generation_order(snapshot: LedgerSnapshot) -> list[float]:
    return [c.fitness for c in snapshot.evaluated_candidates() if c.fitness is not None]


# -- file output ------------------------------------------------------------


def write_pareto_csv(points: Sequence[ParetoPoint], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["candidate_id", "num_params", "val_error"])
        for p in points:
            writer.writerow([p.candidate_id, p.num_params, repr(p.val_error)])


def write_curve_csv(points: Sequence[FitnessCurvePoint], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean_max_fitness", "ci_low", "ci_high"])
        for p in points:
            writer.writerow([p.x, repr(p.mean_max_fitness), repr(p.ci_low), repr(p.ci_high)])


def write_trajectory_csv(points: Sequence[TrajectoryPoint], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "mean_num_params", "mean_val_error", "count"])
        for p in points:
            writer.writerow(
                [
                    p.round,
                    "" if p.mean_num_params is None else repr(p.mean_num_params),
                    "" if p.mean_val_error is None else repr(p.mean_val_error),
                    p.count,
                ]
            )


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_pareto(points: Sequence[ParetoPoint], path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(
        [p.num_params for p in points],
        [p.val_error for p in points],
        where="post",
        marker="o",
    )
    ax.set_xlabel("num_params")
    ax.set_ylabel("val_error")
    ax.set_title("Pareto frontier")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_curve(points: Sequence[FitnessCurvePoint], path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p.x for p in points]
    ax.plot(xs, [p.mean_max_fitness for p in points], label="mean max fitness")
    ax.fill_between(
        xs, [p.ci_low for p in points], [p.ci_high for p in points], alpha=0.3, label="95% band"
    )
    ax.set_xlabel("candidates generated")
    ax.set_ylabel("max fitness")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_trajectory(points: Sequence[TrajectoryPoint], path: str) -> None:
    plt = _pyplot()
    filled = [p for p in points if not p.empty]
    fig, (ax_size, ax_error) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax_size.plot([p.round for p in filled], [p.mean_num_params for p in filled], marker="o")
    ax_size.set_ylabel("mean num_params")
    ax_error.plot([p.round for p in filled], [p.mean_val_error for p in filled], marker="o")
    ax_error.set_ylabel("mean val_error")
    ax_error.set_xlabel("round")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
