"""Synthetic architecture-genome benchmark.

A five-field channel-width genome with an analytic parameter count and a
deterministic error landscape. Small enough to brute force (8^5 = 32768
genomes), rugged enough (hash ripple) that selection strategy matters.

The module doubles as a standalone evaluator executable speaking the
harness protocol: `python -m evosearch.genome <code_path>`.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import sys
from dataclasses import dataclass
from typing import Iterable

CHANNEL_VALUES: tuple[int, ...] = (8, 16, 24, 32, 40, 48, 56, 64)
GENOME_FIELDS = 5

_LOG8 = math.log(8.0)


@dataclass(frozen=True)
class Genome:
    channels: tuple[int, ...]

    def serialize(self) -> str:
        return ":".join(str(c) for c in self.channels)


def parse_genome(text: str) -> Genome:
    """Accept exactly five colon-separated legal channel widths."""
    parts = text.split(":")
    if len(parts) != GENOME_FIELDS:
        raise ValueError(f"genome needs {GENOME_FIELDS} fields, got {len(parts)}: {text!r}")
    channels = []
    for part in parts:
        try:
            value = int(part)
        except ValueError as exc:
            raise ValueError(f"non-numeric genome field {part!r}") from exc
        if value not in CHANNEL_VALUES:
            raise ValueError(f"illegal channel width {value}; legal values are {CHANNEL_VALUES}")
        channels.append(value)
    return Genome(tuple(channels))


def _ripple(serialized: str) -> float:
    """Deterministic hash of the genome mapped to [-1, 1]."""
    digest = hashlib.sha256(serialized.encode("utf-8")).digest()
    unit = int.from_bytes(digest[:8], "big") / float(2**64 - 1)
    return 2.0 * unit - 1.0


def synthetic_metrics(genome: Genome | str) -> tuple[int, float]:
    """Stylized conv-stack size and a smooth-plus-ripple error surface."""
    if isinstance(genome, str):
        genome = parse_genome(genome)
    c = genome.channels
    num_params = 3 * 3 * c[0] + sum(c[i] * c[i + 1] for i in range(GENOME_FIELDS - 1)) + c[-1] * 10
    log_sum = sum(math.log(ci / 8.0) for ci in c) / (GENOME_FIELDS * _LOG8)
    val_error = 0.30 - 0.22 * log_sum + 0.03 * _ripple(genome.serialize())
    val_error = min(max(val_error, 0.01), 0.99)
    return num_params, val_error


def all_genomes(values: Iterable[int] = CHANNEL_VALUES) -> Iterable[Genome]:
    for channels in itertools.product(tuple(values), repeat=GENOME_FIELDS):
        yield Genome(channels)


def brute_force_optimum(values: Iterable[int] = CHANNEL_VALUES) -> tuple[Genome, float]:
    """Exhaustively score the space; the test oracle for search dynamics."""
    best_genome: Genome | None = None
    best_fitness = -math.inf
    for genome in all_genomes(values):
        num_params, val_error = synthetic_metrics(genome)
        fitness = -(num_params * val_error) + 0.0
        if fitness > best_fitness:
            best_fitness = fitness
            best_genome = genome
    assert best_genome is not None
    return best_genome, best_fitness


def main(argv: list[str] | None = None) -> int:
    """Evaluator protocol entry point: read genome file, print one metrics line."""
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 1:
        print("usage: evosearch-genome-eval <code_path>", file=sys.stderr)
        return 2
    try:
        with open(args[0], "r", encoding="utf-8") as fh:
            text = fh.read().strip()
    except OSError as exc:
        print(f"cannot read code file: {exc}", file=sys.stderr)
        return 2
    try:
        num_params, val_error = synthetic_metrics(text)
    except ValueError as exc:
        print(f"untrainable genome: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"num_params": num_params, "val_error": val_error}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
