"""Few-shot prompt rendering and target-metrics conditioning.

Rendering is byte-exact on purpose: prompts are part of the persisted run
record and golden-file tests compare them verbatim.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConfigError, MissingMetricsError
from .model import Candidate, SearchConfig

_METRICS_HEADER = '"""Metrics:'
_METRICS_CLOSE = '"""'

# One rendered metrics block: header line, dict line, closing quotes line.
_BLOCK_RE = re.compile(r'^"""Metrics:\n(\{[^\n]*\})\n"""\n', re.MULTILINE)


@dataclass(frozen=True)
class Prompt:
    id: str
    example_ids: tuple[int, ...]
    target_num_params: int
    target_val_accuracy: float
    text: str


def round_half_away(value: float, step: float | int) -> Fraction:
    """Round `value` to the nearest multiple of `step`, halves away from zero.

    Exact rational arithmetic on the IEEE value avoids the double-rounding
    traps near midpoints (0.9 * 500 is 450.00000000000006 in doubles).
    The step is taken at its decimal face value, so 0.001 means 1/1000.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step!r}")
    quotient = Fraction(value) / Fraction(str(step))
    if quotient >= 0:
        n = math.floor(quotient + Fraction(1, 2))
    else:
        n = -math.floor(-quotient + Fraction(1, 2))
    return n * Fraction(str(step))


def compute_target_metrics(parents: Sequence[Candidate], config: SearchConfig) -> tuple[int, float]:
    """Conditioning targets: shrink the best parent size, stretch the best accuracy."""
    if not parents:
        raise MissingMetricsError("cannot compute targets from an empty parent set")
    metrics = [p.require_metrics() for p in parents]
    min_size = min(m.num_params for m in metrics)
    max_accuracy = max(1.0 - m.val_error for m in metrics)

    raw_size = config.target_size_factor * min_size
    size_frac = round_half_away(raw_size, config.target_size_rounding)
    target_num_params = int(size_frac)
    if target_num_params < 1:
        # Tiny parents can round to zero; keep the target a positive size.
        target_num_params = int(config.target_size_rounding)

    raw_accuracy = config.target_accuracy_factor * max_accuracy
    acc_frac = round_half_away(raw_accuracy, config.target_accuracy_rounding)
    target_val_accuracy = min(float(acc_frac), 1.0)
    return target_num_params, target_val_accuracy


def _metrics_block(num_params: int, val_accuracy: float) -> str:
    line = "{'num_params': '%d', 'val_accuracy': '%.3f'}" % (num_params, val_accuracy)
    return f"{_METRICS_HEADER}\n{line}\n{_METRICS_CLOSE}\n"


def render_example(candidate: Candidate) -> str:
    """One in-context example: metrics block, the code, one blank line."""
    m = candidate.require_metrics()
    return f"{_metrics_block(m.num_params, m.val_accuracy)}{candidate.code}\n\n"


def make_few_shot_prompt(
    examples: Sequence[Candidate],
    config: SearchConfig,
    prompt_id: str = "prompt",
) -> Prompt:
    if len(examples) != config.in_context_examples:
        raise ConfigError(
            f"prompt needs exactly {config.in_context_examples} examples, got {len(examples)}"
        )
    target_size, target_accuracy = compute_target_metrics(examples, config)
    parts = [render_example(e) for e in examples]
    parts.append(_metrics_block(target_size, target_accuracy))
    parts.append(config.completion_stub)
    return Prompt(
        id=prompt_id,
        example_ids=tuple(e.id for e in examples),
        target_num_params=target_size,
        target_val_accuracy=target_accuracy,
        text="".join(parts),
    )


def extract_example_codes(prompt_text: str) -> list[str]:
    """Inverse of rendering: the code of every in-context example, in order.

    The final metrics block is the conditioning target and carries no code,
    so it only delimits the last example.
    """
    matches = list(_BLOCK_RE.finditer(prompt_text))
    if len(matches) < 2:
        raise ValueError("prompt does not contain example blocks followed by a target block")
    codes = []
    for current, following in zip(matches, matches[1:]):
        segment = prompt_text[current.end() : following.start()]
        if segment.endswith("\n\n"):
            segment = segment[:-2]
        else:
            segment = segment.rstrip("\n")
        codes.append(segment)
    return codes


def parse_target_metrics(prompt_text: str) -> tuple[int, float]:
    """Read back the conditioning targets from a rendered prompt."""
    matches = list(_BLOCK_RE.finditer(prompt_text))
    if not matches:
        raise ValueError("prompt contains no metrics block")
    try:
        parsed = ast.literal_eval(matches[-1].group(1))
        return int(parsed["num_params"]), float(parsed["val_accuracy"])
    except (ValueError, SyntaxError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed target metrics block: {exc}") from exc
