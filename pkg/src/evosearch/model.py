"""Candidate lifecycle, fitness arithmetic, and run configuration.

These are the value types every other module shares. They hold no I/O and
no hidden state, so they are safe to pass between worker threads.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError, InvalidMetricsError


class Status(str, Enum):
    PENDING = "pending"
    DUPLICATE = "duplicate"
    UNTRAINABLE = "untrainable"
    FILTERED = "filtered"
    EVALUATED = "evaluated"


class Origin(str, Enum):
    SEED = "seed"
    GENERATED = "generated"


@dataclass(frozen=True)
class Metrics:
    """Raw evaluator output: parameter count and validation error."""

    num_params: int
    val_error: float

    def __post_init__(self) -> None:
        if isinstance(self.num_params, bool) or not isinstance(self.num_params, int):
            raise InvalidMetricsError(f"num_params must be an integer, got {self.num_params!r}")
        if self.num_params < 1:
            raise InvalidMetricsError(f"num_params must be positive, got {self.num_params}")
        if not isinstance(self.val_error, (int, float)) or isinstance(self.val_error, bool):
            raise InvalidMetricsError(f"val_error must be a number, got {self.val_error!r}")
        err = float(self.val_error)
        if not math.isfinite(err) or not 0.0 <= err <= 1.0:
            raise InvalidMetricsError(f"val_error must be finite and in [0, 1], got {err!r}")
        object.__setattr__(self, "val_error", err)

    @property
    def val_accuracy(self) -> float:
        return 1.0 - self.val_error


@dataclass(frozen=True, order=True)
class FitnessScore:
    """Scalar candidate quality; higher is better. Ties break by lower id elsewhere."""

    value: float


def compute_fitness(num_params: int, val_error: float) -> FitnessScore:
    """Negative product of size and error, with no extra scaling.

    The `+ 0.0` folds IEEE -0.0 into 0.0 so the zero-error case compares and
    serializes cleanly.
    """
    metrics = Metrics(num_params, val_error)
    return FitnessScore(-(metrics.num_params * metrics.val_error) + 0.0)


def error_from_accuracy(val_accuracy: float) -> float:
    """Complement an accuracy into an error; evaluators may report either."""
    if not isinstance(val_accuracy, (int, float)) or isinstance(val_accuracy, bool):
        raise InvalidMetricsError(f"val_accuracy must be a number, got {val_accuracy!r}")
    acc = float(val_accuracy)
    if not math.isfinite(acc) or not 0.0 <= acc <= 1.0:
        raise InvalidMetricsError(f"val_accuracy must be in [0, 1], got {acc!r}")
    return 1.0 - acc


@dataclass
class Candidate:
    """One program flowing through the pending -> evaluated lifecycle."""

    id: int
    round: int
    origin: Origin
    code: str
    parent_ids: list[int] = field(default_factory=list)
    prompt_id: str | None = None
    temperature: float | None = None
    status: Status = Status.PENDING
    metrics: Metrics | None = None
    fitness: float | None = None
    used_as_parent: bool = False

    def require_metrics(self) -> Metrics:
        from .errors import MissingMetricsError

        if self.metrics is None:
            raise MissingMetricsError(f"candidate {self.id} has no metrics")
        return self.metrics


def sort_by_fitness(candidates: list[Candidate]) -> list[Candidate]:
    """Descending fitness, ties broken by lower id. Total and deterministic."""
    return sorted(candidates, key=lambda c: (-(c.fitness if c.fitness is not None else -math.inf), c.id))


def _default_adaptation() -> dict:
    return {"epochs": 5, "soft_prompt_length": 16, "batch_size": 16, "learning_rate": 0.1}


@dataclass
class SearchConfig:
    """Every knob of the search loop. Defaults follow the reference setup."""

    num_rounds: int = 10
    prompts_per_round: int = 10
    samples_per_prompt: int = 16
    in_context_examples: int = 2
    num_survivors: int = 10
    error_threshold: float = 0.5
    temperature_set: tuple[float, ...] = (0.2, 0.6, 0.8, 1.0)
    target_size_factor: float = 0.9
    target_size_rounding: int = 100
    target_accuracy_factor: float = 1.02
    target_accuracy_rounding: float = 0.001
    completion_stub: str = "class Model(nn.Module):"
    eval_timeout: float = 60.0
    eval_parallelism: int = 1
    rng_seed: int = 0
    max_output_length: int = 4096
    distinct_parents: bool = False
    adaptation: dict = field(default_factory=_default_adaptation)

    # Short aliases for readers used to the loop's symbols.
    @property
    def alpha(self) -> float:
        return self.error_threshold

    def validate(self) -> None:
        positive_ints = {
            "num_rounds": self.num_rounds,
            "prompts_per_round": self.prompts_per_round,
            "samples_per_prompt": self.samples_per_prompt,
            "in_context_examples": self.in_context_examples,
            "num_survivors": self.num_survivors,
            "target_size_rounding": self.target_size_rounding,
            "eval_parallelism": self.eval_parallelism,
            "max_output_length": self.max_output_length,
        }
        for name, value in positive_ints.items():
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not 0.0 < self.error_threshold <= 1.0:
            raise ConfigError(f"error_threshold must be in (0, 1], got {self.error_threshold!r}")
        if not self.temperature_set:
            raise ConfigError("temperature_set must be non-empty")
        if any(t <= 0 for t in self.temperature_set):
            raise ConfigError(f"temperatures must be positive, got {self.temperature_set!r}")
        if self.target_size_factor <= 0 or self.target_accuracy_factor <= 0:
            raise ConfigError("target factors must be positive")
        if self.target_accuracy_rounding <= 0:
            raise ConfigError("target_accuracy_rounding must be positive")
        if self.eval_timeout <= 0:
            raise ConfigError(f"eval_timeout must be positive, got {self.eval_timeout!r}")
        if not isinstance(self.rng_seed, int) or isinstance(self.rng_seed, bool):
            raise ConfigError(f"rng_seed must be an integer, got {self.rng_seed!r}")
        if not isinstance(self.adaptation, dict):
            raise ConfigError("adaptation must be a key/value map")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["temperature_set"] = list(self.temperature_set)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SearchConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "temperature_set" in kwargs:
            try:
                kwargs["temperature_set"] = tuple(float(t) for t in kwargs["temperature_set"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"temperature_set must be a list of numbers: {exc}") from exc
        config = cls(**kwargs)
        config.validate()
        return config
