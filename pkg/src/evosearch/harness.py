"""Candidate evaluation: dedup, subprocess protocol, alpha filter.

The evaluator is an external program invoked as `argv... <code_path>`.
Its final stdout line must be one JSON object carrying an integer
"num_params" and a "val_error" in [0, 1] (or "val_accuracy"; an explicit
"val_error" wins). Exit 0 means success; nonzero means untrainable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import signal
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .errors import ConfigError, InvalidMetricsError
from .model import Candidate, Metrics, Status, compute_fitness, error_from_accuracy

logger = logging.getLogger(__name__)


class OutcomeKind(str, Enum):
    METRICS = "metrics"
    UNTRAINABLE = "untrainable"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class EvalOutcome:
    kind: OutcomeKind
    metrics: Metrics | None = None
    diagnostic: str = ""


@dataclass(frozen=True)
class EvaluatorCommand:
    argv: tuple[str, ...]
    working_dir: str | None = None
    env_overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.argv:
            raise ConfigError("evaluator argv must be non-empty")
        object.__setattr__(self, "argv", tuple(str(a) for a in self.argv))

    def describe(self) -> dict:
        return {
            "kind": "subprocess",
            "argv": list(self.argv),
            "working_dir": self.working_dir,
            "env_overrides": dict(self.env_overrides),
        }


def normalize_code(code: str) -> str:
    """Canonical form for dedup: LF endings, no trailing spaces, no blank edges."""
    text = code.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[0] == "":
        lines.pop(0)
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def dedup_key(code: str) -> str:
    return hashlib.sha256(normalize_code(code).encode("utf-8")).hexdigest()


def _kill_process_tree(pid: int) -> None:
    """Kill the process group the child was started in; fall back to the pid."""
    try:
        os.killpg(os.getpgid(pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        try:
            os.kill(pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError, OSError):
            pass


def _parse_metrics_line(line: str) -> Metrics:
    try:
        payload = json.loads(line)
    except ValueError as exc:
        raise InvalidMetricsError(f"final stdout line is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise InvalidMetricsError("final stdout line must be a JSON object")
    if "num_params" not in payload:
        raise InvalidMetricsError("metrics line missing 'num_params'")
    num_params = payload["num_params"]
    if "val_error" in payload:
        raw = payload["val_error"]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(float(raw)):
            raise InvalidMetricsError(f"val_error must be a finite number, got {raw!r}")
        val_error = float(raw)
    elif "val_accuracy" in payload:
        val_error = error_from_accuracy(payload["val_accuracy"])
    else:
        raise InvalidMetricsError("metrics line needs 'val_error' or 'val_accuracy'")
    return Metrics(num_params, val_error)


class Evaluator:
    """Anything that can score one candidate's code."""

    def evaluate_code(self, code: str) -> EvalOutcome:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": "unknown"}


class SubprocessEvaluator(Evaluator):
    def __init__(self, command: EvaluatorCommand, timeout: float):
        if timeout <= 0:
            raise ConfigError(f"evaluator timeout must be positive, got {timeout!r}")
        self.command = command
        self.timeout = timeout

    def describe(self) -> dict:
        return self.command.describe()

    def evaluate_code(self, code: str) -> EvalOutcome:
        fd, code_path = tempfile.mkstemp(prefix="candidate_", suffix=".code", text=True)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(code)
            return self._run(code_path)
        finally:
            try:
                os.unlink(code_path)
            except OSError:
                pass

    def _run(self, code_path: str) -> EvalOutcome:
        env = dict(os.environ)
        env.update(self.command.env_overrides)
        try:
            proc = subprocess.Popen(
                list(self.command.argv) + [code_path],
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                cwd=self.command.working_dir,
                env=env,
                start_new_session=True,  # own process group, so timeouts kill helpers too
            )
        except (FileNotFoundError, PermissionError, NotADirectoryError) as exc:
            raise ConfigError(f"cannot spawn evaluator {self.command.argv[0]!r}: {exc}") from exc

        try:
            stdout, stderr = proc.communicate(timeout=self.timeout)
        except subprocess.TimeoutExpired:
            _kill_process_tree(proc.pid)
            proc.communicate()
            return EvalOutcome(
                OutcomeKind.TIMEOUT, diagnostic=f"evaluator exceeded {self.timeout}s wall clock"
            )

        if proc.returncode != 0:
            tail = (stderr or "").strip().splitlines()[-3:]
            return EvalOutcome(
                OutcomeKind.UNTRAINABLE,
                diagnostic=f"exit status {proc.returncode}; stderr: {' | '.join(tail)}",
            )

        lines = [line for line in (stdout or "").splitlines() if line.strip()]
        if not lines:
            return EvalOutcome(OutcomeKind.UNTRAINABLE, diagnostic="evaluator printed no output")
        try:
            metrics = _parse_metrics_line(lines[-1])
        except InvalidMetricsError as exc:
            return EvalOutcome(OutcomeKind.UNTRAINABLE, diagnostic=str(exc))
        return EvalOutcome(OutcomeKind.METRICS, metrics=metrics)


class CallableEvaluator(Evaluator):
    """In-process evaluator for tests and the synthetic benchmark.

    The callable returns (num_params, val_error) or raises; any exception
    counts as untrainable, mirroring a nonzero subprocess exit.
    """

    def __init__(self, fn: Callable[[str], tuple[int, float]], name: str = "callable"):
        self._fn = fn
        self._name = name

    def describe(self) -> dict:
        return {"kind": "callable", "name": self._name}

    def evaluate_code(self, code: str) -> EvalOutcome:
        try:
            num_params, val_error = self._fn(code)
            metrics = Metrics(int(num_params), float(val_error))
        except ConfigError:
            raise
        except Exception as exc:  # the callable stands in for a whole subprocess
            return EvalOutcome(OutcomeKind.UNTRAINABLE, diagnostic=f"{type(exc).__name__}: {exc}")
        return EvalOutcome(OutcomeKind.METRICS, metrics=metrics)


class EvalHarness:
    """Run-global dedup plus bounded-parallel evaluation plus the alpha filter."""

    def __init__(self, evaluator: Evaluator, alpha: float, parallelism: int = 1):
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {alpha!r}")
        if parallelism < 1:
            raise ConfigError(f"parallelism must be at least 1, got {parallelism!r}")
        self.evaluator = evaluator
        self.alpha = alpha
        self.parallelism = parallelism
        self._seen: dict[str, int] = {}
        self.invocations = 0

    def register_seen(self, code: str, candidate_id: int) -> bool:
        """Record a code's dedup key; False if it was already present."""
        key = dedup_key(code)
        if key in self._seen:
            return False
        self._seen[key] = candidate_id
        return True

    def filter_and_eval(self, candidates: Sequence[Candidate], *, alpha_exempt: bool = False) -> list[Candidate]:
        """Mark duplicates, evaluate the rest, filter by alpha, assign fitness.

        Returns only candidates that ended up evaluated, in ascending id
        order regardless of which worker finished first.
        """
        ordered = sorted(candidates, key=lambda c: c.id)
        to_eval: list[Candidate] = []
        for candidate in ordered:
            if self.register_seen(candidate.code, candidate.id):
                to_eval.append(candidate)
            else:
                candidate.status = Status.DUPLICATE

        outcomes: dict[int, EvalOutcome] = {}
        if self.parallelism > 1 and len(to_eval) > 1:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                futures = {c.id: pool.submit(self.evaluator.evaluate_code, c.code) for c in to_eval}
                for cid, future in futures.items():
                    outcomes[cid] = future.result()
        else:
            for candidate in to_eval:
                outcomes[candidate.id] = self.evaluator.evaluate_code(candidate.code)
        self.invocations += len(to_eval)

        evaluated: list[Candidate] = []
        for candidate in to_eval:
            outcome = outcomes[candidate.id]
            if outcome.kind is OutcomeKind.METRICS:
                candidate.metrics = outcome.metrics
                assert outcome.metrics is not None
                if alpha_exempt or outcome.metrics.val_error < self.alpha:
                    candidate.status = Status.EVALUATED
                    candidate.fitness = compute_fitness(
                        outcome.metrics.num_params, outcome.metrics.val_error
                    ).value
                    evaluated.append(candidate)
                else:
                    candidate.status = Status.FILTERED
            else:
                candidate.status = Status.UNTRAINABLE
                if outcome.diagnostic:
                    logger.debug("candidate %d untrainable: %s", candidate.id, outcome.diagnostic)
        return evaluated
