"""Generation backends: the pluggable crossover/mutation operator.

Three implementations ship: a remote HTTP service client, a scripted mock
for tests, and a genome recombiner that makes the synthetic benchmark
behave like a crossover operator without any language model.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from .errors import BackendProtocolError, BackendUnavailableError, ConfigError
from .genome import CHANNEL_VALUES, Genome, parse_genome
from .prompts import extract_example_codes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationRequest:
    prompt_text: str
    temperature: float
    num_samples: int
    max_output_length: int


@dataclass(frozen=True)
class AdaptationRecord:
    prompt_text: str
    completion: str
    fitness: float
    round: int

    def __post_init__(self) -> None:
        if not self.completion:
            raise ValueError("adaptation record needs a non-empty completion")


def pick_temperature(rng: np.random.Generator, temperature_set: Sequence[float]) -> float:
    """Uniform draw from the configured temperature set, off the engine's stream."""
    if not temperature_set:
        raise ConfigError("temperature_set must be non-empty")
    return float(temperature_set[int(rng.integers(len(temperature_set)))])


class LMBackend:
    """Interface every backend implements. Behavior downstream depends only
    on the completion texts returned, never on which backend produced them."""

    kind = "abstract"

    def bind_rng(self, rng: np.random.Generator) -> None:
        """Engines share their deterministic stream with backends that sample."""

    def fast_forward(self, generate_calls: int) -> None:
        """Skip state a resumed run would have consumed. Stateless backends ignore it."""

    def generate(self, request: GenerationRequest) -> list[str]:
        raise NotImplementedError

    def adapt(self, records: Sequence[AdaptationRecord], adaptation_config: dict) -> dict:
        """Deliver tuning records. Default: acknowledged no-op."""
        return {"ok": True}

    def describe(self) -> dict:
        return {"kind": self.kind}


def _truncate(texts: Sequence[str], limit: int) -> list[str]:
    return [t[:limit] for t in texts]


class MockBackend(LMBackend):
    """Replays configured completions.

    A flat list of strings answers every request with the same script; a
    list of lists is consumed one batch per generate call (then empties).
    """

    kind = "mock"

    def __init__(self, completions: Sequence[str] | Sequence[Sequence[str]]):
        completions = list(completions)
        self._nested = bool(completions) and not isinstance(completions[0], str)
        if self._nested:
            self._batches = [list(batch) for batch in completions]
        else:
            self._script = [str(c) for c in completions]
        self._cursor = 0
        self.generate_calls: list[GenerationRequest] = []
        self.adapt_calls: list[tuple[list[AdaptationRecord], dict]] = []

    def fast_forward(self, generate_calls: int) -> None:
        if self._nested:
            self._cursor = min(generate_calls, len(self._batches))

    def generate(self, request: GenerationRequest) -> list[str]:
        self.generate_calls.append(request)
        if self._nested:
            if self._cursor >= len(self._batches):
                return []
            batch = self._batches[self._cursor]
            self._cursor += 1
        else:
            batch = self._script
        return _truncate(batch[: request.num_samples], request.max_output_length)

    def adapt(self, records: Sequence[AdaptationRecord], adaptation_config: dict) -> dict:
        self.adapt_calls.append((list(records), dict(adaptation_config)))
        return {"ok": True}

    def describe(self) -> dict:
        spec: dict = {"kind": self.kind}
        if self._nested:
            spec["completions"] = [list(b) for b in self._batches]
            spec["nested"] = True
        else:
            spec["completions"] = list(self._script)
            spec["nested"] = False
        return spec


class GenomeRecombinerBackend(LMBackend):
    """Crossover operator over genome strings.

    Parses the in-context example codes out of the prompt, then for each
    sample picks two parents, does uniform field-wise crossover, and with
    a small probability mutates one field to a random legal width.
    """

    kind = "genome"

    def __init__(self, mutation_rate: float = 0.2, rng: np.random.Generator | None = None):
        if not 0.0 <= mutation_rate <= 1.0:
            raise ConfigError(f"mutation_rate must be in [0, 1], got {mutation_rate!r}")
        self.mutation_rate = mutation_rate
        self._rng = rng if rng is not None else np.random.default_rng()
        self.adapt_calls = 0

    def bind_rng(self, rng: np.random.Generator) -> None:
        self._rng = rng

    def generate(self, request: GenerationRequest) -> list[str]:
        try:
            codes = extract_example_codes(request.prompt_text)
            parents = [parse_genome(code) for code in codes]
        except ValueError as exc:
            raise BackendProtocolError(f"prompt does not carry parseable genomes: {exc}") from exc
        if not parents:
            raise BackendProtocolError("prompt carries no example genomes")

        rng = self._rng
        outputs = []
        for _ in range(request.num_samples):
            first = parents[int(rng.integers(len(parents)))]
            second = parents[int(rng.integers(len(parents)))]
            fields = [
                first.channels[i] if int(rng.integers(2)) == 0 else second.channels[i]
                for i in range(len(first.channels))
            ]
            if rng.random() < self.mutation_rate:
                position = int(rng.integers(len(fields)))
                fields[position] = int(CHANNEL_VALUES[int(rng.integers(len(CHANNEL_VALUES)))])
            outputs.append(Genome(tuple(fields)).serialize())
        return _truncate(outputs, request.max_output_length)

    def adapt(self, records: Sequence[AdaptationRecord], adaptation_config: dict) -> dict:
        # Records are persisted by the engine; the recombiner has no
        # parameters to tune, so delivery is the whole contract.
        self.adapt_calls += 1
        return {"ok": True}

    def describe(self) -> dict:
        return {"kind": self.kind, "mutation_rate": self.mutation_rate}


class HttpBackend(LMBackend):
    """Client for a remote generation service.

    Wire contract: POST generate_url with {"prompt", "temperature", "n",
    "max_tokens"}, expect {"samples": [...]}. Tuning posts {"records",
    "config"} and expects {"ok": true}. Transport trouble is retried with
    backoff and then surfaced as unavailable; a malformed answer is a
    protocol error and is not retried.
    """

    kind = "http"

    def __init__(
        self,
        generate_url: str,
        tune_url: str | None = None,
        auth_token: str | None = None,
        request_timeout: float = 30.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ):
        if max_retries < 1:
            raise ConfigError("max_retries must be at least 1")
        self.generate_url = generate_url
        self.tune_url = tune_url
        self._headers = {"Authorization": f"Bearer {auth_token}"} if auth_token else {}
        self.request_timeout = request_timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._session = session if session is not None else requests.Session()

    def _post_with_retries(self, url: str, body: dict) -> requests.Response:
        last_failure = "no attempt made"
        for attempt in range(1, self.max_retries + 1):
            try:
                response = self._session.post(
                    url, json=body, headers=self._headers, timeout=self.request_timeout
                )
            except requests.RequestException as exc:
                last_failure = f"transport error: {exc}"
            else:
                if response.status_code < 500:
                    return response
                last_failure = f"server error HTTP {response.status_code}"
            if attempt < self.max_retries:
                time.sleep(self.backoff * attempt)
        raise BackendUnavailableError(
            f"{url} unavailable after {self.max_retries} attempts ({last_failure})"
        )

    def generate(self, request: GenerationRequest) -> list[str]:
        body = {
            "prompt": request.prompt_text,
            "temperature": request.temperature,
            "n": request.num_samples,
            "max_tokens": request.max_output_length,
        }
        response = self._post_with_retries(self.generate_url, body)
        if response.status_code // 100 != 2:
            raise BackendProtocolError(
                f"generation endpoint rejected the request: HTTP {response.status_code}"
            )
        try:
            payload = response.json()
            samples = payload["samples"]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendProtocolError(f"malformed generation response: {exc}") from exc
        if not isinstance(samples, list) or not all(isinstance(s, str) for s in samples):
            raise BackendProtocolError("generation response 'samples' must be a list of strings")
        return _truncate(samples[: request.num_samples], request.max_output_length)

    def adapt(self, records: Sequence[AdaptationRecord], adaptation_config: dict) -> dict:
        if self.tune_url is None:
            logger.debug("no tuning endpoint configured; adaptation records dropped")
            return {"ok": True}
        body = {
            "records": [
                {"prompt": r.prompt_text, "completion": r.completion, "fitness": r.fitness}
                for r in records
            ],
            "config": dict(adaptation_config),
        }
        # Tuning failure degrades the operator but must not kill the search.
        try:
            response = self._post_with_retries(self.tune_url, body)
            payload = response.json() if response.content else {}
            if response.status_code // 100 != 2 or payload.get("ok") is not True:
                logger.warning(
                    "tuning endpoint did not acknowledge (HTTP %s); continuing un-adapted",
                    response.status_code,
                )
                return {"ok": False}
            return payload
        except (BackendUnavailableError, ValueError) as exc:
            logger.warning("tuning failed (%s); continuing un-adapted", exc)
            return {"ok": False}

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "generate_url": self.generate_url,
            "tune_url": self.tune_url,
        }


def backend_from_spec(spec: dict) -> LMBackend:
    """Rebuild a backend from its ledger description (used by resume).

    The HTTP token never enters the ledger; it is re-read from the
    EVOSEARCH_API_TOKEN environment variable.
    """
    kind = spec.get("kind")
    if kind == "mock":
        completions = spec.get("completions", [])
        backend = MockBackend(completions if spec.get("nested") else [str(c) for c in completions])
        return backend
    if kind == "genome":
        return GenomeRecombinerBackend(mutation_rate=spec.get("mutation_rate", 0.2))
    if kind == "http":
        generate_url = spec.get("generate_url")
        if not generate_url:
            raise ConfigError("http backend spec lacks generate_url")
        return HttpBackend(
            generate_url,
            tune_url=spec.get("tune_url"),
            auth_token=os.environ.get("EVOSEARCH_API_TOKEN"),
        )
    raise ConfigError(f"backend of kind {kind!r} cannot be rebuilt; pass backend= explicitly")
