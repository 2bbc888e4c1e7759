"""The generational search loop.

Round structure: generate candidates from prompts built over the current
parents, evaluate and filter them, fold survivors into the global pool,
select the next parents (permanently consuming them from the pool), hand
non-selected evaluated candidates to the backend as adaptation records,
and record everything in the append-only ledger.

Determinism contract: all randomness flows through one numpy Generator
seeded from the config. Draw order within a round is fixed: for each
prompt, parent indices, then temperature, then whatever the backend draws
while generating; selection draws (random-parents mode) come last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .backends import AdaptationRecord, GenerationRequest, LMBackend, pick_temperature
from .errors import BackendError, ConfigError, RunAbortedError
from .harness import EvalHarness, Evaluator, EvaluatorCommand, SubprocessEvaluator, dedup_key
from .ledger import ResumePlan, RunLedger, candidate_to_record, plan_resume, truncate_ledger
from .model import Candidate, Origin, SearchConfig, Status
from .prompts import make_few_shot_prompt

logger = logging.getLogger(__name__)


class SelectionMode(str, Enum):
    FITNESS_TOP = "fitness_top"
    RANDOM_PARENTS = "random_parents"
    NAIVE_SINGLE_ROUND = "naive_single_round"


@dataclass
class EngineState:
    round: int
    population: list[int]
    global_pool: list[int]
    consumed_parents: set[int]
    rng_state: dict
    budget_used: int


def select_top(pool: list[Candidate], count: int) -> list[Candidate]:
    """Highest fitness first, ties to the lower id; winners leave the pool for good."""
    chosen = sorted(pool, key=lambda c: (-(c.fitness or 0.0), c.id))[: max(count, 0)]
    for candidate in chosen:
        candidate.used_as_parent = True
        pool.remove(candidate)
    return chosen


class SearchEngine:
    def __init__(
        self,
        config: SearchConfig,
        backend: LMBackend,
        evaluator: Evaluator | EvaluatorCommand,
        ledger: RunLedger,
        mode: SelectionMode = SelectionMode.FITNESS_TOP,
    ):
        config.validate()
        self.config = config
        self.mode = SelectionMode(mode)
        self.backend = backend
        if isinstance(evaluator, EvaluatorCommand):
            evaluator = SubprocessEvaluator(evaluator, timeout=config.eval_timeout)
        self.evaluator = evaluator
        self.ledger = ledger

        # The naive baseline burns the whole budget in one round: same m,
        # samples scaled by the round count it forgoes.
        if self.mode is SelectionMode.NAIVE_SINGLE_ROUND:
            self._total_rounds = 1
            self._samples_per_prompt = config.samples_per_prompt * config.num_rounds
        else:
            self._total_rounds = config.num_rounds
            self._samples_per_prompt = config.samples_per_prompt

        self._harness = EvalHarness(
            self.evaluator, alpha=config.error_threshold, parallelism=config.eval_parallelism
        )
        self._candidates: dict[int, Candidate] = {}
        self._population: list[Candidate] = []
        self._pool: list[Candidate] = []  # kept in ascending id order
        self._consumed: set[int] = set()
        self._next_id = 1
        self._budget_used = 0
        self._rng = np.random.Generator(np.random.PCG64(config.rng_seed))

    # -- public API ----------------------------------------------------------

    def run(self, seed_codes: Sequence[str]) -> list[Candidate]:
        """Execute a fresh search end to end; returns the final top candidates."""
        self._check_seed_codes(seed_codes)
        self.ledger.append(
            "config_snapshot",
            {
                "config": self.config.to_dict(),
                "mode": self.mode.value,
                "backend": self.backend.describe(),
                "evaluator": self.evaluator.describe(),
                "seed_codes": list(seed_codes),
            },
        )
        return self._run_from_seeds(seed_codes)

    @classmethod
    def resume(
        cls,
        ledger_path: str,
        *,
        backend: LMBackend | None = None,
        evaluator: Evaluator | None = None,
    ) -> list[Candidate]:
        """Continue an interrupted run so the ledger ends up byte-identical
        to what an uninterrupted run would have written."""
        plan = plan_resume(ledger_path)
        snapshot = plan.snapshot

        if plan.phase == "complete":
            assert snapshot.final_result is not None
            logger.info("run already complete; replaying final result")
            return [snapshot.candidates[cid] for cid in snapshot.final_result["top_ids"]]

        if backend is None:
            from .backends import backend_from_spec

            backend = backend_from_spec(snapshot.backend_spec)
        if evaluator is None:
            evaluator = _evaluator_from_spec(snapshot.evaluator_spec, snapshot.config)

        if plan.truncate_to is not None:
            truncate_ledger(ledger_path, plan.truncate_to)
        ledger = RunLedger.append_to(ledger_path, plan.next_sequence)

        engine = cls(
            snapshot.config, backend, evaluator, ledger, mode=SelectionMode(snapshot.mode)
        )
        if plan.phase == "config":
            # Only the snapshot survived; redo the seed phase.
            return engine._run_from_seeds(snapshot.seed_codes)
        engine._restore(plan)
        return engine._main_loop(plan.last_completed_round + 1)

    @property
    def state(self) -> EngineState:
        return EngineState(
            round=self._current_round,
            population=[c.id for c in self._population],
            global_pool=[c.id for c in self._pool],
            consumed_parents=set(self._consumed),
            rng_state=self._rng_state(),
            budget_used=self._budget_used,
        )

    # -- run phases ------------------------------------------------------------

    def _check_seed_codes(self, seed_codes: Sequence[str]) -> None:
        if len(seed_codes) < self.config.in_context_examples:
            raise ConfigError(
                f"need at least {self.config.in_context_examples} seeds, got {len(seed_codes)}"
            )
        keys = [dedup_key(code) for code in seed_codes]
        if len(set(keys)) != len(keys):
            raise ConfigError("seed codes must be distinct after normalization")

    def _run_from_seeds(self, seed_codes: Sequence[str]) -> list[Candidate]:
        self._current_round = 0
        seeds = []
        for code in seed_codes:
            seeds.append(self._new_candidate(round_=0, origin=Origin.SEED, code=code))
        self._harness.filter_and_eval(seeds, alpha_exempt=True)
        self.ledger.append_many([("seed", candidate_to_record(c)) for c in seeds])
        failed = [c for c in seeds if c.status is not Status.EVALUATED]
        if failed:
            raise RunAbortedError(
                f"seed candidate(s) {[c.id for c in failed]} failed evaluation; "
                "a bad warm start cannot be searched from"
            )

        self._pool.extend(seeds)
        self._set_population(seeds, round_=0, retained=False)
        self._rng = np.random.Generator(np.random.PCG64(self.config.rng_seed))
        return self._main_loop(1)

    def _main_loop(self, start_round: int) -> list[Candidate]:
        self.backend.bind_rng(self._rng)
        for round_ in range(start_round, self._total_rounds + 1):
            self._run_round(round_)
        final = select_top(self._pool, self.config.num_survivors)
        self.ledger.append(
            "final_result",
            {"top_ids": [c.id for c in final], "budget_used": self._budget_used},
        )
        return final

    def _run_round(self, round_: int) -> None:
        self._current_round = round_
        self.ledger.append("round_begin", {"round": round_, "rng_state": self._rng_state()})

        pending, prompt_texts = self._cross_mut(round_)
        self._budget_used += self.config.prompts_per_round * self._samples_per_prompt

        evaluated = self._harness.filter_and_eval(pending)
        self.ledger.append_many([("candidate", candidate_to_record(c)) for c in pending])
        self._pool.extend(evaluated)

        if round_ < self._total_rounds:
            new_parents = self._select_parents()
            if new_parents:
                self._set_population(new_parents, round_=round_, retained=False)
            else:
                # Nothing to promote; keep the old parents so the loop can move on.
                self._write_selection(round_, self._population, retained=True)
            self._adapt(round_, evaluated, prompt_texts)

        self.ledger.append(
            "round_end",
            {"round": round_, "rng_state": self._rng_state(), "budget_used": self._budget_used},
        )

    def _cross_mut(self, round_: int) -> tuple[list[Candidate], dict[str, str]]:
        """One round of prompt building and sampling; backend trouble costs
        completions, never the run."""
        config = self.config
        parents = self._population
        pending: list[Candidate] = []
        prompt_texts: dict[str, str] = {}
        k = config.in_context_examples
        for j in range(1, config.prompts_per_round + 1):
            if config.distinct_parents and len(parents) >= k:
                indices = self._rng.choice(len(parents), size=k, replace=False)
            else:
                indices = self._rng.integers(0, len(parents), size=k)
            examples = [parents[int(i)] for i in indices]
            prompt = make_few_shot_prompt(examples, config, prompt_id=f"r{round_}p{j}")
            prompt_texts[prompt.id] = prompt.text
            temperature = pick_temperature(self._rng, config.temperature_set)
            request = GenerationRequest(
                prompt_text=prompt.text,
                temperature=temperature,
                num_samples=self._samples_per_prompt,
                max_output_length=config.max_output_length,
            )
            try:
                completions = self.backend.generate(request)
            except BackendError as exc:
                logger.warning("prompt %s lost its samples: %s", prompt.id, exc)
                completions = []
            for completion in completions[: self._samples_per_prompt]:
                pending.append(
                    self._new_candidate(
                        round_=round_,
                        origin=Origin.GENERATED,
                        code=config.completion_stub + completion,
                        parent_ids=[e.id for e in examples],
                        prompt_id=prompt.id,
                        temperature=temperature,
                    )
                )
        return pending, prompt_texts

    def _select_parents(self) -> list[Candidate]:
        if self.mode is SelectionMode.RANDOM_PARENTS:
            count = self.config.num_survivors
            if not self._pool:
                return []
            if len(self._pool) <= count:
                chosen = list(self._pool)
            else:
                indices = self._rng.choice(len(self._pool), size=count, replace=False)
                chosen = [self._pool[int(i)] for i in indices]
            for candidate in chosen:
                candidate.used_as_parent = True
                self._pool.remove(candidate)
            return chosen
        return select_top(self._pool, self.config.num_survivors)

    def _adapt(self, round_: int, evaluated: list[Candidate], prompt_texts: dict[str, str]) -> None:
        selected_ids = {c.id for c in self._population}
        records = []
        stub_len = len(self.config.completion_stub)
        for candidate in evaluated:
            if candidate.id in selected_ids:
                continue
            completion = candidate.code[stub_len:]
            if not completion:
                continue
            records.append(
                AdaptationRecord(
                    prompt_text=prompt_texts.get(candidate.prompt_id or "", ""),
                    completion=completion,
                    fitness=candidate.fitness if candidate.fitness is not None else 0.0,
                    round=round_,
                )
            )
        self.ledger.append_many(
            [
                (
                    "adaptation",
                    {
                        "round": r.round,
                        "prompt": r.prompt_text,
                        "completion": r.completion,
                        "fitness": r.fitness,
                    },
                )
                for r in records
            ]
        )
        try:
            self.backend.adapt(records, self.config.adaptation)
        except BackendError as exc:
            logger.warning("adaptation failed at round %d (%s); continuing un-adapted", round_, exc)

    # -- bookkeeping -----------------------------------------------------------

    def _new_candidate(self, round_: int, origin: Origin, code: str, **kwargs) -> Candidate:
        candidate = Candidate(
            id=self._next_id, round=round_, origin=origin, code=code, **kwargs
        )
        self._next_id += 1
        self._candidates[candidate.id] = candidate
        return candidate

    def _set_population(self, parents: list[Candidate], round_: int, retained: bool) -> None:
        if not retained:
            for candidate in parents:
                candidate.used_as_parent = True
                self._consumed.add(candidate.id)
                if candidate in self._pool:
                    self._pool.remove(candidate)
        self._population = list(parents)
        self._write_selection(round_, parents, retained=retained)

    def _write_selection(self, round_: int, parents: list[Candidate], retained: bool) -> None:
        self._consumed.update(c.id for c in parents)
        self.ledger.append(
            "selection",
            {"round": round_, "parent_ids": [c.id for c in parents], "retained": retained},
        )

    def _rng_state(self) -> dict:
        return self._rng.bit_generator.state

    def _restore(self, plan: ResumePlan) -> None:
        """Rebuild in-memory state from a kept ledger prefix ending at a
        seed-phase or round boundary."""
        snapshot = plan.snapshot
        self._candidates = dict(snapshot.candidates)
        self._next_id = max(self._candidates, default=0) + 1
        self._current_round = plan.last_completed_round
        self._budget_used = plan.budget_used
        self._consumed = snapshot.consumed_parent_ids

        # Pool order matters for random-parents draws: ascending id matches
        # how an uninterrupted run grows and shrinks the pool.
        self._pool = [
            c
            for c in sorted(self._candidates.values(), key=lambda c: c.id)
            if c.status is Status.EVALUATED and c.id not in self._consumed
        ]
        last_selection = snapshot.selections[-1]
        self._population = [self._candidates[cid] for cid in last_selection["parent_ids"]]

        for candidate in sorted(self._candidates.values(), key=lambda c: c.id):
            self._harness.register_seen(candidate.code, candidate.id)

        self._rng = np.random.Generator(np.random.PCG64(self.config.rng_seed))
        if plan.rng_state is not None:
            self._rng.bit_generator.state = plan.rng_state
        self.backend.fast_forward(self.config.prompts_per_round * plan.last_completed_round)


def _evaluator_from_spec(spec: dict, config: SearchConfig) -> Evaluator:
    kind = spec.get("kind")
    if kind == "subprocess":
        command = EvaluatorCommand(
            argv=tuple(spec.get("argv", ())),
            working_dir=spec.get("working_dir"),
            env_overrides=dict(spec.get("env_overrides", {})),
        )
        return SubprocessEvaluator(command, timeout=config.eval_timeout)
    raise ConfigError(
        f"evaluator of kind {kind!r} cannot be rebuilt from the ledger; pass evaluator= explicitly"
    )


def run_search(
    config: SearchConfig,
    mode: SelectionMode,
    backend: LMBackend,
    evaluator: Evaluator | EvaluatorCommand,
    seed_codes: Sequence[str],
    ledger_path: str,
    overwrite: bool = False,
) -> list[Candidate]:
    """Convenience wrapper: open a fresh ledger, run, close."""
    with RunLedger.create(ledger_path, overwrite=overwrite) as ledger:
        engine = SearchEngine(config, backend, evaluator, ledger, mode=mode)
        return engine.run(seed_codes)
