"""Evolutionary program search with a generative-model crossover operator.

The engine breeds code candidates round by round: parents become few-shot
prompt examples, a backend samples completions, an external evaluator
scores them, and the best survivors parent the next round. Runs are
deterministic, ledger-backed, and resumable.
"""

from .backends import (
    AdaptationRecord,
    GenerationRequest,
    GenomeRecombinerBackend,
    HttpBackend,
    LMBackend,
    MockBackend,
    pick_temperature,
)
from .engine import EngineState, SearchEngine, SelectionMode, run_search, select_top
from .genome import (
    CHANNEL_VALUES,
    Genome,
    all_genomes,
    brute_force_optimum,
    parse_genome,
    synthetic_metrics,
)
from .errors import (
    BackendError,
    BackendProtocolError,
    BackendUnavailableError,
    ConfigError,
    EvoSearchError,
    InvalidMetricsError,
    LedgerError,
    MissingMetricsError,
    RunAbortedError,
)
from .harness import (
    CallableEvaluator,
    EvalHarness,
    EvalOutcome,
    EvaluatorCommand,
    OutcomeKind,
    SubprocessEvaluator,
    dedup_key,
    normalize_code,
)
from .ledger import LedgerSnapshot, RunLedger, load_snapshot, plan_resume, read_ledger
from .model import (
    Candidate,
    FitnessScore,
    Metrics,
    Origin,
    SearchConfig,
    Status,
    compute_fitness,
    error_from_accuracy,
    sort_by_fitness,
)
from .prompts import (
    Prompt,
    compute_target_metrics,
    extract_example_codes,
    make_few_shot_prompt,
    parse_target_metrics,
    render_example,
)
from .reports import (
    FitnessCurvePoint,
    ParetoPoint,
    TrajectoryPoint,
    bootstrap_max_fitness_curve,
    pareto_frontier,
    round_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationRecord",
    "BackendError",
    "BackendProtocolError",
    "BackendUnavailableError",
    "CHANNEL_VALUES",
    "CallableEvaluator",
    "Candidate",
    "ConfigError",
    "EngineState",
    "EvalHarness",
    "EvalOutcome",
    "EvaluatorCommand",
    "EvoSearchError",
    "FitnessCurvePoint",
    "FitnessScore",
    "GenerationRequest",
    "Genome",
    "GenomeRecombinerBackend",
    "HttpBackend",
    "InvalidMetricsError",
    "LMBackend",
    "LedgerError",
    "LedgerSnapshot",
    "Metrics",
    "MissingMetricsError",
    "MockBackend",
    "Origin",
    "OutcomeKind",
    "ParetoPoint",
    "Prompt",
    "RunAbortedError",
    "RunLedger",
    "SearchConfig",
    "SearchEngine",
    "SelectionMode",
    "Status",
    "SubprocessEvaluator",
    "TrajectoryPoint",
    "all_genomes",
    "bootstrap_max_fitness_curve",
    "brute_force_optimum",
    "compute_fitness",
    "compute_target_metrics",
    "dedup_key",
    "error_from_accuracy",
    "extract_example_codes",
    "load_snapshot",
    "make_few_shot_prompt",
    "normalize_code",
    "pareto_frontier",
    "parse_genome",
    "parse_target_metrics",
    "pick_temperature",
    "plan_resume",
    "read_ledger",
    "render_example",
    "round_trajectory",
    "run_search",
    "select_top",
    "sort_by_fitness",
    "synthetic_metrics",
]
