"""Concept tagging: WFST, CRF and neural sequence taggers with a benchmark runner."""

from ._conceptag import (
    CrfModel,
    Error,
    NeuralTagger,
    Recipe,
    RunStats,
    Sentence,
    Token,
    WfstTagger,
    __version__,
    aggregate_runs,
    architectures,
    extract_chunks,
    load_conll,
    load_recipes,
    lookup_key,
    normalize_numbers,
    run_bench,
    score,
    train_crf,
    train_neural,
)

__all__ = [
    "CrfModel",
    "Error",
    "NeuralTagger",
    "Recipe",
    "RunStats",
    "Sentence",
    "Token",
    "WfstTagger",
    "aggregate_runs",
    "architectures",
    "extract_chunks",
    "load_conll",
    "load_recipes",
    "lookup_key",
    "normalize_numbers",
    "run_bench",
    "score",
    "train_crf",
    "train_neural",
]
