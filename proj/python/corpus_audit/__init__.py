"""Corpus-auditing toolkit.

Quantifies how much essay text reveals about author demographics: tokenize and
vectorize documents, train the bundled classifiers (multinomial naive Bayes,
logistic regression, a small feed-forward network), generate synthetic corpora
with a planted, calibrated signal, and run the full cross-validated audit that
the command-line tool exposes.
"""

import json as _json

from ._core import (
    ConfigError,
    CountVector,
    DataError,
    EarlyStopPolicy,
    FrequencyRatioEntry,
    Gender,
    LRModel,
    LRPrediction,
    MLPModel,
    MlpPolicy,
    MlpPrediction,
    NBModel,
    NBPrediction,
    RawRecord,
    Vocabulary,
    Year,
    __version__,
    audit_jsonl,
    bayes_optimal_accuracy,
    build_vocabulary,
    frequency_ratios,
    generate,
    lr_predict,
    lr_train,
    mlp_predict,
    mlp_train,
    nb_predict,
    nb_train,
    records_to_jsonl,
    tokenize,
    utf8_length,
    vectorize,
)

__all__ = [
    "ConfigError",
    "CountVector",
    "DataError",
    "EarlyStopPolicy",
    "FrequencyRatioEntry",
    "Gender",
    "LRModel",
    "LRPrediction",
    "MLPModel",
    "MlpPolicy",
    "MlpPrediction",
    "NBModel",
    "NBPrediction",
    "RawRecord",
    "Vocabulary",
    "Year",
    "__version__",
    "audit",
    "audit_jsonl",
    "bayes_optimal_accuracy",
    "build_vocabulary",
    "frequency_ratios",
    "generate",
    "lr_predict",
    "lr_train",
    "mlp_predict",
    "mlp_train",
    "nb_predict",
    "nb_train",
    "records_to_jsonl",
    "tokenize",
    "utf8_length",
    "vectorize",
]


def audit(jsonl_text, **config):
    """Run the full audit over JSONL essay records.

    Keyword arguments mirror the CLI configuration keys (``models``, ``tasks``,
    ``k``, ``seed``, ``min_chars``, ``income_floor``, ``threads``, ...).
    Returns a dict with ``report_json``, ``report_md``, ``ingest_errors`` and,
    when ``emit_per_essay`` is set, ``predictions_jsonl``.
    """
    return audit_jsonl(jsonl_text, _json.dumps(config))
