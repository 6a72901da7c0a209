"""Emoji prediction for tweets: text preprocessing, baselines and a BiLSTM."""

import json as _json

from ._core import (
    ConsistencyError,
    Error,
    InputError,
    MissingResourceError,
    extract_hashtags,
    find_emojis,
    normalize,
    run_cli,
    segment_hashtag,
    synthetic_corpus,
    tokenize,
)

__all__ = [
    "ConsistencyError",
    "Error",
    "InputError",
    "MissingResourceError",
    "evaluate",
    "extract_hashtags",
    "find_emojis",
    "normalize",
    "run_cli",
    "segment_hashtag",
    "synthetic_corpus",
    "tokenize",
]


def evaluate(preds, golds, num_classes):
    """Accuracy, macro precision/recall/F1, per-class scores and the confusion matrix."""
    from ._core import metrics_json

    return _json.loads(metrics_json(list(preds), list(golds), num_classes))
