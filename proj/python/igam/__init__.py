"""Information-amount guided angular margin (C++ core)."""

import json as _json

from ._igam import (
    InputError,
    NumericalError,
    StreamingStats,
    ce_loss,
    cosines,
    igam_loss,
    information_amount,
    information_amount_from_embeddings,
    local_stats,
    margins,
    normalize_info,
    normface_loss,
    plan,
    shrink_covariance,
)
from ._igam import train as _train


def train(config, seed=None):
    """Run a toy experiment from a config dict; returns the parsed report."""
    return _json.loads(_train(_json.dumps(config), seed))


__all__ = [
    "InputError",
    "NumericalError",
    "StreamingStats",
    "ce_loss",
    "cosines",
    "igam_loss",
    "information_amount",
    "information_amount_from_embeddings",
    "local_stats",
    "margins",
    "normalize_info",
    "normface_loss",
    "plan",
    "shrink_covariance",
    "train",
]
