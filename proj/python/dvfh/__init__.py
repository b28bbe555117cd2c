"""Delayed variable-to-fixed homophonic coding (C++ core)."""

import json

from ._dvfh import (
    DisconnectedIntersection,
    EnumerationCapExceeded,
    ModelError,
    Model,
    TruncatedStream,
    awgn_ask4,
    bounds,
    compute_shift_table,
    decode,
    encode,
    measure_redundancy,
)

__all__ = [
    "DisconnectedIntersection",
    "EnumerationCapExceeded",
    "ModelError",
    "Model",
    "TruncatedStream",
    "awgn_ask4",
    "bounds",
    "compute_shift_table",
    "decode",
    "encode",
    "load_model",
    "measure_redundancy",
]


def load_model(config, n):
    """Build a block model from a dict (or JSON text) and a block length."""
    text = config if isinstance(config, str) else json.dumps(config)
    return Model(text, n)
