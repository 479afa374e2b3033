"""Lossless log compression with a typed-token line-delta transform.

Archives produced here are the same .flca files the ``flca`` command writes.
"""

from ._core import (
    FlcaError,
    classify_token,
    compress,
    decompress,
    generate_corpus,
    model_info,
    tokenize,
    train,
    verify,
)

__all__ = [
    "FlcaError",
    "classify_token",
    "compress",
    "decompress",
    "generate_corpus",
    "model_info",
    "tokenize",
    "train",
    "verify",
]
