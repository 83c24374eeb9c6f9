"""Tokenization shared by the encoders and the KG pooling."""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9']+")

# Sentence pairs are joined into a single input before encoding.
PAIR_SEPARATOR = " [SEP] "


def tokenize(text: str) -> list[str]:
    """Lowercase and strip punctuation, keeping word-internal apostrophes."""
    return _TOKEN_RE.findall(text.lower())


def join_pair(text_a: str, text_b: str | None) -> str:
    if text_b is None or text_b == "":
        return text_a
    return text_a + PAIR_SEPARATOR + text_b
