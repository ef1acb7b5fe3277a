"""Overlapping fixed-size chunks of a tokenised document."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

# text -> character spans of its tokens
Tokenizer = Callable[[str], list[tuple[int, int]]]

DEFAULT_SIZE = 12_000
DEFAULT_OVERLAP = 2_000


def whitespace_tokens(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in re.finditer(r"\S+", text)]


@dataclass(frozen=True)
class Chunk:
    index: int
    start: int  # token span [start, end)
    end: int
    text: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def chunk_spans(n_tokens: int, size: int = DEFAULT_SIZE, overlap: int = DEFAULT_OVERLAP) -> list[tuple[int, int]]:
    if not size > overlap >= 0:
        raise ValueError("need size > overlap >= 0")
    spans = []
    step = size - overlap
    start = 0
    while start < n_tokens:
        end = min(start + size, n_tokens)
        spans.append((start, end))
        if end == n_tokens:
            break
        start += step
    return spans


def chunk_document(
    text: str,
    tokenizer: Tokenizer = whitespace_tokens,
    size: int = DEFAULT_SIZE,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Chunk]:
    """Chunk ``k`` covers tokens ``[k*(size-overlap), k*(size-overlap)+size)``, clipped."""
    tokens = tokenizer(text)
    out = []
    for k, (start, end) in enumerate(chunk_spans(len(tokens), size, overlap)):
        out.append(Chunk(k, start, end, text[tokens[start][0] : tokens[end - 1][1]]))
    return out
