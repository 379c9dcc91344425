"""Deterministic tokenization, word-boundary snapping, and sentence-end detection.

All metrics, agreement statistics, and the generation length policy count
tokens with this tokenizer, so it must stay stable across releases.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .model import CharSpan


class SnapEmptyError(ValueError):
    """Raised when a raw selection overlaps no token (pure whitespace)."""


@dataclass(frozen=True)
class TokenMap:
    tokens: tuple[CharSpan, ...]
    text_length: int

    def __len__(self) -> int:
        return len(self.tokens)

    def token_text(self, text: str, i: int) -> str:
        t = self.tokens[i]
        return text[t.start : t.end]


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> TokenMap:
    """Split on whitespace, then peel leading/trailing punctuation into
    single-character tokens. Interior punctuation (hyphens, apostrophes)
    stays attached."""
    spans: list[CharSpan] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        # chunk [i, j); peel punctuation off both ends
        lo, hi = i, j
        head = []
        while lo < hi and _is_punct(text[lo]):
            head.append(CharSpan(lo, lo + 1))
            lo += 1
        tail = []
        while hi > lo and _is_punct(text[hi - 1]):
            tail.append(CharSpan(hi - 1, hi))
            hi -= 1
        spans.extend(head)
        if lo < hi:
            spans.append(CharSpan(lo, hi))
        spans.extend(reversed(tail))
        i = j
    return TokenMap(tokens=tuple(spans), text_length=n)


def span_tokens(span: CharSpan, token_map: TokenMap) -> frozenset[int]:
    """Indices of all tokens overlapping the span by at least one character."""
    if span.end > token_map.text_length:
        raise ValueError(
            f"span [{span.start}, {span.end}) exceeds text length {token_map.text_length}"
        )
    return frozenset(
        i for i, t in enumerate(token_map.tokens) if t.overlaps(span)
    )


def snap_to_word_boundaries(raw: CharSpan, token_map: TokenMap) -> CharSpan:
    """Expand a raw selection outward to cover every touched token exactly."""
    hit = [i for i, t in enumerate(token_map.tokens) if t.overlaps(raw)]
    if not hit:
        raise SnapEmptyError(f"selection [{raw.start}, {raw.end}) overlaps no token")
    return CharSpan(token_map.tokens[hit[0]].start, token_map.tokens[hit[-1]].end)


@lru_cache(maxsize=1)
def abbreviations() -> frozenset[str]:
    data = resources.files("errspan.data").joinpath("abbreviations.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in data.splitlines() if line.strip() and not line.startswith("#")
    )


_TERMINALS = frozenset(".!?")
_CLOSERS = frozenset("\"')]}’”»")


def _ends_with_terminal(token: str) -> bool:
    # closing quotes/brackets after the terminal do not block the boundary
    stripped = token.rstrip("".join(_CLOSERS))
    return len(stripped) > 0 and stripped[-1] in _TERMINALS


def token_texts_end_sentence(tokens: list[str], i: int) -> bool:
    """Whether token i ends a sentence, with abbreviation suppression."""
    tok = tokens[i]
    if not _ends_with_terminal(tok):
        return False
    abbrevs = abbreviations()
    if tok in _TERMINALS:
        # find the nearest preceding word token
        j = i - 1
        while j >= 0 and all(_is_punct(c) for c in tokens[j]):
            j -= 1
        if j >= 0:
            prev = tokens[j].rstrip(".").lower()
            if prev in abbrevs:
                return False
    else:
        stem = tok.rstrip("".join(_CLOSERS)).rstrip(".!?").rstrip(".").lower()
        if stem in abbrevs:
            return False
    return True


def find_sentence_end(token_map: TokenMap, text: str, min_index: int) -> Optional[int]:
    """Smallest token index >= min_index that ends a sentence, or None."""
    texts = [token_map.token_text(text, i) for i in range(len(token_map))]
    for i in range(max(min_index, 0), len(texts)):
        if token_texts_end_sentence(texts, i):
            return i
    return None
