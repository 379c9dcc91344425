"""Sampling math (frequency penalty, temperature/argmax, nucleus filtering)
and the length-controlled generation loop over a pluggable language model.

A small order-2 interpolated count model ships for desk-scale use; anything
exposing `vocabulary` and `next_scores` plugs in.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Protocol, Sequence

import numpy as np

from .model import DecodingConfig, GenerationRecord
from .textproc import token_texts_end_sentence, tokenize

NGRAM_FORMAT = "errspan-ngram"
NGRAM_VERSION = 1

# tokens a detokenizer attaches to the preceding word (no space before)
_NO_SPACE_BEFORE = frozenset(".,!?;:)]}'’”")
_NO_SPACE_AFTER = frozenset("([{‘“")


class LanguageModel(Protocol):
    name: str
    vocabulary: Sequence[str]

    def next_scores(self, context: Sequence[str]) -> np.ndarray: ...


class NoSentenceBoundaryError(RuntimeError):
    def __init__(self, retries: int):
        self.retries = retries
        super().__init__(
            f"no sentence boundary within the token window after {retries} attempt(s)"
        )


class NgramModel:
    """Order-2 interpolated count model: scores are log of the mixture of
    bigram and unigram relative frequencies, with add-one floor so every
    vocabulary token stays reachable."""

    def __init__(
        self,
        vocabulary: list[str],
        unigram_counts: list[int],
        bigram_counts: dict[str, dict[str, int]],
        interpolation: float = 0.6,
        name: str = "ngram-2",
    ):
        self.name = name
        self.vocabulary = list(vocabulary)
        self.interpolation = interpolation
        self._index = {w: i for i, w in enumerate(self.vocabulary)}
        uni = np.asarray(unigram_counts, dtype=np.float64) + 1.0
        self._unigram = uni / uni.sum()
        self._bigram: dict[str, np.ndarray] = {}
        v = len(self.vocabulary)
        for prev, row in bigram_counts.items():
            vec = np.zeros(v)
            for w, c in row.items():
                vec[self._index[w]] = c
            self._bigram[prev] = vec
        self._bigram_counts = bigram_counts
        self._unigram_counts = list(unigram_counts)

    @classmethod
    def train(cls, text: str, interpolation: float = 0.6, name: str = "ngram-2") -> "NgramModel":
        tm = tokenize(text)
        tokens = [text[t.start : t.end] for t in tm.tokens]
        vocabulary = sorted(set(tokens))
        index = {w: i for i, w in enumerate(vocabulary)}
        unigram = [0] * len(vocabulary)
        bigram: dict[str, dict[str, int]] = {}
        for i, tok in enumerate(tokens):
            unigram[index[tok]] += 1
            if i > 0:
                row = bigram.setdefault(tokens[i - 1], {})
                row[tok] = row.get(tok, 0) + 1
        return cls(vocabulary, unigram, bigram, interpolation=interpolation, name=name)

    def next_scores(self, context: Sequence[str]) -> np.ndarray:
        prev = context[-1] if context else None
        probs = self._unigram
        if prev is not None and prev in self._bigram:
            row = self._bigram[prev]
            total = row.sum()
            mixed = self.interpolation * (row / total) + (1 - self.interpolation) * self._unigram
            probs = mixed
        return np.log(probs)

    def save(self, path) -> None:
        obj = {
            "format": NGRAM_FORMAT,
            "version": NGRAM_VERSION,
            "name": self.name,
            "interpolation": self.interpolation,
            "vocabulary": self.vocabulary,
            "unigram_counts": self._unigram_counts,
            "bigram_counts": self._bigram_counts,
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(obj, f, ensure_ascii=False)

    @classmethod
    def load(cls, path) -> "NgramModel":
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
        if obj.get("format") != NGRAM_FORMAT:
            raise ValueError(f"not an {NGRAM_FORMAT} file: {path}")
        if obj.get("version") != NGRAM_VERSION:
            raise ValueError(f"unsupported model version {obj.get('version')!r}")
        return cls(
            obj["vocabulary"],
            obj["unigram_counts"],
            obj["bigram_counts"],
            interpolation=obj.get("interpolation", 0.6),
            name=obj.get("name", "ngram-2"),
        )


def bundled_model() -> NgramModel:
    text = resources.files("errspan.data").joinpath("toy_corpus.txt").read_text("utf-8")
    return NgramModel.train(text)


def apply_frequency_penalty(
    scores: np.ndarray, counts: np.ndarray, alpha_f: float
) -> np.ndarray:
    """score(t) <- score(t) - count(t) * alpha_f, elementwise."""
    if alpha_f < 0:
        raise ValueError("frequency penalty must be >= 0")
    if scores.shape != counts.shape:
        raise ValueError(f"shape mismatch: scores {scores.shape} vs counts {counts.shape}")
    return scores - counts * alpha_f


def apply_temperature(scores: np.ndarray, t: float) -> np.ndarray:
    """t > 0: softmax(scores / t). t = 0: one-hot on the max score, ties
    broken by lowest vocabulary index."""
    if t < 0:
        raise ValueError("temperature must be >= 0")
    if np.all(np.isneginf(scores)):
        raise ValueError("all scores are -inf")
    if t == 0:
        out = np.zeros_like(scores, dtype=np.float64)
        out[int(np.argmax(scores))] = 1.0
        return out
    z = scores / t
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def nucleus_filter(probs: np.ndarray, p: float) -> np.ndarray:
    """Keep the smallest prefix of tokens by descending probability (ties by
    ascending index) with cumulative mass >= p; zero the rest; renormalize."""
    if p <= 0:
        raise ValueError("top-p must be in (0, 1]")
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    order = np.argsort(-probs, kind="stable")
    cum = np.cumsum(probs[order])
    # first position where the cumulative mass reaches p (tolerate fp dust)
    k = int(np.searchsorted(cum, p - 1e-12)) + 1
    k = min(k, len(order))
    keep = order[:k]
    out = np.zeros_like(probs)
    out[keep] = probs[keep]
    return out / out.sum()


@dataclass
class SamplerState:
    """Mutable per-generation state: emitted-token counts and the RNG."""

    config: DecodingConfig
    rng: np.random.Generator
    counts: Counter = field(default_factory=Counter)

    def counts_vector(self, vocabulary: Sequence[str]) -> np.ndarray:
        return np.array([self.counts[w] for w in vocabulary], dtype=np.float64)


def next_token_distribution(
    lm: LanguageModel, state: SamplerState, context: Sequence[str], post_log_softmax: bool = False
) -> np.ndarray:
    """One decoding step: frequency penalty on raw scores, then temperature
    or argmax, then the nucleus filter."""
    scores = np.asarray(lm.next_scores(context), dtype=np.float64)
    if post_log_softmax:
        z = scores - scores.max()
        scores = z - np.log(np.exp(z).sum())
    cfg = state.config
    if cfg.frequency_penalty:
        scores = apply_frequency_penalty(scores, state.counts_vector(lm.vocabulary), cfg.frequency_penalty)
    probs = apply_temperature(scores, cfg.temperature)
    if cfg.temperature > 0 and cfg.top_p is not None:
        probs = nucleus_filter(probs, cfg.top_p)
    return probs


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


def detokenize(tokens: Sequence[str]) -> str:
    parts: list[str] = []
    for tok in tokens:
        if parts and tok not in _NO_SPACE_BEFORE and parts[-1] not in _NO_SPACE_AFTER:
            parts.append(" ")
        parts.append(tok)
    return "".join(parts)


def generate(
    lm: LanguageModel,
    prompt: str,
    config: DecodingConfig,
    min_tokens: int = 80,
    max_tokens: int = 145,
    max_retries: int = 10,
    seed: int = 0,
    generation_id: Optional[str] = None,
    include_prompt_counts: bool = False,
    post_log_softmax: bool = False,
    topic: Optional[str] = None,
) -> GenerationRecord:
    """Autoregressive loop with the 80..145-token stopping policy: stop at
    the first sentence boundary after min_tokens; if no boundary appears by
    max_tokens, discard and retry with the next derived seed."""
    prompt_map = tokenize(prompt)
    if len(prompt_map) < 1:
        raise ValueError("prompt must contain at least one token")
    prompt_tokens = [prompt[t.start : t.end] for t in prompt_map.tokens]
    deterministic = config.temperature == 0
    attempts = 1 if deterministic else max_retries
    for attempt in range(attempts):
        rng = np.random.default_rng((seed, attempt))
        state = SamplerState(config=config, rng=rng)
        if include_prompt_counts:
            state.counts.update(prompt_tokens)
        emitted: list[str] = []
        done = False
        while len(emitted) < max_tokens:
            probs = next_token_distribution(
                lm, state, prompt_tokens + emitted, post_log_softmax=post_log_softmax
            )
            if deterministic:
                idx = int(np.argmax(probs))
            else:
                idx = _sample_index(probs, rng)
            tok = lm.vocabulary[idx]
            emitted.append(tok)
            state.counts[tok] += 1
            if len(emitted) >= min_tokens and token_texts_end_sentence(emitted, len(emitted) - 1):
                done = True
                break
        if done:
            gid = generation_id or f"{lm.name}-{seed}"
            return GenerationRecord(
                generation_id=gid,
                prompt=prompt,
                generation=detokenize(emitted),
                source=lm.name,
                config=config,
                topic=topic,
            )
    raise NoSentenceBoundaryError(retries=attempts)


PAPER_TOP_PS = (0.4, 0.7, 0.9, 0.96)
PAPER_TEMPERATURES = (0.0, 0.4, 0.7, 1.0)
PAPER_FREQUENCY_PENALTIES = (0.0, 1.0)


def sweep_configs(
    top_ps: Sequence[float] = PAPER_TOP_PS,
    temperatures: Sequence[float] = PAPER_TEMPERATURES,
    frequency_penalties: Sequence[float] = PAPER_FREQUENCY_PENALTIES,
) -> list[DecodingConfig]:
    """Restricted grid: vary p at t=1, vary t at p=0.96; argmax ignores p.
    Crossed with each frequency penalty; deduplicated."""
    seen: dict[tuple, DecodingConfig] = {}
    for fp in frequency_penalties:
        for p in top_ps:
            cfg = DecodingConfig(top_p=p, temperature=1.0, frequency_penalty=fp)
            seen[(cfg.top_p, cfg.temperature, cfg.frequency_penalty)] = cfg
        for t in temperatures:
            top_p = None if t == 0 else 0.96
            cfg = DecodingConfig(top_p=top_p, temperature=t, frequency_penalty=fp)
            seen[(cfg.top_p, cfg.temperature, cfg.frequency_penalty)] = cfg
    return list(seen.values())


def sweep(
    lm: LanguageModel,
    prompts: Sequence[str],
    configs: Optional[Sequence[DecodingConfig]] = None,
    seed: int = 0,
    min_tokens: int = 80,
    max_tokens: int = 145,
    max_retries: int = 10,
    on_error: Optional[list] = None,
) -> list[GenerationRecord]:
    """Generate every prompt under every config with derived seeds. Failed
    attempts (NoSentenceBoundaryError) are collected, not fatal."""
    from .metrics import derive_seed

    if configs is None:
        configs = sweep_configs()
    records = []
    for ci, cfg in enumerate(configs):
        for pi, prompt in enumerate(prompts):
            gid = f"{lm.name}-c{ci}-p{pi}"
            try:
                records.append(
                    generate(
                        lm,
                        prompt,
                        cfg,
                        min_tokens=min_tokens,
                        max_tokens=max_tokens,
                        max_retries=max_retries,
                        seed=derive_seed(seed, cfg.key(), str(pi)),
                        generation_id=gid,
                    )
                )
            except NoSentenceBoundaryError as e:
                if on_error is not None:
                    on_error.append((gid, cfg, e))
    return records
