"""Pluggable phrase similarity with a dependency-free default.

The composite score is the best of: exact match, Jaccard over character
trigrams, token-level cosine over term-frequency vectors, and a token
containment score for partial mentions ("debt" naming "Median Debt").
Token comparison is plural- and synonym-aware via a bundled table.
"""
from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources
from typing import Iterable, Protocol

from .tokens import STOPWORDS

ACCEPT_THRESHOLD = 0.75


class SimilarityProvider(Protocol):
    def score(self, query: str, phrase: str) -> float: ...


def char_trigrams(text: str) -> frozenset[str]:
    padded = f"  {text}  "
    return frozenset(padded[i : i + 3] for i in range(len(padded) - 2))


def trigram_jaccard(a: str, b: str) -> float:
    ta, tb = char_trigrams(a), char_trigrams(b)
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def token_cosine(tokens_a: Iterable[str], tokens_b: Iterable[str]) -> float:
    va: dict[str, int] = {}
    vb: dict[str, int] = {}
    for t in tokens_a:
        va[t] = va.get(t, 0) + 1
    for t in tokens_b:
        vb[t] = vb.get(t, 0) + 1
    if not va or not vb:
        return 0.0
    dot = sum(c * vb.get(t, 0) for t, c in va.items())
    na = math.sqrt(sum(c * c for c in va.values()))
    nb = math.sqrt(sum(c * c for c in vb.values()))
    return dot / (na * nb) if na and nb else 0.0


def singularize(token: str) -> str:
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith(("ses", "xes", "ches", "shes")):
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
        return token[:-1]
    return token


def _load_synonym_groups() -> dict[str, int]:
    with resources.files("unitcanvas.resources").joinpath("synonyms.json").open() as fh:
        table = json.load(fh)
    groups: dict[str, int] = {}
    for i, pair in enumerate(table["pairs"]):
        for word in pair:
            groups[word] = i
    return groups


class CompositeSimilarity:
    """Default similarity provider; stateless apart from caches."""

    def __init__(self, synonym_groups: dict[str, int] | None = None):
        self._groups = _load_synonym_groups() if synonym_groups is None else synonym_groups
        self._score = lru_cache(maxsize=65536)(self._score_uncached)

    def tokens_equivalent(self, a: str, b: str) -> bool:
        if a == b:
            return True
        sa, sb = singularize(a), singularize(b)
        if sa == sb:
            return True
        ga, gb = self._groups.get(sa), self._groups.get(sb)
        return ga is not None and ga == gb

    def containment(self, query_tokens: list[str], phrase_tokens: list[str]) -> float:
        """0.75 + coverage bonus when every query token names a distinct
        phrase token; 0 otherwise."""
        content = [t for t in phrase_tokens if t not in STOPWORDS]
        if not query_tokens or not content:
            return 0.0
        used = [False] * len(content)
        for q in query_tokens:
            hit = False
            for i, p in enumerate(content):
                if not used[i] and self.tokens_equivalent(q, p):
                    used[i] = True
                    hit = True
                    break
            if not hit:
                return 0.0
        return 0.75 + 0.25 * (sum(used) / len(content))

    def score(self, query: str, phrase: str) -> float:
        return self._score(query, phrase)

    def _score_uncached(self, query: str, phrase: str) -> float:
        if query == phrase:
            return 1.0
        q_tokens = query.split()
        p_tokens = phrase.split()
        return max(
            trigram_jaccard(query, phrase),
            token_cosine(q_tokens, p_tokens),
            self.containment(q_tokens, p_tokens),
        )

    def score_strict(self, query: str, phrase: str) -> float:
        """Like score() but without the cosine component: every query token
        must take part in the match. Template slots use this so an extra
        content word makes the template fail instead of being swallowed."""
        if query == phrase:
            return 1.0
        return max(
            trigram_jaccard(query, phrase),
            self.containment(query.split(), phrase.split()),
        )


_DEFAULT: CompositeSimilarity | None = None


def default_similarity() -> CompositeSimilarity:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = CompositeSimilarity()
    return _DEFAULT
