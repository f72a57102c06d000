"""Command phrasing templates, loaded from a versioned JSON resource.

A template is a literal token sequence with typed slots, compiled through
the same normalizer as utterances (so "size by [attribute]" matches
"size by average cost" after stopword removal). The first template, in
declared order, whose literals match and whose slots resolve wins.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

from ..commands import OperationKind
from ..dataset import Lexicon, Referent
from .similarity import ACCEPT_THRESHOLD, CompositeSimilarity, default_similarity
from .tokens import STOPWORDS, is_number_token

MAX_SLOT_TOKENS = 4

SLOT_REFERENTS = {
    "attribute": Referent.ATTRIBUTE,
    "value": Referent.ATTRIBUTE_VALUE,
    "color": Referent.COLOR_NAME,
    "region": Referent.CANVAS_REGION,
}


@dataclass(frozen=True)
class Slot:
    kind: str  # attribute | value | color | region | number


@dataclass
class Template:
    pattern: str
    operation: OperationKind
    elements: list[Any]  # str literals and Slot markers
    parameters: dict[str, Any] = field(default_factory=dict)
    target: Optional[str] = None  # "selection"


@dataclass
class SlotMatch:
    kind: str
    payload: Any
    score: float
    candidates: list[tuple[Any, float]]


def _compile(pattern: str) -> list[Any]:
    elements: list[Any] = []
    for word in pattern.split():
        if word.startswith("[") and word.endswith("]"):
            kind = word[1:-1]
            if kind not in SLOT_REFERENTS and kind != "number":
                raise ValueError(f"unknown slot type {kind!r} in {pattern!r}")
            elements.append(Slot(kind))
        elif word.lower() not in STOPWORDS:
            elements.append(word.lower())
    return elements


def load_templates() -> tuple[list[Template], dict[str, Any]]:
    with resources.files("unitcanvas.resources").joinpath("templates.json").open() as fh:
        data = json.load(fh)
    templates = [
        Template(
            pattern=t["pattern"],
            operation=OperationKind(t["operation"]),
            elements=_compile(t["pattern"]),
            parameters=dict(t.get("parameters", {})),
            target=t.get("target"),
        )
        for t in data["templates"]
    ]
    return templates, data["examples"]


_CACHE: Optional[tuple[list[Template], dict[str, Any]]] = None


def default_templates() -> list[Template]:
    global _CACHE
    if _CACHE is None:
        _CACHE = load_templates()
    return _CACHE[0]


def _example_specs() -> dict[str, Any]:
    global _CACHE
    if _CACHE is None:
        _CACHE = load_templates()
    return _CACHE[1]


def resolve_slot(
    span_tokens: list[str],
    kind: str,
    lexicon: Lexicon,
    similarity: CompositeSimilarity,
) -> Optional[SlotMatch]:
    """Best lexicon referent for a slot span, with the ranked candidate list
    retained for ambiguity detection."""
    if kind == "number":
        if len(span_tokens) == 1 and is_number_token(span_tokens[0]):
            value = float(span_tokens[0])
            return SlotMatch("number", value, 1.0, [(value, 1.0)])
        return None
    query = " ".join(span_tokens)
    referent = SLOT_REFERENTS[kind]
    best: dict[Any, float] = {}
    for entry in lexicon.entries:
        if entry.referent is not referent:
            continue
        s = similarity.score_strict(query, entry.phrase)
        if s >= ACCEPT_THRESHOLD:
            key = entry.payload if not isinstance(entry.payload, list) else tuple(entry.payload)
            if s > best.get(key, 0.0):
                best[key] = s
    if not best:
        return None
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], str(kv[0])))
    payload, score = ranked[0]
    return SlotMatch(kind, payload, score, ranked)


def match_template(
    template: Template,
    tokens: list[str],
    lexicon: Lexicon,
    similarity: CompositeSimilarity,
) -> Optional[dict[str, SlotMatch]]:
    """Match all tokens against the template; None unless fully consumed."""

    def step(ei: int, ti: int, slots: dict[str, SlotMatch]) -> Optional[dict[str, SlotMatch]]:
        if ei == len(template.elements):
            return slots if ti == len(tokens) else None
        element = template.elements[ei]
        if isinstance(element, str):
            if ti < len(tokens) and tokens[ti] == element:
                return step(ei + 1, ti + 1, slots)
            return None
        for span in range(min(MAX_SLOT_TOKENS, len(tokens) - ti), 0, -1):
            match = resolve_slot(tokens[ti : ti + span], element.kind, lexicon, similarity)
            if match is None:
                continue
            out = step(ei + 1, ti + span, {**slots, element.kind: match})
            if out is not None:
                return out
        return None

    return step(0, 0, {})


def example_command(
    operation: OperationKind,
    lexicon: Lexicon,
    rng: random.Random,
    prefer_slots: Optional[dict[str, Any]] = None,
) -> str:
    """Render a runnable example utterance for an operation, choosing any
    unspecified slot value at random from the lexicon."""
    spec = _example_specs().get(operation.value)
    if spec is None:
        return "Undo"
    values: dict[str, str] = {}
    prefer_slots = prefer_slots or {}
    for slot, kind in spec.get("slots", {}).items():
        if slot in prefer_slots:
            values[slot] = str(prefer_slots[slot])
            continue
        if kind == "attribute":
            names = sorted({e.payload for e in lexicon.of_kind(Referent.ATTRIBUTE)})
            values[slot] = rng.choice(names) if names else "value"
        elif kind == "value":
            pairs = sorted(
                {tuple(e.payload) for e in lexicon.of_kind(Referent.ATTRIBUTE_VALUE)},
                key=lambda p: (p[0], p[1]),
            )
            # prefer small-domain attributes so the example reads naturally
            small = [p for p in pairs if sum(1 for q in pairs if q[0] == p[0]) <= 12]
            pool = small or pairs
            values[slot] = rng.choice(pool)[1] if pool else "value"
        elif kind == "color":
            names = sorted(e.payload for e in lexicon.of_kind(Referent.COLOR_NAME))
            values[slot] = rng.choice(names) if names else "red"
    return spec["format"].format(**values)
