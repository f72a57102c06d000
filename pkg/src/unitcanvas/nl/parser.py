"""Utterance parsing: templates first, then n-gram similarity matching
against the lexicon, with ambiguity detection and partial-command
suggestions on failure.

The n-gram pass scores every 1..4-gram against lexicon phrases, greedily
assigns the highest-scoring non-overlapping spans to referents, infers the
operation from keyword referents, and assembles attribute/value pairs and
comparator predicates ("more than 30,000") into a target specification.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from ..commands import (
    AllVisible,
    AttributePredicate,
    ColorIs,
    Conjunction,
    LabeledIs,
    Negation,
    OperationKind,
    PinnedIs,
    SelectionReference,
    TargetSpec,
    conjoin,
)
from ..dataset import AttributeKind, Lexicon, Referent
from .similarity import ACCEPT_THRESHOLD, CompositeSimilarity, default_similarity
from .templates import Template, default_templates, example_command, match_template
from .tokens import STOPWORDS, is_number_token, normalize, tokenize_raw

AMBIGUITY_MARGIN = 0.05
MAX_NGRAM = 4

COMPARATOR_WORDS = {
    "more": "gt", "over": "gt", "above": "gt", "greater": "gt", "bigger": "gt",
    "higher": "gt", "exceeding": "gt",
    "less": "lt", "under": "lt", "below": "lt", "fewer": "lt", "lower": "lt",
    "smaller": "lt", "cheaper": "lt",
    "least": "ge", "most": "le",
}
NEGATION_WORDS = frozenset({"not", "except", "without", "excluding"})
DEICTIC_HERE = frozenset({"here", "there"})
SELECTION_WORDS = frozenset({"these", "them", "those", "selected", "selection"})
GENERIC_NOUNS = frozenset(
    {
        "school", "schools", "college", "colleges", "university", "universities",
        "institute", "institutes", "point", "points", "one", "ones", "item",
        "items", "mark", "marks", "dot", "dots", "record", "records", "row", "rows",
        "everything",
    }
)
DIRECTION_WORDS = {
    "vertically": "vertical",
    "vertical": "vertical",
    "horizontally": "horizontal",
    "horizontal": "horizontal",
}
PINNED_WORDS = frozenset({"pinned"})
LABELED_WORDS = frozenset({"labeled", "labelled"})

# operation family -> the concrete operation it names by default
FAMILY_PRIMARY = {
    "order": OperationKind.ORDER_BY,
    "axis": OperationKind.ASSIGN_AXIS,
    "color": OperationKind.COLOR_BY,
    "size": OperationKind.SIZE_BY,
    "filter": OperationKind.FILTER,
    "move": OperationKind.MOVE,
    "highlight": OperationKind.HIGHLIGHT,
    "label": OperationKind.LABEL,
    "summarize": OperationKind.SUMMARIZE,
    "tag": OperationKind.TAG,
    "undo": OperationKind.UNDO,
    "clear": OperationKind.CLEAR,
}

# parameters the parser itself must supply for a Complete outcome; slots a
# gesture or the context can contribute are left absent here and validated
# at fusion time
PARSER_MANDATORY: dict[OperationKind, tuple[str, ...]] = {
    OperationKind.ASSIGN_AXIS: ("attribute",),
    OperationKind.ORDER_BY: ("attribute",),
    OperationKind.COLOR_BY: ("attribute",),
    OperationKind.SIZE_BY: ("attribute",),
    OperationKind.COLOR_EXPLICIT: ("color",),
    OperationKind.SIZE_EXPLICIT: ("number",),
    OperationKind.TAG: ("tag",),
    OperationKind.CLEAR: ("subject",),
}


@dataclass
class MatchSpan:
    start: int
    end: int  # exclusive
    phrase: str
    referent: Referent
    payload: Any
    score: float

    def overlaps(self, other: "MatchSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass
class Ambiguity:
    slot: str
    candidates: list[tuple[Any, float]]  # score order, best first


@dataclass
class Interpretation:
    operation: Optional[OperationKind] = None
    parameters: dict[str, Any] = field(default_factory=dict)
    target_spec: Optional[TargetSpec] = None
    ambiguities: list[Ambiguity] = field(default_factory=list)
    confidence: float = 0.0
    source_span: list[MatchSpan] = field(default_factory=list)
    leftover_tokens: list[str] = field(default_factory=list)
    inferred_slots: list[str] = field(default_factory=list)
    slot_candidates: dict[str, list[tuple[Any, float]]] = field(default_factory=dict)

    @property
    def inferred(self) -> bool:
        return bool(self.inferred_slots)


@dataclass
class Complete:
    interpretation: Interpretation


@dataclass
class Partial:
    operation_guess: Optional[OperationKind]
    explanation: str
    example_command: str
    interpretation: Interpretation


@dataclass
class Unintelligible:
    message: str = "Sorry, that did not match anything I know. Try a different command."


ParseOutcome = Union[Complete, Partial, Unintelligible]


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def detect_ambiguity(interpretation: Interpretation, lexicon: Lexicon) -> Interpretation:
    """Flag slots whose top two candidates score within the margin. The slot
    keeps the top-ranked candidate as its provisional value."""
    interpretation.ambiguities = []
    for slot, candidates in sorted(interpretation.slot_candidates.items()):
        if len(candidates) >= 2 and candidates[0][1] - candidates[1][1] < AMBIGUITY_MARGIN:
            interpretation.ambiguities.append(Ambiguity(slot=slot, candidates=list(candidates)))
    return interpretation


def match_templates(
    tokens: list[str],
    templates: list[Template],
    lexicon: Lexicon,
    similarity: Optional[CompositeSimilarity] = None,
) -> Optional[Interpretation]:
    """First declared template whose literals match and slots resolve wins;
    templates parse with full confidence."""
    similarity = similarity or default_similarity()
    for template in templates:
        slots = match_template(template, tokens, lexicon, similarity)
        if slots is None:
            continue
        interp = Interpretation(operation=template.operation, confidence=1.0)
        interp.parameters.update(template.parameters)
        if template.target == "selection":
            interp.target_spec = SelectionReference()
        for kind, match in slots.items():
            if kind == "attribute":
                interp.parameters["attribute"] = match.payload
            elif kind == "color":
                interp.parameters["color"] = match.payload
            elif kind == "region":
                interp.parameters["region"] = match.payload
            elif kind == "number":
                interp.parameters["number"] = match.payload
            elif kind == "value":
                attr, value = match.payload
                interp.target_spec = AttributePredicate(attr, "eq", value)
            interp.slot_candidates[kind] = [
                (p if kind != "value" else p[1], s) for p, s in match.candidates
            ]
        return interp
    return None


def _collect_candidates(
    tokens: list[str],
    blocked: set[int],
    lexicon: Lexicon,
    similarity: CompositeSimilarity,
) -> list[MatchSpan]:
    spans: list[MatchSpan] = []
    n_tokens = len(tokens)
    for size in range(1, min(MAX_NGRAM, n_tokens) + 1):
        for start in range(0, n_tokens - size + 1):
            end = start + size
            if any(i in blocked for i in range(start, end)):
                continue
            window = tokens[start:end]
            if all(t in GENERIC_NOUNS for t in window):
                continue
            query = " ".join(window)
            for entry in lexicon.entries:
                score = similarity.score(query, entry.phrase)
                if score >= ACCEPT_THRESHOLD:
                    spans.append(
                        MatchSpan(start, end, entry.phrase, entry.referent, entry.payload, score)
                    )
    return spans


_REFERENT_RANK = {
    Referent.OPERATION_KEYWORD: 0,
    Referent.ATTRIBUTE_VALUE: 1,
    Referent.ATTRIBUTE: 2,
    Referent.COLOR_NAME: 3,
    Referent.CANVAS_REGION: 4,
}


def _assign_greedy(candidates: list[MatchSpan]) -> list[MatchSpan]:
    """Non-overlapping assignment, highest score first; longer spans and
    earlier starts break ties deterministically."""
    ranked = sorted(
        candidates,
        key=lambda c: (-c.score, -(c.end - c.start), c.start, _REFERENT_RANK[c.referent], c.phrase),
    )
    chosen: list[MatchSpan] = []
    taken: set[int] = set()
    for cand in ranked:
        positions = set(range(cand.start, cand.end))
        if positions & taken:
            continue
        # at most one referent per span: the ranking already put the best first
        if any(c.start == cand.start and c.end == cand.end for c in chosen):
            continue
        chosen.append(cand)
        taken |= positions
    return sorted(chosen, key=lambda c: c.start)


def _span_candidates(
    assigned: MatchSpan, candidates: list[MatchSpan]
) -> list[tuple[Any, float]]:
    """Ranked distinct payloads of the assigned span's referent type at the
    same token span (for ambiguity widgets)."""
    best: dict[Any, float] = {}
    for c in candidates:
        if c.start == assigned.start and c.end == assigned.end and c.referent is assigned.referent:
            key = tuple(c.payload) if isinstance(c.payload, (list, tuple)) else c.payload
            if c.score > best.get(key, 0.0):
                best[key] = c.score
    return sorted(best.items(), key=lambda kv: (-kv[1], str(kv[0])))


@dataclass
class _Atom:
    position: int
    spec: TargetSpec


def ngram_match(
    tokens: list[str],
    lexicon: Lexicon,
    rng: Optional[random.Random] = None,
    similarity: Optional[CompositeSimilarity] = None,
) -> ParseOutcome:
    """Lexicon-based fallback when no template matches."""
    similarity = similarity or default_similarity()
    rng = rng or random.Random(0)

    special: dict[int, tuple[str, Any]] = {}
    for i, tok in enumerate(tokens):
        if tok in COMPARATOR_WORDS:
            special[i] = ("comparator", COMPARATOR_WORDS[tok])
        elif tok in NEGATION_WORDS:
            special[i] = ("negation", None)
        elif tok in DEICTIC_HERE:
            special[i] = ("here", None)
        elif tok in SELECTION_WORDS:
            special[i] = ("selection", None)
        elif tok in DIRECTION_WORDS:
            special[i] = ("direction", DIRECTION_WORDS[tok])
        elif tok in PINNED_WORDS:
            special[i] = ("pinned", None)
        elif tok in LABELED_WORDS:
            special[i] = ("labeled", None)
        elif is_number_token(tok):
            special[i] = ("number", float(tok))

    candidates = _collect_candidates(tokens, set(special), lexicon, similarity)
    assigned = _assign_greedy(candidates)

    interp = Interpretation(source_span=assigned)
    scores = [a.score for a in assigned]

    # operation family from the first keyword referent
    families = [a for a in assigned if a.referent is Referent.OPERATION_KEYWORD]
    family = families[0].payload if families else None

    attribute_spans = [a for a in assigned if a.referent is Referent.ATTRIBUTE]
    value_spans = [a for a in assigned if a.referent is Referent.ATTRIBUTE_VALUE]
    color_spans = [a for a in assigned if a.referent is Referent.COLOR_NAME]
    region_spans = [a for a in assigned if a.referent is Referent.CANVAS_REGION]
    has_here = any(kind == "here" for kind, _ in special.values())
    has_selection_word = any(kind == "selection" for kind, _ in special.values())
    directions = [val for kind, val in special.values() if kind == "direction"]
    negation_positions = [i for i, (kind, _) in special.items() if kind == "negation"]

    # comparator + number -> comparison on the nearest quantitative attribute
    consumed_attrs: set[int] = set()
    atoms: list[_Atom] = []
    comparator_positions = sorted(i for i, (kind, _) in special.items() if kind == "comparator")
    used_numbers: set[int] = set()
    for cpos in comparator_positions:
        comparator = special[cpos][1]
        number_pos = None
        for offset in (1, 2, -1, -2):
            j = cpos + offset
            if j in special and special[j][0] == "number" and j not in used_numbers:
                number_pos = j
                break
        if number_pos is None:
            continue
        used_numbers.add(number_pos)
        quantitative = [
            a
            for k, a in enumerate(attribute_spans)
            if k not in consumed_attrs
            and lexicon.attribute_kinds.get(a.payload) == AttributeKind.QUANTITATIVE.value
        ]
        if not quantitative:
            continue

        def distance(span: MatchSpan) -> tuple[int, int]:
            if span.end <= cpos:
                return (cpos - span.end + 1, 0)  # preceding wins ties
            return (span.start - cpos, 1)

        nearest = min(quantitative, key=distance)
        consumed_attrs.add(attribute_spans.index(nearest))
        atoms.append(
            _Atom(cpos, AttributePredicate(nearest.payload, comparator, special[number_pos][1]))
        )

    for span in value_spans:
        attr, value = span.payload
        atoms.append(_Atom(span.start, AttributePredicate(attr, "eq", value)))
        interp.slot_candidates.setdefault(
            "value", [(p[1], s) for p, s in _span_candidates(span, candidates)]
        )

    for kind, words in (("pinned", PINNED_WORDS), ("labeled", LABELED_WORDS)):
        for i, tok in enumerate(tokens):
            if tok in words:
                atoms.append(_Atom(i, PinnedIs(True) if kind == "pinned" else LabeledIs(True)))

    # color words: the parameter of an explicit-color command, otherwise a
    # visual predicate over current point colors; with no operation keyword
    # and no deixis, a bare color is a parameter awaiting context ("Pink.")
    color_param: Optional[str] = None
    color_atom_spans = list(color_spans)
    if color_spans and (family == "color" or (family is None and not has_here)):
        param_span = color_spans[-1]
        color_param = param_span.payload
        color_atom_spans = color_spans[:-1]
        interp.slot_candidates["color"] = _span_candidates(param_span, candidates)
    if color_atom_spans:
        for span in color_atom_spans:
            atoms.append(_Atom(span.start, ColorIs((span.payload,))))

    # merge same-attribute equality atoms into membership sets, per polarity
    neg_pos = negation_positions[0] if negation_positions else None

    def merge(group: list[_Atom]) -> list[TargetSpec]:
        grouped: dict[str, list[_Atom]] = {}
        color_atoms: list[_Atom] = []
        rest: list[tuple[int, TargetSpec]] = []
        for atom in sorted(group, key=lambda a: a.position):
            if isinstance(atom.spec, AttributePredicate) and atom.spec.comparator == "eq":
                grouped.setdefault(atom.spec.attribute, []).append(atom)
            elif isinstance(atom.spec, ColorIs):
                color_atoms.append(atom)
            else:
                rest.append((atom.position, atom.spec))
        out: list[tuple[int, TargetSpec]] = list(rest)
        for attr, group_atoms in grouped.items():
            values = [a.spec.value for a in group_atoms]
            spec = (
                AttributePredicate(attr, "eq", values[0])
                if len(values) == 1
                else AttributePredicate(attr, "in", tuple(values))
            )
            out.append((group_atoms[0].position, spec))
        if color_atoms:
            # "brown and gray points": any of the named colors
            all_colors = tuple(c for atom in color_atoms for c in atom.spec.colors)
            out.append((color_atoms[0].position, ColorIs(all_colors)))
        return [spec for _, spec in sorted(out, key=lambda t: t[0])]

    if neg_pos is None:
        clauses = merge(atoms)
    else:
        pre = merge([a for a in atoms if a.position < neg_pos])
        post = merge([a for a in atoms if a.position > neg_pos])
        clauses = pre + ([Negation(conjoin(post))] if post else [])

    if has_selection_word:
        clauses = [SelectionReference()] + clauses
    if clauses:
        interp.target_spec = conjoin(clauses)
    elif any(t in GENERIC_NOUNS for t in tokens):
        interp.target_spec = AllVisible()

    # parameters
    free_attrs = [a for k, a in enumerate(attribute_spans) if k not in consumed_attrs]
    if free_attrs:
        interp.parameters["attribute"] = free_attrs[0].payload
        interp.slot_candidates["attribute"] = _span_candidates(free_attrs[0], candidates)
    if directions:
        interp.parameters["direction"] = directions[0]
    if color_param is not None:
        interp.parameters["color"] = color_param
    if region_spans:
        interp.parameters["region"] = region_spans[0].payload
        interp.slot_candidates["region"] = _span_candidates(region_spans[0], candidates)
    free_numbers = [
        val
        for i, (kind, val) in sorted(special.items())
        if kind == "number" and i not in used_numbers
    ]
    if free_numbers:
        interp.parameters["number"] = free_numbers[0]
    if has_here:
        interp.parameters["deictic_location"] = True

    assigned_positions = {i for a in assigned for i in range(a.start, a.end)}
    interp.leftover_tokens = [
        t
        for i, t in enumerate(tokens)
        if i not in assigned_positions and i not in special and t not in GENERIC_NOUNS
    ]

    # refine the operation from family + slots
    operation: Optional[OperationKind] = None
    if family == "order":
        operation = OperationKind.ASSIGN_AXIS if directions else OperationKind.ORDER_BY
    elif family == "axis":
        operation = OperationKind.ASSIGN_AXIS
    elif family == "color":
        operation = (
            OperationKind.COLOR_EXPLICIT if color_param is not None else OperationKind.COLOR_BY
        )
    elif family == "size":
        if "attribute" in interp.parameters:
            operation = OperationKind.SIZE_BY
        elif "number" in interp.parameters:
            operation = OperationKind.SIZE_EXPLICIT
        else:
            operation = OperationKind.SIZE_BY
    elif family is not None:
        operation = FAMILY_PRIMARY[family]
    elif has_here and (interp.target_spec is not None or interp.parameters.get("region")):
        # "Green here": a bare deictic move
        operation = OperationKind.MOVE

    if family == "tag" and interp.leftover_tokens:
        interp.parameters["tag"] = " ".join(interp.leftover_tokens)

    if operation is None:
        if not assigned and not interp.parameters and interp.target_spec is None:
            return Unintelligible()
        interp.confidence = _mean(scores) if scores else 0.5
        return Partial(
            operation_guess=None,
            explanation=_caught_description(interp) + ", but not which operation to perform.",
            example_command=_example_for(None, interp, lexicon, rng),
            interpretation=interp,
        )

    interp.operation = operation
    interp.confidence = _mean(scores) if scores else 0.6

    missing = [
        slot for slot in PARSER_MANDATORY.get(operation, ()) if slot not in interp.parameters
    ]
    if missing:
        return Partial(
            operation_guess=operation,
            explanation=(
                f"Caught the {operation.value.replace('_', ' ')} operation, "
                f"but not the {missing[0]} to use."
            ),
            example_command=_example_for(operation, interp, lexicon, rng),
            interpretation=interp,
        )

    return Complete(detect_ambiguity(interp, lexicon))


def _caught_description(interp: Interpretation) -> str:
    parts = []
    if "attribute" in interp.parameters:
        parts.append(f"the attribute '{interp.parameters['attribute']}'")
    if "color" in interp.parameters:
        parts.append(f"the color '{interp.parameters['color']}'")
    if interp.target_spec is not None:
        parts.append("a target description")
    if not parts:
        parts.append("part of the command")
    return "Caught " + " and ".join(parts)


def _example_for(
    operation: Optional[OperationKind],
    interp: Interpretation,
    lexicon: Lexicon,
    rng: random.Random,
) -> str:
    prefer: dict[str, Any] = {}
    if "attribute" in interp.parameters:
        prefer["attribute"] = interp.parameters["attribute"]
    if operation is None:
        pool = [OperationKind.ORDER_BY, OperationKind.COLOR_BY, OperationKind.ASSIGN_AXIS]
        if "color" in interp.parameters:
            operation = OperationKind.COLOR_EXPLICIT
            prefer["color"] = interp.parameters["color"]
        else:
            operation = rng.choice(pool)
    return example_command(operation, lexicon, rng, prefer_slots=prefer)


def split_compound(raw_tokens: list[str]) -> list[list[str]]:
    """Split "color by locale and then size by cost" style compounds. A
    connective splits only when an operation keyword follows it."""
    from ..dataset import OPERATION_KEYWORDS

    segments: list[list[str]] = []
    current: list[str] = []
    i = 0
    while i < len(raw_tokens):
        tok = raw_tokens[i]
        if tok in ("and", "then") and current:
            j = i + 1
            if j < len(raw_tokens) and raw_tokens[j] == "then":
                j += 1
            rest = raw_tokens[j:]
            if rest and any(t in OPERATION_KEYWORDS for t in rest):
                segments.append(current)
                current = []
                i = j
                continue
        current.append(tok)
        i += 1
    if current:
        segments.append(current)
    return segments


def parse_all(
    utterance: str,
    lexicon: Lexicon,
    rng: Optional[random.Random] = None,
    templates: Optional[list[Template]] = None,
    similarity: Optional[CompositeSimilarity] = None,
) -> list[ParseOutcome]:
    """Parse an utterance into one outcome per command segment."""
    rng = rng or random.Random(0)
    templates = templates if templates is not None else default_templates()
    similarity = similarity or default_similarity()
    raw = tokenize_raw(utterance)
    if not raw:
        return [Unintelligible()]
    outcomes: list[ParseOutcome] = []
    for segment in split_compound(raw):
        tokens = [t for t in segment if t not in STOPWORDS]
        if not tokens:
            outcomes.append(Unintelligible())
            continue
        templated = match_templates(tokens, templates, lexicon, similarity)
        if templated is not None:
            outcomes.append(Complete(detect_ambiguity(templated, lexicon)))
            continue
        outcomes.append(ngram_match(tokens, lexicon, rng=rng, similarity=similarity))
    return outcomes


def parse(
    utterance: str,
    lexicon: Lexicon,
    rng: Optional[random.Random] = None,
    templates: Optional[list[Template]] = None,
    similarity: Optional[CompositeSimilarity] = None,
) -> ParseOutcome:
    return parse_all(utterance, lexicon, rng=rng, templates=templates, similarity=similarity)[0]
