"""Shared command vocabulary: operation kinds and target specifications.

A command has three components: the operation (what to do), parameters
(slot values such as an attribute or a color), and a target specification
describing which points it acts on. Target specs are resolved against the
live view state by ``view_state.resolve_targets``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union


class OperationKind(str, Enum):
    ASSIGN_AXIS = "assign_axis"
    FILTER = "filter"
    COLOR_BY = "color_by"
    SIZE_BY = "size_by"
    ORDER_BY = "order_by"
    MOVE = "move"
    COLOR_EXPLICIT = "color_explicit"
    SIZE_EXPLICIT = "size_explicit"
    HIGHLIGHT = "highlight"
    LABEL = "label"
    SUMMARIZE = "summarize"
    TAG = "tag"
    UNDO = "undo"
    CLEAR = "clear"


COMPARATORS = ("eq", "ne", "gt", "ge", "lt", "le", "in")


@dataclass(frozen=True)
class AttributePredicate:
    """Rows whose attribute satisfies a comparison, e.g. Control = Private."""

    attribute: str
    comparator: str  # one of COMPARATORS
    value: Any  # scalar, or tuple of values for "in"

    def __post_init__(self) -> None:
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")


@dataclass(frozen=True)
class ColorIs:
    """Points whose current color reads as one of the named colors."""

    colors: tuple[str, ...]


@dataclass(frozen=True)
class PinnedIs:
    pinned: bool = True


@dataclass(frozen=True)
class LabeledIs:
    labeled: bool = True


@dataclass(frozen=True)
class TagReference:
    tag: str


@dataclass(frozen=True)
class SelectionReference:
    """The active selection at resolution time."""


@dataclass(frozen=True)
class AllVisible:
    """Every point not sitting in the filter bin."""


@dataclass(frozen=True)
class ExplicitSet:
    """A frozen set of row ids (menu picks, context carry-over)."""

    row_ids: tuple[int, ...]


@dataclass(frozen=True)
class Negation:
    inner: "TargetSpec"


@dataclass(frozen=True)
class Conjunction:
    clauses: tuple["TargetSpec", ...]


TargetSpec = Union[
    AttributePredicate,
    ColorIs,
    PinnedIs,
    LabeledIs,
    TagReference,
    SelectionReference,
    AllVisible,
    ExplicitSet,
    Negation,
    Conjunction,
]


def conjoin(clauses: list["TargetSpec"]) -> "TargetSpec":
    if len(clauses) == 1:
        return clauses[0]
    return Conjunction(tuple(clauses))


PROVENANCE_SPEECH = "speech_only"
PROVENANCE_DM = "dm_only"
PROVENANCE_MULTIMODAL = "multimodal"


@dataclass
class ExecutableCommand:
    """A fully fused command: every mandatory slot present, targets resolved
    to visible row ids."""

    operation: OperationKind
    parameters: dict[str, Any] = field(default_factory=dict)
    target_ids: tuple[int, ...] = ()
    target_spec: Any = None  # TargetSpec or None
    provenance: str = PROVENANCE_SPEECH
    inferred: bool = False
    warnings: list[str] = field(default_factory=list)
    source_text: str = ""


_SPEC_TYPES = {
    "attribute": AttributePredicate,
    "color_is": ColorIs,
    "pinned_is": PinnedIs,
    "labeled_is": LabeledIs,
    "tag": TagReference,
    "selection": SelectionReference,
    "all_visible": AllVisible,
    "explicit": ExplicitSet,
    "negation": Negation,
    "conjunction": Conjunction,
}
_TYPE_NAMES = {cls: name for name, cls in _SPEC_TYPES.items()}


def spec_to_dict(spec: TargetSpec) -> dict:
    """JSON-able form, used in snapshots and on the wire."""
    name = _TYPE_NAMES[type(spec)]
    if isinstance(spec, AttributePredicate):
        value = list(spec.value) if isinstance(spec.value, tuple) else spec.value
        return {"type": name, "attribute": spec.attribute, "comparator": spec.comparator, "value": value}
    if isinstance(spec, ColorIs):
        return {"type": name, "colors": list(spec.colors)}
    if isinstance(spec, PinnedIs):
        return {"type": name, "pinned": spec.pinned}
    if isinstance(spec, LabeledIs):
        return {"type": name, "labeled": spec.labeled}
    if isinstance(spec, TagReference):
        return {"type": name, "tag": spec.tag}
    if isinstance(spec, ExplicitSet):
        return {"type": name, "row_ids": sorted(spec.row_ids)}
    if isinstance(spec, Negation):
        return {"type": name, "inner": spec_to_dict(spec.inner)}
    if isinstance(spec, Conjunction):
        return {"type": name, "clauses": [spec_to_dict(c) for c in spec.clauses]}
    return {"type": name}


def spec_from_dict(data: dict) -> TargetSpec:
    kind = data["type"]
    if kind not in _SPEC_TYPES:
        raise ValueError(f"unknown target spec type {kind!r}")
    if kind == "attribute":
        value = data["value"]
        if isinstance(value, list):
            value = tuple(value)
        return AttributePredicate(data["attribute"], data["comparator"], value)
    if kind == "color_is":
        return ColorIs(tuple(data["colors"]))
    if kind == "pinned_is":
        return PinnedIs(bool(data["pinned"]))
    if kind == "labeled_is":
        return LabeledIs(bool(data["labeled"]))
    if kind == "tag":
        return TagReference(data["tag"])
    if kind == "explicit":
        return ExplicitSet(tuple(data["row_ids"]))
    if kind == "negation":
        return Negation(spec_from_dict(data["inner"]))
    if kind == "conjunction":
        return Conjunction(tuple(spec_from_dict(c) for c in data["clauses"]))
    return _SPEC_TYPES[kind]()
