"""Tabular data loading, schema inference, per-attribute stats, and the
utterance lexicon derived from attribute names and values.

A column is quantitative iff every non-missing cell parses as a number
(thousands separators allowed); otherwise it is categorical. Missing cells
are the empty string or the literal ``NA`` and are excluded from stats and
never matched by predicates.
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Union

from .colors import NAMED_COLORS

MISSING = None

_NUMBER_RE = re.compile(r"^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?([eE][+-]?\d+)?$")

# Keywords the interpreter understands, grouped by the operation family
# they name. Families are refined into concrete operations by the parser
# (e.g. "sort" + a direction word becomes an axis assignment).
OPERATION_KEYWORDS: dict[str, str] = {
    "order": "order",
    "sort": "order",
    "arrange": "order",
    "rearrange": "order",
    "align": "axis",
    "color": "color",
    "size": "size",
    "remove": "filter",
    "filter": "filter",
    "move": "move",
    "bring": "move",
    "put": "move",
    "highlight": "highlight",
    "label": "label",
    "labels": "label",
    "summarize": "summarize",
    "tag": "tag",
    "undo": "undo",
    "clear": "clear",
}

# Canvas region phrases and their anchor points as (x, y) canvas fractions.
# Corners sit at 12.5% insets, edges at mid-edge 12.5% insets.
CANVAS_REGIONS: dict[str, tuple[float, float]] = {
    "top": (0.5, 0.125),
    "bottom": (0.5, 0.875),
    "left": (0.125, 0.5),
    "right": (0.875, 0.5),
    "center": (0.5, 0.5),
    "middle": (0.5, 0.5),
    "top left": (0.125, 0.125),
    "top right": (0.875, 0.125),
    "bottom left": (0.125, 0.875),
    "bottom right": (0.875, 0.875),
    "top left corner": (0.125, 0.125),
    "top right corner": (0.875, 0.125),
    "bottom left corner": (0.125, 0.875),
    "bottom right corner": (0.875, 0.875),
}

# "corners" is a recognized region term but has no single anchor; moving
# points there is rejected at execution time.
REGION_TERMS = tuple(CANVAS_REGIONS) + ("corners",)


class LoadError(Exception):
    """Raised when delimited input cannot be turned into a dataset."""


class AttributeKind(str, Enum):
    CATEGORICAL = "categorical"
    QUANTITATIVE = "quantitative"


@dataclass
class AttributeSchema:
    name: str
    kind: AttributeKind
    # categorical: distinct values in first-appearance order;
    # quantitative: (min, max) over non-missing cells, None if all missing.
    categories: list[str] = field(default_factory=list)
    interval: Optional[tuple[float, float]] = None
    aliases: set[str] = field(default_factory=set)

    @property
    def is_quantitative(self) -> bool:
        return self.kind is AttributeKind.QUANTITATIVE


@dataclass
class Dataset:
    schema: list[AttributeSchema]
    records: list[dict[str, Any]]  # attribute name -> float | str | None

    def __post_init__(self) -> None:
        self._by_name = {a.name: a for a in self.schema}
        self._by_folded = {a.name.lower(): a for a in self.schema}

    @property
    def row_count(self) -> int:
        return len(self.records)

    def attribute(self, name: str) -> AttributeSchema:
        """Look up an attribute, case-insensitively."""
        attr = self._by_name.get(name) or self._by_folded.get(name.lower())
        if attr is None:
            raise KeyError(f"unknown attribute {name!r}")
        return attr

    def has_attribute(self, name: str) -> bool:
        return name in self._by_name or name.lower() in self._by_folded

    def value(self, row_id: int, attribute: str) -> Any:
        return self.records[row_id][self.attribute(attribute).name]


@dataclass
class AttributeStats:
    attribute: str
    kind: AttributeKind
    count: int  # non-missing rows
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    mean: Optional[float] = None
    histogram: Optional[dict[str, int]] = None
    degenerate: bool = False  # all values missing

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "attribute": self.attribute,
            "kind": self.kind.value,
            "count": self.count,
            "degenerate": self.degenerate,
        }
        if self.kind is AttributeKind.QUANTITATIVE:
            out.update({"min": self.minimum, "max": self.maximum, "mean": self.mean})
        else:
            out["histogram"] = dict(sorted((self.histogram or {}).items()))
        return out


class Referent(str, Enum):
    ATTRIBUTE = "attribute"
    ATTRIBUTE_VALUE = "attribute_value"
    OPERATION_KEYWORD = "operation_keyword"
    COLOR_NAME = "color_name"
    CANVAS_REGION = "canvas_region"


@dataclass(frozen=True)
class LexiconEntry:
    phrase: str  # lowercase, whitespace-normalized
    referent: Referent
    payload: Any  # attribute name | (attribute, value) | family | color | region term


@dataclass
class Lexicon:
    entries: list[LexiconEntry]
    # attribute name -> kind value; lets the parser bind comparators to
    # quantitative attributes without holding the whole dataset
    attribute_kinds: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.by_phrase: dict[str, list[LexiconEntry]] = {}
        for e in self.entries:
            self.by_phrase.setdefault(e.phrase, []).append(e)

    def of_kind(self, referent: Referent) -> list[LexiconEntry]:
        return [e for e in self.entries if e.referent is referent]


def parse_number(cell: str) -> Optional[float]:
    """Parse a numeric cell, accepting thousands separators ("30,000")."""
    cell = cell.strip()
    if not _NUMBER_RE.match(cell):
        return None
    return float(cell.replace(",", ""))


def is_missing(cell: str) -> bool:
    return cell.strip() == "" or cell.strip() == "NA"


_PHRASE_FOLD = re.compile(r"[-_/,]")
_PHRASE_DROP = re.compile(r"[.'\"()!?]")


def normalize_phrase(text: str) -> str:
    """Lowercase, punctuation-folded, whitespace-normalized — the same folding
    the utterance tokenizer applies, so lexicon phrases match n-grams."""
    text = _PHRASE_DROP.sub("", _PHRASE_FOLD.sub(" ", text.lower()))
    return " ".join(text.split())


def _singular(token: str) -> str:
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith(("ses", "xes", "ches", "shes")):
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
        return token[:-1]
    return token


def phrase_variants(phrase: str) -> set[str]:
    """Auto-generated aliases: plural/singular and underscore/space forms."""
    phrase = normalize_phrase(phrase)
    variants = {phrase}
    spaced = phrase.replace("_", " ")
    variants.add(spaced)
    variants.add(spaced.replace(" ", "_"))
    tokens = spaced.split()
    if tokens:
        last = tokens[-1]
        stem = _singular(last)
        if stem != last:
            variants.add(" ".join(tokens[:-1] + [stem]))
        elif last.endswith(("s", "x", "ch", "sh")):
            variants.add(" ".join(tokens[:-1] + [last + "es"]))
        else:
            variants.add(" ".join(tokens[:-1] + [last + "s"]))
    variants.discard("")
    return variants


def load_csv(
    source: Union[bytes, str, io.IOBase],
    delimiter: str = ",",
    header: bool = True,
) -> Dataset:
    """Load delimited text into a typed dataset.

    Raises LoadError for empty input, ragged rows (with the offending row
    index), or attribute names that collide case-insensitively.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw

    rows = [row for row in csv.reader(io.StringIO(text), delimiter=delimiter)]
    rows = [row for row in rows if row]  # csv yields [] for blank lines
    if not rows:
        raise LoadError("empty input")

    if header:
        names = [c.strip() for c in rows[0]]
        data_rows = rows[1:]
    else:
        names = [f"column_{i + 1}" for i in range(len(rows[0]))]
        data_rows = rows

    if any(not n for n in names):
        raise LoadError("blank attribute name in header")
    folded = [n.lower() for n in names]
    if len(set(folded)) != len(folded):
        dupe = next(n for n in folded if folded.count(n) > 1)
        raise LoadError(f"attribute name {dupe!r} is not unique (case-insensitive)")
    if not data_rows:
        raise LoadError("empty input")

    width = len(names)
    for idx, row in enumerate(data_rows):
        if len(row) != width:
            raise LoadError(f"row {idx} has {len(row)} fields, expected {width}")

    # Column is quantitative iff every non-missing cell parses as a number.
    kinds: list[AttributeKind] = []
    for col in range(width):
        cells = [row[col] for row in data_rows if not is_missing(row[col])]
        if cells and all(parse_number(c) is not None for c in cells):
            kinds.append(AttributeKind.QUANTITATIVE)
        else:
            kinds.append(AttributeKind.CATEGORICAL)

    records: list[dict[str, Any]] = []
    for row in data_rows:
        rec: dict[str, Any] = {}
        for col, name in enumerate(names):
            cell = row[col]
            if is_missing(cell):
                rec[name] = MISSING
            elif kinds[col] is AttributeKind.QUANTITATIVE:
                rec[name] = parse_number(cell)
            else:
                rec[name] = cell.strip()
        records.append(rec)

    schema: list[AttributeSchema] = []
    for col, name in enumerate(names):
        attr = AttributeSchema(name=name, kind=kinds[col])
        values = [rec[name] for rec in records if rec[name] is not MISSING]
        if kinds[col] is AttributeKind.QUANTITATIVE:
            if values:
                attr.interval = (min(values), max(values))
        else:
            seen: list[str] = []
            for v in values:
                if v not in seen:
                    seen.append(v)
            attr.categories = seen
        attr.aliases = phrase_variants(name) - {normalize_phrase(name)}
        schema.append(attr)

    return Dataset(schema=schema, records=records)


def infer_schema(dataset: Dataset) -> list[AttributeSchema]:
    """Re-infer the schema from loaded records; idempotent by construction."""
    schema: list[AttributeSchema] = []
    for attr in dataset.schema:
        values = [rec[attr.name] for rec in dataset.records if rec[attr.name] is not MISSING]
        quantitative = bool(values) and all(isinstance(v, float) for v in values)
        kind = AttributeKind.QUANTITATIVE if quantitative else AttributeKind.CATEGORICAL
        if not values:
            kind = attr.kind  # nothing observed: keep the declared kind
        fresh = AttributeSchema(name=attr.name, kind=kind)
        if kind is AttributeKind.QUANTITATIVE and values:
            fresh.interval = (min(values), max(values))
        elif kind is AttributeKind.CATEGORICAL:
            seen: list[str] = []
            for v in values:
                if v not in seen:
                    seen.append(v)
            fresh.categories = seen
        fresh.aliases = phrase_variants(attr.name) - {normalize_phrase(attr.name)}
        schema.append(fresh)
    return schema


def compute_stats(dataset: Dataset) -> list[AttributeStats]:
    """One AttributeStats per attribute, in schema order."""
    out: list[AttributeStats] = []
    for attr in dataset.schema:
        values = [rec[attr.name] for rec in dataset.records if rec[attr.name] is not MISSING]
        if attr.is_quantitative:
            if values:
                out.append(
                    AttributeStats(
                        attribute=attr.name,
                        kind=attr.kind,
                        count=len(values),
                        minimum=min(values),
                        maximum=max(values),
                        mean=sum(values) / len(values),
                    )
                )
            else:
                out.append(
                    AttributeStats(attribute=attr.name, kind=attr.kind, count=0, degenerate=True)
                )
        else:
            hist: dict[str, int] = {}
            for v in values:
                hist[v] = hist.get(v, 0) + 1
            out.append(
                AttributeStats(
                    attribute=attr.name,
                    kind=attr.kind,
                    count=len(values),
                    histogram=hist,
                    degenerate=not values,
                )
            )
    return out


def stats_to_json(stats: list[AttributeStats]) -> str:
    """Schema/stats document for the attribute summary panel."""
    return json.dumps({"version": 1, "attributes": [s.to_dict() for s in stats]}, sort_keys=True)


def build_lexicon(dataset: Dataset) -> Lexicon:
    """Lexicon over attribute names, categorical values, operation keywords,
    color names, and canvas region terms. Phrases are lowercase and
    whitespace-normalized; the exact-value phrase always wins over aliases.
    """
    entries: list[LexiconEntry] = []
    taken: set[tuple[str, Referent]] = set()

    def add(phrase: str, referent: Referent, payload: Any) -> None:
        phrase = normalize_phrase(phrase)
        if not phrase or (phrase, referent) in taken:
            return
        taken.add((phrase, referent))
        entries.append(LexiconEntry(phrase, referent, payload))

    for attr in dataset.schema:
        add(attr.name, Referent.ATTRIBUTE, attr.name)
        for alias in sorted(attr.aliases):
            add(alias, Referent.ATTRIBUTE, attr.name)
    # exact value phrases before their variants so uniqueness holds
    for attr in dataset.schema:
        for value in attr.categories:
            add(value, Referent.ATTRIBUTE_VALUE, (attr.name, value))
    for attr in dataset.schema:
        for value in attr.categories:
            for variant in sorted(phrase_variants(value)):
                add(variant, Referent.ATTRIBUTE_VALUE, (attr.name, value))
    for keyword, family in OPERATION_KEYWORDS.items():
        add(keyword, Referent.OPERATION_KEYWORD, family)
    for color in NAMED_COLORS:
        add(color, Referent.COLOR_NAME, color)
    for region in REGION_TERMS:
        add(region, Referent.CANVAS_REGION, region)
    kinds = {attr.name: attr.kind.value for attr in dataset.schema}
    return Lexicon(entries=entries, attribute_kinds=kinds)
