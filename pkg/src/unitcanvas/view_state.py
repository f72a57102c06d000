"""Per-point visual state, global/local bindings, selections, tags,
annotations, and the filter bin.

Pins track detachment: a pinned point was positioned by hand (drag or a
spoken move) and stays put when global axes are (re)assigned. Filtered
points live in a virtual bin and are invisible to selection and target
resolution until restored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Sequence

from . import colors as colorlib
from .commands import (
    AllVisible,
    AttributePredicate,
    ColorIs,
    Conjunction,
    ExplicitSet,
    LabeledIs,
    Negation,
    PinnedIs,
    SelectionReference,
    TagReference,
    TargetSpec,
)
from .dataset import MISSING, Dataset

SNAPSHOT_VERSION = 1

DEFAULT_RADIUS = 5.0

# How a point earned its coordinate on one dimension. "manual" coordinates
# are immune to global axis assignment; "local:<id>" ones belong to a local
# binding on that dimension.
SOURCE_CLUSTER = "cluster"
SOURCE_JITTER = "jitter"
SOURCE_GLOBAL = "global"
SOURCE_ORDERED = "ordered"
SOURCE_MANUAL = "manual"
# governed by an axis but holding a missing value, so it cannot be placed
SOURCE_UNPLACED = "unplaced"


class SnapshotError(Exception):
    """Raised when a snapshot document cannot be restored."""


@dataclass
class Scale:
    """Maps attribute values to pixels: linear over an interval, or equal
    bands over an ordered category list."""

    attribute: str
    kind: str  # "linear" | "band"
    domain: Any  # (lo, hi) for linear; list[str] for band
    range: tuple[float, float]
    ticks: list[tuple[Any, float]] = field(default_factory=list)

    def map(self, value: float) -> float:
        lo, hi = self.domain
        r0, r1 = self.range
        if hi == lo:
            return (r0 + r1) / 2.0
        return r0 + (value - lo) / (hi - lo) * (r1 - r0)

    def band_bounds(self, category: str) -> tuple[float, float]:
        cats = self.domain
        idx = cats.index(category)
        r0, r1 = self.range
        width = (r1 - r0) / len(cats)
        return r0 + idx * width, r0 + (idx + 1) * width

    def band_center(self, category: str) -> float:
        lo, hi = self.band_bounds(category)
        return (lo + hi) / 2.0

    def to_dict(self) -> dict:
        domain = list(self.domain) if self.kind == "band" else [self.domain[0], self.domain[1]]
        return {
            "attribute": self.attribute,
            "kind": self.kind,
            "domain": domain,
            "range": [self.range[0], self.range[1]],
            "ticks": [[v, px] for v, px in self.ticks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scale":
        domain = data["domain"] if data["kind"] == "band" else (data["domain"][0], data["domain"][1])
        return cls(
            attribute=data["attribute"],
            kind=data["kind"],
            domain=domain,
            range=(data["range"][0], data["range"][1]),
            ticks=[(v, px) for v, px in data["ticks"]],
        )


@dataclass
class ColorBinding:
    attribute: str
    kind: str  # "palette" | "ramp"
    palette: dict[str, str] = field(default_factory=dict)  # category -> hex
    domain: Optional[tuple[float, float]] = None  # ramp

    def color_for(self, value: Any) -> str:
        if value is MISSING:
            return colorlib.DEFAULT_POINT_COLOR
        if self.kind == "palette":
            return self.palette.get(value, colorlib.DEFAULT_POINT_COLOR)
        lo, hi = self.domain
        t = 0.5 if hi == lo else (value - lo) / (hi - lo)
        return colorlib.ramp_color(t)

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "kind": self.kind,
            "palette": dict(sorted(self.palette.items())),
            "domain": list(self.domain) if self.domain else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ColorBinding":
        domain = tuple(data["domain"]) if data.get("domain") else None
        return cls(data["attribute"], data["kind"], dict(data.get("palette", {})), domain)


@dataclass
class SizeBinding:
    attribute: str
    domain: tuple[float, float]
    r_min: float = 3.0
    r_max: float = 12.0

    def radius_for(self, value: Any) -> float:
        if value is MISSING:
            return DEFAULT_RADIUS
        lo, hi = self.domain
        if hi == lo:
            return (self.r_min + self.r_max) / 2.0
        t = (value - lo) / (hi - lo)
        t = min(1.0, max(0.0, t))
        return self.r_min + (t ** 0.5) * (self.r_max - self.r_min)

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "domain": list(self.domain),
            "r_min": self.r_min,
            "r_max": self.r_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SizeBinding":
        return cls(data["attribute"], tuple(data["domain"]), data["r_min"], data["r_max"])


@dataclass
class PointVisual:
    row_id: int
    label: str = ""
    x: float = 0.0
    y: float = 0.0
    pinned: bool = False
    color: str = colorlib.DEFAULT_POINT_COLOR
    color_explicit: bool = False
    size: float = DEFAULT_RADIUS
    size_explicit: bool = False
    label_visible: bool = False
    selected: bool = False
    tags: set[str] = field(default_factory=set)
    filtered_out: bool = False
    x_source: str = SOURCE_CLUSTER
    y_source: str = SOURCE_CLUSTER

    def to_dict(self) -> dict:
        return {
            "row_id": self.row_id,
            "label": self.label,
            "x": self.x,
            "y": self.y,
            "pinned": self.pinned,
            "color": self.color,
            "color_explicit": self.color_explicit,
            "size": self.size,
            "size_explicit": self.size_explicit,
            "label_visible": self.label_visible,
            "selected": self.selected,
            "tags": sorted(self.tags),
            "filtered_out": self.filtered_out,
            "x_source": self.x_source,
            "y_source": self.y_source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PointVisual":
        return cls(
            row_id=data["row_id"],
            label=data.get("label", ""),
            x=data["x"],
            y=data["y"],
            pinned=data["pinned"],
            color=data["color"],
            color_explicit=data["color_explicit"],
            size=data["size"],
            size_explicit=data["size_explicit"],
            label_visible=data["label_visible"],
            selected=data["selected"],
            tags=set(data["tags"]),
            filtered_out=data["filtered_out"],
            x_source=data["x_source"],
            y_source=data["y_source"],
        )


@dataclass
class GlobalBindings:
    x_axis: Optional[Scale] = None
    y_axis: Optional[Scale] = None
    color_by: Optional[ColorBinding] = None
    size_by: Optional[SizeBinding] = None

    def to_dict(self) -> dict:
        return {
            "x_axis": self.x_axis.to_dict() if self.x_axis else None,
            "y_axis": self.y_axis.to_dict() if self.y_axis else None,
            "color_by": self.color_by.to_dict() if self.color_by else None,
            "size_by": self.size_by.to_dict() if self.size_by else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GlobalBindings":
        return cls(
            x_axis=Scale.from_dict(data["x_axis"]) if data.get("x_axis") else None,
            y_axis=Scale.from_dict(data["y_axis"]) if data.get("y_axis") else None,
            color_by=ColorBinding.from_dict(data["color_by"]) if data.get("color_by") else None,
            size_by=SizeBinding.from_dict(data["size_by"]) if data.get("size_by") else None,
        )


@dataclass
class LocalBinding:
    binding_id: int
    member_ids: set[int]
    attribute: str
    direction: str  # "horizontal" | "vertical"
    scale: Scale
    region: tuple[float, float, float, float]  # x0, y0, x1, y1

    def to_dict(self) -> dict:
        return {
            "id": self.binding_id,
            "members": sorted(self.member_ids),
            "attribute": self.attribute,
            "direction": self.direction,
            "scale": self.scale.to_dict(),
            "region": list(self.region),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalBinding":
        return cls(
            binding_id=data["id"],
            member_ids=set(data["members"]),
            attribute=data["attribute"],
            direction=data["direction"],
            scale=Scale.from_dict(data["scale"]),
            region=tuple(data["region"]),
        )


@dataclass
class Annotation:
    kind: str  # "ink_stroke" | "text_label"
    points: list[tuple[float, float]]  # polyline, or single anchor for labels
    text: str = ""
    stroke_width: float = 2.0
    color: str = "#222222"

    def __post_init__(self) -> None:
        if self.kind == "ink_stroke" and len(self.points) < 2:
            raise ValueError("ink strokes need at least two points")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "points": [[x, y] for x, y in self.points],
            "text": self.text,
            "stroke_width": self.stroke_width,
            "color": self.color,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Annotation":
        return cls(
            kind=data["kind"],
            points=[(x, y) for x, y in data["points"]],
            text=data.get("text", ""),
            stroke_width=data.get("stroke_width", 2.0),
            color=data.get("color", "#222222"),
        )


@dataclass
class ViewState:
    canvas: tuple[float, float]
    points: dict[int, PointVisual]
    bindings: GlobalBindings = field(default_factory=GlobalBindings)
    locals: list[LocalBinding] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)
    selection: list[int] = field(default_factory=list)
    next_local_id: int = 1

    @classmethod
    def initial(cls, dataset: Dataset, canvas: tuple[float, float] = (1280.0, 800.0)) -> "ViewState":
        cx, cy = canvas[0] / 2.0, canvas[1] / 2.0
        label_attr = next(
            (a.name for a in dataset.schema if not a.is_quantitative), None
        )
        points = {}
        for i in range(dataset.row_count):
            value = dataset.records[i].get(label_attr) if label_attr else None
            points[i] = PointVisual(row_id=i, label=str(value or i), x=cx, y=cy)
        return cls(canvas=canvas, points=points)

    def visible_ids(self) -> set[int]:
        return {rid for rid, p in self.points.items() if not p.filtered_out}

    @property
    def bin_ids(self) -> set[int]:
        return {rid for rid, p in self.points.items() if p.filtered_out}

    def local_for_dimension(self, row_id: int, direction: str) -> Optional[LocalBinding]:
        for binding in self.locals:
            if binding.direction == direction and row_id in binding.member_ids:
                return binding
        return None

    def known_tags(self) -> set[str]:
        out: set[str] = set()
        for p in self.points.values():
            out |= p.tags
        return out


@dataclass
class TargetResolution:
    ids: set[int]
    warnings: list[str] = field(default_factory=list)


def point_in_polygon(x: float, y: float, polygon: Sequence[tuple[float, float]]) -> bool:
    """Even-odd rule; the polygon is treated as closed."""
    inside = False
    n = len(polygon)
    j = n - 1
    for i in range(n):
        xi, yi = polygon[i]
        xj, yj = polygon[j]
        if (yi > y) != (yj > y):
            x_cross = xi + (y - yi) / (yj - yi) * (xj - xi)
            if x < x_cross:
                inside = not inside
        j = i
    return inside


def select_by_lasso(state: ViewState, polygon: Sequence[tuple[float, float]]) -> set[int]:
    """Replace the selection with the visible points inside the polygon."""
    if len(polygon) < 3:
        hit: set[int] = set()
    else:
        hit = {
            rid
            for rid, p in state.points.items()
            if not p.filtered_out and point_in_polygon(p.x, p.y, polygon)
        }
    set_selection(state, sorted(hit))
    return hit


def set_selection(state: ViewState, row_ids: Iterable[int]) -> None:
    ordered: list[int] = []
    seen: set[int] = set()
    for rid in row_ids:
        p = state.points.get(rid)
        if p is None or p.filtered_out or rid in seen:
            continue
        seen.add(rid)
        ordered.append(rid)
    for rid, p in state.points.items():
        p.selected = rid in seen
    state.selection = ordered


def clear_selection(state: ViewState) -> None:
    set_selection(state, [])


def _matches_predicate(value: Any, pred: AttributePredicate) -> bool:
    if value is MISSING:
        return False
    c = pred.comparator
    if c == "eq":
        return value == pred.value
    if c == "ne":
        return value != pred.value
    if c == "in":
        return value in pred.value
    if c == "gt":
        return value > pred.value
    if c == "ge":
        return value >= pred.value
    if c == "lt":
        return value < pred.value
    if c == "le":
        return value <= pred.value
    raise AssertionError(pred.comparator)


def resolve_targets(spec: TargetSpec, state: ViewState, dataset: Dataset) -> TargetResolution:
    """Deterministic set of visible row ids matching the target spec.

    Color predicates match a point's current color: an explicit override or
    a binding-assigned color whose nearest named color equals the query.
    """
    visible = state.visible_ids()
    warnings: list[str] = []

    def resolve(s: TargetSpec) -> set[int]:
        if isinstance(s, AllVisible):
            return set(visible)
        if isinstance(s, SelectionReference):
            return {rid for rid in state.selection if rid in visible}
        if isinstance(s, ExplicitSet):
            return {rid for rid in s.row_ids if rid in visible}
        if isinstance(s, TagReference):
            hit = {rid for rid in visible if s.tag in state.points[rid].tags}
            if not hit and s.tag not in state.known_tags():
                warnings.append(f"unknown tag '{s.tag}'")
            return hit
        if isinstance(s, AttributePredicate):
            name = dataset.attribute(s.attribute).name
            return {rid for rid in visible if _matches_predicate(dataset.records[rid][name], s)}
        if isinstance(s, ColorIs):
            return {
                rid
                for rid in visible
                if any(colorlib.matches_named_color(state.points[rid].color, c) for c in s.colors)
            }
        if isinstance(s, PinnedIs):
            return {rid for rid in visible if state.points[rid].pinned == s.pinned}
        if isinstance(s, LabeledIs):
            return {rid for rid in visible if state.points[rid].label_visible == s.labeled}
        if isinstance(s, Negation):
            return visible - resolve(s.inner)
        if isinstance(s, Conjunction):
            out = set(visible)
            for clause in s.clauses:
                out &= resolve(clause)
            return out
        raise TypeError(f"unsupported target spec {s!r}")

    return TargetResolution(ids=resolve(spec), warnings=warnings)


def apply_filter(state: ViewState, targets: set[int], mode: str = "remove") -> set[int]:
    """Move points into (remove) or everything else into (keep_only) the bin.

    Selections are pruned; local bindings lose removed members and vanish
    when emptied. Returns the row ids actually binned.
    """
    visible = state.visible_ids()
    if mode == "remove":
        binned = targets & visible
    elif mode == "keep_only":
        binned = visible - targets
    else:
        raise ValueError(f"unknown filter mode {mode!r}")

    for rid in binned:
        p = state.points[rid]
        p.filtered_out = True
        p.selected = False
    state.selection = [rid for rid in state.selection if rid not in binned]

    kept_locals: list[LocalBinding] = []
    for binding in state.locals:
        binding.member_ids -= binned
        if binding.member_ids:
            kept_locals.append(binding)
    state.locals = kept_locals
    return binned


def restore_from_bin(state: ViewState, row_ids: Optional[set[int]] = None) -> set[int]:
    """Bring binned points back onto the canvas (tags and pins intact)."""
    restored: set[int] = set()
    for rid, p in state.points.items():
        if p.filtered_out and (row_ids is None or rid in row_ids):
            p.filtered_out = False
            restored.add(rid)
    return restored


def tag_points(state: ViewState, targets: set[int], tag: str) -> None:
    if not tag:
        raise ValueError("tag must be nonempty")
    for rid in targets:
        state.points[rid].tags.add(tag)


def resolve_tag(state: ViewState, tag: str) -> TargetResolution:
    return resolve_targets(TagReference(tag), state, _EMPTY_DATASET)


def set_labels(state: ViewState, targets: set[int], visible: bool = True) -> None:
    for rid in targets:
        state.points[rid].label_visible = visible


def clear_labels(state: ViewState) -> None:
    for p in state.points.values():
        p.label_visible = False


def set_explicit_color(state: ViewState, targets: set[int], color_hex: str) -> None:
    for rid in targets:
        p = state.points[rid]
        p.color = color_hex
        p.color_explicit = True


def set_explicit_size(state: ViewState, targets: set[int], radius: float) -> None:
    if radius <= 0:
        raise ValueError("size radius must be positive")
    for rid in targets:
        p = state.points[rid]
        p.size = radius
        p.size_explicit = True


def clear_explicit_colors(state: ViewState, dataset: Dataset) -> None:
    """Drop per-point overrides; rebind to the global mapping or default."""
    binding = state.bindings.color_by
    for rid, p in state.points.items():
        p.color_explicit = False
        if binding is not None:
            p.color = binding.color_for(dataset.records[rid][binding.attribute])
        else:
            p.color = colorlib.DEFAULT_POINT_COLOR


def snapshot(state: ViewState) -> dict:
    """JSON-able structural snapshot with stable ordering."""
    return {
        "version": SNAPSHOT_VERSION,
        "canvas": [state.canvas[0], state.canvas[1]],
        "points": [state.points[rid].to_dict() for rid in sorted(state.points)],
        "global": state.bindings.to_dict(),
        "locals": [b.to_dict() for b in state.locals],
        "annotations": [a.to_dict() for a in state.annotations],
        "selection": list(state.selection),
        "bin": sorted(state.bin_ids),
        "next_local_id": state.next_local_id,
    }


def snapshot_json(state: ViewState) -> str:
    return json.dumps(snapshot(state), sort_keys=True)


def restore(data: Any) -> ViewState:
    """Rebuild a ViewState from a snapshot dict, JSON string, or bytes."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"malformed snapshot: {exc}") from exc
    if not isinstance(data, dict):
        raise SnapshotError("snapshot must be a JSON object")
    if data.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {data.get('version')!r}")
    try:
        points = {p["row_id"]: PointVisual.from_dict(p) for p in data["points"]}
        state = ViewState(
            canvas=(data["canvas"][0], data["canvas"][1]),
            points=points,
            bindings=GlobalBindings.from_dict(data["global"]),
            locals=[LocalBinding.from_dict(b) for b in data["locals"]],
            annotations=[Annotation.from_dict(a) for a in data["annotations"]],
            selection=list(data["selection"]),
            next_local_id=data.get("next_local_id", 1),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise SnapshotError(f"malformed snapshot: {exc!r}") from exc
    return state


def check_invariants(state: ViewState) -> None:
    """Structural health check used by tests after mutations."""
    visible = state.visible_ids()
    assert set(state.selection) <= visible, "selection must be visible"
    assert len(state.selection) == len(set(state.selection))
    for rid, p in state.points.items():
        assert p.row_id == rid
        assert p.size > 0
        assert p.selected == (rid in state.selection)
        manual = p.x_source == SOURCE_MANUAL or p.y_source == SOURCE_MANUAL
        assert p.pinned == manual, f"pin/source mismatch on {rid}"
    for binding in state.locals:
        assert binding.member_ids, "empty local bindings must be deleted"


# resolve_tag never touches records, so a 0-row dataset stands in.
_EMPTY_DATASET = Dataset(schema=[], records=[])
