"""Position, color, and size computation for systematically bound and
locally bound arrangements.

Every function here is a pure computation over (state, params) returning a
LayoutResult; ``apply_layout`` commits one to a ViewState. The session loop
is the only caller that commits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from . import colors as colorlib
from .dataset import MISSING, AttributeKind, Dataset, AttributeSchema, CANVAS_REGIONS
from .view_state import (
    ColorBinding,
    LocalBinding,
    Scale,
    SizeBinding,
    SOURCE_CLUSTER,
    SOURCE_GLOBAL,
    SOURCE_JITTER,
    SOURCE_MANUAL,
    SOURCE_ORDERED,
    SOURCE_UNPLACED,
    ViewState,
)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

AXIS_INSET = 0.05  # fraction of canvas kept clear on each side
CELL_PADDING = 2.0
SIZE_R_MIN = 3.0
SIZE_R_MAX = 12.0
SOURCE_PACKED = "packed"

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


class LayoutError(Exception):
    pass


@dataclass
class LayoutResult:
    positions: dict[int, tuple[float, float]] = field(default_factory=dict)
    updated_pins: dict[int, bool] = field(default_factory=dict)
    scale_used: Optional[Scale] = None
    x_sources: dict[int, str] = field(default_factory=dict)
    y_sources: dict[int, str] = field(default_factory=dict)
    set_global_axis: Optional[str] = None  # "x" | "y", paired with scale_used
    new_local: Optional[LocalBinding] = None
    detach_from_locals: set[int] = field(default_factory=set)


@dataclass
class HistogramSpec:
    attribute: str
    kind: AttributeKind
    bins: list[tuple[float, float, int]] = field(default_factory=list)
    categories: dict[str, int] = field(default_factory=dict)
    degenerate: bool = False

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "attribute": self.attribute,
            "kind": self.kind.value,
            "degenerate": self.degenerate,
        }
        if self.kind is AttributeKind.QUANTITATIVE:
            out["bins"] = [[lo, hi, n] for lo, hi, n in self.bins]
        else:
            out["categories"] = dict(sorted(self.categories.items()))
        return out


def cluster_offsets(count: int, spacing: float) -> list[tuple[float, float]]:
    """Deterministic phyllotaxis spiral, recentered so its centroid is the
    origin (a destination therefore lands exactly on the cluster centroid)."""
    raw = []
    for k in range(count):
        r = spacing * math.sqrt(k)
        theta = k * GOLDEN_ANGLE
        raw.append((r * math.cos(theta), r * math.sin(theta)))
    cx = sum(x for x, _ in raw) / count
    cy = sum(y for _, y in raw) / count
    return [(x - cx, y - cy) for x, y in raw]


def _cluster_spacing(count: int, canvas: tuple[float, float], radius: float) -> float:
    base = 2.0 * radius + CELL_PADDING
    if count <= 1:
        return base
    cap = 0.35 * min(canvas) / math.sqrt(count - 1)
    return min(base, cap) if cap > 0 else base


def _clamp(v: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, v))


def initial_cluster(state: ViewState, targets: Optional[Sequence[int]] = None) -> LayoutResult:
    """Circular cluster at the canvas center; a single point sits exactly there."""
    ids = sorted(targets if targets is not None else state.visible_ids())
    if not ids:
        raise LayoutError("nothing to lay out")
    w, h = state.canvas
    return _cluster_at(state, ids, (w / 2.0, h / 2.0), pinned=False)


def _cluster_at(
    state: ViewState, ids: Sequence[int], center: tuple[float, float], pinned: bool
) -> LayoutResult:
    max_r = max(state.points[i].size for i in ids)
    spacing = _cluster_spacing(len(ids), state.canvas, max_r)
    offsets = cluster_offsets(len(ids), spacing)
    w, h = state.canvas
    res = LayoutResult()
    source = SOURCE_MANUAL if pinned else SOURCE_CLUSTER
    for rid, (dx, dy) in zip(ids, offsets):
        x = _clamp(center[0] + dx, 2.0, w - 2.0)
        y = _clamp(center[1] + dy, 2.0, h - 2.0)
        res.positions[rid] = (x, y)
        res.updated_pins[rid] = pinned
        res.x_sources[rid] = source
        res.y_sources[rid] = source
    if pinned:
        res.detach_from_locals = set(ids)
    return res


def region_anchor(term: str, canvas: tuple[float, float]) -> tuple[float, float]:
    term = " ".join(term.lower().split())
    if term not in CANVAS_REGIONS:
        raise LayoutError(f"unknown canvas region {term!r}")
    fx, fy = CANVAS_REGIONS[term]
    return fx * canvas[0], fy * canvas[1]


def move_points(
    state: ViewState,
    targets: Sequence[int],
    destination: Union[str, tuple[float, float]],
) -> LayoutResult:
    """Re-cluster targets around the destination and pin them there.

    Global bindings stay untouched: axes remain drawn, but the moved points
    are detached from them.
    """
    ids = sorted(targets)
    if not ids:
        raise LayoutError("move needs at least one target")
    if isinstance(destination, str):
        destination = region_anchor(destination, state.canvas)
    w, h = state.canvas
    dest = (_clamp(destination[0], 0.0, w), _clamp(destination[1], 0.0, h))
    return _cluster_at(state, ids, dest, pinned=True)


def _axis_pixel_range(state: ViewState, direction: str) -> tuple[float, float]:
    w, h = state.canvas
    if direction == HORIZONTAL:
        return (AXIS_INSET * w, (1.0 - AXIS_INSET) * w)
    # screen y grows downward; low attribute values sit near the bottom
    return ((1.0 - AXIS_INSET) * h, AXIS_INSET * h)


def _linear_ticks(domain: tuple[float, float], scale: Scale, n: int = 5) -> list[tuple[float, float]]:
    lo, hi = domain
    if hi == lo:
        return [(lo, scale.map(lo))]
    values = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    return [(v, scale.map(v)) for v in values]


def _grid_pack(
    ids: Sequence[int],
    band: tuple[float, float],
    start_edge: float,
    grow_sign: float,
    cell: float,
    axis_is_x: bool,
    max_extent: float,
) -> tuple[dict[int, tuple[float, float]], float]:
    """Stack points into a unit column growing away from the start edge
    (bottom-up for a horizontal axis), wrapping into further columns when the
    stack would outgrow ``max_extent``. Returns positions and the extent
    actually used across the band."""
    lo, hi = min(band), max(band)
    rows_fit = max(1, int(max_extent // cell))
    cols_needed = math.ceil(len(ids) / rows_fit)
    cols_fit = max(1, int((hi - lo) // cell))
    n_cols = min(cols_needed, cols_fit)
    rows = math.ceil(len(ids) / n_cols)
    origin = (lo + hi) / 2.0 - n_cols * cell / 2.0
    out = {}
    for j, rid in enumerate(ids):
        col = j // rows
        row = j % rows
        along = origin + (col + 0.5) * cell
        across = start_edge + grow_sign * (row + 0.5) * cell
        out[rid] = (along, across) if axis_is_x else (across, along)
    return out, rows * cell


def assign_axis(
    state: ViewState,
    dataset: Dataset,
    direction: str,
    attribute: str,
    targets: Sequence[int],
) -> LayoutResult:
    """Lay targets out along an attribute.

    Targeting every visible point makes this the global binding for that
    dimension (pinned points and local-binding members hold still). A proper
    subset creates a LocalBinding fitted to the subset's bounding box, and
    clears pins on its members.
    """
    if direction not in (HORIZONTAL, VERTICAL):
        raise LayoutError(f"unknown direction {direction!r}")
    ids = sorted(set(targets))
    if not ids:
        raise LayoutError("axis assignment needs at least one target")
    attr = dataset.attribute(attribute)
    values = {rid: dataset.records[rid][attr.name] for rid in ids}
    present = [rid for rid in ids if values[rid] is not MISSING]
    if not present:
        raise LayoutError(f"all targets are missing {attr.name!r}")

    is_global = set(ids) == state.visible_ids()
    if is_global:
        return _assign_axis_global(state, attr, direction, ids, values, present)
    return _assign_axis_local(state, attr, direction, ids, values, present)


def _assign_axis_global(
    state: ViewState,
    attr: AttributeSchema,
    direction: str,
    ids: list[int],
    values: dict[int, Any],
    present: list[int],
) -> LayoutResult:
    axis_is_x = direction == HORIZONTAL
    pixel_range = _axis_pixel_range(state, direction)
    res = LayoutResult(set_global_axis="x" if axis_is_x else "y")
    local_dim = direction
    movable = [
        rid
        for rid in present
        if not state.points[rid].pinned and state.local_for_dimension(rid, local_dim) is None
    ]

    if attr.is_quantitative:
        vals = [values[rid] for rid in present]
        domain = (min(vals), max(vals))
        scale = Scale(attribute=attr.name, kind="linear", domain=domain, range=pixel_range)
        scale.ticks = _linear_ticks(domain, scale)
        res.scale_used = scale
        fresh = state.bindings.x_axis is None and state.bindings.y_axis is None
        cross_range = _axis_pixel_range(state, VERTICAL if axis_is_x else HORIZONTAL)
        c_lo, c_hi = min(cross_range), max(cross_range)
        span = c_hi - c_lo
        for i, rid in enumerate(movable):
            along = scale.map(values[rid])
            p = state.points[rid]
            if fresh:
                cross = c_lo + (i + 0.5) * span / len(movable)
            else:
                cross = p.y if axis_is_x else p.x
            res.positions[rid] = (along, cross) if axis_is_x else (cross, along)
            if axis_is_x:
                res.x_sources[rid] = SOURCE_GLOBAL
                if fresh:
                    res.y_sources[rid] = SOURCE_JITTER
            else:
                res.y_sources[rid] = SOURCE_GLOBAL
                if fresh:
                    res.x_sources[rid] = SOURCE_JITTER
        _tag_unplaced(res, state, ids, values, axis_is_x)
        return res

    # categorical: equal bands over the schema domain, unit columns per band
    cats = list(attr.categories)
    scale = Scale(attribute=attr.name, kind="band", domain=cats, range=pixel_range)
    scale.ticks = [(c, scale.band_center(c)) for c in cats]
    res.scale_used = scale
    cell = 2.0 * max(state.points[rid].size for rid in ids) + CELL_PADDING
    w, h = state.canvas
    if axis_is_x:
        start_edge, grow_sign = (1.0 - AXIS_INSET) * h, -1.0  # stack upward
        max_extent = (1.0 - 2.0 * AXIS_INSET) * h
    else:
        start_edge, grow_sign = AXIS_INSET * w, 1.0  # stack rightward
        max_extent = (1.0 - 2.0 * AXIS_INSET) * w
    for cat in cats:
        members = [rid for rid in movable if values[rid] == cat]
        if not members:
            continue
        packed, _ = _grid_pack(
            members, scale.band_bounds(cat), start_edge, grow_sign, cell, axis_is_x, max_extent
        )
        res.positions.update(packed)
        for rid in members:
            if axis_is_x:
                res.x_sources[rid] = SOURCE_GLOBAL
                res.y_sources[rid] = SOURCE_PACKED
            else:
                res.y_sources[rid] = SOURCE_GLOBAL
                res.x_sources[rid] = SOURCE_PACKED
    _tag_unplaced(res, state, ids, values, axis_is_x)
    return res


def _tag_unplaced(res, state, ids, values, axis_is_x):
    """Points an axis governs but cannot place (missing value) lose any stale
    source tag on that dimension."""
    from .dataset import MISSING as _MISSING

    local_dim = HORIZONTAL if axis_is_x else VERTICAL
    for rid in ids:
        if values[rid] is not _MISSING:
            continue
        p = state.points[rid]
        if p.pinned or state.local_for_dimension(rid, local_dim) is not None:
            continue
        if axis_is_x:
            res.x_sources[rid] = SOURCE_UNPLACED
        else:
            res.y_sources[rid] = SOURCE_UNPLACED


def _bbox(state: ViewState, ids: Sequence[int]) -> tuple[float, float, float, float]:
    xs = [state.points[rid].x for rid in ids]
    ys = [state.points[rid].y for rid in ids]
    return min(xs), min(ys), max(xs), max(ys)


def _assign_axis_local(
    state: ViewState,
    attr: AttributeSchema,
    direction: str,
    ids: list[int],
    values: dict[int, Any],
    present: list[int],
) -> LayoutResult:
    axis_is_x = direction == HORIZONTAL
    x0, y0, x1, y1 = _bbox(state, ids)
    # a degenerate box cannot host an axis; widen it in place
    min_span = 40.0
    if axis_is_x and x1 - x0 < min_span:
        mid = (x0 + x1) / 2.0
        x0, x1 = mid - min_span / 2.0, mid + min_span / 2.0
    if not axis_is_x and y1 - y0 < min_span:
        mid = (y0 + y1) / 2.0
        y0, y1 = mid - min_span / 2.0, mid + min_span / 2.0

    pixel_range = (x0, x1) if axis_is_x else (y1, y0)
    res = LayoutResult()

    if attr.is_quantitative:
        vals = [values[rid] for rid in present]
        domain = (min(vals), max(vals))
        scale = Scale(attribute=attr.name, kind="linear", domain=domain, range=pixel_range)
        scale.ticks = _linear_ticks(domain, scale)
        for rid in ids:
            p = state.points[rid]
            res.updated_pins[rid] = False
            if values[rid] is MISSING:
                continue
            along = scale.map(values[rid])
            res.positions[rid] = (along, p.y) if axis_is_x else (p.x, along)
    else:
        cats = [c for c in attr.categories if any(values[rid] == c for rid in present)]
        scale = Scale(attribute=attr.name, kind="band", domain=cats, range=pixel_range)
        scale.ticks = [(c, scale.band_center(c)) for c in cats]
        cell = 2.0 * max(state.points[rid].size for rid in ids) + CELL_PADDING
        per_band: dict[str, list[int]] = {c: [] for c in cats}
        for rid in ids:
            res.updated_pins[rid] = False
            if values[rid] is not MISSING:
                per_band[values[rid]].append(rid)
        if axis_is_x:
            start_edge, grow_sign, max_extent = y1, -1.0, y1 - y0
        else:
            start_edge, grow_sign, max_extent = x0, 1.0, x1 - x0
        used_extent = 0.0
        for cat in cats:
            members = sorted(per_band[cat])
            if not members:
                continue
            packed, extent = _grid_pack(
                members, scale.band_bounds(cat), start_edge, grow_sign, cell, axis_is_x, max_extent
            )
            res.positions.update(packed)
            used_extent = max(used_extent, extent)
        # expand the region across the axis if the stacks outgrow it
        if axis_is_x and y1 - used_extent < y0:
            y0 = y1 - used_extent
        if not axis_is_x and x0 + used_extent > x1:
            x1 = x0 + used_extent

    res.scale_used = scale
    binding = LocalBinding(
        binding_id=0,  # assigned at commit
        member_ids=set(ids),
        attribute=attr.name,
        direction=direction,
        scale=scale,
        region=(x0, y0, x1, y1),
    )
    res.new_local = binding
    for rid in ids:
        if axis_is_x:
            res.x_sources[rid] = "local"
        else:
            res.y_sources[rid] = "local"
    return res


def order_by(
    state: ViewState,
    dataset: Dataset,
    targets: Sequence[int],
    attribute: str,
) -> LayoutResult:
    """Sort targets ascending by the attribute (missing last, row-id ties) and
    lay them on a serpentine grid over their previous bounding box. Pins clear:
    the positions are attribute-determined again."""
    ids = sorted(set(targets))
    if not ids:
        raise LayoutError("ordering needs at least one target")
    attr = dataset.attribute(attribute)

    def sort_key(rid: int):
        v = dataset.records[rid][attr.name]
        if v is MISSING:
            return (1, 0 if attr.is_quantitative else "", rid)
        return (0, v, rid)

    ordered = sorted(ids, key=sort_key)
    cell = 2.0 * max(state.points[rid].size for rid in ids) + CELL_PADDING
    x0, y0, x1, y1 = _bbox(state, ids)
    # half-cell margin makes re-ordering an already-ordered grid a fixed point
    x0, y0, x1, y1 = x0 - cell / 2.0, y0 - cell / 2.0, x1 + cell / 2.0, y1 + cell / 2.0

    w, h = state.canvas
    cols = max(1, int((x1 - x0) // cell))
    cols = min(cols, len(ordered))
    rows = math.ceil(len(ordered) / cols)
    if rows * cell > (y1 - y0):
        y1 = y0 + rows * cell
    # keep the grid on the canvas
    x0 = _clamp(x0, 0.0, max(0.0, w - cols * cell))
    y0 = _clamp(y0, 0.0, max(0.0, h - rows * cell))

    res = LayoutResult()
    for k, rid in enumerate(ordered):
        row = k // cols
        col_in = k % cols
        col = col_in if row % 2 == 0 else cols - 1 - col_in
        x = x0 + (col + 0.5) * cell
        y = y0 + (row + 0.5) * cell
        res.positions[rid] = (x, y)
        res.updated_pins[rid] = False
        res.x_sources[rid] = SOURCE_ORDERED
        res.y_sources[rid] = SOURCE_ORDERED
    res.detach_from_locals = set(ids)
    return res


def serpentine_order(result: LayoutResult) -> list[int]:
    """Row ids of a grid layout in reading (serpentine) order."""

    def key(item):
        rid, (x, y) = item
        return (y, x)

    rows: dict[float, list[tuple[int, float]]] = {}
    for rid, (x, y) in result.positions.items():
        rows.setdefault(round(y, 6), []).append((rid, x))
    out = []
    for i, y in enumerate(sorted(rows)):
        row = sorted(rows[y], key=lambda t: t[1], reverse=(i % 2 == 1))
        out.extend(rid for rid, _ in row)
    return out


def apply_color_by(
    state: ViewState,
    dataset: Dataset,
    attribute: str,
    targets: Optional[Sequence[int]] = None,
) -> tuple[Optional[ColorBinding], dict[int, str], list[tuple[str, str]]]:
    """Compute per-point colors for an attribute binding.

    Returns (binding-or-None, per-point colors, legend rows). The binding is
    None when targets are a proper subset: subset coloring lands as explicit
    overrides instead of a global mapping. Points with explicit overrides are
    left alone either way.
    """
    attr = dataset.attribute(attribute)
    visible = state.visible_ids()
    is_global = targets is None or set(targets) == visible
    ids = sorted(visible if is_global else set(targets))

    if attr.is_quantitative:
        pool = [dataset.records[rid][attr.name] for rid in ids]
        pool = [v for v in pool if v is not MISSING]
        if not pool:
            raise LayoutError(f"all targets are missing {attr.name!r}")
        binding = ColorBinding(attribute=attr.name, kind="ramp", domain=(min(pool), max(pool)))
        legend = [("low", colorlib.ramp_color(0.0)), ("high", colorlib.ramp_color(1.0))]
    else:
        palette = {cat: colorlib.palette_color(i) for i, cat in enumerate(attr.categories)}
        binding = ColorBinding(attribute=attr.name, kind="palette", palette=palette)
        legend = [(cat, palette[cat]) for cat in attr.categories]

    assigned: dict[int, str] = {}
    apply_ids = sorted(state.points) if is_global else ids
    for rid in apply_ids:
        if is_global and state.points[rid].color_explicit:
            continue
        assigned[rid] = binding.color_for(dataset.records[rid][attr.name])
    return (binding if is_global else None), assigned, legend


def apply_size_by(
    state: ViewState,
    dataset: Dataset,
    attribute: str,
    targets: Optional[Sequence[int]] = None,
) -> tuple[Optional[SizeBinding], dict[int, float]]:
    """Square-root radius scale between SIZE_R_MIN and SIZE_R_MAX."""
    attr = dataset.attribute(attribute)
    if not attr.is_quantitative:
        raise LayoutError("size requires a quantitative attribute")
    visible = state.visible_ids()
    is_global = targets is None or set(targets) == visible
    ids = sorted(visible if is_global else set(targets))
    pool = [dataset.records[rid][attr.name] for rid in ids]
    pool = [v for v in pool if v is not MISSING]
    if not pool:
        raise LayoutError(f"all targets are missing {attr.name!r}")
    binding = SizeBinding(
        attribute=attr.name, domain=(min(pool), max(pool)), r_min=SIZE_R_MIN, r_max=SIZE_R_MAX
    )
    sized: dict[int, float] = {}
    apply_ids = sorted(state.points) if is_global else ids
    for rid in apply_ids:
        if is_global and state.points[rid].size_explicit:
            continue
        sized[rid] = binding.radius_for(dataset.records[rid][attr.name])
    return (binding if is_global else None), sized


def summarize(dataset: Dataset, targets: Sequence[int]) -> list[HistogramSpec]:
    """Per attribute: 10-bin equal-width histogram (quantitative) or a
    value-count table (categorical), over the targets only."""
    ids = sorted(set(targets))
    if not ids:
        raise LayoutError("summarize needs at least one target")
    out: list[HistogramSpec] = []
    for attr in dataset.schema:
        values = [dataset.records[rid][attr.name] for rid in ids]
        values = [v for v in values if v is not MISSING]
        if attr.is_quantitative:
            spec = HistogramSpec(attribute=attr.name, kind=attr.kind)
            if not values:
                spec.degenerate = True
            else:
                lo, hi = min(values), max(values)
                if hi == lo:
                    spec.bins = [(lo, hi, len(values))]
                else:
                    width = (hi - lo) / 10.0
                    counts = [0] * 10
                    for v in values:
                        idx = min(9, int((v - lo) / width))
                        counts[idx] += 1
                    spec.bins = [(lo + i * width, lo + (i + 1) * width, counts[i]) for i in range(10)]
            out.append(spec)
        else:
            table: dict[str, int] = {}
            for v in values:
                table[v] = table.get(v, 0) + 1
            out.append(
                HistogramSpec(
                    attribute=attr.name, kind=attr.kind, categories=table, degenerate=not values
                )
            )
    return out


def apply_layout(state: ViewState, result: LayoutResult) -> None:
    """Commit a LayoutResult: positions, pins, sources, and binding changes."""
    if result.detach_from_locals:
        kept = []
        for binding in state.locals:
            binding.member_ids -= result.detach_from_locals
            if binding.member_ids:
                kept.append(binding)
        state.locals = kept

    if result.new_local is not None:
        binding = result.new_local
        binding.binding_id = state.next_local_id
        state.next_local_id += 1
        kept = []
        for other in state.locals:
            if other.direction == binding.direction:
                other.member_ids -= binding.member_ids
                if not other.member_ids:
                    continue
            kept.append(other)
        state.locals = kept + [binding]
        dim_src = f"local:{binding.binding_id}"
        src_map = result.x_sources if binding.direction == HORIZONTAL else result.y_sources
        for rid in list(src_map):
            src_map[rid] = dim_src

    for rid, (x, y) in result.positions.items():
        p = state.points[rid]
        p.x = x
        p.y = y
    for rid, pin in result.updated_pins.items():
        state.points[rid].pinned = pin
    for rid, src in result.x_sources.items():
        state.points[rid].x_source = src
    for rid, src in result.y_sources.items():
        state.points[rid].y_source = src

    if result.set_global_axis is not None:
        if result.set_global_axis == "x":
            state.bindings.x_axis = result.scale_used
        else:
            state.bindings.y_axis = result.scale_used
