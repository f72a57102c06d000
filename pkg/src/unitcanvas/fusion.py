"""Gesture handling and multimodal fusion.

Gestures produce immediate direct-manipulation effects (selection, moves,
ink) and arm the speech trigger; fusion then combines a parsed utterance
with gesture and system-state semantics — pointed coordinates for "here",
the active selection as targets, an armed swipe as an axis direction —
into an executable command. Fusion is semantic, not temporal: gesture and
utterance may arrive in either order within the pairing window.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from .commands import (
    AllVisible,
    ExecutableCommand,
    OperationKind,
    PROVENANCE_MULTIMODAL,
    PROVENANCE_SPEECH,
    SelectionReference,
    TagReference,
    TargetSpec,
)
from .dataset import Dataset
from .layout import HORIZONTAL, VERTICAL, region_anchor
from .dataset import Lexicon
from .nl.parser import Complete, Interpretation, ParseOutcome, Partial
from .nl.templates import example_command
from .view_state import ViewState, point_in_polygon, resolve_targets

SWIPE_MIN_EXTENT = 80.0
SWIPE_MAX_SKEW_DEG = 20.0
LISTEN_WINDOW_MS = 5_000
FUSE_WINDOW_MS = 10_000

GESTURE_KINDS = (
    "tap",
    "double_tap",
    "long_press",
    "drag",
    "lasso",
    "swipe",
    "point_hold",
    "mic_tap",
    "drag_path",
)


@dataclass
class GestureEvent:
    kind: str
    target: Union[str, int] = "canvas"  # "canvas" | row_id | "menu"
    modality: str = "touch"  # "pen" | "touch"
    t_ms: int = 0
    coords: Optional[tuple[float, float]] = None
    path: Optional[list[tuple[float, float]]] = None
    polygon: Optional[list[tuple[float, float]]] = None
    direction: Optional[str] = None
    extent: Optional[float] = None

    @property
    def on_point(self) -> bool:
        return isinstance(self.target, int)


@dataclass
class TriggerState:
    listening: bool = False
    cause: Optional[str] = None
    since_ms: int = 0
    persistent: bool = False  # explicit mic toggle
    armed_axis: Optional[dict[str, Any]] = None  # {"direction", "t_ms"}
    pointer: Optional[dict[str, Any]] = None  # {"coords", "t_ms"}
    last_gesture: Optional[dict[str, Any]] = None

    def is_listening(self, t_ms: int) -> bool:
        if self.persistent:
            return True
        return self.listening and (t_ms - self.since_ms) <= LISTEN_WINDOW_MS

    def open_window(self, cause: str, t_ms: int) -> None:
        self.listening = True
        self.cause = cause
        self.since_ms = t_ms

    def to_dict(self) -> dict:
        return {
            "listening": self.listening,
            "cause": self.cause,
            "since_ms": self.since_ms,
            "persistent": self.persistent,
            "armed_axis": self.armed_axis,
            "pointer": self.pointer,
            "last_gesture": self.last_gesture,
        }


@dataclass(frozen=True)
class OperationRequirements:
    mandatory: tuple[str, ...] = ()
    fusable: tuple[str, ...] = ()
    targets_default_all: bool = False
    targets_required: bool = False


REQUIREMENTS: dict[OperationKind, OperationRequirements] = {
    OperationKind.ASSIGN_AXIS: OperationRequirements(
        mandatory=("attribute", "direction"), fusable=("direction", "targets"), targets_default_all=True
    ),
    OperationKind.FILTER: OperationRequirements(fusable=("targets",), targets_required=True),
    OperationKind.COLOR_BY: OperationRequirements(
        mandatory=("attribute",), fusable=("targets",), targets_default_all=True
    ),
    OperationKind.SIZE_BY: OperationRequirements(
        mandatory=("attribute",), fusable=("targets",), targets_default_all=True
    ),
    OperationKind.ORDER_BY: OperationRequirements(
        mandatory=("attribute",), fusable=("targets",), targets_default_all=True
    ),
    OperationKind.MOVE: OperationRequirements(
        mandatory=("destination",), fusable=("location", "targets"), targets_required=True
    ),
    OperationKind.COLOR_EXPLICIT: OperationRequirements(
        mandatory=("color",), fusable=("targets",), targets_required=True
    ),
    OperationKind.SIZE_EXPLICIT: OperationRequirements(
        mandatory=("number",), fusable=("targets",), targets_required=True
    ),
    OperationKind.HIGHLIGHT: OperationRequirements(fusable=("targets",), targets_required=True),
    OperationKind.LABEL: OperationRequirements(fusable=("targets",), targets_required=True),
    OperationKind.SUMMARIZE: OperationRequirements(fusable=("targets",), targets_default_all=True),
    OperationKind.TAG: OperationRequirements(
        mandatory=("tag",), fusable=("targets",), targets_required=True
    ),
    OperationKind.UNDO: OperationRequirements(),
    OperationKind.CLEAR: OperationRequirements(mandatory=("subject",)),
}


@dataclass
class MenuRequest:
    scope: str  # "global" | "local"
    anchor: tuple[float, float]
    entries: list[str]


@dataclass
class GestureOutcome:
    """Immediate effects of one gesture; the session commits them."""

    clear_selection: bool = False
    selection: Optional[list[int]] = None
    add_to_selection: Optional[int] = None
    command: Optional[ExecutableCommand] = None
    menu: Optional[MenuRequest] = None
    tooltip: Optional[dict] = None
    ink: Optional[list[tuple[float, float]]] = None
    diagnostics: list[str] = field(default_factory=list)


GLOBAL_MENU = [
    "assign x axis",
    "assign y axis",
    "color by attribute",
    "size by attribute",
    "clear colors",
    "clear labels",
    "restore filtered points",
    "toggle brush",
    "summarize",
]
LOCAL_MENU = [
    "remove",
    "keep only",
    "color",
    "size",
    "order by attribute",
    "add labels",
    "tag",
    "summarize",
]


def classify_modality_equivalence(event: GestureEvent, brush_active: bool = False) -> GestureEvent:
    """Pen and touch map to the same normalized gestures, except a pen drag
    on the canvas while the brush tool is active, which inks."""
    if (
        event.kind == "drag_path"
        and event.modality == "pen"
        and brush_active
        and not event.on_point
    ):
        return GestureEvent(
            kind="ink",
            target="canvas",
            modality="pen",
            t_ms=event.t_ms,
            path=event.path,
        )
    return event


def classify_path(path: Sequence[tuple[float, float]]) -> tuple[str, dict]:
    """Classify a canvas drag path into a swipe or a lasso.

    A swipe travels at least SWIPE_MIN_EXTENT net pixels within
    SWIPE_MAX_SKEW_DEG of an axis; anything else closes into a lasso.
    """
    if len(path) < 2:
        return "lasso", {"polygon": list(path)}
    (x0, y0), (x1, y1) = path[0], path[-1]
    dx, dy = x1 - x0, y1 - y0
    extent = math.hypot(dx, dy)
    if extent >= SWIPE_MIN_EXTENT:
        angle = math.degrees(math.atan2(abs(dy), abs(dx)))
        if angle <= SWIPE_MAX_SKEW_DEG:
            return "swipe", {"direction": HORIZONTAL, "extent": extent}
        if angle >= 90.0 - SWIPE_MAX_SKEW_DEG:
            return "swipe", {"direction": VERTICAL, "extent": extent}
    return "lasso", {"polygon": list(path)}


def on_gesture(
    event: GestureEvent,
    state: ViewState,
    trigger: TriggerState,
    brush_active: bool = False,
) -> GestureOutcome:
    """Immediate direct-manipulation effects plus trigger-state updates."""
    out = GestureOutcome()
    event = classify_modality_equivalence(event, brush_active)

    if event.kind == "drag_path":
        if event.on_point:
            event = GestureEvent(
                kind="drag",
                target=event.target,
                modality=event.modality,
                t_ms=event.t_ms,
                path=event.path,
            )
        else:
            kind, extra = classify_path(event.path or [])
            event = GestureEvent(
                kind=kind,
                target="canvas",
                modality=event.modality,
                t_ms=event.t_ms,
                path=event.path,
                polygon=extra.get("polygon"),
                direction=extra.get("direction"),
                extent=extra.get("extent"),
            )

    if event.kind == "ink":
        out.ink = list(event.path or [])
        trigger.last_gesture = {"kind": "ink", "t_ms": event.t_ms}
        return out

    if event.kind == "tap":
        if event.on_point:
            out.tooltip = {"row_id": event.target}
        else:
            out.clear_selection = True
        return out

    if event.kind == "double_tap":
        trigger.open_window("double_tap", event.t_ms)
        trigger.last_gesture = {"kind": "double_tap", "t_ms": event.t_ms}
        return out

    if event.kind == "mic_tap":
        trigger.persistent = not trigger.persistent
        if trigger.persistent:
            trigger.open_window("mic_tap", event.t_ms)
        else:
            trigger.listening = False
            trigger.cause = None
        return out

    if event.kind in ("long_press", "point_hold"):
        coords = event.coords
        if event.on_point and coords is None:
            p = state.points.get(event.target)
            coords = (p.x, p.y) if p else None
        trigger.open_window("long_press", event.t_ms)
        if coords is not None:
            trigger.pointer = {"coords": [coords[0], coords[1]], "t_ms": event.t_ms}
        trigger.last_gesture = {"kind": event.kind, "t_ms": event.t_ms}
        if event.kind == "long_press":
            if event.on_point:
                out.add_to_selection = event.target
                out.menu = MenuRequest(
                    scope="local", anchor=coords or (0.0, 0.0), entries=list(LOCAL_MENU)
                )
            else:
                out.menu = MenuRequest(
                    scope="global", anchor=coords or (0.0, 0.0), entries=list(GLOBAL_MENU)
                )
        return out

    if event.kind == "lasso":
        polygon = event.polygon or event.path or []
        hit = sorted(
            rid
            for rid, p in state.points.items()
            if not p.filtered_out and len(polygon) >= 3 and point_in_polygon(p.x, p.y, polygon)
        )
        out.selection = hit
        trigger.open_window("lasso", event.t_ms)
        trigger.last_gesture = {"kind": "lasso", "t_ms": event.t_ms, "count": len(hit)}
        return out

    if event.kind == "swipe":
        trigger.armed_axis = {"direction": event.direction or HORIZONTAL, "t_ms": event.t_ms}
        trigger.open_window("swipe", event.t_ms)
        trigger.last_gesture = {
            "kind": "swipe",
            "direction": event.direction or HORIZONTAL,
            "t_ms": event.t_ms,
        }
        return out

    if event.kind == "drag":
        if not event.on_point or not event.path:
            out.diagnostics.append("drag without a point target ignored")
            return out
        rid = event.target
        targets = tuple(state.selection) if rid in state.selection else (rid,)
        dest = event.path[-1]
        out.command = ExecutableCommand(
            operation=OperationKind.MOVE,
            parameters={"destination": [dest[0], dest[1]]},
            target_ids=targets,
            provenance="dm_only",
            source_text="(drag)",
        )
        trigger.pointer = {"coords": [dest[0], dest[1]], "t_ms": event.t_ms}
        trigger.last_gesture = {"kind": "drag", "t_ms": event.t_ms}
        return out

    out.diagnostics.append(f"unknown gesture kind {event.kind!r} ignored")
    return out


def claim_armed_axis(outcome: ParseOutcome, trigger: TriggerState, t_ms: int) -> ParseOutcome:
    """An armed swipe pairs with a bare attribute utterance (or one missing
    its direction) to form an axis assignment. The gesture belongs to the
    current command, so this runs before context resolution."""
    if not isinstance(outcome, (Complete, Partial)):
        return outcome
    armed = trigger.armed_axis
    if armed is None or (t_ms - armed["t_ms"]) > FUSE_WINDOW_MS:
        return outcome
    interp = outcome.interpretation
    if "attribute" not in interp.parameters:
        return outcome
    if interp.operation is None:
        interp.operation = OperationKind.ASSIGN_AXIS
    if interp.operation is OperationKind.ASSIGN_AXIS and "direction" not in interp.parameters:
        interp.parameters["direction"] = armed["direction"]
        interp.parameters["_gesture_fused"] = True
        trigger.armed_axis = None
        return Complete(interp)
    return outcome


def adopt_selection(outcome: ParseOutcome, state: ViewState) -> ParseOutcome:
    """A live selection is part of the current multimodal command: it becomes
    the target when the utterance names none."""
    if not isinstance(outcome, (Complete, Partial)):
        return outcome
    interp = outcome.interpretation
    if interp.target_spec is None and state.selection:
        interp.target_spec = SelectionReference()
        interp.parameters["_selection_fused"] = True
    return outcome


def fuse(
    outcome: ParseOutcome,
    trigger: TriggerState,
    state: ViewState,
    dataset: Dataset,
    t_ms: int = 0,
    source_text: str = "",
    lexicon: Optional[Lexicon] = None,
    rng: Optional["random.Random"] = None,
) -> Union[ExecutableCommand, Partial, ParseOutcome]:
    """Fill fusable slots from gesture and system state and resolve targets.

    Returns an ExecutableCommand, or a Partial when a mandatory slot is
    still missing (e.g. a deictic "here" with no pointed location).
    """
    if not isinstance(outcome, Complete):
        return outcome
    interp = outcome.interpretation
    op = interp.operation
    assert op is not None
    req = REQUIREMENTS[op]

    def example(for_op: OperationKind) -> str:
        if lexicon is None:
            return "Undo"
        return example_command(for_op, lexicon, rng or random.Random(0))
    params = dict(interp.parameters)
    gesture_fused = params.pop("_gesture_fused", False)
    selection_fused = params.pop("_selection_fused", False)

    # deictic location <- pointed coordinates
    if params.pop("deictic_location", False):
        pointer = trigger.pointer
        if pointer is None or (t_ms - pointer["t_ms"]) > FUSE_WINDOW_MS:
            return Partial(
                operation_guess=op,
                explanation='Heard "here" but no pointed location to go with it.',
                example_command=example(OperationKind.MOVE),
                interpretation=interp,
            )
        params["destination"] = list(pointer["coords"])
        gesture_fused = True

    if op in (OperationKind.MOVE,) and "destination" not in params:
        if "region" in params:
            params["destination"] = params["region"]
        else:
            return Partial(
                operation_guess=op,
                explanation="Caught the move operation but not where to move the points.",
                example_command=example(OperationKind.MOVE),
                interpretation=interp,
            )

    missing = [s for s in req.mandatory if s not in params]
    if missing:
        return Partial(
            operation_guess=op,
            explanation=f"Missing the {missing[0]} for {op.value.replace('_', ' ')}.",
            example_command=example(op),
            interpretation=interp,
        )

    warnings: list[str] = []
    spec = interp.target_spec
    target_ids: tuple[int, ...] = ()
    if op in (OperationKind.UNDO, OperationKind.CLEAR):
        spec = None
    else:
        if spec is None:
            if req.targets_default_all:
                spec = AllVisible()
            elif interp.leftover_tokens and op is not OperationKind.TAG:
                # leftover words may name a tag ("order the favorites ...")
                tag_guess = next(
                    (t for t in interp.leftover_tokens if t in state.known_tags()), None
                )
                if tag_guess is not None:
                    spec = TagReference(tag_guess)
        if spec is None and req.targets_required:
            return Partial(
                operation_guess=op,
                explanation=f"Caught the {op.value.replace('_', ' ')} operation but not which points it applies to.",
                example_command=example(op),
                interpretation=interp,
            )
        if spec is not None:
            resolution = resolve_targets(spec, state, dataset)
            target_ids = tuple(sorted(resolution.ids))
            warnings = resolution.warnings

    provenance = PROVENANCE_SPEECH
    if gesture_fused or selection_fused or isinstance(spec, SelectionReference):
        provenance = PROVENANCE_MULTIMODAL

    return ExecutableCommand(
        operation=op,
        parameters=params,
        target_ids=target_ids,
        target_spec=spec,
        provenance=provenance,
        inferred=interp.inferred,
        warnings=warnings,
        source_text=source_text,
    )
