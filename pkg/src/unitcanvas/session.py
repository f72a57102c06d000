"""Session orchestration: event -> parse -> context -> fuse -> execute,
plus single-step undo, feedback, command-discovery hints, and deterministic
replay of event scripts.

Every session is a serialized event loop over one dataset. All mutation
happens here; parsing, fusion, and layout stay pure.
"""
from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Union

from . import colors as colorlib
from . import context as ctxmod
from . import fusion as fusemod
from . import layout as layoutmod
from . import view_state as vs
from .commands import (
    AllVisible,
    ExecutableCommand,
    ExplicitSet,
    OperationKind,
    PROVENANCE_DM,
    SelectionReference,
    spec_from_dict,
)
from .dataset import Dataset, Lexicon, build_lexicon
from .nl import parser as nlparser
from .nl.parser import Complete, Interpretation, Partial, Unintelligible

SESSION_SNAPSHOT_VERSION = 1


class ReplayError(Exception):
    pass


@dataclass
class SessionConfig:
    seed: int = 0
    canvas: tuple[float, float] = (1280.0, 800.0)
    suggestions_enabled: bool = True


@dataclass
class FeedbackMessage:
    kind: str  # success | followup_inferred | partial_suggestion | failure | discovery_hint
    text: str
    example_command: Optional[str] = None
    ambiguities: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "text": self.text,
            "example_command": self.example_command,
            "ambiguities": self.ambiguities,
            "warnings": self.warnings,
        }


@dataclass
class UndoEntry:
    snapshot: dict  # full session snapshot taken before the command
    descriptor: str


@dataclass
class EventResult:
    diff: dict
    feedback: list[FeedbackMessage]
    extras: dict = field(default_factory=dict)

    def feedback_text(self) -> str:
        return " | ".join(m.text for m in self.feedback)


# Success feedback templates, kept as data so tests can pin them.
FEEDBACK_TEMPLATES = {
    OperationKind.COLOR_BY: "Colored points by {attribute}.",
    OperationKind.SIZE_BY: "Sized points by {attribute}.",
    OperationKind.ASSIGN_AXIS: "Mapped the {direction} axis to {attribute}{scope}.",
    OperationKind.ORDER_BY: "Ordered {n} points by {attribute}.",
    OperationKind.FILTER: "Removed {n} points to the bin.",
    OperationKind.MOVE: "Moved {n} points.",
    OperationKind.COLOR_EXPLICIT: "Colored {n} points {color}.",
    OperationKind.SIZE_EXPLICIT: "Resized {n} points.",
    OperationKind.HIGHLIGHT: "Highlighted {n} points.",
    OperationKind.LABEL: "Added labels to {n} points.",
    OperationKind.SUMMARIZE: "Summarized {n} points.",
    OperationKind.TAG: "Tagged {n} points as '{tag}'.",
    OperationKind.CLEAR: "Cleared {subject}.",
    OperationKind.UNDO: "Reverted the last command.",
}
UNDO_REMINDER = ' Inferred from your previous command - say "undo" to revert.'
NOT_LISTENING_TEXT = "I was not listening. Tap the microphone, long-press, or lasso first."

# Speech equivalents suggested after direct-manipulation commands.
DISCOVERY_PHRASES = {
    OperationKind.FILTER: 'select points and say "Remove"',
    OperationKind.CLEAR: 'say "Clear all {subject}"',
    OperationKind.COLOR_EXPLICIT: 'select points and say "Color these {color}"',
    OperationKind.ORDER_BY: 'select points and say "Order by {attribute}"',
    OperationKind.LABEL: 'select points and say "Add labels"',
    OperationKind.SUMMARIZE: 'select points and say "Summarize"',
    OperationKind.COLOR_BY: 'say "Color by {attribute}"',
    OperationKind.SIZE_BY: 'say "Size by {attribute}"',
    OperationKind.ASSIGN_AXIS: 'say "Sort {direction}ly by {attribute}"',
}


class Session:
    def __init__(self, dataset: Dataset, config: Optional[SessionConfig] = None):
        self.config = config or SessionConfig()
        self.dataset = dataset
        self.lexicon: Lexicon = build_lexicon(dataset)
        self.rng = random.Random(self.config.seed)
        self.state = vs.ViewState.initial(dataset, self.config.canvas)
        layoutmod.apply_layout(self.state, layoutmod.initial_cluster(self.state))
        self.trigger = fusemod.TriggerState()
        self.ctx: Optional[ctxmod.ContextObject] = None
        self.undo_entry: Optional[UndoEntry] = None
        self.brush_active = False
        self.suggestions_enabled = self.config.suggestions_enabled
        self._fired_hints: set[str] = set()
        self.last_interpretation: Optional[Interpretation] = None
        self.event_log: list[dict] = []
        self._selection_consumed = False

    # ------------------------------------------------------------------ events

    def handle_event(self, event: dict) -> EventResult:
        """Process one wire event; returns the state diff and feedback."""
        if not isinstance(event, dict) or "kind" not in event:
            raise ReplayError("event must be an object with a 'kind'")
        self.event_log.append(event)
        before = vs.snapshot(self.state)
        t_ms = int(event.get("t_ms", 0))
        kind = event["kind"]
        payload = event.get("payload", {})
        feedback: list[FeedbackMessage] = []
        extras: dict = {}

        if kind == "utterance":
            feedback = [self._handle_utterance(payload, t_ms, extras)]
        elif kind == "gesture":
            feedback, extras = self._handle_gesture(payload, event.get("modality", "touch"), t_ms)
        elif kind == "menu":
            feedback = [self._handle_menu(payload)]
        elif kind == "config":
            self._handle_config(payload)
        elif kind == "substitute":
            feedback = [self._handle_substitution(payload, t_ms)]
        else:
            raise ReplayError(f"unknown event kind {kind!r}")

        diff = diff_snapshots(before, vs.snapshot(self.state))
        diff["listening"] = self.trigger.is_listening(t_ms)
        return EventResult(diff=diff, feedback=feedback, extras=extras)

    # ---------------------------------------------------------------- utterance

    def _handle_utterance(self, payload: dict, t_ms: int, extras: dict) -> FeedbackMessage:
        text = payload.get("text", "")
        entry_mode = payload.get("entry_mode", "spoken")
        if entry_mode == "spoken" and not self.trigger.is_listening(t_ms):
            return FeedbackMessage(kind="failure", text=NOT_LISTENING_TEXT)
        if entry_mode == "spoken" and not self.trigger.persistent:
            self.trigger.listening = False  # one utterance per implicit window

        keyword = ctxmod.match_repetition(text)
        if keyword is not None:
            had_selection = bool(self.state.selection)
            message = self._run_outcome(
                ctxmod.handle_repetition(
                    keyword, tuple(self.state.selection), self.ctx, self.lexicon, self.rng
                ),
                t_ms,
                text,
                extras,
            )
            if had_selection and message.kind in ("success", "followup_inferred"):
                vs.clear_selection(self.state)
            return message

        outcomes = nlparser.parse_all(text, self.lexicon, rng=self.rng)
        self._selection_consumed = False
        messages = [self._run_outcome(o, t_ms, text, extras) for o in outcomes]
        if self._selection_consumed:
            # the selection served as this utterance's target; it is spent
            vs.clear_selection(self.state)
        return _merge_feedback(messages)

    def _run_outcome(
        self, outcome: nlparser.ParseOutcome, t_ms: int, text: str, extras: dict
    ) -> FeedbackMessage:
        outcome = fusemod.claim_armed_axis(outcome, self.trigger, t_ms)
        outcome = fusemod.adopt_selection(outcome, self.state)
        outcome = ctxmod.resolve_followup(
            outcome, self.ctx, selection_active=bool(self.state.selection)
        )
        if isinstance(outcome, (Complete, Partial)):
            self.last_interpretation = outcome.interpretation
        fused = fusemod.fuse(
            outcome,
            self.trigger,
            self.state,
            self.dataset,
            t_ms=t_ms,
            source_text=text,
            lexicon=self.lexicon,
            rng=self.rng,
        )
        if isinstance(fused, ExecutableCommand):
            gesture = self.trigger.last_gesture if fused.provenance == "multimodal" else None
            message = self.execute(fused, extras, gesture=gesture)
            if isinstance(fused.target_spec, SelectionReference) and message.kind in (
                "success",
                "followup_inferred",
            ):
                self._selection_consumed = True
            return message
        if isinstance(fused, Partial):
            return FeedbackMessage(
                kind="partial_suggestion",
                text=f"{fused.explanation} For example: \"{fused.example_command}\"",
                example_command=fused.example_command,
            )
        return FeedbackMessage(kind="failure", text=fused.message)

    # ------------------------------------------------------------------ gesture

    def _handle_gesture(
        self, payload: dict, modality: str, t_ms: int
    ) -> tuple[list[FeedbackMessage], dict]:
        event = fusemod.GestureEvent(
            kind=payload.get("gesture", "tap"),
            target=payload.get("target", "canvas"),
            modality=modality,
            t_ms=t_ms,
            coords=_pair(payload.get("coords")),
            path=_pairs(payload.get("path")),
            polygon=_pairs(payload.get("polygon")),
            direction=payload.get("direction"),
            extent=payload.get("extent"),
        )
        out = fusemod.on_gesture(event, self.state, self.trigger, self.brush_active)
        extras: dict = {}
        feedback: list[FeedbackMessage] = []
        if out.clear_selection:
            vs.clear_selection(self.state)
        if out.selection is not None:
            vs.set_selection(self.state, out.selection)
        if out.add_to_selection is not None:
            vs.set_selection(self.state, self.state.selection + [out.add_to_selection])
        if out.ink is not None:
            self.state.annotations.append(
                vs.Annotation(kind="ink_stroke", points=list(out.ink))
            )
        if out.menu is not None:
            extras["menu"] = {
                "scope": out.menu.scope,
                "anchor": list(out.menu.anchor),
                "entries": out.menu.entries,
            }
        if out.tooltip is not None:
            rid = out.tooltip["row_id"]
            extras["tooltip"] = {"row_id": rid, "record": _record_for(self.dataset, rid)}
        if out.command is not None:
            feedback.append(self.execute(out.command, extras, gesture=self.trigger.last_gesture))
        for line in out.diagnostics:
            feedback.append(FeedbackMessage(kind="failure", text=line))
        return feedback, extras

    # -------------------------------------------------------------------- menu

    def _handle_menu(self, payload: dict) -> FeedbackMessage:
        op_name = payload.get("operation", "")
        if op_name == "toggle_brush":
            self.brush_active = not self.brush_active
            return FeedbackMessage(
                kind="success",
                text="Brush tool on." if self.brush_active else "Brush tool off.",
            )
        try:
            op = OperationKind(op_name)
        except ValueError:
            return FeedbackMessage(kind="failure", text=f"Unknown menu operation '{op_name}'.")
        params = dict(payload.get("parameters", {}))
        target_field = payload.get("targets", "selection")
        if target_field == "selection":
            spec = SelectionReference()
        elif target_field == "all":
            spec = AllVisible()
        elif isinstance(target_field, list):
            spec = ExplicitSet(tuple(target_field))
        elif isinstance(target_field, dict):
            spec = spec_from_dict(target_field)
        else:
            spec = AllVisible()
        if op in (OperationKind.UNDO, OperationKind.CLEAR):
            spec = None
            ids: tuple[int, ...] = ()
        else:
            ids = tuple(sorted(vs.resolve_targets(spec, self.state, self.dataset).ids))
        cmd = ExecutableCommand(
            operation=op,
            parameters=params,
            target_ids=ids,
            target_spec=spec,
            provenance=PROVENANCE_DM,
            source_text="(menu)",
        )
        return self.execute(cmd, {})

    def _handle_config(self, payload: dict) -> None:
        if "suggestions" in payload:
            self.suggestions_enabled = bool(payload["suggestions"])
        if "brush" in payload:
            self.brush_active = bool(payload["brush"])

    def _handle_substitution(self, payload: dict, t_ms: int) -> FeedbackMessage:
        """Ambiguity-widget pick: re-run the last interpretation with the
        chosen candidate in place."""
        if self.last_interpretation is None:
            return FeedbackMessage(kind="failure", text="Nothing to refine.")
        interp = copy.deepcopy(self.last_interpretation)
        slot = payload.get("slot", "")
        value = payload.get("value")
        if slot in ("attribute", "color", "region", "number"):
            interp.parameters[slot] = value
        interp.ambiguities = [a for a in interp.ambiguities if a.slot != slot]
        extras: dict = {}
        fused = fusemod.fuse(
            Complete(interp),
            self.trigger,
            self.state,
            self.dataset,
            t_ms=t_ms,
            source_text=f"(refined {slot})",
            lexicon=self.lexicon,
            rng=self.rng,
        )
        if isinstance(fused, ExecutableCommand):
            return self.execute(fused, extras)
        if isinstance(fused, Partial):
            return FeedbackMessage(kind="partial_suggestion", text=fused.explanation)
        return FeedbackMessage(kind="failure", text="Could not refine the command.")

    # ----------------------------------------------------------------- execute

    def execute(
        self,
        cmd: ExecutableCommand,
        extras: dict,
        gesture: Optional[dict] = None,
    ) -> FeedbackMessage:
        """Apply a command atomically: on error the state is untouched and
        the undo entry is preserved."""
        if cmd.operation is OperationKind.UNDO:
            return self.undo()

        pre = self.snapshot_session()
        work = copy.deepcopy(self.state)
        try:
            info = self._apply(work, cmd, extras)
        except (layoutmod.LayoutError, vs.SnapshotError, ValueError, KeyError) as exc:
            return FeedbackMessage(kind="failure", text=f"Could not {cmd.operation.value.replace('_', ' ')}: {exc}")

        self.state = work
        self.undo_entry = UndoEntry(snapshot=pre, descriptor=cmd.operation.value)
        self.ctx = ctxmod.refresh(
            self.ctx,
            cmd.operation,
            cmd.parameters,
            cmd.target_spec,
            cmd.target_ids,
            gesture=gesture,
        )

        template = FEEDBACK_TEMPLATES[cmd.operation]
        text = template.format(**info)
        kind = "success"
        if cmd.inferred:
            kind = "followup_inferred"
            text += UNDO_REMINDER
        message = FeedbackMessage(kind=kind, text=text, warnings=list(cmd.warnings))
        if self.last_interpretation is not None and self.last_interpretation.ambiguities:
            message.ambiguities = [
                {"slot": a.slot, "candidates": [[str(v), s] for v, s in a.candidates]}
                for a in self.last_interpretation.ambiguities
            ]
        hint = self.suggest_discovery(cmd)
        if hint is not None:
            message.text += f" {hint.text}"
        return message

    def _apply(self, work: vs.ViewState, cmd: ExecutableCommand, extras: dict) -> dict:
        """Mutate the working state; returns feedback template values."""
        op = cmd.operation
        ids = set(cmd.target_ids)
        params = cmd.parameters
        info: dict[str, Any] = {"n": len(ids)}

        if op is OperationKind.ASSIGN_AXIS:
            res = layoutmod.assign_axis(
                work, self.dataset, params["direction"], params["attribute"], ids
            )
            layoutmod.apply_layout(work, res)
            is_global = ids == work.visible_ids()
            info.update(
                attribute=res.scale_used.attribute,
                direction="horizontal" if params["direction"] == "horizontal" else "vertical",
                scope="" if is_global else " for the selected points",
            )
        elif op is OperationKind.ORDER_BY:
            res = layoutmod.order_by(work, self.dataset, ids, params["attribute"])
            layoutmod.apply_layout(work, res)
            info.update(attribute=self.dataset.attribute(params["attribute"]).name)
        elif op is OperationKind.MOVE:
            dest = params["destination"]
            if isinstance(dest, (list, tuple)):
                dest = (float(dest[0]), float(dest[1]))
            res = layoutmod.move_points(work, ids, dest)
            layoutmod.apply_layout(work, res)
        elif op is OperationKind.FILTER:
            mode = params.get("mode", "remove")
            binned = vs.apply_filter(work, ids, mode)
            info["n"] = len(binned)
        elif op is OperationKind.COLOR_BY:
            subset = None if ids == work.visible_ids() else sorted(ids)
            binding, assigned, legend = layoutmod.apply_color_by(
                work, self.dataset, params["attribute"], subset
            )
            if binding is not None:
                work.bindings.color_by = binding
                for rid, color in assigned.items():
                    work.points[rid].color = color
            else:
                for rid, color in assigned.items():
                    work.points[rid].color = color
                    work.points[rid].color_explicit = True
            extras["legend"] = [[label, color] for label, color in legend]
            info.update(attribute=self.dataset.attribute(params["attribute"]).name)
        elif op is OperationKind.SIZE_BY:
            subset = None if ids == work.visible_ids() else sorted(ids)
            binding, sized = layoutmod.apply_size_by(
                work, self.dataset, params["attribute"], subset
            )
            if binding is not None:
                work.bindings.size_by = binding
                for rid, r in sized.items():
                    work.points[rid].size = r
            else:
                for rid, r in sized.items():
                    work.points[rid].size = r
                    work.points[rid].size_explicit = True
            info.update(attribute=self.dataset.attribute(params["attribute"]).name)
        elif op is OperationKind.COLOR_EXPLICIT:
            color = params["color"]
            hex_color = colorlib.named_color_hex(color) if not color.startswith("#") else color
            vs.set_explicit_color(work, ids, hex_color)
            info.update(color=color)
        elif op is OperationKind.SIZE_EXPLICIT:
            vs.set_explicit_size(work, ids, float(params["number"]))
        elif op is OperationKind.HIGHLIGHT:
            vs.set_selection(work, sorted(ids))
        elif op is OperationKind.LABEL:
            vs.set_labels(work, ids, True)
        elif op is OperationKind.SUMMARIZE:
            specs = layoutmod.summarize(self.dataset, ids)
            extras["summary"] = [s.to_dict() for s in specs]
        elif op is OperationKind.TAG:
            vs.tag_points(work, ids, params["tag"])
            info.update(tag=params["tag"])
        elif op is OperationKind.CLEAR:
            subject = params["subject"]
            if subject == "labels":
                vs.clear_labels(work)
            elif subject == "colors":
                vs.clear_explicit_colors(work, self.dataset)
            elif subject == "selection":
                vs.clear_selection(work)
            elif subject == "filters":
                restored = vs.restore_from_bin(work)
                info["n"] = len(restored)
            else:
                raise ValueError(f"unknown clear subject {subject!r}")
            info.update(subject=subject)
        else:
            raise ValueError(f"unhandled operation {op}")
        return info

    # -------------------------------------------------------------------- undo

    def undo(self) -> FeedbackMessage:
        if self.undo_entry is None:
            return FeedbackMessage(kind="failure", text="Nothing to undo.")
        self.restore_session(self.undo_entry.snapshot)
        self.undo_entry = None
        return FeedbackMessage(kind="success", text=FEEDBACK_TEMPLATES[OperationKind.UNDO])

    # --------------------------------------------------------------- discovery

    def suggest_discovery(self, cmd: ExecutableCommand) -> Optional[FeedbackMessage]:
        """Post-hoc speech suggestion for a command done via pen/touch, fired
        at most once per distinct hint per session."""
        if cmd.provenance != PROVENANCE_DM or not self.suggestions_enabled:
            return None
        phrase = DISCOVERY_PHRASES.get(cmd.operation)
        if phrase is None:
            return None
        try:
            rendered = phrase.format(**cmd.parameters)
        except (KeyError, IndexError):
            return None
        if rendered in self._fired_hints:
            return None
        self._fired_hints.add(rendered)
        return FeedbackMessage(
            kind="discovery_hint", text=f"Tip: you could also {rendered}."
        )

    # --------------------------------------------------------------- snapshots

    def snapshot_session(self) -> dict:
        return {
            "version": SESSION_SNAPSHOT_VERSION,
            "seed": self.config.seed,
            "view": vs.snapshot(self.state),
            "context": self.ctx.to_dict() if self.ctx else None,
            "brush_active": self.brush_active,
            "suggestions_enabled": self.suggestions_enabled,
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot_session(), sort_keys=True)

    def restore_session(self, snap: dict) -> None:
        if snap.get("version") != SESSION_SNAPSHOT_VERSION:
            raise vs.SnapshotError(f"unsupported session snapshot version {snap.get('version')!r}")
        self.state = vs.restore(snap["view"])
        self.ctx = ctxmod.ContextObject.from_dict(snap["context"]) if snap.get("context") else None
        self.brush_active = bool(snap.get("brush_active", False))
        self.suggestions_enabled = bool(snap.get("suggestions_enabled", True))


# -------------------------------------------------------------------- helpers


def _pair(value: Any) -> Optional[tuple[float, float]]:
    if value is None:
        return None
    return (float(value[0]), float(value[1]))


def _pairs(value: Any) -> Optional[list[tuple[float, float]]]:
    if value is None:
        return None
    return [(float(x), float(y)) for x, y in value]


def _record_for(dataset: Dataset, rid: int) -> dict:
    rec = dataset.records[rid]
    return {k: (v if v is not None else None) for k, v in rec.items()}


def _merge_feedback(messages: list[FeedbackMessage]) -> FeedbackMessage:
    """Compound utterances produce several command results; the utterance
    still yields exactly one feedback message."""
    if len(messages) == 1:
        return messages[0]
    kind = "success"
    for m in messages:
        if m.kind in ("partial_suggestion", "failure"):
            kind = m.kind
    merged = FeedbackMessage(kind=kind, text=" ".join(m.text for m in messages))
    for m in messages:
        if m.example_command and not merged.example_command:
            merged.example_command = m.example_command
        merged.ambiguities.extend(m.ambiguities)
        merged.warnings.extend(m.warnings)
    return merged


def diff_snapshots(before: dict, after: dict) -> dict:
    """Changed slice of a view snapshot: full records for changed points plus
    any changed top-level sections."""
    before_points = {p["row_id"]: p for p in before["points"]}
    changed_points = [
        p for p in after["points"] if before_points.get(p["row_id"]) != p
    ]
    diff: dict[str, Any] = {"points": changed_points}
    for key in ("global", "locals", "annotations", "selection", "bin", "canvas"):
        if before.get(key) != after.get(key):
            diff[key] = after[key]
    return diff


# --------------------------------------------------------------------- replay


def parse_script(lines: Iterable[str]) -> tuple[dict, list[dict]]:
    """Replay script: a JSON header line ({"seed": ...}) followed by one JSON
    event object per line."""
    header: Optional[dict] = None
    events: list[dict] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        if header is None:
            header = obj
            continue
        if "kind" not in obj:
            raise ReplayError(f"line {lineno}: event missing 'kind'")
        events.append(obj)
    if header is None:
        header = {}
    return header, events


def replay(
    script: Union[str, Iterable[str]],
    dataset: Dataset,
    seed: Optional[int] = None,
) -> tuple[dict, list[str]]:
    """Run an event script against a fresh session; returns the final session
    snapshot and one feedback log line per event."""
    lines = script.splitlines() if isinstance(script, str) else list(script)
    header, events = parse_script(lines)
    config = SessionConfig(
        seed=seed if seed is not None else int(header.get("seed", 0)),
        canvas=tuple(header.get("canvas", (1280.0, 800.0))),
    )
    session = Session(dataset, config)
    log: list[str] = []
    for i, event in enumerate(events):
        try:
            result = session.handle_event(event)
        except ReplayError as exc:
            raise ReplayError(f"event {i + 1}: {exc}") from exc
        log.append(result.feedback_text())
    return session.snapshot_session(), log
