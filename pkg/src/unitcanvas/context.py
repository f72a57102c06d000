"""Conversational-centering memory: follow-up and repetition commands fill
their missing operation, parameters, or targets from the previous command.

One context object lives per session. Executing a command refreshes it:
components the command carried explicitly overwrite, absent ones carry
forward, and the last gesture is retained until a new gesture replaces it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .commands import ExplicitSet, OperationKind, TargetSpec, spec_from_dict, spec_to_dict
from .dataset import Lexicon
from .nl.parser import Complete, Interpretation, ParseOutcome, Partial, PARSER_MANDATORY
from .nl.templates import example_command
from .nl.tokens import tokenize_raw

REPETITION_KEYWORDS = ("repeat", "these too", "same")

# operations whose absent targets may be inherited from context; bindings
# like color-by default to all visible points instead
CONTEXT_TARGET_OPS = frozenset(
    {
        OperationKind.ASSIGN_AXIS,
        OperationKind.ORDER_BY,
        OperationKind.MOVE,
        OperationKind.FILTER,
        OperationKind.COLOR_EXPLICIT,
        OperationKind.SIZE_EXPLICIT,
        OperationKind.HIGHLIGHT,
        OperationKind.LABEL,
        OperationKind.TAG,
        OperationKind.SUMMARIZE,
    }
)

# slots that never inherit: they describe the one-shot shape of a command
_NON_INHERITED_PARAMS = ("deictic_location",)


@dataclass
class ContextObject:
    operation: Optional[OperationKind] = None
    parameters: dict[str, Any] = field(default_factory=dict)
    target_spec: Optional[TargetSpec] = None
    target_ids: tuple[int, ...] = ()
    gesture: Optional[dict[str, Any]] = None
    command_index: int = 0

    def to_dict(self) -> dict:
        return {
            "operation": self.operation.value if self.operation else None,
            "parameters": _jsonable(self.parameters),
            "target_spec": spec_to_dict(self.target_spec) if self.target_spec else None,
            "target_ids": sorted(self.target_ids),
            "gesture": self.gesture,
            "command_index": self.command_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContextObject":
        return cls(
            operation=OperationKind(data["operation"]) if data.get("operation") else None,
            parameters=dict(data.get("parameters", {})),
            target_spec=spec_from_dict(data["target_spec"]) if data.get("target_spec") else None,
            target_ids=tuple(data.get("target_ids", ())),
            gesture=data.get("gesture"),
            command_index=data.get("command_index", 0),
        )


def _jsonable(params: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for k, v in params.items():
        if isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def match_repetition(utterance: str) -> Optional[str]:
    """The repetition keyword the utterance consists of, if any."""
    text = " ".join(tokenize_raw(utterance))
    return text if text in REPETITION_KEYWORDS else None


def _slot_satisfied(parameters: dict[str, Any], slot: str) -> bool:
    """A slot counts as present when the command carries it or carries the
    material fusion will turn into it (a region phrase or a deictic "here"
    both become the move destination)."""
    if slot in parameters:
        return True
    if slot == "destination":
        return "region" in parameters or parameters.get("deictic_location", False)
    return False


def resolve_followup(
    outcome: ParseOutcome,
    ctx: Optional[ContextObject],
    selection_active: bool = False,
) -> ParseOutcome:
    """Fill missing operation, mandatory parameters, and targets from the
    context object. Filled slots are recorded so feedback can flag the
    command as inferred. A live selection supplies targets downstream, so
    context never overrides it."""
    if isinstance(outcome, (Complete, Partial)):
        interp = outcome.interpretation
    else:
        return outcome

    if ctx is not None and ctx.operation is not None:
        if interp.operation is None:
            guess = outcome.operation_guess if isinstance(outcome, Partial) else None
            if guess is None:
                interp.operation = ctx.operation
                interp.inferred_slots.append("operation")
            else:
                interp.operation = guess
        if interp.operation is not None:
            from .fusion import REQUIREMENTS  # fusion never imports context

            mandatory = set(PARSER_MANDATORY.get(interp.operation, ()))
            mandatory |= set(REQUIREMENTS[interp.operation].mandatory)
            for slot in sorted(mandatory):
                if _slot_satisfied(interp.parameters, slot):
                    continue
                if slot in ctx.parameters:
                    interp.parameters[slot] = ctx.parameters[slot]
                    interp.inferred_slots.append(slot)
        if (
            interp.target_spec is None
            and not selection_active
            and interp.operation in CONTEXT_TARGET_OPS
            and ctx.target_ids
        ):
            interp.target_spec = ExplicitSet(ctx.target_ids)
            interp.inferred_slots.append("targets")

    if interp.operation is None:
        return outcome
    missing = [s for s in PARSER_MANDATORY.get(interp.operation, ()) if s not in interp.parameters]
    if missing:
        if isinstance(outcome, Partial):
            return outcome
        return Partial(
            operation_guess=interp.operation,
            explanation=f"Missing the {missing[0]} for {interp.operation.value.replace('_', ' ')}.",
            example_command="Undo",
            interpretation=interp,
        )
    if interp.confidence == 0.0:
        interp.confidence = 0.5
    return Complete(interp)


def handle_repetition(
    keyword: str,
    new_selection: tuple[int, ...],
    ctx: Optional[ContextObject],
    lexicon: Optional[Lexicon] = None,
    rng: Optional[random.Random] = None,
) -> ParseOutcome:
    """Re-run the context's command, on the new selection when one exists."""
    if ctx is None or ctx.operation is None:
        example = "Color by Region"
        if lexicon is not None:
            example = example_command(
                OperationKind.COLOR_BY, lexicon, rng or random.Random(0)
            )
        return Partial(
            operation_guess=None,
            explanation="Nothing to repeat yet.",
            example_command=example,
            interpretation=Interpretation(),
        )
    params = {
        k: v for k, v in ctx.parameters.items() if k not in _NON_INHERITED_PARAMS
    }
    interp = Interpretation(
        operation=ctx.operation,
        parameters=params,
        target_spec=ExplicitSet(tuple(new_selection) if new_selection else ctx.target_ids),
        confidence=1.0,
        inferred_slots=["operation"] + (["targets"] if not new_selection else []),
    )
    return Complete(interp)


def refresh(
    ctx: Optional[ContextObject],
    operation: OperationKind,
    parameters: dict[str, Any],
    target_spec: Optional[TargetSpec],
    target_ids: tuple[int, ...],
    gesture: Optional[dict[str, Any]] = None,
) -> ContextObject:
    """New context after a successful command: explicit components overwrite,
    absent ones carry forward, the gesture only rolls when one took part."""
    prior = ctx or ContextObject()
    merged_params = dict(prior.parameters)
    for k, v in parameters.items():
        merged_params[k] = v
    for k in _NON_INHERITED_PARAMS:
        if k not in parameters:
            merged_params.pop(k, None)
    return ContextObject(
        operation=operation,
        parameters=merged_params,
        target_spec=target_spec if target_spec is not None else prior.target_spec,
        target_ids=tuple(target_ids) if target_ids else prior.target_ids,
        gesture=gesture if gesture is not None else prior.gesture,
        command_index=prior.command_index + 1,
    )
