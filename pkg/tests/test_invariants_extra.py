"""Cross-cutting contract checks that do not belong to a single module."""
from __future__ import annotations

import json

import pytest

from unitcanvas import colors as colorlib
from unitcanvas.fusion import GestureEvent, classify_modality_equivalence
from unitcanvas.session import Session, SessionConfig
from unitcanvas.view_state import Annotation
from conftest import event, load_fixture


def typed(session, text, t_ms=0):
    return session.handle_event(event("utterance", {"text": text, "entry_mode": "typed"}, t_ms))


@pytest.mark.parametrize("kind", ["tap", "double_tap", "long_press", "lasso", "swipe", "mic_tap"])
def test_modality_equivalence_for_all_gesture_kinds(kind):
    base = dict(kind=kind, target="canvas", t_ms=5, coords=(10.0, 20.0),
                path=[(0.0, 0.0), (100.0, 5.0)], direction="horizontal", extent=120.0)
    pen = classify_modality_equivalence(GestureEvent(modality="pen", **base), brush_active=True)
    touch = classify_modality_equivalence(GestureEvent(modality="touch", **base), brush_active=True)
    assert pen.kind == touch.kind == kind


def test_pen_brush_canvas_drag_is_the_only_exception():
    base = dict(kind="drag_path", target="canvas", t_ms=5, path=[(0.0, 0.0), (40.0, 40.0)])
    pen = classify_modality_equivalence(GestureEvent(modality="pen", **base), brush_active=True)
    touch = classify_modality_equivalence(GestureEvent(modality="touch", **base), brush_active=True)
    assert pen.kind == "ink"
    assert touch.kind == "drag_path"


def test_annotation_polyline_needs_two_points():
    with pytest.raises(ValueError):
        Annotation(kind="ink_stroke", points=[(1.0, 1.0)])
    Annotation(kind="ink_stroke", points=[(1.0, 1.0), (2.0, 2.0)])  # fine


def test_clear_colors_rebinds_to_global_mapping(dataset):
    session = Session(dataset, SessionConfig(seed=3))
    typed(session, "Color by region")
    binding = session.state.bindings.color_by
    rid = sorted(session.state.points)[0]
    session.handle_event(
        event("menu", {"operation": "color_explicit", "parameters": {"color": "red"},
                       "targets": [rid]})
    )
    assert session.state.points[rid].color == colorlib.named_color_hex("red")
    # a new global color binding leaves the override alone
    typed(session, "Color by locale")
    assert session.state.points[rid].color == colorlib.named_color_hex("red")
    typed(session, "Clear colors")
    expected = session.state.bindings.color_by.color_for(
        dataset.records[rid][session.state.bindings.color_by.attribute]
    )
    assert session.state.points[rid].color == expected
    assert not session.state.points[rid].color_explicit


def test_followup_chain_survives_snapshot_restore(dataset):
    """Context rides in session snapshots: restoring mid-chain and continuing
    matches the uninterrupted run."""
    chain = [
        "Order the Mid-Atlantic schools by control",
        "admission rate",
        "Align horizontally by SAT Average",
    ]
    full = Session(dataset, SessionConfig(seed=9))
    for text in chain:
        typed(full, text)

    first = Session(dataset, SessionConfig(seed=9))
    typed(first, chain[0])
    frozen = json.loads(json.dumps(first.snapshot_session()))

    resumed = Session(dataset, SessionConfig(seed=9))
    resumed.restore_session(frozen)
    for text in chain[1:]:
        typed(resumed, text)

    assert json.dumps(resumed.snapshot_session()["view"], sort_keys=True) == json.dumps(
        full.snapshot_session()["view"], sort_keys=True
    )


def test_palette_entries_read_as_their_intended_named_colors():
    # frozen from an independent nearest-neighbor computation over the table
    expected = {
        "#e61e1e": "red",
        "#2d2dd6": "blue",
        "#2dae2d": "green",
        "#f28e2b": "orange",
        "#8e2dd6": "purple",
        "#e377c2": "pink",
        "#8c564b": "brown",
        "#e6d62d": "yellow",
        "#2dbdbd": "teal",
        "#7f7f7f": "gray",
        "#2d2d8e": "navy",
        "#d62dd6": "magenta",
    }
    assert list(expected) == list(colorlib.CATEGORICAL_PALETTE)
    for hexcolor, name in expected.items():
        assert colorlib.nearest_named_color(hexcolor) == name
