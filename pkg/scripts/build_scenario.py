"""Build the bundled end-to-end scenario script (colleges walkthrough).

The scenario drives a session from the initial cluster through a column
chart, custom moves, per-region ordering, inking, and filtering. Lasso
polygons depend on live point positions, so this builder simulates the
session while emitting events. Rerun after changing the fixture or any
layout constant:

    python scripts/build_scenario.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from unitcanvas.dataset import load_csv
from unitcanvas.session import Session, SessionConfig

OUT = ROOT / "src" / "unitcanvas" / "resources" / "scenario.jsonl"
SEED = 7
CANVAS = (1280.0, 800.0)


def lasso_polygon(session: Session, row_ids) -> list[list[float]]:
    xs = [session.state.points[r].x for r in row_ids]
    ys = [session.state.points[r].y for r in row_ids]
    x0, x1, y0, y1 = min(xs) - 4, max(xs) + 4, min(ys) - 4, max(ys) + 4
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def region_ids(session: Session, region: str) -> list[int]:
    return sorted(
        rid
        for rid in session.state.visible_ids()
        if session.dataset.records[rid]["Region"] == region
    )


def main() -> None:
    dataset = load_csv((ROOT / "src" / "unitcanvas" / "resources" / "colleges.csv").read_bytes())
    session = Session(dataset, SessionConfig(seed=SEED, canvas=CANVAS))

    events: list[dict] = []
    seq = 0

    def emit(kind, payload, t_ms, modality="touch"):
        nonlocal seq
        seq += 1
        ev = {"seq": seq, "t_ms": t_ms, "kind": kind, "payload": payload, "modality": modality}
        events.append(ev)
        session.handle_event(ev)

    # A -> B: column chart by Region via swipe-and-speak
    emit("gesture", {"gesture": "swipe", "direction": "horizontal", "extent": 320}, 1_000)
    emit("utterance", {"text": "Region", "entry_mode": "spoken"}, 1_800)

    # C: custom positioning; pins appear
    emit("gesture", {"gesture": "double_tap"}, 4_000)
    emit(
        "utterance",
        {"text": "Move the colleges in the Far West to the top left corner", "entry_mode": "spoken"},
        4_600,
    )
    emit("gesture", {"gesture": "double_tap"}, 6_000)
    emit("utterance", {"text": "Color by region", "entry_mode": "spoken"}, 6_500)

    # D: point-and-speak plus a speech-only move
    emit("gesture", {"gesture": "point_hold", "coords": [720.0, 240.0]}, 8_000)
    emit("utterance", {"text": "Bring the Great Lakes schools here", "entry_mode": "spoken"}, 8_700)
    emit(
        "utterance",
        {"text": "Move the New England schools to the top right corner", "entry_mode": "typed"},
        10_000,
    )

    # E: select-and-order, then repeat on other regions
    emit("gesture", {"gesture": "lasso", "polygon": lasso_polygon(session, region_ids(session, "Far West"))}, 12_000, "pen")
    emit("utterance", {"text": "Order by admission rate", "entry_mode": "spoken"}, 12_600)
    emit("gesture", {"gesture": "lasso", "polygon": lasso_polygon(session, region_ids(session, "Great Lakes"))}, 14_000, "pen")
    emit("utterance", {"text": "repeat", "entry_mode": "spoken"}, 14_500)
    emit("gesture", {"gesture": "lasso", "polygon": lasso_polygon(session, region_ids(session, "New England"))}, 16_000, "pen")
    emit("utterance", {"text": "these too", "entry_mode": "spoken"}, 16_500)

    # brush outline (ink), then back to normal pen behavior
    emit("menu", {"operation": "toggle_brush"}, 18_000)
    emit(
        "gesture",
        {"gesture": "drag_path", "path": [[200.0 + 30 * i, 620.0 + (i % 3) * 14] for i in range(12)]},
        18_400,
        "pen",
    )
    emit("menu", {"operation": "toggle_brush"}, 18_900)

    # F: global recolor, filter, size, filter again
    emit("gesture", {"gesture": "double_tap"}, 20_000)
    emit("utterance", {"text": "Color by locale", "entry_mode": "spoken"}, 20_500)
    emit(
        "utterance",
        {"text": "Remove schools that are not in large cities or large suburbs", "entry_mode": "typed"},
        22_000,
    )
    emit("utterance", {"text": "Size by average cost", "entry_mode": "typed"}, 23_000)
    emit(
        "utterance",
        {"text": "Remove schools with an average cost of over 30,000", "entry_mode": "typed"},
        24_000,
    )

    header = {"seed": SEED, "canvas": list(CANVAS), "version": 1}
    with OUT.open("w") as fh:
        fh.write(json.dumps(header) + "\n")
        for ev in events:
            fh.write(json.dumps(ev) + "\n")
    print(f"wrote {len(events)} events -> {OUT}")
    print(f"final visible: {len(session.state.visible_ids())}, bin: {len(session.state.bin_ids)}")


if __name__ == "__main__":
    main()
