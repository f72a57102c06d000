import { describe, expect, it } from "vitest";

import { applyDiff, emptyScene, hitTest, sceneFromSnapshot, sceneGraph } from "../src/scene.js";
import type { Diff, PointRecord, ViewSnapshot } from "../src/protocol.js";

function point(rowId: number, overrides: Partial<PointRecord> = {}): PointRecord {
  return {
    row_id: rowId,
    label: `p${rowId}`,
    x: 100 + rowId,
    y: 200,
    pinned: false,
    color: "#888888",
    color_explicit: false,
    size: 5,
    size_explicit: false,
    label_visible: false,
    selected: false,
    tags: [],
    filtered_out: false,
    x_source: "cluster",
    y_source: "cluster",
    ...overrides,
  };
}

const emptyGlobal = { x_axis: null, y_axis: null, color_by: null, size_by: null };

describe("scene reducer", () => {
  it("folds point changes by row id", () => {
    let scene = emptyScene();
    scene = applyDiff(scene, { points: [point(1), point(2)], listening: false });
    scene = applyDiff(scene, { points: [point(2, { color: "#ff0000" })], listening: true });
    expect(scene.points.size).toBe(2);
    expect(scene.points.get(2)?.color).toBe("#ff0000");
    expect(scene.points.get(1)?.color).toBe("#888888");
    expect(scene.listening).toBe(true);
  });

  it("replaces top-level sections only when present", () => {
    let scene = emptyScene();
    scene = applyDiff(scene, {
      points: [],
      selection: [3, 4],
      listening: false,
    });
    scene = applyDiff(scene, { points: [], listening: false });
    expect(scene.selection).toEqual([3, 4]);
    scene = applyDiff(scene, { points: [], selection: [], listening: false });
    expect(scene.selection).toEqual([]);
  });

  it("diff-folded scene structurally equals the snapshot scene", () => {
    const snapshot: ViewSnapshot = {
      version: 1,
      canvas: [1280, 800],
      points: [point(0), point(1, { pinned: true, x_source: "manual", y_source: "manual" })],
      global: emptyGlobal,
      locals: [],
      annotations: [],
      selection: [1],
      bin: [],
    };
    const diffs: Diff[] = [
      { points: [point(0), point(1)], canvas: [1280, 800], listening: false },
      {
        points: [point(1, { pinned: true, x_source: "manual", y_source: "manual" })],
        selection: [1],
        listening: false,
      },
    ];
    let folded = emptyScene();
    for (const diff of diffs) folded = applyDiff(folded, diff);
    expect(sceneGraph(folded)).toEqual(sceneGraph(sceneFromSnapshot(snapshot)));
  });

  it("hit test finds the nearest covering point and skips filtered ones", () => {
    let scene = emptyScene();
    scene = applyDiff(scene, {
      points: [
        point(1, { x: 100, y: 100, size: 6 }),
        point(2, { x: 104, y: 100, size: 6 }),
        point(3, { x: 300, y: 300, filtered_out: true }),
      ],
      listening: false,
    });
    expect(hitTest(scene, 99, 100)).toBe(1);
    expect(hitTest(scene, 104, 101)).toBe(2);
    expect(hitTest(scene, 300, 300)).toBeNull();
    expect(hitTest(scene, 700, 700)).toBeNull();
  });
});
