/**
 * The canvas scene is a pure function of the engine's diff stream: folding
 * every diff since connect (or one snapshot) yields the same scene. No UI
 * state mutates outside these reducers.
 */
import type {
  AnnotationDoc,
  Diff,
  GlobalDoc,
  LocalDoc,
  PointRecord,
  ViewSnapshot,
} from "./protocol.js";

export interface Scene {
  canvas: [number, number];
  points: Map<number, PointRecord>;
  global: GlobalDoc;
  locals: LocalDoc[];
  annotations: AnnotationDoc[];
  selection: number[];
  bin: number[];
  listening: boolean;
}

const EMPTY_GLOBAL: GlobalDoc = { x_axis: null, y_axis: null, color_by: null, size_by: null };

export function emptyScene(): Scene {
  return {
    canvas: [1280, 800],
    points: new Map(),
    global: { ...EMPTY_GLOBAL },
    locals: [],
    annotations: [],
    selection: [],
    bin: [],
    listening: false,
  };
}

export function applyDiff(scene: Scene, diff: Diff): Scene {
  const points = new Map(scene.points);
  for (const record of diff.points) {
    points.set(record.row_id, record);
  }
  return {
    canvas: diff.canvas ?? scene.canvas,
    points,
    global: diff.global ?? scene.global,
    locals: diff.locals ?? scene.locals,
    annotations: diff.annotations ?? scene.annotations,
    selection: diff.selection ?? scene.selection,
    bin: diff.bin ?? scene.bin,
    listening: diff.listening,
  };
}

export function sceneFromSnapshot(view: ViewSnapshot, listening = false): Scene {
  return {
    canvas: view.canvas,
    points: new Map(view.points.map((p) => [p.row_id, p])),
    global: view.global,
    locals: view.locals,
    annotations: view.annotations,
    selection: view.selection,
    bin: view.bin,
    listening,
  };
}

/**
 * Structural form for comparisons: deterministic ordering, no Maps. Pixel
 * rendering stays out of correctness checks; this is the scene graph.
 */
export function sceneGraph(scene: Scene): Record<string, unknown> {
  const rows = [...scene.points.keys()].sort((a, b) => a - b);
  return {
    canvas: scene.canvas,
    points: rows.map((rid) => scene.points.get(rid)),
    global: scene.global,
    locals: scene.locals,
    annotations: scene.annotations,
    selection: scene.selection,
    bin: [...scene.bin].sort((a, b) => a - b),
  };
}

export function visiblePoints(scene: Scene): PointRecord[] {
  return [...scene.points.values()].filter((p) => !p.filtered_out);
}

/** Hit test used by gesture capture: topmost point whose disc contains the
 *  position, with a small touch slop. */
export function hitTest(scene: Scene, x: number, y: number, slop = 2): number | null {
  let best: number | null = null;
  let bestDist = Infinity;
  for (const p of scene.points.values()) {
    if (p.filtered_out) continue;
    const d = Math.hypot(p.x - x, p.y - y);
    if (d <= p.size + slop && d < bestDist) {
      best = p.row_id;
      bestDist = d;
    }
  }
  return best;
}
