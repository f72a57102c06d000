/**
 * Pointer-event capture: classifies taps, double taps, and long presses
 * locally, and forwards raw drag paths so the engine classifies lassos and
 * axis swipes itself. Pen and touch are tagged from the pointer type and
 * otherwise treated alike.
 *
 * Classification happens on release: a press held over LONG_PRESS_MS with
 * little movement is a long press; a short still press is a tap (and a
 * second tap within DOUBLE_TAP_MS becomes a double tap instead of a second
 * single tap).
 */

export interface PointerSample {
  x: number;
  y: number;
  t: number; // ms
  pointerType: "pen" | "touch" | "mouse";
}

export interface GesturePayload {
  gesture: string;
  target: "canvas" | number;
  coords?: [number, number];
  path?: Array<[number, number]>;
}

export interface CapturedGesture {
  payload: GesturePayload;
  modality: "pen" | "touch";
  t_ms: number;
}

export const LONG_PRESS_MS = 1000;
export const DOUBLE_TAP_MS = 300;
export const DRAG_THRESHOLD_PX = 6;

export type HitTest = (x: number, y: number) => number | null;

export class GestureCapture {
  private down: PointerSample | null = null;
  private path: Array<[number, number]> = [];
  private moved = false;
  private lastTap: { x: number; y: number; t: number } | null = null;

  constructor(
    private hitTestFn: HitTest,
    private emit: (gesture: CapturedGesture) => void,
  ) {}

  pointerDown(sample: PointerSample): void {
    this.down = sample;
    this.path = [[sample.x, sample.y]];
    this.moved = false;
  }

  pointerMove(sample: PointerSample): void {
    if (this.down === null) return;
    this.path.push([sample.x, sample.y]);
    if (Math.hypot(sample.x - this.down.x, sample.y - this.down.y) >= DRAG_THRESHOLD_PX) {
      this.moved = true;
    }
  }

  pointerUp(sample: PointerSample): void {
    const down = this.down;
    if (down === null) return;
    this.down = null;
    const modality: "pen" | "touch" = down.pointerType === "pen" ? "pen" : "touch";
    const target = this.hitTestFn(down.x, down.y) ?? "canvas";
    const held = sample.t - down.t;

    if (this.moved) {
      this.emit({
        payload: { gesture: "drag_path", target, path: [...this.path, [sample.x, sample.y]] },
        modality,
        t_ms: sample.t,
      });
      return;
    }

    if (held >= LONG_PRESS_MS) {
      this.emit({
        payload: { gesture: "long_press", target, coords: [down.x, down.y] },
        modality,
        t_ms: sample.t,
      });
      return;
    }

    const prior = this.lastTap;
    if (
      prior !== null &&
      sample.t - prior.t <= DOUBLE_TAP_MS &&
      Math.hypot(down.x - prior.x, down.y - prior.y) < 2 * DRAG_THRESHOLD_PX
    ) {
      this.lastTap = null;
      this.emit({
        payload: { gesture: "double_tap", target, coords: [down.x, down.y] },
        modality,
        t_ms: sample.t,
      });
      return;
    }
    this.lastTap = { x: down.x, y: down.y, t: sample.t };
    this.emit({
      payload: { gesture: "tap", target, coords: [down.x, down.y] },
      modality,
      t_ms: sample.t,
    });
  }
}

/** Synthesize a straight drag path (test + programmatic use). */
export function linePath(
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  steps = 10,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i <= steps; i++) {
    out.push([x0 + ((x1 - x0) * i) / steps, y0 + ((y1 - y0) * i) / steps]);
  }
  return out;
}

/** Synthesize a closed rectangle path around a bounding box (lasso). */
export function rectanglePath(
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): Array<[number, number]> {
  return [
    [x0, y0],
    [x1, y0],
    [x1, y1],
    [x0, y1],
    [x0, y0],
  ];
}
