/**
 * 2D-canvas drawing of the scene graph. Cosmetic layer: nothing here feeds
 * back into state, and correctness tests compare scene graphs instead of
 * pixels.
 */
import type { Scene } from "./scene.js";
import type { ScaleDoc } from "./protocol.js";

const AXIS_COLOR = "#b9b9c6";
const TICK_COLOR = "#8a8a99";
const REGION_COLOR = "rgba(90, 120, 220, 0.18)";
const HALO_COLOR = "#2d6cdf";

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene): void {
  const [w, h] = scene.canvas;
  ctx.clearRect(0, 0, w, h);

  drawAxes(ctx, scene, w, h);

  for (const binding of scene.locals) {
    const [x0, y0, x1, y1] = binding.region;
    ctx.fillStyle = REGION_COLOR;
    ctx.fillRect(x0 - 6, y0 - 6, x1 - x0 + 12, y1 - y0 + 12);
    ctx.fillStyle = TICK_COLOR;
    ctx.font = "11px sans-serif";
    ctx.fillText(`${binding.attribute} →`, x0 - 4, y0 - 10);
  }

  for (const stroke of scene.annotations) {
    if (stroke.points.length < 2) continue;
    ctx.strokeStyle = stroke.color;
    ctx.lineWidth = stroke.stroke_width;
    ctx.beginPath();
    ctx.moveTo(stroke.points[0][0], stroke.points[0][1]);
    for (const [x, y] of stroke.points.slice(1)) {
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }

  ctx.font = "10px sans-serif";
  for (const p of scene.points.values()) {
    if (p.filtered_out) continue;
    if (p.selected) {
      ctx.beginPath();
      ctx.strokeStyle = HALO_COLOR;
      ctx.lineWidth = 2;
      ctx.arc(p.x, p.y, p.size + 3, 0, Math.PI * 2);
      ctx.stroke();
    }
    ctx.beginPath();
    ctx.fillStyle = p.color;
    ctx.arc(p.x, p.y, p.size, 0, Math.PI * 2);
    ctx.fill();
    if (p.pinned) {
      ctx.strokeStyle = "#444";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(p.x + p.size * 0.4, p.y - p.size - 4);
      ctx.lineTo(p.x + p.size * 0.4 + 3, p.y - p.size - 1);
      ctx.stroke();
    }
    if (p.label_visible) {
      ctx.fillStyle = "#222";
      ctx.fillText(p.label, p.x + p.size + 3, p.y + 3);
    }
  }
}

function drawAxes(ctx: CanvasRenderingContext2D, scene: Scene, w: number, h: number): void {
  const x = scene.global.x_axis;
  const y = scene.global.y_axis;
  ctx.strokeStyle = AXIS_COLOR;
  ctx.fillStyle = TICK_COLOR;
  ctx.font = "11px sans-serif";
  ctx.lineWidth = 1;
  if (x !== null) {
    const base = h - 24;
    ctx.beginPath();
    ctx.moveTo(0, base);
    ctx.lineTo(w, base);
    ctx.stroke();
    drawTicks(ctx, x, (px) => [px, base + 14], "center");
    ctx.fillText(x.attribute, w / 2, h - 4);
  }
  if (y !== null) {
    ctx.beginPath();
    ctx.moveTo(26, 0);
    ctx.lineTo(26, h);
    ctx.stroke();
    drawTicks(ctx, y, (px) => [30, px + 4], "left");
    ctx.save();
    ctx.translate(12, h / 2);
    ctx.rotate(-Math.PI / 2);
    ctx.fillText(y.attribute, 0, 0);
    ctx.restore();
  }
}

function drawTicks(
  ctx: CanvasRenderingContext2D,
  scale: ScaleDoc,
  place: (px: number) => [number, number],
  align: CanvasTextAlign,
): void {
  ctx.textAlign = align;
  for (const [value, px] of scale.ticks) {
    const [tx, ty] = place(px);
    const text = typeof value === "number" ? formatTick(value) : String(value);
    ctx.fillText(text, tx, ty);
  }
  ctx.textAlign = "start";
}

function formatTick(value: number): string {
  if (Math.abs(value) >= 10_000) return `${Math.round(value / 1000)}k`;
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(2);
}
