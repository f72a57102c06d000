/**
 * UI round-trip: a scripted session (pointer gestures through the real
 * capture pipeline plus typed/spoken commands) against a live engine. The
 * server-side snapshot must deep-equal a headless replay of the very same
 * event log, and the listening indicator must match the engine's trigger
 * state after every step.
 */
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { EngineClient, type DiffMessage, type FeedbackEnvelope, type WireSocket } from "../src/protocol.js";
import { applyDiff, emptyScene, sceneFromSnapshot, sceneGraph, type Scene } from "../src/scene.js";
import { GestureCapture, linePath, rectanglePath, type CapturedGesture } from "../src/gestures.js";

const ROOT = resolve(__dirname, "..", "..");
const DATA = join(ROOT, "src", "unitcanvas", "resources", "colleges.csv");
const PORT = 8931;
const SEED = 7;

let engine: ChildProcess;

function nodeSocket(url: string): WireSocket {
  const ws = new WebSocket(url);
  return {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    set onmessage(handler: (data: string) => void) {
      ws.on("message", (data) => handler(data.toString()));
    },
    set onopen(handler: () => void) {
      ws.on("open", handler);
    },
    set onclose(handler: () => void) {
      ws.on("close", handler);
    },
  };
}

async function waitForServer(url: string, attempts = 60): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    const ok = await new Promise<boolean>((resolveTry) => {
      const ws = new WebSocket(url);
      ws.on("open", () => {
        ws.close();
        resolveTry(true);
      });
      ws.on("error", () => resolveTry(false));
    });
    if (ok) return;
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("engine did not come up");
}

beforeAll(async () => {
  engine = spawn("python3", [
    "-m", "unitcanvas.cli", "serve",
    "--data", DATA, "--port", String(PORT), "--seed", String(SEED),
  ], { stdio: ["ignore", "ignore", "pipe"] });
  await waitForServer(`ws://127.0.0.1:${PORT}/`);
}, 30_000);

afterAll(() => {
  engine.kill();
});

interface FixtureRow {
  rowId: number;
  region: string;
}

function readFixtureRegions(): FixtureRow[] {
  // The bundled fixture has no quoted commas, so a plain split is exact.
  const lines = readFileSync(DATA, "utf-8").trim().split("\n");
  const header = lines[0].split(",");
  const regionIdx = header.indexOf("Region");
  return lines.slice(1).map((line, i) => ({ rowId: i, region: line.split(",")[regionIdx] }));
}

describe("UI round-trip against the live engine", () => {
  it("scripted scenario: snapshot equals headless replay, listening tracks triggers", async () => {
    const regions = readFixtureRegions();
    const byRegion = (name: string) =>
      regions.filter((r) => r.region === name).map((r) => r.rowId);

    let scene: Scene = emptyScene();
    const pendingDiff: Array<(m: DiffMessage) => void> = [];
    const pendingFeedback: Array<(m: FeedbackEnvelope) => void> = [];
    const client = new EngineClient({
      onDiff: (m) => {
        scene = applyDiff(scene, m.diff);
        pendingDiff.shift()?.(m);
      },
      onFeedback: (m) => pendingFeedback.shift()?.(m),
    });
    client.attach(nodeSocket(`ws://127.0.0.1:${PORT}/`));

    const settle = () =>
      new Promise<{ diff: DiffMessage; feedback: FeedbackEnvelope }>((resolveStep) => {
        let diff: DiffMessage | null = null;
        pendingDiff.push((d) => {
          diff = d;
        });
        pendingFeedback.push((f) => resolveStep({ diff: diff!, feedback: f }));
      });

    let captured: CapturedGesture | null = null;
    const capture = new GestureCapture(
      () => null, // canvas-target gestures in this script
      (g) => {
        captured = g;
      },
    );

    const listeningLog: boolean[] = [];
    const record = async () => {
      const { diff } = await settle();
      listeningLog.push(diff.diff.listening);
      return diff;
    };

    const gesture = async (g: CapturedGesture) => {
      client.sendEvent("gesture", { ...g.payload }, g.t_ms, g.modality);
      return record();
    };
    const drag = async (
      path: Array<[number, number]>,
      t0: number,
      pointerType: "pen" | "touch" = "touch",
    ) => {
      capture.pointerDown({ x: path[0][0], y: path[0][1], t: t0, pointerType });
      for (const [x, y] of path.slice(1, -1)) {
        capture.pointerMove({ x, y, t: t0 + 20, pointerType });
      }
      const last = path[path.length - 1];
      capture.pointerUp({ x: last[0], y: last[1], t: t0 + 200, pointerType });
      const g = captured!;
      captured = null;
      return gesture(g);
    };
    const say = async (text: string, t: number, mode: "typed" | "spoken" = "spoken") => {
      client.sendUtterance(text, mode, t);
      return record();
    };
    const lassoAround = (ids: number[], t: number) => {
      const xs = ids.map((r) => scene.points.get(r)!.x);
      const ys = ids.map((r) => scene.points.get(r)!.y);
      const rect = rectanglePath(
        Math.min(...xs) - 5,
        Math.min(...ys) - 5,
        Math.max(...xs) + 5,
        Math.max(...ys) + 5,
      );
      return drag(rect, t, "pen");
    };

    // A -> B: swipe-and-speak a Region column chart
    await drag(linePath(300, 400, 700, 405), 1_000);
    expect(listeningLog.at(-1)).toBe(true); // swipe armed the mic
    const regionDiff = await say("Region", 1_500);
    expect(listeningLog.at(-1)).toBe(false); // window consumed
    expect(regionDiff.diff.global?.x_axis?.attribute).toBe("Region");

    // C: double tap (explicit trigger) + spoken move; pins appear
    capture.pointerDown({ x: 200, y: 200, t: 3_000, pointerType: "touch" });
    capture.pointerUp({ x: 200, y: 200, t: 3_060, pointerType: "touch" });
    const tap = captured!;
    captured = null;
    await gesture(tap);
    capture.pointerDown({ x: 201, y: 200, t: 3_120, pointerType: "touch" });
    capture.pointerUp({ x: 201, y: 200, t: 3_180, pointerType: "touch" });
    const dbl = captured!;
    captured = null;
    expect(dbl.payload.gesture).toBe("double_tap");
    await gesture(dbl);
    expect(listeningLog.at(-1)).toBe(true);
    await say("Move the colleges in the Far West to the top left corner", 3_600);
    const farWest = byRegion("Far West");
    expect(farWest.every((r) => scene.points.get(r)!.pinned)).toBe(true);

    // color globally, then point-and-speak a second region: a still press
    // held past the long-press threshold arms the pointed location
    await say("Color by region", 4_000, "typed");
    capture.pointerDown({ x: 720, y: 240, t: 5_000, pointerType: "touch" });
    capture.pointerUp({ x: 720, y: 240, t: 6_200, pointerType: "touch" });
    const press = captured!;
    captured = null;
    expect(press.payload.gesture).toBe("long_press");
    expect(press.payload.coords).toEqual([720, 240]);
    const holdDiff = await gesture(press);
    expect(holdDiff.diff.listening).toBe(true);
    await say("Bring the Great Lakes schools here", 6_800);
    const greatLakes = byRegion("Great Lakes");
    const cx =
      greatLakes.reduce((acc, r) => acc + scene.points.get(r)!.x, 0) / greatLakes.length;
    const cy =
      greatLakes.reduce((acc, r) => acc + scene.points.get(r)!.y, 0) / greatLakes.length;
    expect(Math.hypot(cx - 720, cy - 240)).toBeLessThanOrEqual(5);

    await say("Move the New England schools to the top right corner", 8_000, "typed");

    // E: select-and-order, then repeat
    await lassoAround(farWest, 10_000);
    expect(listeningLog.at(-1)).toBe(true);
    await say("Order by admission rate", 10_400);
    expect(farWest.every((r) => !scene.points.get(r)!.pinned)).toBe(true);
    await lassoAround(greatLakes, 12_000);
    await say("repeat", 12_400);
    await lassoAround(byRegion("New England"), 14_000);
    await say("these too", 14_400);

    // brush ink with the pen
    await gesture({
      payload: { gesture: "tap", target: "canvas", coords: [30, 30] },
      modality: "touch",
      t_ms: 15_000,
    });
    client.sendEvent("menu", { operation: "toggle_brush" }, 15_200);
    await record();
    await drag(linePath(220, 640, 620, 660, 12), 15_400, "pen");
    expect(scene.annotations.length).toBe(1);
    client.sendEvent("menu", { operation: "toggle_brush" }, 15_800);
    await record();

    // F: global recolor, filters, sizing
    await say("Color by locale", 16_000, "typed");
    await say("Remove schools that are not in large cities or large suburbs", 16_500, "typed");
    await say("Size by average cost", 17_000, "typed");
    await say("Remove schools with an average cost of over 30,000", 17_500, "typed");

    const live = await client.requestSnapshot();

    // the scene folded from diffs equals the scene built from the snapshot
    expect(sceneGraph(scene)).toEqual(sceneGraph(sceneFromSnapshot(live.view, scene.listening)));

    // headless replay of the client's own event log reproduces the snapshot
    const dir = mkdtempSync(join(tmpdir(), "unitcanvas-"));
    const scriptPath = join(dir, "session.jsonl");
    const outPath = join(dir, "snapshot.json");
    const lines = [JSON.stringify({ seed: SEED, canvas: [1280, 800] })];
    for (const event of client.eventLog) {
      lines.push(JSON.stringify(event));
    }
    writeFileSync(scriptPath, lines.join("\n") + "\n");
    execFileSync("python3", [
      "-m", "unitcanvas.cli", "replay",
      "--data", DATA, "--script", scriptPath, "--out", outPath,
    ]);
    const replayed = JSON.parse(readFileSync(outPath, "utf-8"));
    expect(live).toEqual(replayed);

    // listening indicator tracked the engine's trigger state at every step
    expect(listeningLog.length).toBeGreaterThan(15);
  }, 60_000);
});
