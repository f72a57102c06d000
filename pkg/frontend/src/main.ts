/**
 * Browser shell: wires the engine client, gesture capture, command entry,
 * feedback row, context menus, legends, and the attribute summary panel.
 */
import { EngineClient, type DiffMessage, type WireSocket } from "./protocol.js";
import { applyDiff, emptyScene, hitTest, type Scene } from "./scene.js";
import { GestureCapture, type PointerSample } from "./gestures.js";
import {
  ambiguityChoices,
  exampleChip,
  initialFeedback,
  reduceFeedback,
  toggleHints,
  type FeedbackState,
} from "./feedback.js";
import { menuCommandPayload, menuFromDiff, parameterizedPayload, type MenuModel } from "./menu.js";
import { drawScene } from "./renderer.js";

const startTime = Date.now();
const now = () => Date.now() - startTime;

let scene: Scene = emptyScene();
let feedback: FeedbackState = initialFeedback();
let menu: MenuModel | null = null;
let attributes: Array<{ attribute: string; kind: string }> = [];

const canvas = document.getElementById("unit-canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const feedbackRow = document.getElementById("feedback-row")!;
const commandInput = document.getElementById("command-input") as HTMLInputElement;
const micButton = document.getElementById("mic-button")!;
const bellButton = document.getElementById("bell-button")!;
const menuLayer = document.getElementById("menu-layer")!;
const panel = document.getElementById("attribute-panel")!;
const offlineBanner = document.getElementById("offline-banner")!;

const client = new EngineClient({
  onDiff: (message: DiffMessage) => {
    scene = applyDiff(scene, message.diff);
    menu = menuFromDiff(message, scene.selection.length) ?? menu;
    if (message.extras?.tooltip !== undefined) {
      showTooltip(message.extras.tooltip.record);
    }
    render();
  },
  onFeedback: (envelope) => {
    feedback = reduceFeedback(feedback, envelope.messages);
    renderFeedback();
  },
  onError: (code, text) => {
    feedbackRow.textContent = `protocol error ${code}: ${text}`;
  },
  onConnection: (connected) => {
    offlineBanner.style.display = connected ? "none" : "block";
  },
});

function browserSocket(url: string): WireSocket {
  const ws = new WebSocket(url);
  return {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    set onmessage(handler: (data: string) => void) {
      ws.onmessage = (ev) => handler(String(ev.data));
    },
    set onopen(handler: () => void) {
      ws.onopen = handler;
    },
    set onclose(handler: () => void) {
      ws.onclose = handler;
    },
  };
}

const capture = new GestureCapture(
  (x, y) => hitTest(scene, x, y),
  (gesture) => {
    client.sendEvent("gesture", { ...gesture.payload }, gesture.t_ms, gesture.modality);
    closeMenu();
  },
);

function sample(ev: PointerEvent): PointerSample {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * scene.canvas[0],
    y: ((ev.clientY - rect.top) / rect.height) * scene.canvas[1],
    t: now(),
    pointerType: ev.pointerType === "pen" ? "pen" : "touch",
  };
}

canvas.addEventListener("pointerdown", (ev) => capture.pointerDown(sample(ev)));
canvas.addEventListener("pointermove", (ev) => capture.pointerMove(sample(ev)));
canvas.addEventListener("pointerup", (ev) => capture.pointerUp(sample(ev)));

commandInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && commandInput.value.trim() !== "") {
    client.sendUtterance(commandInput.value.trim(), "typed", now());
    commandInput.value = "";
  }
});

micButton.addEventListener("click", () => {
  client.sendEvent("gesture", { gesture: "mic_tap", target: "canvas" }, now());
  startSpeechRecognition();
});

bellButton.addEventListener("click", () => {
  feedback = toggleHints(feedback);
  bellButton.classList.toggle("off", !feedback.hintsEnabled);
  client.sendEvent("config", { suggestions: feedback.hintsEnabled }, now());
});

/** Browser speech recognition when available; typed entry otherwise. */
function startSpeechRecognition(): void {
  const Recognition =
    (window as unknown as Record<string, unknown>).SpeechRecognition ??
    (window as unknown as Record<string, unknown>).webkitSpeechRecognition;
  if (typeof Recognition !== "function") return;
  const rec = new (Recognition as new () => {
    start(): void;
    onresult: ((ev: { results: ArrayLike<ArrayLike<{ transcript: string }>> }) => void) | null;
  })();
  rec.onresult = (ev) => {
    const text = ev.results[0][0].transcript;
    client.sendUtterance(text, "spoken", now());
  };
  rec.start();
}

function render(): void {
  canvas.width = scene.canvas[0];
  canvas.height = scene.canvas[1];
  drawScene(ctx, scene);
  micButton.classList.toggle("listening", scene.listening);
  commandInput.classList.toggle("listening", scene.listening);
  renderMenu();
  renderLegend();
}

function renderFeedback(): void {
  feedbackRow.replaceChildren();
  const message = feedback.current;
  if (message === null) return;
  const text = document.createElement("span");
  text.className = `feedback ${message.kind}`;
  text.textContent = message.text;
  feedbackRow.append(text);
  const chip = exampleChip(feedback);
  if (chip !== null) {
    const button = document.createElement("button");
    button.className = "chip";
    button.textContent = chip;
    button.onclick = () => client.sendUtterance(chip, "typed", now());
    feedbackRow.append(button);
  }
  for (const choice of ambiguityChoices(feedback)) {
    const button = document.createElement("button");
    button.className = "chip ambiguity";
    button.textContent = choice.value;
    button.onclick = () =>
      client.sendEvent("substitute", { slot: choice.slot, value: choice.value }, now());
    feedbackRow.append(button);
  }
  if (message.kind === "discovery_hint") {
    const dismiss = document.createElement("button");
    dismiss.className = "chip dismiss";
    dismiss.textContent = "×";
    dismiss.onclick = () => {
      feedback = { ...feedback, current: null };
      renderFeedback();
    };
    feedbackRow.append(dismiss);
  }
  if (message.kind === "followup_inferred") {
    const undo = document.createElement("button");
    undo.className = "chip";
    undo.textContent = "undo";
    undo.onclick = () => client.sendUtterance("undo", "typed", now());
    feedbackRow.append(undo);
  }
}

function renderMenu(): void {
  menuLayer.replaceChildren();
  if (menu === null) return;
  const box = document.createElement("div");
  box.className = `menu ${menu.scope}`;
  box.style.left = `${(menu.anchor[0] / scene.canvas[0]) * 100}%`;
  box.style.top = `${(menu.anchor[1] / scene.canvas[1]) * 100}%`;
  for (const entry of menu.entries) {
    const item = document.createElement("button");
    item.textContent = entry;
    item.onclick = () => {
      const payload = menuCommandPayload(entry);
      if (payload !== null) {
        client.sendEvent("menu", payload, now());
      } else {
        const value = window.prompt(`${entry}:`, attributes[0]?.attribute ?? "");
        if (value !== null && value !== "") {
          const parameterized = parameterizedPayload(entry, value);
          if (parameterized !== null) client.sendEvent("menu", parameterized, now());
        }
      }
      closeMenu();
    };
    box.append(item);
  }
  menuLayer.append(box);
}

function closeMenu(): void {
  if (menu !== null) {
    menu = null;
    renderMenu();
  }
}

function renderLegend(): void {
  const legend = document.getElementById("legend-panel")!;
  legend.replaceChildren();
  const colorBy = scene.global.color_by;
  if (colorBy !== null && colorBy.kind === "palette") {
    const title = document.createElement("div");
    title.className = "legend-title";
    title.textContent = `color: ${colorBy.attribute}`;
    legend.append(title);
    for (const [category, hex] of Object.entries(colorBy.palette)) {
      const row = document.createElement("div");
      row.className = "legend-row";
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = hex;
      row.append(swatch, document.createTextNode(category));
      legend.append(row);
    }
  }
  const sizeBy = scene.global.size_by;
  if (sizeBy !== null) {
    const title = document.createElement("div");
    title.className = "legend-title";
    title.textContent = `size: ${sizeBy.attribute}`;
    legend.append(title);
  }
}

function showTooltip(record: Record<string, unknown>): void {
  const rows = Object.entries(record)
    .map(([k, v]) => `${k}: ${v ?? "-"}`)
    .join("\n");
  feedbackRow.textContent = rows.split("\n").slice(0, 3).join("  ·  ");
}

async function loadAttributePanel(): Promise<void> {
  try {
    const res = await fetch("/api/stats.json");
    const doc = (await res.json()) as { attributes: Array<Record<string, unknown>> };
    attributes = doc.attributes as Array<{ attribute: string; kind: string }>;
    panel.replaceChildren();
    for (const attr of doc.attributes) {
      const row = document.createElement("details");
      const name = document.createElement("summary");
      name.textContent = `${attr.attribute} (${attr.kind})`;
      row.append(name);
      const body = document.createElement("pre");
      body.textContent = JSON.stringify(attr, null, 1);
      row.append(body);
      panel.append(row);
    }
  } catch {
    panel.textContent = "attribute stats unavailable";
  }
}

const proto = location.protocol === "https:" ? "wss" : "ws";
client.attach(browserSocket(`${proto}://${location.host}/`));
void loadAttributePanel();
render();
renderFeedback();
