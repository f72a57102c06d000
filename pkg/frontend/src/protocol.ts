/**
 * Wire protocol types and the engine client.
 *
 * One JSON object per WebSocket message. Every user action becomes an
 * engine event; the UI never mutates visualization state locally — it only
 * folds the diff stream the engine sends back.
 */

export interface EngineEvent {
  seq: number;
  t_ms: number;
  kind: "gesture" | "utterance" | "menu" | "config" | "substitute";
  payload: Record<string, unknown>;
  modality?: "pen" | "touch";
}

export interface PointRecord {
  row_id: number;
  label: string;
  x: number;
  y: number;
  pinned: boolean;
  color: string;
  color_explicit: boolean;
  size: number;
  size_explicit: boolean;
  label_visible: boolean;
  selected: boolean;
  tags: string[];
  filtered_out: boolean;
  x_source: string;
  y_source: string;
}

export interface ScaleDoc {
  attribute: string;
  kind: "linear" | "band";
  domain: Array<number | string>;
  range: [number, number];
  ticks: Array<[number | string, number]>;
}

export interface GlobalDoc {
  x_axis: ScaleDoc | null;
  y_axis: ScaleDoc | null;
  color_by: { attribute: string; kind: string; palette: Record<string, string>; domain: number[] | null } | null;
  size_by: { attribute: string; domain: number[]; r_min: number; r_max: number } | null;
}

export interface LocalDoc {
  id: number;
  members: number[];
  attribute: string;
  direction: "horizontal" | "vertical";
  scale: ScaleDoc;
  region: [number, number, number, number];
}

export interface AnnotationDoc {
  kind: "ink_stroke" | "text_label";
  points: Array<[number, number]>;
  text: string;
  stroke_width: number;
  color: string;
}

export interface Diff {
  points: PointRecord[];
  global?: GlobalDoc;
  locals?: LocalDoc[];
  annotations?: AnnotationDoc[];
  selection?: number[];
  bin?: number[];
  canvas?: [number, number];
  listening: boolean;
}

export interface FeedbackMessage {
  kind: "success" | "followup_inferred" | "partial_suggestion" | "failure" | "discovery_hint";
  text: string;
  example_command: string | null;
  ambiguities: Array<{ slot: string; candidates: Array<[string, number]> }>;
  warnings: string[];
}

export interface ViewSnapshot {
  version: number;
  canvas: [number, number];
  points: PointRecord[];
  global: GlobalDoc;
  locals: LocalDoc[];
  annotations: AnnotationDoc[];
  selection: number[];
  bin: number[];
}

export interface SessionSnapshot {
  version: number;
  seed: number;
  view: ViewSnapshot;
  context: unknown;
  brush_active: boolean;
  suggestions_enabled: boolean;
}

export interface DiffMessage {
  kind: "diff";
  seq: number;
  diff: Diff;
  extras?: {
    menu?: { scope: "global" | "local"; anchor: [number, number]; entries: string[] };
    tooltip?: { row_id: number; record: Record<string, unknown> };
    summary?: unknown[];
    legend?: Array<[string, string]>;
  };
}

export interface FeedbackEnvelope {
  kind: "feedback";
  seq: number;
  messages: FeedbackMessage[];
}

export type ServerMessage =
  | DiffMessage
  | FeedbackEnvelope
  | { kind: "snapshot"; snapshot: SessionSnapshot }
  | { kind: "error"; code: string; message: string };

/** Minimal socket surface so the browser WebSocket and the `ws` package
 *  (in tests) are interchangeable. */
export interface WireSocket {
  send(data: string): void;
  close(): void;
  set onmessage(handler: (data: string) => void);
  set onopen(handler: () => void);
  set onclose(handler: () => void);
}

export interface ClientHandlers {
  onDiff?: (message: DiffMessage) => void;
  onFeedback?: (message: FeedbackEnvelope) => void;
  onError?: (code: string, message: string) => void;
  onConnection?: (connected: boolean) => void;
}

export class EngineClient {
  private socket: WireSocket | null = null;
  private queue: string[] = [];
  private seq = 0;
  private snapshotWaiters: Array<(snapshot: SessionSnapshot) => void> = [];
  /** every event this client has sent, replayable server-side */
  readonly eventLog: EngineEvent[] = [];
  connected = false;

  constructor(private handlers: ClientHandlers = {}) {}

  attach(socket: WireSocket): void {
    this.socket = socket;
    socket.onopen = () => {
      this.connected = true;
      this.handlers.onConnection?.(true);
      for (const line of this.queue.splice(0)) {
        socket.send(line);
      }
    };
    socket.onclose = () => {
      this.connected = false;
      this.handlers.onConnection?.(false);
    };
    socket.onmessage = (data) => this.receive(data);
  }

  private receive(data: string): void {
    const message = JSON.parse(data) as ServerMessage;
    if (message.kind === "diff") {
      this.handlers.onDiff?.(message);
    } else if (message.kind === "feedback") {
      this.handlers.onFeedback?.(message);
    } else if (message.kind === "snapshot") {
      const waiter = this.snapshotWaiters.shift();
      waiter?.(message.snapshot);
    } else if (message.kind === "error") {
      this.handlers.onError?.(message.code, message.message);
    }
  }

  private push(line: string): void {
    if (this.socket !== null && this.connected) {
      this.socket.send(line);
    } else {
      this.queue.push(line); // offline: queued until the socket opens
    }
  }

  get queuedCount(): number {
    return this.queue.length;
  }

  sendEvent(kind: EngineEvent["kind"], payload: Record<string, unknown>, t_ms: number, modality?: "pen" | "touch"): EngineEvent {
    const event: EngineEvent = { seq: ++this.seq, t_ms, kind, payload };
    if (modality !== undefined) {
      event.modality = modality;
    }
    this.eventLog.push(event);
    this.push(JSON.stringify({ kind: "event", event }));
    return event;
  }

  sendUtterance(text: string, entryMode: "typed" | "spoken", t_ms: number): EngineEvent {
    return this.sendEvent("utterance", { text, entry_mode: entryMode }, t_ms);
  }

  requestSnapshot(): Promise<SessionSnapshot> {
    return new Promise((resolve) => {
      this.snapshotWaiters.push(resolve);
      this.push(JSON.stringify({ kind: "snapshot_request" }));
    });
  }
}
