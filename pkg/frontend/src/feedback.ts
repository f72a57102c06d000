/**
 * Feedback-row model: one current message, partial suggestions exposing a
 * click-to-run example chip, discovery hints suppressed client-side when
 * the bell is off. Purely data; DOM rendering lives in main.ts.
 */
import type { FeedbackMessage } from "./protocol.js";

export interface FeedbackState {
  current: FeedbackMessage | null;
  hintsEnabled: boolean;
}

export function initialFeedback(): FeedbackState {
  return { current: null, hintsEnabled: true };
}

export function reduceFeedback(state: FeedbackState, messages: FeedbackMessage[]): FeedbackState {
  let current = state.current;
  for (const message of messages) {
    if (message.kind === "discovery_hint" && !state.hintsEnabled) {
      continue;
    }
    current = message;
  }
  return { ...state, current };
}

export function toggleHints(state: FeedbackState): FeedbackState {
  return { ...state, hintsEnabled: !state.hintsEnabled };
}

export function exampleChip(state: FeedbackState): string | null {
  const msg = state.current;
  if (msg === null || msg.kind !== "partial_suggestion") return null;
  return msg.example_command;
}

export interface AmbiguityChoice {
  slot: string;
  value: string;
}

export function ambiguityChoices(state: FeedbackState): AmbiguityChoice[] {
  const msg = state.current;
  if (msg === null) return [];
  const out: AmbiguityChoice[] = [];
  for (const a of msg.ambiguities) {
    for (const [value] of a.candidates) {
      out.push({ slot: a.slot, value });
    }
  }
  return out;
}
