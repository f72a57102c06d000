/**
 * Context-menu model. The engine decides the scope and entry list (global
 * menus from a canvas long press, local menus from a point long press with
 * a live selection); picks go back as ordinary menu command events.
 */
import type { DiffMessage, EngineEvent } from "./protocol.js";

export interface MenuModel {
  scope: "global" | "local";
  anchor: [number, number];
  entries: string[];
}

export function menuFromDiff(message: DiffMessage, selectionCount: number): MenuModel | null {
  const menu = message.extras?.menu;
  if (menu === undefined) return null;
  if (menu.scope === "local" && selectionCount === 0) {
    return null; // local menus only appear with a nonempty selection
  }
  return { scope: menu.scope, anchor: menu.anchor, entries: menu.entries };
}

/** The engine payload a menu pick produces; null when the entry needs a
 *  follow-up input (attribute or color picker) handled by the shell. */
export function menuCommandPayload(entry: string): Record<string, unknown> | null {
  switch (entry) {
    case "remove":
      return { operation: "filter", parameters: {}, targets: "selection" };
    case "keep only":
      return { operation: "filter", parameters: { mode: "keep_only" }, targets: "selection" };
    case "add labels":
      return { operation: "label", parameters: {}, targets: "selection" };
    case "summarize":
      return { operation: "summarize", parameters: {}, targets: "selection" };
    case "clear colors":
      return { operation: "clear", parameters: { subject: "colors" } };
    case "clear labels":
      return { operation: "clear", parameters: { subject: "labels" } };
    case "restore filtered points":
      return { operation: "clear", parameters: { subject: "filters" } };
    case "toggle brush":
      return { operation: "toggle_brush" };
    default:
      return null; // attribute/color entries open a picker first
  }
}

export function parameterizedPayload(
  entry: string,
  value: string,
): Record<string, unknown> | null {
  switch (entry) {
    case "assign x axis":
      return {
        operation: "assign_axis",
        parameters: { direction: "horizontal", attribute: value },
        targets: "all",
      };
    case "assign y axis":
      return {
        operation: "assign_axis",
        parameters: { direction: "vertical", attribute: value },
        targets: "all",
      };
    case "color by attribute":
      return { operation: "color_by", parameters: { attribute: value }, targets: "all" };
    case "size by attribute":
      return { operation: "size_by", parameters: { attribute: value }, targets: "all" };
    case "order by attribute":
      return { operation: "order_by", parameters: { attribute: value }, targets: "selection" };
    case "color":
      return { operation: "color_explicit", parameters: { color: value }, targets: "selection" };
    case "size":
      return {
        operation: "size_explicit",
        parameters: { number: Number(value) },
        targets: "selection",
      };
    case "tag":
      return { operation: "tag", parameters: { tag: value }, targets: "selection" };
    default:
      return null;
  }
}

export function isMenuEvent(event: EngineEvent): boolean {
  return event.kind === "menu";
}
