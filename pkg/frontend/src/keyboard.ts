/**
 * Keyboard shortcuts: 1/2/3 pick the neutrality judgment, a/s/d/f the
 * four acceptability levels, Enter submits. Shortcuts are suppressed
 * while the rater is typing in a form field.
 */

import type { Layer1, Layer2 } from "./types.js";

export type KeyAction =
  | { kind: "layer1"; value: Layer1 }
  | { kind: "layer2"; value: Layer2 }
  | { kind: "submit" };

const LAYER1_KEYS: Record<string, Layer1> = { "1": "N", "2": "G", "3": "P" };
const LAYER2_KEYS: Record<string, Layer2> = { a: "Acc", s: "S_Acc", d: "S_Un", f: "Un" };

export function actionForKey(key: string): KeyAction | null {
  if (key in LAYER1_KEYS) {
    return { kind: "layer1", value: LAYER1_KEYS[key] };
  }
  if (key in LAYER2_KEYS) {
    return { kind: "layer2", value: LAYER2_KEYS[key] };
  }
  if (key === "Enter") {
    return { kind: "submit" };
  }
  return null;
}

const FORM_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export function shouldIgnore(target: EventTarget | null): boolean {
  if (!(target instanceof HTMLElement)) {
    return false;
  }
  if (FORM_TAGS.has(target.tagName)) {
    return true;
  }
  // isContentEditable is not implemented in every DOM; check the attribute too
  return target.isContentEditable === true || target.closest('[contenteditable="true"]') !== null;
}
