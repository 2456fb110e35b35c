/**
 * Client-side mirror of the server's two-layer gating rules.
 *
 * Layer 1 is the neutrality judgment (N / G / P). Layer 2 is the 4-point
 * acceptability judgment and exists only for outputs judged N or P; a
 * fully gendered output (G) carries no acceptability. Every payload this
 * module produces satisfies those rules, so the server's validator can
 * only reject on assignment problems, never on gating.
 */

import type { Layer1, Layer2, Submission } from "./types.js";

export interface SelectionState {
  layer1: Layer1 | null;
  layer2: Layer2 | null;
  note: string;
}

export function emptySelection(): SelectionState {
  return { layer1: null, layer2: null, note: "" };
}

/** The acceptability selector is live only after choosing N or P. */
export function layer2Enabled(state: SelectionState): boolean {
  return state.layer1 === "N" || state.layer1 === "P";
}

export function selectLayer1(state: SelectionState, layer1: Layer1): SelectionState {
  // switching to G drops any acceptability already picked
  const layer2 = layer1 === "G" ? null : state.layer2;
  return { ...state, layer1, layer2 };
}

export function selectLayer2(state: SelectionState, layer2: Layer2): SelectionState {
  if (!layer2Enabled(state)) {
    return state;
  }
  return { ...state, layer2 };
}

export function setNote(state: SelectionState, note: string): SelectionState {
  return { ...state, note };
}

/** Violation messages for the current selection; empty means submittable. */
export function validateSelection(state: SelectionState): string[] {
  const violations: string[] = [];
  if (state.layer1 === null) {
    violations.push("choose a neutrality judgment first");
  } else if (state.layer1 === "G" && state.layer2 !== null) {
    violations.push("acceptability does not apply to fully gendered outputs");
  } else if (state.layer1 !== "G" && state.layer2 === null) {
    violations.push("choose an acceptability level for N or P judgments");
  }
  return violations;
}

/**
 * The only constructor of submission payloads. Returns null when the
 * selection does not pass gating, so an illegal record cannot be produced.
 */
export function buildSubmission(
  outputKey: [string, string],
  raterId: string,
  state: SelectionState,
): Submission | null {
  if (validateSelection(state).length > 0 || state.layer1 === null) {
    return null;
  }
  const payload: Submission = {
    output_key: outputKey,
    rater_id: raterId,
    layer1: state.layer1,
  };
  if (state.layer1 !== "G" && state.layer2 !== null) {
    payload.layer2 = state.layer2;
  }
  const note = state.note.trim();
  if (note !== "") {
    payload.note = note;
  }
  return payload;
}
