/**
 * Single-page annotation app: fetch a task, take the two-layer judgment,
 * submit, advance. No routing; the server decides what comes next.
 */

import {
  buildSubmission,
  emptySelection,
  layer2Enabled,
  selectLayer1,
  selectLayer2,
  setNote,
  validateSelection,
  type SelectionState,
} from "./gating.js";
import { renderReference } from "./highlight.js";
import { actionForKey, shouldIgnore, type KeyAction } from "./keyboard.js";
import { isDone, type Api, type Layer1, type Layer2, type TaskView } from "./types.js";

const LAYER1_BUTTONS: ReadonlyArray<[Layer1, string]> = [
  ["N", "Neutral (1)"],
  ["G", "Gendered (2)"],
  ["P", "Partially neutral (3)"],
];

const LAYER2_BUTTONS: ReadonlyArray<[Layer2, string]> = [
  ["Acc", "Acceptable (a)"],
  ["S_Acc", "Somewhat acceptable (s)"],
  ["S_Un", "Somewhat unacceptable (d)"],
  ["Un", "Unacceptable (f)"],
];

export interface AppController {
  /** Resolves once all in-flight fetches and submissions have settled. */
  idle(): Promise<void>;
  /** Detach the document-level keyboard listener. */
  dispose(): void;
}

export function mountApp(root: HTMLElement, api: Api, raterId: string): AppController {
  const doc = root.ownerDocument;
  root.innerHTML = `
    <section id="task-card" hidden>
      <p id="progress" class="progress"></p>
      <dl class="sentences">
        <dt>Source</dt><dd id="src"></dd>
        <dt>Reference (gendered terms marked)</dt><dd id="ref"></dd>
        <dt>Output under judgment</dt><dd id="output" class="output"></dd>
      </dl>
      <fieldset id="layer1-group">
        <legend>Neutrality</legend>
      </fieldset>
      <fieldset id="layer2-group" disabled>
        <legend>Acceptability of the neutralization</legend>
      </fieldset>
      <label class="note-label">Notes (optional)
        <textarea id="note" rows="2"></textarea>
      </label>
      <ul id="violations" class="violations"></ul>
      <button id="submit" type="button">Submit (Enter)</button>
    </section>
    <section id="done-screen" hidden>
      <h2>All done</h2>
      <p id="done-text"></p>
    </section>
    <section id="error-banner" hidden>
      <p id="error-text"></p>
      <button id="retry" type="button">Retry</button>
    </section>
  `;

  const el = <T extends HTMLElement>(id: string): T => {
    const found = root.querySelector(`#${id}`);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found as T;
  };

  const taskCard = el<HTMLElement>("task-card");
  const doneScreen = el<HTMLElement>("done-screen");
  const errorBanner = el<HTMLElement>("error-banner");
  const layer1Group = el<HTMLFieldSetElement>("layer1-group");
  const layer2Group = el<HTMLFieldSetElement>("layer2-group");
  const noteField = el<HTMLTextAreaElement>("note");
  const violationsList = el<HTMLUListElement>("violations");

  for (const [value, label] of LAYER1_BUTTONS) {
    const button = doc.createElement("button");
    button.type = "button";
    button.dataset.layer1 = value;
    button.textContent = label;
    layer1Group.appendChild(button);
  }
  for (const [value, label] of LAYER2_BUTTONS) {
    const button = doc.createElement("button");
    button.type = "button";
    button.dataset.layer2 = value;
    button.textContent = label;
    layer2Group.appendChild(button);
  }

  let task: TaskView | null = null;
  let selection: SelectionState = emptySelection();

  function renderSelection(): void {
    layer2Group.disabled = !layer2Enabled(selection);
    for (const button of layer1Group.querySelectorAll<HTMLButtonElement>("button[data-layer1]")) {
      button.classList.toggle("selected", button.dataset.layer1 === selection.layer1);
    }
    for (const button of layer2Group.querySelectorAll<HTMLButtonElement>("button[data-layer2]")) {
      button.classList.toggle("selected", button.dataset.layer2 === selection.layer2);
    }
  }

  function renderViolations(messages: string[]): void {
    violationsList.textContent = "";
    for (const message of messages) {
      const item = doc.createElement("li");
      item.textContent = message;
      violationsList.appendChild(item);
    }
  }

  function showTask(view: TaskView): void {
    task = view;
    selection = emptySelection();
    noteField.value = "";
    el<HTMLElement>("src").textContent = view.src_en;
    renderReference(el<HTMLElement>("ref"), view.ref_gendered, view.term_spans);
    el<HTMLElement>("output").textContent = view.output_text;
    el<HTMLElement>("progress").textContent =
      `${view.progress.done} of ${view.progress.total} judged`;
    renderViolations([]);
    renderSelection();
    taskCard.hidden = false;
    doneScreen.hidden = true;
    errorBanner.hidden = true;
  }

  async function loadTask(): Promise<void> {
    let response;
    try {
      response = await api.fetchTask(raterId);
    } catch (error) {
      task = null;
      taskCard.hidden = true;
      doneScreen.hidden = true;
      errorBanner.hidden = false;
      el<HTMLElement>("error-text").textContent =
        `Could not reach the annotation server (${String(error)}).`;
      return;
    }
    if (isDone(response)) {
      task = null;
      taskCard.hidden = true;
      errorBanner.hidden = true;
      doneScreen.hidden = false;
      el<HTMLElement>("done-text").textContent =
        `You judged all ${response.progress.total} assigned outputs.`;
      return;
    }
    showTask(response);
  }

  async function submit(): Promise<void> {
    if (task === null) {
      return;
    }
    const violations = validateSelection(selection);
    if (violations.length > 0) {
      renderViolations(violations); // blocked client-side, nothing is sent
      return;
    }
    const payload = buildSubmission(task.output_key, raterId, selection);
    if (payload === null) {
      return;
    }
    const result = await api.submitAnnotation(payload);
    if (!result.accepted) {
      renderViolations(result.violations ?? ["submission rejected"]);
      return;
    }
    await loadTask();
  }

  function apply(action: KeyAction): void {
    if (task === null) {
      return;
    }
    if (action.kind === "layer1") {
      selection = selectLayer1(selection, action.value);
    } else if (action.kind === "layer2") {
      selection = selectLayer2(selection, action.value);
    }
    renderSelection();
  }

  let pending: Promise<void> = Promise.resolve();
  function track(op: () => Promise<void>): void {
    pending = pending.then(op, op);
  }

  layer1Group.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const value = target.dataset?.layer1 as Layer1 | undefined;
    if (value) {
      apply({ kind: "layer1", value });
    }
  });
  layer2Group.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const value = target.dataset?.layer2 as Layer2 | undefined;
    if (value) {
      apply({ kind: "layer2", value });
    }
  });
  noteField.addEventListener("input", () => {
    selection = setNote(selection, noteField.value);
  });
  el<HTMLButtonElement>("submit").addEventListener("click", () => track(submit));
  el<HTMLButtonElement>("retry").addEventListener("click", () => track(loadTask));

  const onKeydown = (event: KeyboardEvent): void => {
    if (shouldIgnore(event.target)) {
      return;
    }
    const action = actionForKey(event.key);
    if (action === null) {
      return;
    }
    event.preventDefault();
    if (action.kind === "submit") {
      track(submit);
    } else {
      apply(action);
    }
  };
  doc.addEventListener("keydown", onKeydown);

  track(loadTask);
  return {
    idle: () => pending,
    dispose: () => doc.removeEventListener("keydown", onKeydown),
  };
}
