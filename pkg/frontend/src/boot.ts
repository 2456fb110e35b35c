/** Browser entry point: resolve the rater id, then mount the app. */

import { httpApi } from "./api.js";
import { mountApp } from "./main.js";

function renderRaterForm(root: HTMLElement): void {
  root.innerHTML = `
    <form id="rater-form">
      <label>Rater id <input id="rater-input" autocomplete="off"></label>
      <button type="submit">Start</button>
    </form>
  `;
  const form = root.querySelector<HTMLFormElement>("#rater-form");
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const value = root.querySelector<HTMLInputElement>("#rater-input")?.value.trim() ?? "";
    if (value !== "") {
      window.location.search = `?rater=${encodeURIComponent(value)}`;
    }
  });
}

const root = document.getElementById("app");
if (root instanceof HTMLElement) {
  const rater = new URLSearchParams(window.location.search).get("rater");
  if (rater) {
    mountApp(root, httpApi, rater);
  } else {
    renderRaterForm(root);
  }
}
