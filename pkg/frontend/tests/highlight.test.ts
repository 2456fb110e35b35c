import { describe, expect, it } from "vitest";

import { referenceSegments, renderReference } from "../src/highlight.js";
import type { TermSpan } from "../src/types.js";

const REF = "Gli scrittori erano in ritardo .";

function span(start: number, end: number): TermSpan {
  return { gendered_text: "", start, end };
}

describe("referenceSegments", () => {
  it("splits around a single span", () => {
    expect(referenceSegments(REF, [span(0, 2)])).toEqual([
      { text: "Gli scrittori", marked: true },
      { text: "erano in ritardo .", marked: false },
    ]);
  });

  it("returns one plain segment when there are no spans", () => {
    expect(referenceSegments(REF, [])).toEqual([{ text: REF, marked: false }]);
  });

  it("merges adjacent and overlapping spans", () => {
    expect(referenceSegments(REF, [span(0, 2), span(1, 3)])).toEqual([
      { text: "Gli scrittori erano", marked: true },
      { text: "in ritardo .", marked: false },
    ]);
  });

  it("clamps spans that overshoot the sentence", () => {
    expect(referenceSegments("una parola", [span(1, 9)])).toEqual([
      { text: "una", marked: false },
      { text: "parola", marked: true },
    ]);
  });

  it("covers every word exactly once, in order, for random spans", () => {
    let seed = 7;
    const rng = () => {
      seed = (seed * 1664525 + 1013904223) >>> 0;
      return seed / 2 ** 32;
    };
    for (let round = 0; round < 300; round++) {
      const count = 1 + Math.floor(rng() * 12);
      const words = Array.from({ length: count }, (_, i) => `w${i}`);
      const spans: TermSpan[] = [];
      for (let s = 0; s < Math.floor(rng() * 3); s++) {
        const start = Math.floor(rng() * count);
        const end = start + 1 + Math.floor(rng() * (count - start));
        spans.push(span(start, end));
      }
      const segments = referenceSegments(words.join(" "), spans);
      expect(segments.map((s) => s.text).join(" ")).toBe(words.join(" "));
      for (let i = 1; i < segments.length; i++) {
        expect(segments[i].marked).not.toBe(segments[i - 1].marked);
      }
    }
  });
});

describe("renderReference", () => {
  it("renders exactly one mark element for one span", () => {
    const container = document.createElement("div");
    renderReference(container, REF, [span(0, 2)]);
    const marks = container.querySelectorAll("mark");
    expect(marks).toHaveLength(1);
    expect(marks[0].textContent).toBe("Gli scrittori");
    expect(container.textContent).toBe(REF);
  });

  it("renders no marks without spans", () => {
    const container = document.createElement("div");
    renderReference(container, REF, []);
    expect(container.querySelectorAll("mark")).toHaveLength(0);
    expect(container.textContent).toBe(REF);
  });

  it("replaces earlier content on rerender", () => {
    const container = document.createElement("div");
    renderReference(container, REF, [span(0, 2)]);
    renderReference(container, "Chi scrive era qui .", []);
    expect(container.textContent).toBe("Chi scrive era qui .");
    expect(container.querySelectorAll("mark")).toHaveLength(0);
  });
});
