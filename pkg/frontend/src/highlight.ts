/**
 * Rendering of the gendered reference with its term spans highlighted.
 *
 * Spans are half-open word-index ranges into the whitespace-split
 * reference, exactly as the server sends them.
 */

import type { TermSpan } from "./types.js";

export interface Segment {
  text: string;
  marked: boolean;
}

/**
 * Split a reference sentence into alternating plain and marked segments.
 * Overlapping or adjacent spans are merged; every word appears exactly once.
 */
export function referenceSegments(ref: string, spans: TermSpan[]): Segment[] {
  const words = ref.split(/\s+/).filter((w) => w !== "");
  const marked = new Array<boolean>(words.length).fill(false);
  for (const span of spans) {
    const start = Math.max(0, span.start);
    const end = Math.min(words.length, span.end);
    for (let i = start; i < end; i++) {
      marked[i] = true;
    }
  }
  const segments: Segment[] = [];
  for (let i = 0; i < words.length; i++) {
    const last = segments[segments.length - 1];
    if (last !== undefined && last.marked === marked[i]) {
      last.text += ` ${words[i]}`;
    } else {
      segments.push({ text: words[i], marked: marked[i] });
    }
  }
  return segments;
}

/** Fill a container with the reference text, marked segments as <mark>. */
export function renderReference(container: HTMLElement, ref: string, spans: TermSpan[]): void {
  container.textContent = "";
  const segments = referenceSegments(ref, spans);
  segments.forEach((segment, index) => {
    if (index > 0) {
      container.appendChild(container.ownerDocument.createTextNode(" "));
    }
    if (segment.marked) {
      const mark = container.ownerDocument.createElement("mark");
      mark.textContent = segment.text;
      container.appendChild(mark);
    } else {
      container.appendChild(container.ownerDocument.createTextNode(segment.text));
    }
  });
}
