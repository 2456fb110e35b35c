/** Thin fetch wrappers over the annotation server's JSON API. */

import type { Api, Submission, SubmitResult, TaskResponse } from "./types.js";

export async function fetchTask(raterId: string): Promise<TaskResponse> {
  const response = await fetch(`/api/task?rater=${encodeURIComponent(raterId)}`);
  if (!response.ok) {
    throw new Error(`task fetch failed with status ${response.status}`);
  }
  return (await response.json()) as TaskResponse;
}

export async function submitAnnotation(payload: Submission): Promise<SubmitResult> {
  const response = await fetch("/api/annotation", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body = (await response.json()) as Record<string, unknown>;
  if (typeof body.accepted === "boolean") {
    return body as unknown as SubmitResult;
  }
  // 404-style bodies carry a detail message instead of a gating verdict
  const detail = typeof body.detail === "string" ? body.detail : "unexpected server response";
  return { accepted: false, violations: [detail] };
}

export const httpApi: Api = { fetchTask, submitAnnotation };
