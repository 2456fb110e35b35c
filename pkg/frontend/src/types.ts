/** Wire types for the annotation server's JSON API. */

export type Layer1 = "N" | "G" | "P";
export type Layer2 = "Acc" | "S_Acc" | "S_Un" | "Un";

export const LAYER1_LABELS: readonly Layer1[] = ["N", "G", "P"];
export const LAYER2_LABELS: readonly Layer2[] = ["Acc", "S_Acc", "S_Un", "Un"];

/** Half-open word-index range into ref_gendered marking a gendered term. */
export interface TermSpan {
  gendered_text: string;
  start: number;
  end: number;
}

export interface Progress {
  done: number;
  total: number;
}

/** One judgment task. The server never reveals which system produced it. */
export interface TaskView {
  output_key: [string, string];
  src_en: string;
  ref_gendered: string;
  term_spans: TermSpan[];
  output_text: string;
  progress: Progress;
}

/** Returned instead of a task once the rater's queue is exhausted. */
export interface DoneView {
  done: true;
  progress: Progress;
}

export type TaskResponse = TaskView | DoneView;

export function isDone(response: TaskResponse): response is DoneView {
  return "done" in response && response.done === true;
}

export interface Submission {
  output_key: [string, string];
  rater_id: string;
  layer1: Layer1;
  layer2?: Layer2;
  note?: string;
}

export interface SubmitResult {
  accepted: boolean;
  violations?: string[];
  progress?: Progress;
}

/** The slice of the server API the app consumes; injectable for tests. */
export interface Api {
  fetchTask(raterId: string): Promise<TaskResponse>;
  submitAnnotation(payload: Submission): Promise<SubmitResult>;
}
