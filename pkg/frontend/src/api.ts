/** Typed client for the annotation service's HTTP/JSON endpoints. The UI
 * talks to the backend exclusively through this module. */

import { AnnotationBody, GenerationRecord, StoredAnnotation } from "./types.js";

export interface ViolationDetail {
  kind: string;
  record_id?: string;
  message: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly violations: ViolationDetail[];

  constructor(status: number, message: string, violations: ViolationDetail[] = []) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.violations = violations;
  }
}

export interface QuizMaterial {
  exercises: { text: string; instructions: string; target_type: string }[];
  mcqs: { text: string; span: { start: number; end: number }; choices: string[] }[];
  real_task: { text: string };
  pass_score: number;
}

export interface QualificationResult {
  score: number;
  passed: boolean;
  breakdown: Record<string, number | boolean>;
}

export interface SpanAnswerBody {
  start: number;
  end: number;
  error_type: string;
}

export interface QualificationBody {
  annotator_id: string;
  exercise_answers: (SpanAnswerBody | null)[];
  mcq_answers: (number | null)[];
  real_task_spans: SpanAnswerBody[];
}

async function parseError(res: Response): Promise<ApiError> {
  let detail: unknown = null;
  try {
    detail = (await res.json()).detail;
  } catch {
    /* non-JSON body */
  }
  if (Array.isArray(detail)) {
    const violations = detail as ViolationDetail[];
    const message = violations.map((v) => `${v.kind}: ${v.message}`).join("; ");
    return new ApiError(res.status, message || res.statusText, violations);
  }
  return new ApiError(res.status, typeof detail === "string" ? detail : res.statusText);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!res.ok) {
      throw await parseError(res);
    }
    return (await res.json()) as T;
  }

  nextTask(annotatorId: string): Promise<{ task: GenerationRecord | null }> {
    return this.request(`/api/tasks/next?annotator_id=${encodeURIComponent(annotatorId)}`);
  }

  submitAnnotation(body: AnnotationBody): Promise<{ annotation_id: string }> {
    return this.request("/api/annotations", { method: "POST", body: JSON.stringify(body) });
  }

  getGeneration(id: string): Promise<GenerationRecord> {
    return this.request(`/api/generations/${encodeURIComponent(id)}`);
  }

  getAnnotations(id: string): Promise<StoredAnnotation[]> {
    return this.request(`/api/generations/${encodeURIComponent(id)}/annotations`);
  }

  getQuiz(): Promise<QuizMaterial> {
    return this.request("/api/qualification");
  }

  submitQualification(body: QualificationBody): Promise<QualificationResult> {
    return this.request("/api/qualification", { method: "POST", body: JSON.stringify(body) });
  }

  getReport(kind: string): Promise<unknown> {
    return this.request(`/api/reports/${encodeURIComponent(kind)}`);
  }
}
