/** Error taxonomy and wire types shared across the UI modules. */

export const ERROR_TYPES = [
  "Grammar_Usage",
  "Off_Prompt",
  "Redundant",
  "Self_Contradiction",
  "Incoherent",
  "Bad_Math",
  "Encyclopedic",
  "Commonsense",
  "Needs_Google",
  "Technical_Jargon",
] as const;

export type ErrorType = (typeof ERROR_TYPES)[number];

export type Category = "language" | "factual" | "reader";

export const TYPE_CATEGORIES: Record<ErrorType, Category> = {
  Grammar_Usage: "language",
  Off_Prompt: "language",
  Redundant: "language",
  Self_Contradiction: "language",
  Incoherent: "language",
  Bad_Math: "factual",
  Encyclopedic: "factual",
  Commonsense: "factual",
  Needs_Google: "reader",
  Technical_Jargon: "reader",
};

/** Types that may carry a link back to the first mention. */
export const ANTECEDENT_TYPES: ReadonlySet<ErrorType> = new Set([
  "Redundant",
  "Self_Contradiction",
]);

export const SEVERITY_LABELS: Record<1 | 2 | 3, string> = {
  1: "1 — minor, barely noticeable",
  2: "2 — noticeable problem",
  3: "3 — breaks comprehension",
};

export interface SpanBody {
  start: number;
  end: number;
  error_type: ErrorType;
  severity: number;
  explanation: string;
  antecedent: { start: number; end: number } | null;
}

export interface AnnotationBody {
  annotation_id: string;
  generation_id: string;
  annotator_id: string;
  duration_seconds: number | null;
  spans: SpanBody[];
}

export interface GenerationRecord {
  generation_id: string;
  prompt: string;
  generation: string;
  source: string;
  [key: string]: unknown;
}

export interface StoredAnnotation {
  annotation_id: string;
  generation_id: string;
  annotator_id: string;
  spans: SpanBody[];
  [key: string]: unknown;
}
