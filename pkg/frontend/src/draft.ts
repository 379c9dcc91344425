/**
 * Draft state for one annotation session: span creation with live
 * re-snapping, the two-step antecedent linking mode, edit/delete of saved
 * spans, and the submit gate. No network traffic happens here; the caller
 * posts the built body exactly once on explicit submit.
 */

import {
  CharSpan,
  SnapEmptyError,
  snapToWordBoundaries,
  tokenize,
} from "./snap.js";
import {
  ANTECEDENT_TYPES,
  AnnotationBody,
  ErrorType,
  SpanBody,
} from "./types.js";

export interface DraftSpan {
  id: number;
  raw: CharSpan;
  /** Recomputed from raw on every selection change; null = whitespace only. */
  snapped: CharSpan | null;
  errorType: ErrorType | null;
  severity: 1 | 2 | 3 | null;
  explanation: string;
  antecedent: CharSpan | null;
  saved: boolean;
}

export type LinkMode = { kind: "span" } | { kind: "antecedent"; spanId: number };

export class AnnotationDraft {
  readonly generationId: string;
  readonly text: string;
  private readonly tokens: CharSpan[];
  private nextId = 1;
  private spansById = new Map<number, DraftSpan>();
  private mode: LinkMode = { kind: "span" };
  private startedAt = Date.now();

  constructor(generationId: string, text: string) {
    this.generationId = generationId;
    this.text = text;
    this.tokens = tokenize(text);
  }

  get spans(): DraftSpan[] {
    return [...this.spansById.values()];
  }

  get linkMode(): LinkMode {
    return this.mode;
  }

  snap(raw: CharSpan): CharSpan | null {
    try {
      return snapToWordBoundaries(raw, this.tokens);
    } catch (e) {
      if (e instanceof SnapEmptyError) return null;
      throw e;
    }
  }

  /**
   * Route a text selection: creates a new span in span mode, or attaches
   * the snapped selection as the antecedent of the pending span in
   * antecedent mode. Returns the affected span, or null when the selection
   * snapped to nothing.
   */
  applySelection(raw: CharSpan): DraftSpan | null {
    const snapped = this.snap(raw);
    if (this.mode.kind === "antecedent") {
      const span = this.spansById.get(this.mode.spanId);
      this.mode = { kind: "span" };
      if (!span || snapped === null) return null;
      if (span.snapped && snapped.start === span.snapped.start && snapped.end === span.snapped.end) {
        return span; // antecedent must differ from the span itself; ignored
      }
      span.antecedent = snapped;
      return span;
    }
    if (snapped === null) return null;
    const span: DraftSpan = {
      id: this.nextId++,
      raw,
      snapped,
      errorType: null,
      severity: null,
      explanation: "",
      antecedent: null,
      saved: false,
    };
    this.spansById.set(span.id, span);
    return span;
  }

  /** Re-snap an existing span after its raw selection is adjusted. */
  updateSelection(spanId: number, raw: CharSpan): DraftSpan {
    const span = this.require(spanId);
    span.raw = raw;
    span.snapped = this.snap(raw);
    return span;
  }

  setType(spanId: number, errorType: ErrorType): DraftSpan {
    const span = this.require(spanId);
    span.errorType = errorType;
    if (!ANTECEDENT_TYPES.has(errorType)) {
      span.antecedent = null;
    }
    return span;
  }

  setSeverity(spanId: number, severity: 1 | 2 | 3): DraftSpan {
    const span = this.require(spanId);
    span.severity = severity;
    return span;
  }

  setExplanation(spanId: number, explanation: string): DraftSpan {
    const span = this.require(spanId);
    span.explanation = explanation;
    return span;
  }

  /** Step one of antecedent linking: the next selection becomes the link. */
  beginAntecedentLink(spanId: number): void {
    const span = this.require(spanId);
    if (!span.errorType || !ANTECEDENT_TYPES.has(span.errorType)) {
      throw new Error(`${span.errorType ?? "untyped"} spans do not take an antecedent`);
    }
    this.mode = { kind: "antecedent", spanId };
  }

  clearAntecedent(spanId: number): void {
    this.require(spanId).antecedent = null;
  }

  deleteSpan(spanId: number): void {
    this.spansById.delete(spanId);
    if (this.mode.kind === "antecedent" && this.mode.spanId === spanId) {
      this.mode = { kind: "span" };
    }
  }

  save(spanId: number): DraftSpan {
    const span = this.require(spanId);
    if (!canSaveSpan(span)) {
      throw new Error("span is incomplete");
    }
    span.saved = true;
    return span;
  }

  /** Zero saved spans is a valid submission (clean-text judgment). */
  get canSubmit(): boolean {
    return this.spans.every((s) => s.saved && canSaveSpan(s));
  }

  toBody(annotationId: string, annotatorId: string): AnnotationBody {
    if (!this.canSubmit) {
      throw new Error("draft has unsaved or incomplete spans");
    }
    const spans: SpanBody[] = this.spans.map((s) => ({
      start: s.snapped!.start,
      end: s.snapped!.end,
      error_type: s.errorType!,
      severity: s.severity!,
      explanation: s.explanation,
      antecedent: s.antecedent ? { start: s.antecedent.start, end: s.antecedent.end } : null,
    }));
    return {
      annotation_id: annotationId,
      generation_id: this.generationId,
      annotator_id: annotatorId,
      duration_seconds: (Date.now() - this.startedAt) / 1000,
      spans,
    };
  }

  private require(spanId: number): DraftSpan {
    const span = this.spansById.get(spanId);
    if (!span) throw new Error(`no draft span ${spanId}`);
    return span;
  }
}

/** Submit gate: type, severity and a non-empty explanation are mandatory;
 * the span must have snapped to at least one token; an antecedent is legal
 * only on types that support one. */
export function canSaveSpan(span: DraftSpan): boolean {
  if (span.snapped === null) return false;
  if (span.errorType === null || span.severity === null) return false;
  if (span.explanation.trim().length === 0) return false;
  if (span.antecedent !== null && !ANTECEDENT_TYPES.has(span.errorType)) return false;
  return true;
}
