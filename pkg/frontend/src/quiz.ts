/**
 * Qualification quiz state: exercise/MCQ/real-task answers with a
 * locally-persisted resumable draft. Nothing is written to the server
 * until the whole response is submitted in one POST.
 */

import { QualificationBody, QuizMaterial, SpanAnswerBody } from "./api.js";

/** Minimal localStorage-compatible interface so tests can inject a fake. */
export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

interface QuizDraftState {
  exerciseAnswers: (SpanAnswerBody | null)[];
  mcqAnswers: (number | null)[];
  realTaskSpans: SpanAnswerBody[];
}

const DRAFT_KEY = "errspan-quiz-draft";

export class QuizSession {
  readonly material: QuizMaterial;
  private state: QuizDraftState;
  private readonly storage: DraftStorage | null;

  constructor(material: QuizMaterial, storage: DraftStorage | null = null) {
    this.material = material;
    this.storage = storage;
    this.state = {
      exerciseAnswers: material.exercises.map(() => null),
      mcqAnswers: material.mcqs.map(() => null),
      realTaskSpans: [],
    };
    this.restore();
  }

  private restore(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(DRAFT_KEY);
    if (!raw) return;
    try {
      const saved = JSON.parse(raw) as QuizDraftState;
      if (
        Array.isArray(saved.exerciseAnswers) &&
        saved.exerciseAnswers.length === this.state.exerciseAnswers.length &&
        Array.isArray(saved.mcqAnswers) &&
        saved.mcqAnswers.length === this.state.mcqAnswers.length &&
        Array.isArray(saved.realTaskSpans)
      ) {
        this.state = saved;
      }
    } catch {
      this.storage.removeItem(DRAFT_KEY);
    }
  }

  private persist(): void {
    this.storage?.setItem(DRAFT_KEY, JSON.stringify(this.state));
  }

  get exerciseAnswers(): readonly (SpanAnswerBody | null)[] {
    return this.state.exerciseAnswers;
  }

  get mcqAnswers(): readonly (number | null)[] {
    return this.state.mcqAnswers;
  }

  get realTaskSpans(): readonly SpanAnswerBody[] {
    return this.state.realTaskSpans;
  }

  answerExercise(index: number, answer: SpanAnswerBody | null): void {
    this.checkIndex(index, this.state.exerciseAnswers.length);
    this.state.exerciseAnswers[index] = answer;
    this.persist();
  }

  answerMcq(index: number, choice: number | null): void {
    this.checkIndex(index, this.state.mcqAnswers.length);
    if (choice !== null) {
      this.checkIndex(choice, this.material.mcqs[index].choices.length);
    }
    this.state.mcqAnswers[index] = choice;
    this.persist();
  }

  addRealTaskSpan(span: SpanAnswerBody): void {
    this.state.realTaskSpans.push(span);
    this.persist();
  }

  removeRealTaskSpan(index: number): void {
    this.checkIndex(index, this.state.realTaskSpans.length);
    this.state.realTaskSpans.splice(index, 1);
    this.persist();
  }

  /** Every exercise and MCQ answered (real-task spans may be empty). */
  get isComplete(): boolean {
    return (
      this.state.exerciseAnswers.every((a) => a !== null) &&
      this.state.mcqAnswers.every((a) => a !== null)
    );
  }

  get answeredCounts(): { exercises: number; mcqs: number; realTask: number } {
    return {
      exercises: this.state.exerciseAnswers.filter((a) => a !== null).length,
      mcqs: this.state.mcqAnswers.filter((a) => a !== null).length,
      realTask: this.state.realTaskSpans.length,
    };
  }

  toBody(annotatorId: string): QualificationBody {
    return {
      annotator_id: annotatorId,
      exercise_answers: [...this.state.exerciseAnswers],
      mcq_answers: [...this.state.mcqAnswers],
      real_task_spans: [...this.state.realTaskSpans],
    };
  }

  /** Call after a successful submit so a new quiz starts clean. */
  clearDraft(): void {
    this.storage?.removeItem(DRAFT_KEY);
  }

  private checkIndex(i: number, n: number): void {
    if (!Number.isInteger(i) || i < 0 || i >= n) {
      throw new RangeError(`index ${i} out of range 0..${n - 1}`);
    }
  }
}
