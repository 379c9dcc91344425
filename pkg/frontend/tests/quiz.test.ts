import { describe, expect, it } from "vitest";
import { QuizMaterial, SpanAnswerBody } from "../src/api.js";
import { DraftStorage, QuizSession } from "../src/quiz.js";

function fakeStorage(): DraftStorage & { data: Map<string, string> } {
  const data = new Map<string, string>();
  return {
    data,
    getItem: (k) => data.get(k) ?? null,
    setItem: (k, v) => void data.set(k, v),
    removeItem: (k) => void data.delete(k),
  };
}

function material(): QuizMaterial {
  return {
    exercises: Array.from({ length: 10 }, (_, i) => ({
      text: `exercise text ${i}`,
      instructions: "mark the error",
      target_type: "Redundant",
    })),
    mcqs: Array.from({ length: 10 }, (_, i) => ({
      text: `mcq text ${i}`,
      span: { start: 0, end: 4 },
      choices: ["Grammar_Usage", "Redundant", "Bad_Math"],
    })),
    real_task: { text: "a longer passage with several problems" },
    pass_score: 90,
  };
}

const span = (start: number, end: number, t = "Redundant"): SpanAnswerBody => ({
  start,
  end,
  error_type: t,
});

describe("quiz session state", () => {
  it("starts empty and becomes complete once everything is answered", () => {
    const quiz = new QuizSession(material());
    expect(quiz.isComplete).toBe(false);
    for (let i = 0; i < 10; i++) quiz.answerExercise(i, span(i, i + 2));
    expect(quiz.isComplete).toBe(false);
    for (let i = 0; i < 10; i++) quiz.answerMcq(i, 1);
    expect(quiz.isComplete).toBe(true); // real-task spans may be empty
    expect(quiz.answeredCounts).toEqual({ exercises: 10, mcqs: 10, realTask: 0 });
  });

  it("bounds-checks indices and MCQ choices", () => {
    const quiz = new QuizSession(material());
    expect(() => quiz.answerExercise(10, span(0, 1))).toThrow(RangeError);
    expect(() => quiz.answerMcq(-1, 0)).toThrow(RangeError);
    expect(() => quiz.answerMcq(0, 3)).toThrow(RangeError);
    expect(() => quiz.removeRealTaskSpan(0)).toThrow(RangeError);
  });

  it("real-task spans can be added and removed", () => {
    const quiz = new QuizSession(material());
    quiz.addRealTaskSpan(span(0, 5));
    quiz.addRealTaskSpan(span(10, 15, "Bad_Math"));
    quiz.removeRealTaskSpan(0);
    expect(quiz.realTaskSpans).toEqual([span(10, 15, "Bad_Math")]);
  });

  it("builds the submission body", () => {
    const quiz = new QuizSession(material());
    for (let i = 0; i < 10; i++) quiz.answerExercise(i, span(i, i + 2));
    for (let i = 0; i < 10; i++) quiz.answerMcq(i, 2);
    quiz.addRealTaskSpan(span(3, 9));
    const body = quiz.toBody("ann-1");
    expect(body.annotator_id).toBe("ann-1");
    expect(body.exercise_answers).toHaveLength(10);
    expect(body.mcq_answers).toEqual(Array(10).fill(2));
    expect(body.real_task_spans).toEqual([span(3, 9)]);
  });
});

describe("resumable local draft", () => {
  it("persists every answer and restores into a fresh session", () => {
    const storage = fakeStorage();
    const first = new QuizSession(material(), storage);
    first.answerExercise(0, span(0, 4));
    first.answerMcq(3, 1);
    first.addRealTaskSpan(span(7, 12, "Incoherent"));

    const resumed = new QuizSession(material(), storage);
    expect(resumed.exerciseAnswers[0]).toEqual(span(0, 4));
    expect(resumed.mcqAnswers[3]).toBe(1);
    expect(resumed.realTaskSpans).toEqual([span(7, 12, "Incoherent")]);
  });

  it("ignores a draft whose shape no longer matches the material", () => {
    const storage = fakeStorage();
    const first = new QuizSession(material(), storage);
    first.answerMcq(0, 0);
    const smaller = material();
    smaller.mcqs = smaller.mcqs.slice(0, 5);
    const resumed = new QuizSession(smaller, storage);
    expect(resumed.answeredCounts.mcqs).toBe(0);
  });

  it("discards corrupt drafts instead of crashing", () => {
    const storage = fakeStorage();
    storage.setItem("errspan-quiz-draft", "{not json");
    const quiz = new QuizSession(material(), storage);
    expect(quiz.answeredCounts).toEqual({ exercises: 0, mcqs: 0, realTask: 0 });
    expect(storage.data.has("errspan-quiz-draft")).toBe(false);
  });

  it("clearDraft removes the stored draft after submit", () => {
    const storage = fakeStorage();
    const quiz = new QuizSession(material(), storage);
    quiz.answerMcq(0, 0);
    expect(storage.data.size).toBe(1);
    quiz.clearDraft();
    expect(storage.data.size).toBe(0);
  });
});
