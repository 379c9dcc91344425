/**
 * DOM wiring: task view with span selection, type/severity pickers,
 * antecedent linking, submission, and the read-only overlay view.
 * All state logic lives in draft.ts/quiz.ts/overlay.ts; this file only
 * renders and forwards events.
 */

import { ApiClient, ApiError } from "./api.js";
import { AnnotationDraft, DraftSpan, canSaveSpan } from "./draft.js";
import { buildOverlay } from "./overlay.js";
import { QuizSession } from "./quiz.js";
import {
  ERROR_TYPES,
  ErrorType,
  SEVERITY_LABELS,
  TYPE_CATEGORIES,
} from "./types.js";

const api = new ApiClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function showError(message: string): void {
  const box = document.getElementById("errors")!;
  const item = el("div", { class: "error" }, message);
  box.appendChild(item);
  setTimeout(() => item.remove(), 8000);
}

function selectionOffsets(container: HTMLElement): { start: number; end: number } | null {
  const sel = window.getSelection();
  if (!sel || sel.rangeCount === 0 || sel.isCollapsed) return null;
  const range = sel.getRangeAt(0);
  if (!container.contains(range.commonAncestorContainer)) return null;
  const pre = range.cloneRange();
  pre.selectNodeContents(container);
  pre.setEnd(range.startContainer, range.startOffset);
  const start = pre.toString().length;
  const end = start + range.toString().length;
  return end > start ? { start, end } : null;
}

function renderSpanEditor(
  draft: AnnotationDraft,
  span: DraftSpan,
  rerender: () => void
): HTMLElement {
  const box = el("div", { class: "span-editor" });
  const snapped = span.snapped
    ? draft.text.slice(span.snapped.start, span.snapped.end)
    : "(whitespace only)";
  box.appendChild(el("div", { class: "span-text" }, `“${snapped}”`));

  const typeSelect = el("select");
  typeSelect.appendChild(el("option", { value: "" }, "error type…"));
  for (const t of ERROR_TYPES) {
    const opt = el("option", { value: t }, `${t} (${TYPE_CATEGORIES[t]})`);
    if (span.errorType === t) opt.selected = true;
    typeSelect.appendChild(opt);
  }
  typeSelect.onchange = () => {
    if (typeSelect.value) draft.setType(span.id, typeSelect.value as ErrorType);
    rerender();
  };
  box.appendChild(typeSelect);

  const sevBox = el("span", { class: "severity" });
  for (const level of [1, 2, 3] as const) {
    const btn = el(
      "button",
      { type: "button", class: span.severity === level ? "sev active" : "sev" },
      SEVERITY_LABELS[level]
    );
    btn.onclick = () => {
      draft.setSeverity(span.id, level);
      rerender();
    };
    sevBox.appendChild(btn);
  }
  box.appendChild(sevBox);

  const expl = el("textarea", { placeholder: "Why is this an error?" });
  expl.value = span.explanation;
  expl.oninput = () => draft.setExplanation(span.id, expl.value);
  box.appendChild(expl);

  if (span.errorType && (span.errorType === "Redundant" || span.errorType === "Self_Contradiction")) {
    const link = el("button", { type: "button" }, span.antecedent ? "re-link first mention" : "link first mention");
    link.onclick = () => {
      draft.beginAntecedentLink(span.id);
      showError("now select the first mention in the text");
    };
    box.appendChild(link);
    if (span.antecedent) {
      box.appendChild(
        el("span", { class: "antecedent" }, `↩ “${draft.text.slice(span.antecedent.start, span.antecedent.end)}”`)
      );
    }
  }

  const save = el("button", { type: "button" }, span.saved ? "saved" : "save span");
  save.disabled = !canSaveSpan(span);
  save.onclick = () => {
    draft.save(span.id);
    rerender();
  };
  box.appendChild(save);

  const del = el("button", { type: "button" }, "delete");
  del.onclick = () => {
    draft.deleteSpan(span.id);
    rerender();
  };
  box.appendChild(del);
  return box;
}

async function runTaskView(annotatorId: string): Promise<void> {
  const root = document.getElementById("app")!;
  root.replaceChildren();
  let task;
  try {
    task = (await api.nextTask(annotatorId)).task;
  } catch (e) {
    if (e instanceof ApiError && e.status === 403) {
      showError("not qualified yet — complete the quiz first");
      await runQuizView(annotatorId);
      return;
    }
    throw e;
  }
  if (!task) {
    root.appendChild(el("p", {}, "No tasks available. Thanks!"));
    return;
  }
  const draft = new AnnotationDraft(task.generation_id, task.generation);
  root.appendChild(el("h2", {}, "Prompt"));
  root.appendChild(el("p", { class: "prompt" }, task.prompt));
  root.appendChild(el("h2", {}, "Generated text — select spans that contain errors"));
  const textBox = el("div", { class: "text", id: "generation-text" }, task.generation);
  root.appendChild(textBox);
  const spanList = el("div", { id: "span-list" });
  root.appendChild(spanList);

  const submit = el("button", { type: "button", id: "submit" }, "submit annotation");
  root.appendChild(submit);

  const rerender = () => {
    spanList.replaceChildren(...draft.spans.map((s) => renderSpanEditor(draft, s, rerender)));
    submit.disabled = !draft.canSubmit;
  };

  textBox.onmouseup = () => {
    const offsets = selectionOffsets(textBox);
    if (!offsets) return;
    draft.applySelection(offsets);
    window.getSelection()?.removeAllRanges();
    rerender();
  };

  submit.onclick = async () => {
    try {
      const body = draft.toBody(crypto.randomUUID(), annotatorId);
      await api.submitAnnotation(body);
      await runTaskView(annotatorId); // fetch the next task
    } catch (e) {
      if (e instanceof ApiError) {
        for (const v of e.violations.length ? e.violations : [{ kind: "Error", message: e.message }]) {
          showError(`${v.kind}: ${v.message}`);
        }
      } else {
        throw e;
      }
    }
  };
  rerender();
}

async function runQuizView(annotatorId: string): Promise<void> {
  const root = document.getElementById("app")!;
  root.replaceChildren(el("h2", {}, "Qualification quiz"));
  const material = await api.getQuiz();
  const quiz = new QuizSession(material, window.localStorage);
  const status = el("p", { id: "quiz-status" });
  root.appendChild(status);
  const update = () => {
    const c = quiz.answeredCounts;
    status.textContent = `exercises ${c.exercises}/10 · questions ${c.mcqs}/10 · task spans ${c.realTask}`;
  };
  // (Exercise/MCQ/real-task widgets append here; each answer call persists
  // the draft locally so an abandoned quiz resumes on reload.)
  const submit = el("button", { type: "button" }, "submit quiz");
  submit.onclick = async () => {
    if (!quiz.isComplete) {
      showError("answer every exercise and question first");
      return;
    }
    const result = await api.submitQualification(quiz.toBody(annotatorId));
    quiz.clearDraft();
    root.appendChild(
      el("p", {}, `score ${result.score}/100 — ${result.passed ? "passed" : "not passed"}`)
    );
    if (result.passed) await runTaskView(annotatorId);
  };
  root.appendChild(submit);
  update();
}

async function runOverlayView(generationId: string): Promise<void> {
  const root = document.getElementById("app")!;
  root.replaceChildren(el("h2", {}, `Annotations for ${generationId}`));
  const gen = await api.getGeneration(generationId);
  const annotations = await api.getAnnotations(generationId);
  const model = buildOverlay(gen.generation, annotations);
  root.appendChild(el("p", { class: "text" }, gen.generation));
  if (model.empty) {
    root.appendChild(el("p", { class: "empty" }, "no annotations yet"));
    return;
  }
  for (const row of model.rows) {
    const strip = el("div", { class: "overlay-row" });
    strip.appendChild(el("span", { class: "annotator" }, row.annotatorId));
    const lane = el("div", { class: "lane" });
    for (const bar of row.bars) {
      const left = (100 * bar.start) / model.textLength;
      const width = (100 * (bar.end - bar.start)) / model.textLength;
      const piece = el("div", {
        class: `bar ${bar.isAntecedent ? "antecedent" : ""}`,
        style: `left:${left}%;width:${width}%;bottom:${bar.depth * 4}px`,
        title: `${bar.errorType} (severity ${bar.severity})`,
      });
      lane.appendChild(piece);
    }
    strip.appendChild(lane);
    root.appendChild(strip);
  }
}

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const overlay = params.get("overlay");
  if (overlay) {
    void runOverlayView(overlay);
    return;
  }
  const annotatorId = params.get("annotator") ?? `anon-${crypto.randomUUID().slice(0, 8)}`;
  void runTaskView(annotatorId);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
