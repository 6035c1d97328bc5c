// Pure DOM construction for one task payload.  No handlers are attached
// here; the flow controller wires clicks through data attributes.
//
// Invariant for two_phase payloads: before the reveal the server sends
// masked tokens only, and this renderer adds nothing but the slot
// glyph, so the target form cannot reach the page.

import { SLOT_LITERAL, TaskPayload } from "./api.js";

export const SLOT_GLYPH = "___";

export interface ScaleSpec {
  measure: "info1" | "info2" | "info3";
  low: number;
  high: number;
}

/** Which measure the current phase collects, null while awaiting reveal. */
export function scaleFor(payload: TaskPayload): ScaleSpec | null {
  switch (payload.phase) {
    case "info1":
      return { measure: "info1", low: 1, high: 10 };
    case "info2":
      return { measure: "info2", low: 1, high: 10 };
    case "info3":
      return { measure: "info3", low: 1, high: 5 };
    default:
      return null;
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function errorBanner(message: string): HTMLElement {
  const banner = el("div", "banner banner-error", message);
  banner.setAttribute("role", "alert");
  return banner;
}

function sentenceLine(payload: TaskPayload): HTMLElement {
  const line = el("p", "sentence");
  (payload.tokens ?? []).forEach((tok, i) => {
    if (i > 0) line.append(" ");
    if (tok === SLOT_LITERAL) {
      line.append(el("span", "slot", SLOT_GLYPH));
    } else if (payload.target !== undefined && i === payload.position) {
      const mark = el("mark", "target", tok);
      line.append(mark);
    } else {
      line.append(el("span", "word", tok));
    }
  });
  return line;
}

function scaleRow(spec: ScaleSpec, enabled: boolean): HTMLElement {
  const row = el("div", "scale");
  row.dataset.measure = spec.measure;
  const label = el("span", "scale-label",
                   `${spec.measure} (${spec.low}-${spec.high})`);
  row.append(label);
  for (let v = spec.low; v <= spec.high; v++) {
    const btn = el("button", "score", String(v));
    btn.type = "button";
    btn.dataset.score = String(v);
    btn.disabled = !enabled;
    row.append(btn);
  }
  return row;
}

function guidelineList(lines: string[]): HTMLElement {
  const box = el("div", "guideline");
  const list = el("ol");
  for (const line of lines) {
    list.append(el("li", undefined, line.replace(/^\d+:\s*/, "")));
  }
  box.append(list);
  return box;
}

export function renderTask(payload: TaskPayload): HTMLElement {
  const view = el("section", "task-view");

  if (payload.done) {
    view.classList.add("done-screen");
    view.dataset.phase = "done";
    view.append(el("h2", undefined, "All tasks completed"));
    view.append(el("p", "progress",
                   `${payload.completed} of ${payload.total} tasks scored`));
    return view;
  }

  if (payload.scheme !== "two_phase" && payload.scheme !== "info3") {
    view.append(errorBanner(`unknown scheme: ${String(payload.scheme)}`));
    return view;
  }

  view.dataset.taskId = payload.task_id ?? "";
  view.dataset.phase = payload.phase ?? "";

  const progress = payload.progress;
  if (progress) {
    view.append(el("p", "progress",
                   `task ${progress.completed + 1} of ${progress.total}`));
  }
  view.append(sentenceLine(payload));

  if (payload.scheme === "info3" && payload.guideline) {
    view.append(guidelineList(payload.guideline));
  }

  const spec = scaleFor(payload);
  if (spec) {
    view.append(scaleRow(spec, true));
  } else {
    // info1 recorded, target still hidden: only the reveal advances
    view.append(scaleRow({ measure: "info2", low: 1, high: 10 }, false));
  }
  if (payload.scheme === "two_phase") {
    const reveal = el("button", "reveal", "Reveal the word");
    reveal.type = "button";
    reveal.dataset.action = "reveal";
    reveal.disabled = payload.phase !== "reveal";
    view.append(reveal);
  }
  const hint = payload.scheme === "info3"
    ? "keys 1-5 score"
    : "keys 1-9 and 0 score (0 is 10), r reveals";
  view.append(el("p", "hint", hint));
  return view;
}
