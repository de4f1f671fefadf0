/** Deterministic HTML rendering: the same state always yields the same markup. */

import type { TraceEntry } from "./protocol.js";
import { canSubmitFragment, State } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTraceEntry(entry: TraceEntry, depth: number): string {
  const parts: string[] = [];
  const head =
    entry.kind === "case"
      ? `case ${entry.var} := ${entry.pattern}`
      : `goal (${entry.strategy ?? "?"})`;
  parts.push(
    `<li class="trace-entry" data-depth="${depth}">` +
      `<span class="trace-head">${escapeHtml(head)}</span>` +
      `<code class="trace-goal">${escapeHtml(entry.goal)}</code>`
  );
  for (const h of entry.hypotheses ?? []) {
    parts.push(
      `<div class="trace-hyp"><code>${escapeHtml(h.label)} : ${escapeHtml(
        h.formula
      )}</code></div>`
    );
  }
  parts.push("</li>");
  return parts.join("");
}

export function renderPrompt(state: State): string {
  const p = state.prompt;
  if (p === null) {
    return `<section class="prompt empty"></section>`;
  }
  const trace = p.trace
    .map((entry, i) => renderTraceEntry(entry, i))
    .join("");
  const hyps = p.hypotheses
    .map(
      (h) =>
        `<li><code>${escapeHtml(h.label)} : ${escapeHtml(h.formula)}</code></li>`
    )
    .join("");
  const error = state.lastError
    ? `<p class="error">${escapeHtml(state.lastError)}</p>`
    : "";
  return (
    `<section class="prompt">` +
    `<h2>${escapeHtml(p.theorem)}</h2>` +
    `<ol class="trace">${trace}</ol>` +
    `<ul class="hypotheses">${hyps}</ul>` +
    `<p class="goal">My goal is: <code>${escapeHtml(p.goal)}</code></p>` +
    error +
    `</section>`
  );
}

export function renderControls(state: State): string {
  const enabled = canSubmitFragment(state);
  const attr = enabled ? "" : " disabled";
  return (
    `<div class="controls" data-phase="${state.phase}">` +
    `<textarea id="fragment" placeholder="Type a proof fragment"${attr}></textarea>` +
    `<button id="submit"${attr}>Submit fragment</button>` +
    `<button id="skip"${attr}>Skip</button>` +
    `<button id="abort"${attr}>Abort</button>` +
    `</div>`
  );
}

export function renderOutcome(state: State): string {
  if (state.phase === "failed") {
    return `<section class="outcome failed">Failed: ${escapeHtml(
      state.failureReason
    )}</section>`;
  }
  if (state.phase === "done" || state.phase === "done_with_gaps") {
    const note = state.phase === "done_with_gaps" ? " (with gaps)" : "";
    return (
      `<section class="outcome done">` +
      `<h2>Proved${note}</h2>` +
      `<h3>Gapped elaboration</h3>` +
      `<pre>${escapeHtml(state.elaboratedGapped)}</pre>` +
      `<h3>Full elaboration</h3>` +
      `<pre>${escapeHtml(state.elaboratedFull)}</pre>` +
      `</section>`
    );
  }
  return `<section class="outcome empty"></section>`;
}

export function renderApp(state: State): string {
  return (
    `<main>` +
    renderPrompt(state) +
    renderControls(state) +
    renderOutcome(state) +
    `</main>`
  );
}
