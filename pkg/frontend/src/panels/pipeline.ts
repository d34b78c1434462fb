// Pipeline panel: the nine steps with run/interrupt/rewind controls and
// the threshold inputs. Grey badges mark artifacts invalidated by a
// parameter change upstream.

import { escapeHtml } from "../format.js";
import { staleSteps } from "../state.js";
import type { SessionDescriptor, StepId } from "../types.js";
import { STEP_ORDER } from "../types.js";

export function renderPipeline(session: SessionDescriptor): string {
  const stale = new Set(staleSteps(session));
  const rows = STEP_ORDER.map((step) => renderStepRow(session, step, stale.has(step)));
  const sigma = session.params.sigma;
  const minOverlap = session.params.filters["transaction"]?.["min_overlap"] ?? "";
  return `
<section class="pipeline">
  <h2>Discovery pipeline</h2>
  <div class="kb-line">case base ${escapeHtml(session.kb_digest.slice(0, 12))}…,
    ${session.case_count} cases, session revision ${session.revision}</div>
  <div class="params">
    <label>support threshold σ
      <input type="number" step="0.01" min="0" max="1" value="${sigma}" data-param="sigma">
    </label>
    <label>pair overlap k
      <input type="number" step="1" min="0" value="${minOverlap}" data-param="min_overlap"
             placeholder="off">
    </label>
    <button data-action="apply-params">apply</button>
  </div>
  <ol class="steps">${rows.join("")}</ol>
</section>`;
}

function renderStepRow(session: SessionDescriptor, step: StepId, isStale: boolean): string {
  const info = session.steps[step];
  const running = session.status === "running" && session.running_step === step;
  const classes = ["step"];
  if (info.present) classes.push("done");
  if (isStale) classes.push("stale");
  if (running) classes.push("running");
  const badge = running
    ? `<span class="badge running">${progressText(session)}</span>`
    : info.present
      ? `<span class="badge done">done</span>`
      : isStale
        ? `<span class="badge stale">stale</span>`
        : `<span class="badge">–</span>`;
  const controls = running
    ? `<button data-action="interrupt" data-step="${step}">interrupt</button>`
    : `<button data-action="run" data-step="${step}">run</button>
       <button data-action="go-back" data-step="${step}">rewind</button>`;
  return `
  <li class="${classes.join(" ")}" data-step="${step}">
    <span class="step-id">${step}</span>
    <span class="step-title">${escapeHtml(info.title)}</span>
    ${badge}
    <span class="controls">${controls}</span>
  </li>`;
}

function progressText(session: SessionDescriptor): string {
  const progress = session.progress ?? {};
  if (typeof progress.fraction === "number") {
    return `${Math.round(progress.fraction * 100)}%`;
  }
  if (typeof progress.closed_sets === "number") {
    return `${progress.closed_sets} closed sets`;
  }
  return "running";
}
