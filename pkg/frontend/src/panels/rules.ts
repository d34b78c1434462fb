// Rule panel: candidate queue with status badges, an editor to validate or
// reject with an explanation, and a what-if form that previews a rule
// application against a typed-in target problem.

import { escapeHtml } from "../format.js";
import type { RuleEditorState } from "../state.js";
import type { ApplyOutcome, RulePayload } from "../types.js";

export function renderRulePanel(
  rules: RulePayload[],
  editor: RuleEditorState,
  applyPreview: ApplyOutcome | null,
): string {
  const list = rules.length
    ? rules.map((rule) => renderRuleRow(rule, rule.id === editor.ruleId)).join("")
    : `<p class="empty">No rule candidates yet. Pick an itemset and press "to rule".</p>`;
  const selected = rules.find((rule) => rule.id === editor.ruleId) ?? null;
  return `<section class="rules">
    <h2>Adaptation rules</h2>
    <div class="rule-list">${list}</div>
    ${selected ? renderEditor(selected, editor, applyPreview) : ""}
  </section>`;
}

function renderRuleRow(rule: RulePayload, selected: boolean): string {
  const actions = [
    ...rule.decision_removals.map((d) => `−${escapeHtml(d)}`),
    ...rule.decision_additions.map((d) => `+${escapeHtml(d)}`),
  ].join(" ");
  return `<div class="rule-row${selected ? " selected" : ""}" data-action="select-rule" data-rule="${rule.id}">
    <span class="badge status-${rule.status}">${rule.status}</span>
    <span class="rule-id">${rule.id.slice(0, 8)}</span>
    <span class="rule-actions">${actions || "property-level"}</span>
    <span class="num">${rule.support_count}</span>
  </div>`;
}

function renderEditor(
  rule: RulePayload,
  editor: RuleEditorState,
  applyPreview: ApplyOutcome | null,
): string {
  const warnings = rule.warnings.length
    ? `<div class="warnings">${rule.warnings.map((w) => escapeHtml(w)).join("<br>")}</div>`
    : "";
  const verdictControls =
    rule.status === "candidate"
      ? `<textarea data-field="explanation"
           placeholder="explanation for the validation record">${escapeHtml(editor.explanation)}</textarea>
         <button data-action="validate-rule" data-rule="${rule.id}">validate</button>
         <button data-action="reject-rule" data-rule="${rule.id}">reject</button>`
      : `<div class="verdict">${rule.status}${
          rule.explanation ? `: ${escapeHtml(rule.explanation)}` : ""
        }</div>`;
  const preview = applyPreview
    ? applyPreview.applicable
      ? `<div class="apply-result">target solution: ${(applyPreview.decisions ?? [])
          .map((d) => escapeHtml(d))
          .join(", ") || "(no decision-level entries)"}<br>
         <span class="props">${(applyPreview.solution_properties ?? [])
           .map((p) => escapeHtml(p))
           .join(", ")}</span></div>`
      : `<div class="apply-result not-applicable">rule does not apply to this pairing</div>`
    : "";
  return `<div class="rule-editor">
    <h3>rule ${rule.id.slice(0, 8)} <span class="support">(support ${rule.support_count})</span></h3>
    <pre class="description">${escapeHtml(rule.description ?? "")}</pre>
    ${warnings}
    ${verdictControls}
    <h4>what-if application</h4>
    <label>source case id
      <input data-field="sourceCaseId" value="${escapeHtml(editor.sourceCaseId)}" placeholder="case-000">
    </label>
    <label>target problem
      <input data-field="targetProblem" value="${escapeHtml(editor.targetProblem)}"
             placeholder="Class-1 and Feature-2 and (age >= 45)">
    </label>
    <button data-action="apply-rule" data-rule="${rule.id}">preview application</button>
    ${preview}
  </div>`;
}
