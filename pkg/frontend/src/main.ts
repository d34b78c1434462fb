// Boot and event wiring. All state changes flow through the store; every
// displayed number comes from a server response.

import { ApiClient, ConflictError } from "./api.js";
import { pollUntilIdle } from "./poll.js";
import { renderFciPanel } from "./panels/fcis.js";
import { renderPipeline } from "./panels/pipeline.js";
import { renderRulePanel } from "./panels/rules.js";
import {
  Store,
  fcisAreStale,
  rulesAreStale,
  setPage,
  toggleSort,
  withFcis,
  withRules,
  withSession,
} from "./state.js";
import type { ApplyOutcome, StepId } from "./types.js";

function sessionToken(): string {
  const fromUrl = new URLSearchParams(window.location.search).get("token");
  if (fromUrl) {
    window.sessionStorage.setItem("adaptmine-token", fromUrl);
    return fromUrl;
  }
  const stored = window.sessionStorage.getItem("adaptmine-token");
  if (stored) return stored;
  const typed = window.prompt("session token (printed at service startup)") ?? "";
  window.sessionStorage.setItem("adaptmine-token", typed);
  return typed;
}

const store = new Store();
const client = new ApiClient(window.location.origin, sessionToken());
let applyPreview: ApplyOutcome | null = null;

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const state = store.get();
  if (state.session === null) {
    root.innerHTML = `<p class="empty">connecting…</p>`;
    return;
  }
  root.innerHTML = [
    state.notice ? `<div class="notice">${state.notice}</div>` : "",
    renderPipeline(state.session),
    renderFciPanel(state.fcis, state.browse, fcisAreStale(state), state.session.params.sigma),
    renderRulePanel(state.rules, state.editor, applyPreview),
  ].join("\n");
}

async function refreshSession(): Promise<void> {
  const session = await client.getSession();
  store.update((s) => withSession(s, session));
}

async function refreshFcis(): Promise<void> {
  const state = store.get();
  if (!state.session?.steps.s8.present) {
    store.update((s) => ({ ...s, fcis: null, fcisRevision: null }));
    return;
  }
  const { browse } = state;
  const page = await client.queryFcis({
    sort: browse.sort,
    dir: browse.dir,
    group: browse.group,
    page: browse.page,
    pageSize: browse.pageSize,
  });
  const revision = state.session.revision;
  store.update((s) => withFcis(s, page, revision));
}

async function refreshRules(): Promise<void> {
  const state = store.get();
  if (!state.session) return;
  const { rules } = await client.listRules();
  const revision = state.session.revision;
  store.update((s) => withRules(s, rules, revision));
}

async function refreshAll(): Promise<void> {
  await refreshSession();
  await refreshFcis();
  await refreshRules();
}

function notify(message: string | null): void {
  store.update((s) => ({ ...s, notice: message }));
}

async function guarded(work: () => Promise<void>): Promise<void> {
  store.update((s) => ({ ...s, pending: s.pending + 1 }));
  try {
    await work();
    notify(null);
  } catch (error) {
    if (error instanceof ConflictError) {
      notify(`conflict: ${error.message}; view refreshed`);
      await refreshAll();
    } else {
      notify(error instanceof Error ? error.message : String(error));
    }
  } finally {
    store.update((s) => ({ ...s, pending: Math.max(0, s.pending - 1) }));
  }
}

async function runStep(step: StepId): Promise<void> {
  await client.runStep(step, false);
  await pollUntilIdle(client, (session) => store.update((s) => withSession(s, session)));
  const finished = store.get().session;
  if (finished?.worker_error) notify(finished.worker_error);
  await refreshFcis();
  await refreshRules();
}

function fieldValue(selector: string): string {
  const el = document.querySelector<HTMLInputElement | HTMLTextAreaElement>(selector);
  return el ? el.value : "";
}

async function handleAction(target: HTMLElement): Promise<void> {
  const action = target.dataset["action"];
  const state = store.get();
  switch (action) {
    case "run":
      await runStep(target.dataset["step"] as StepId);
      break;
    case "interrupt":
      await client.interrupt(target.dataset["step"] as StepId);
      await refreshAll();
      break;
    case "go-back":
      await client.goBack(target.dataset["step"] as StepId);
      await refreshAll();
      break;
    case "apply-params": {
      const sigma = Number(fieldValue('input[data-param="sigma"]'));
      const overlapText = fieldValue('input[data-param="min_overlap"]');
      const updates: Record<string, unknown> = { sigma };
      updates["filters"] = {
        transaction: overlapText === "" ? {} : { min_overlap: Number(overlapText) },
      };
      await client.setParams(updates, state.session?.revision);
      await refreshAll();
      break;
    }
    case "sort":
      store.update((s) => ({
        ...s,
        browse: toggleSort(s.browse, target.dataset["sort"] as "support" | "items" | "id"),
      }));
      await refreshFcis();
      break;
    case "toggle-group":
      store.update((s) => ({
        ...s,
        browse: { ...s.browse, group: !s.browse.group, page: 0 },
      }));
      await refreshFcis();
      break;
    case "toggle-raw":
      store.update((s) => ({ ...s, browse: { ...s.browse, showRaw: !s.browse.showRaw } }));
      break;
    case "page-prev":
      store.update((s) => ({ ...s, browse: setPage(s.browse, s.browse.page - 1) }));
      await refreshFcis();
      break;
    case "page-next":
      store.update((s) => ({ ...s, browse: setPage(s.browse, s.browse.page + 1) }));
      await refreshFcis();
      break;
    case "select-fci":
      store.update((s) => ({
        ...s,
        browse: { ...s.browse, selection: target.dataset["fci"] ?? null },
      }));
      break;
    case "make-rule": {
      const made = await client.createRule(target.dataset["fci"] ?? "");
      store.update((s) => ({ ...s, editor: { ...s.editor, ruleId: made.id } }));
      await refreshAll();
      break;
    }
    case "select-rule":
      applyPreview = null;
      store.update((s) => ({
        ...s,
        editor: { ...s.editor, ruleId: target.dataset["rule"] ?? null, explanation: "" },
      }));
      break;
    case "validate-rule":
    case "reject-rule": {
      const verdict = action === "validate-rule" ? "validated" : "rejected";
      const explanation = fieldValue('textarea[data-field="explanation"]');
      await client.validateRule(target.dataset["rule"] ?? "", verdict, explanation);
      await refreshAll();
      break;
    }
    case "apply-rule": {
      applyPreview = await client.applyRule(
        target.dataset["rule"] ?? "",
        fieldValue('input[data-field="sourceCaseId"]'),
        fieldValue('input[data-field="targetProblem"]'),
      );
      store.update((s) => ({
        ...s,
        editor: {
          ...s.editor,
          sourceCaseId: fieldValue('input[data-field="sourceCaseId"]'),
          targetProblem: fieldValue('input[data-field="targetProblem"]'),
        },
      }));
      break;
    }
    case "refresh-fcis":
      await refreshFcis();
      break;
    default:
      return;
  }
}

export function boot(): void {
  store.subscribe(render);
  document.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    if (target instanceof HTMLInputElement && target.type === "checkbox") {
      // checkboxes toggle through their own change semantics; still routed
    } else {
      event.preventDefault();
    }
    void guarded(() => handleAction(target));
  });
  void guarded(refreshAll);
  // keep rule/fci staleness visible even if another client mutates
  window.setInterval(() => {
    const state = store.get();
    if (state.session?.status === "running") return;
    void refreshSession().then(() => {
      if (rulesAreStale(store.get())) void refreshRules();
    });
  }, 5000);
}

boot();
