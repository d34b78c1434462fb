// Local workbench state: a cache over server responses keyed by the
// session revision. Views fetched at an older revision are stale and get
// flagged for refresh rather than trusted.

import type { FciPage, RulePayload, SessionDescriptor, StepId } from "./types.js";
import { STEP_ORDER } from "./types.js";

export interface BrowseState {
  sort: "support" | "items" | "id";
  dir: "asc" | "desc";
  group: boolean;
  page: number;
  pageSize: number;
  showRaw: boolean;
  selection: string | null;
}

export interface RuleEditorState {
  ruleId: string | null;
  explanation: string;
  sourceCaseId: string;
  targetProblem: string;
}

export interface WorkbenchState {
  session: SessionDescriptor | null;
  fcis: FciPage | null;
  fcisRevision: number | null;
  rules: RulePayload[];
  rulesRevision: number | null;
  browse: BrowseState;
  editor: RuleEditorState;
  pending: number;
  notice: string | null;
}

export function initialState(): WorkbenchState {
  return {
    session: null,
    fcis: null,
    fcisRevision: null,
    rules: [],
    rulesRevision: null,
    browse: {
      sort: "support",
      dir: "desc",
      group: false,
      page: 0,
      pageSize: 25,
      showRaw: false,
      selection: null,
    },
    editor: { ruleId: null, explanation: "", sourceCaseId: "", targetProblem: "" },
    pending: 0,
    notice: null,
  };
}

export type Listener = (state: WorkbenchState) => void;

export class Store {
  private state: WorkbenchState;
  private listeners = new Set<Listener>();

  constructor(state: WorkbenchState = initialState()) {
    this.state = state;
  }

  get(): WorkbenchState {
    return this.state;
  }

  update(fn: (state: WorkbenchState) => WorkbenchState): void {
    this.state = fn(this.state);
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}

export function withSession(state: WorkbenchState, session: SessionDescriptor): WorkbenchState {
  return { ...state, session };
}

export function withFcis(
  state: WorkbenchState,
  fcis: FciPage,
  revision: number,
): WorkbenchState {
  return { ...state, fcis, fcisRevision: revision };
}

export function withRules(
  state: WorkbenchState,
  rules: RulePayload[],
  revision: number,
): WorkbenchState {
  return { ...state, rules, rulesRevision: revision };
}

/** A cached view is stale once the server revision moved past the one it
 * was fetched at. */
export function fcisAreStale(state: WorkbenchState): boolean {
  if (state.fcis === null || state.fcisRevision === null) return true;
  return state.session !== null && state.session.revision !== state.fcisRevision;
}

export function rulesAreStale(state: WorkbenchState): boolean {
  if (state.rulesRevision === null) return true;
  return state.session !== null && state.session.revision !== state.rulesRevision;
}

/** Steps whose artifacts are gone because an earlier parameter changed;
 * the panel greys these out. */
export function staleSteps(session: SessionDescriptor): StepId[] {
  const present = STEP_ORDER.map((s) => session.steps[s].present);
  const lastPresent = present.lastIndexOf(true);
  const out: StepId[] = [];
  for (let i = 0; i < lastPresent; i += 1) {
    const step = STEP_ORDER[i];
    if (step !== undefined && !present[i]) out.push(step);
  }
  return out;
}

/** The next step the analyst would naturally run: first one missing. */
export function nextStep(session: SessionDescriptor): StepId | null {
  for (const step of STEP_ORDER) {
    if (!session.steps[step].present) return step;
  }
  return null;
}

export function toggleSort(
  browse: BrowseState,
  column: "support" | "items" | "id",
): BrowseState {
  if (browse.sort === column) {
    return { ...browse, dir: browse.dir === "desc" ? "asc" : "desc", page: 0 };
  }
  return { ...browse, sort: column, dir: "desc", page: 0 };
}

export function setPage(browse: BrowseState, page: number): BrowseState {
  return { ...browse, page: Math.max(0, page) };
}

export function pageCount(total: number, pageSize: number): number {
  return Math.max(1, Math.ceil(total / pageSize));
}
