// Shapes of the service responses the workbench consumes. The server is
// the source of truth for every number displayed; nothing here is computed
// client-side.

export type StepId = "s1" | "s2" | "s3" | "s4" | "s5" | "s6" | "s7" | "s8" | "s9";

export const STEP_ORDER: StepId[] = ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9"];

export interface StepInfo {
  title: string;
  present: boolean;
  digest: string | null;
}

export interface SessionDescriptor {
  id: string;
  kb_digest: string;
  case_count: number;
  status: "idle" | "running" | "interrupted";
  running_step: StepId | null;
  progress: { step?: string; fraction?: number; closed_sets?: number };
  revision: number;
  params: {
    sigma: number;
    workers: number;
    time_budget: number | null;
    max_items: number | null;
    filters: Record<string, Record<string, unknown>>;
  };
  steps: Record<StepId, StepInfo>;
  worker_error?: string | null;
}

export interface FciRow {
  fci_id: string;
  support_count: number;
  support: number;
  item_count: number;
  group_key: string;
  simplified_items: string[];
  raw_items: string[];
}

export interface FciPage {
  total: number;
  page: number;
  fcis?: FciRow[];
  total_groups?: number;
  groups?: { group_key: string; fcis: FciRow[] }[];
}

export interface RulePayload {
  id: string;
  source_fci_id: string;
  status: "candidate" | "validated" | "rejected";
  explanation: string;
  author: string;
  support_count: number;
  support: number;
  decision_removals: string[];
  decision_additions: string[];
  warnings: string[];
  description?: string;
  conditions?: Record<string, string[]>;
}

export interface ApplyOutcome {
  applicable: boolean;
  solution_properties?: string[];
  decisions?: string[];
}
