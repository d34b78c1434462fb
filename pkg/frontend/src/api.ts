// Typed client for the session service. Every mutation carries the session
// token; callers may pin a revision so concurrent edits surface as
// ConflictError instead of silently clobbering each other.

import type {
  ApplyOutcome,
  FciPage,
  FciRow,
  RulePayload,
  SessionDescriptor,
  StepId,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

export interface FciQuery {
  sort?: "support" | "items" | "id";
  dir?: "asc" | "desc";
  group?: boolean;
  page?: number;
  pageSize?: number;
  minSupport?: number;
  contains?: string;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    ifMatch?: number,
  ): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (method !== "GET") {
      headers["X-Session-Token"] = this.token;
      if (ifMatch !== undefined) headers["If-Match"] = String(ifMatch);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let message = `${resp.status}`;
      try {
        const payload = (await resp.json()) as { error?: string };
        if (payload.error) message = payload.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (resp.status === 409) throw new ConflictError(message);
      throw new ApiError(resp.status, message);
    }
    return (await resp.json()) as T;
  }

  getSession(): Promise<SessionDescriptor> {
    return this.request("GET", "/api/session");
  }

  resetSession(): Promise<SessionDescriptor> {
    return this.request("POST", "/api/session", {});
  }

  setParams(updates: Record<string, unknown>, ifMatch?: number): Promise<unknown> {
    return this.request("PUT", "/api/params", updates, ifMatch);
  }

  runStep(step: StepId, wait = false, params?: Record<string, unknown>): Promise<SessionDescriptor> {
    return this.request("POST", `/api/steps/${step}/run`, { wait, params });
  }

  interrupt(step: StepId): Promise<{ interrupted: boolean; status: string }> {
    return this.request("POST", `/api/steps/${step}/interrupt`, {});
  }

  goBack(step: StepId): Promise<SessionDescriptor> {
    return this.request("POST", "/api/go-back", { step });
  }

  queryFcis(query: FciQuery = {}): Promise<FciPage> {
    const params = new URLSearchParams();
    if (query.sort) params.set("sort", query.sort);
    if (query.dir) params.set("dir", query.dir);
    if (query.group) params.set("group", "pb");
    if (query.page !== undefined) params.set("page", String(query.page));
    if (query.pageSize !== undefined) params.set("page_size", String(query.pageSize));
    if (query.minSupport !== undefined) params.set("min_support", String(query.minSupport));
    if (query.contains) params.set("contains", query.contains);
    const qs = params.toString();
    return this.request("GET", `/api/fcis${qs ? "?" + qs : ""}`);
  }

  fciDetail(id: string): Promise<FciRow> {
    return this.request("GET", `/api/fcis/${id}`);
  }

  listRules(): Promise<{ rules: RulePayload[] }> {
    return this.request("GET", "/api/rules");
  }

  createRule(fciId: string): Promise<RulePayload> {
    return this.request("POST", "/api/rules", { fci_id: fciId });
  }

  validateRule(
    id: string,
    verdict: "validated" | "rejected",
    explanation: string,
    author = "analyst",
  ): Promise<RulePayload> {
    return this.request("POST", `/api/rules/${id}/validate`, { verdict, explanation, author });
  }

  applyRule(id: string, sourceCaseId: string, targetProblem: string): Promise<ApplyOutcome> {
    return this.request("POST", `/api/rules/${id}/apply`, {
      source_case_id: sourceCaseId,
      target_problem: targetProblem,
    });
  }

  async exportText(kind: "fcis" | "rules" | "transactions"): Promise<string> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/export/${kind}`, { method: "GET" });
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return resp.text();
  }
}
