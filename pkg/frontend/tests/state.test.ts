import { describe, expect, it } from "vitest";

import {
  Store,
  fcisAreStale,
  initialState,
  nextStep,
  pageCount,
  setPage,
  staleSteps,
  toggleSort,
  withFcis,
  withSession,
} from "../src/state.js";
import type { SessionDescriptor, StepId } from "../src/types.js";
import { STEP_ORDER } from "../src/types.js";

function descriptor(present: StepId[], revision = 1): SessionDescriptor {
  const steps = Object.fromEntries(
    STEP_ORDER.map((s) => [s, { title: s, present: present.includes(s), digest: null }]),
  ) as SessionDescriptor["steps"];
  return {
    id: "sess",
    kb_digest: "d".repeat(64),
    case_count: 4,
    status: "idle",
    running_step: null,
    progress: {},
    revision,
    params: { sigma: 0.1, workers: 1, time_budget: null, max_items: null, filters: {} },
    steps,
  };
}

describe("staleness tracking", () => {
  it("fci cache is stale until fetched and after any new revision", () => {
    let state = initialState();
    expect(fcisAreStale(state)).toBe(true);
    state = withSession(state, descriptor(["s1"], 3));
    state = withFcis(state, { total: 0, page: 0, fcis: [] }, 3);
    expect(fcisAreStale(state)).toBe(false);
    state = withSession(state, descriptor(["s1"], 4));
    expect(fcisAreStale(state)).toBe(true);
  });

  it("steps invalidated upstream are reported stale", () => {
    const session = descriptor(["s1", "s2", "s3", "s6", "s7"]);
    expect(staleSteps(session)).toEqual(["s4", "s5"]);
    expect(staleSteps(descriptor(STEP_ORDER.slice()))).toEqual([]);
  });

  it("next step is the first missing one", () => {
    expect(nextStep(descriptor([]))).toBe("s1");
    expect(nextStep(descriptor(["s1", "s2"]))).toBe("s3");
    expect(nextStep(descriptor(STEP_ORDER.slice()))).toBe(null);
  });

  it("uses a structural equality-free store that notifies subscribers", () => {
    const store = new Store();
    const seen: number[] = [];
    const unsubscribe = store.subscribe((s) => seen.push(s.pending));
    store.update((s) => ({ ...s, pending: 1 }));
    store.update((s) => ({ ...s, pending: 2 }));
    unsubscribe();
    store.update((s) => ({ ...s, pending: 3 }));
    expect(seen).toEqual([1, 2]);
  });
});

describe("browse state", () => {
  it("sort toggles flip direction on repeat and reset paging", () => {
    let browse = initialState().browse;
    browse = setPage(browse, 4);
    browse = toggleSort(browse, "support");
    expect(browse).toMatchObject({ sort: "support", dir: "asc", page: 0 });
    browse = toggleSort(browse, "support");
    expect(browse.dir).toBe("desc");
    browse = toggleSort(browse, "items");
    expect(browse).toMatchObject({ sort: "items", dir: "desc", page: 0 });
  });

  it("paging never goes negative", () => {
    const browse = setPage(initialState().browse, -5);
    expect(browse.page).toBe(0);
  });

  it("page count covers the remainder page", () => {
    expect(pageCount(0, 25)).toBe(1);
    expect(pageCount(25, 25)).toBe(1);
    expect(pageCount(26, 25)).toBe(2);
  });
});
