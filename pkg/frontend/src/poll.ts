// Long steps run server-side; the panel polls the session descriptor until
// the run leaves the "running" state.

import type { ApiClient } from "./api.js";
import type { SessionDescriptor } from "./types.js";

export async function pollUntilIdle(
  client: ApiClient,
  onTick: (session: SessionDescriptor) => void,
  intervalMs = 250,
  timeoutMs = 600_000,
): Promise<SessionDescriptor> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const session = await client.getSession();
    onTick(session);
    if (session.status !== "running") return session;
    if (Date.now() > deadline) throw new Error("timed out waiting for the step to finish");
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
