import type {
  ActionEntry,
  ConsoleConfig,
  ObservationPayload,
  StepPayload,
  TaskSummary,
  TrajectoryPayload,
} from "./types";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

/** Loads console.json next to the bundle; falls back to same-origin. */
export async function loadConfig(
  fetchFn: FetchLike = fetch,
): Promise<ConsoleConfig> {
  try {
    const resp = await fetchFn("console.json");
    if (resp.ok) {
      const data = (await resp.json()) as Partial<ConsoleConfig>;
      return { serviceUrl: data.serviceUrl ?? "" };
    }
  } catch {
    // missing config file: same-origin service
  }
  return { serviceUrl: "" };
}

/** Thin typed client over the documented HTTP endpoints — nothing else. */
export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        detail = String(((await resp.json()) as { detail?: string }).detail);
      } catch {
        // non-JSON error body
      }
      throw new ServiceError(resp.status, detail);
    }
    if (resp.status === 204) {
      return undefined as T;
    }
    return (await resp.json()) as T;
  }

  listTasks(): Promise<TaskSummary[]> {
    return this.request("GET", "/v1/tasks");
  }

  listActions(): Promise<ActionEntry[]> {
    return this.request("GET", "/v1/actions");
  }

  createEpisode(
    taskId: string,
    config?: Record<string, unknown>,
  ): Promise<{ session_id: string; observation: ObservationPayload }> {
    return this.request("POST", "/v1/episodes", {
      task_id: taskId,
      config: config ?? null,
    });
  }

  step(sessionId: string, action: string): Promise<StepPayload> {
    return this.request("POST", `/v1/episodes/${sessionId}/step`, { action });
  }

  trajectory(sessionId: string): Promise<TrajectoryPayload> {
    return this.request("GET", `/v1/episodes/${sessionId}/trajectory`);
  }

  abandon(sessionId: string): Promise<void> {
    return this.request("DELETE", `/v1/episodes/${sessionId}`);
  }
}
