/**
 * Typed client for the session service protocol.
 *
 * Every method maps to one endpoint and returns the parsed JSON body
 * unchanged -- the UI layers above must never fabricate or rewrite server
 * data.  The fetch implementation is injectable so tests can run against a
 * scripted mock server.
 */

export type Mode = "gain_tuning" | "generic_pairs";
export type Status = "awaiting_response" | "computing" | "done";
export type Choice = "A" | "B";

export interface Estimate {
  query_count: number;
  posterior_trace: number;
  /** gain_tuning mode */
  gains?: number[];
  mean_tracking_error?: number | null;
  /** generic_pairs mode */
  mu?: number[];
}

export interface SessionDescriptor {
  id: string;
  mode: Mode;
  status: Status;
  query_count: number;
  max_queries: number;
  estimate?: Estimate;
}

/** Rollout rows are [t, x, y, theta] with uniform dt spacing. */
export type TrajectoryRow = [number, number, number, number];

export interface GainTuningQuery {
  query_id: number;
  mode: "gain_tuning";
  gains_a: number[];
  gains_b: number[];
  trajectory_a: TrajectoryRow[];
  trajectory_b: TrajectoryRow[];
  reference_path: [number, number][];
  scenarios: string[];
}

export interface GenericPairsQuery {
  query_id: number;
  mode: "generic_pairs";
  item_a: number[];
  item_b: number[];
}

export type QueryPayload = GainTuningQuery | GenericPairsQuery;

export function isGainTuningQuery(q: QueryPayload): q is GainTuningQuery {
  return q.mode === "gain_tuning";
}

export interface ProtocolError {
  code: string;
  message: string;
  field?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: ProtocolError,
  ) {
    super(`${error.code}: ${error.message}`);
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

async function request<T>(
  fetchImpl: FetchLike,
  url: string,
  init?: { method?: string; body?: unknown },
): Promise<T> {
  const resp = await fetchImpl(url, {
    method: init?.method ?? "GET",
    headers: { "content-type": "application/json" },
    body: init?.body === undefined ? undefined : JSON.stringify(init.body),
  });
  if (resp.status === 204) {
    return undefined as T;
  }
  const body = await resp.json();
  if (resp.status >= 400) {
    throw new ApiError(resp.status, body as ProtocolError);
  }
  return body as T;
}

export class SessionClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) =>
      fetch(url, init) as never,
  ) {}

  createSession(mode: Mode, config: Record<string, unknown>) {
    return request<SessionDescriptor>(this.fetchImpl, `${this.baseUrl}/sessions`, {
      method: "POST",
      body: { mode, config },
    });
  }

  getSession(id: string) {
    return request<SessionDescriptor>(this.fetchImpl, `${this.baseUrl}/sessions/${id}`);
  }

  getQuery(id: string) {
    return request<QueryPayload>(this.fetchImpl, `${this.baseUrl}/sessions/${id}/query`);
  }

  submitResponse(id: string, queryId: number, choice: Choice) {
    return request<Estimate>(this.fetchImpl, `${this.baseUrl}/sessions/${id}/response`, {
      method: "POST",
      body: { query_id: queryId, choice },
    });
  }

  getEstimate(id: string) {
    return request<Estimate>(this.fetchImpl, `${this.baseUrl}/sessions/${id}/estimate`);
  }

  deleteSession(id: string) {
    return request<void>(this.fetchImpl, `${this.baseUrl}/sessions/${id}`, {
      method: "DELETE",
    });
  }
}
