// Typed client for the annotation service HTTP API.  The server is the
// source of truth for phase and cursor; this layer only moves JSON.

export type Scheme = "two_phase" | "info3";

export type Phase = "info1" | "reveal" | "info2" | "info3";

/** Placeholder the server substitutes for masked occurrences. */
export const SLOT_LITERAL = "TARGET";

export interface Progress {
  completed: number;
  total: number;
}

export interface TaskPayload {
  done: boolean;
  // done marker
  completed?: number;
  total?: number;
  // live task
  task_id?: string;
  scheme?: Scheme;
  phase?: Phase;
  tokens?: string[];
  position?: number;
  pos?: string;
  target?: string;
  guideline?: string[];
  provenance?: string | null;
  progress?: Progress;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function call<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, "network", `cannot reach server: ${String(err)}`);
  }
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const e = body as { error?: string; detail?: string };
    throw new ApiError(resp.status, e.error ?? "error",
                       e.detail ?? `HTTP ${resp.status}`);
  }
  return body as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export class Client {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async createSession(annotator: string, scheme: Scheme, taskSet: string,
                      seed: number): Promise<string> {
    const out = await call<{ session_id: string }>(
      `${this.baseUrl}/api/sessions`,
      post({ annotator, scheme, task_set: taskSet, seed }));
    return out.session_id;
  }

  nextTask(sessionId: string): Promise<TaskPayload> {
    return call(`${this.baseUrl}/api/sessions/${sessionId}/next`);
  }

  async reveal(sessionId: string, taskId: string): Promise<string> {
    const out = await call<{ target: string }>(
      `${this.baseUrl}/api/sessions/${sessionId}/reveal`,
      post({ task_id: taskId }));
    return out.target;
  }

  async submitScore(sessionId: string, taskId: string, measure: string,
                    score: number): Promise<number> {
    const out = await call<{ seq: number }>(
      `${this.baseUrl}/api/sessions/${sessionId}/scores`,
      post({ task_id: taskId, measure, score }));
    return out.seq;
  }
}
