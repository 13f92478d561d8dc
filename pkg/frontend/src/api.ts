import type { SessionDescriptor, WeightUpdateResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** Thin JSON client for the weight-steering service. */
export class SteeringApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...a) => fetch(...a),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(body: unknown): Promise<SessionDescriptor> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionDescriptor> {
    return this.request(`/sessions/${sessionId}`);
  }

  putWeights(
    sessionId: string,
    tau: number[],
    revision?: number,
  ): Promise<WeightUpdateResponse> {
    const body: { tau: number[]; revision?: number } = { tau };
    if (revision !== undefined) body.revision = revision;
    return this.request(`/sessions/${sessionId}/weights`, {
      method: "PUT",
      body: JSON.stringify(body),
    });
  }
}
