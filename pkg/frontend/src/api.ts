/** Thin typed client for the gateway's /v1 JSON API.
 *
 * The fetch implementation is injectable so tests can capture traffic
 * or simulate outages; every response's chain head is surfaced so the
 * caller can audit inclusion.
 */

export interface ErrorBody {
  error: { code: string; message: string };
}

export class GatewayError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

export class NetworkUnavailable extends Error {}

export interface SessionView {
  session_id: string;
  phase: string;
  config: {
    session_id: string;
    ballot_format: { kind: string; options?: string[]; numeric_range?: [number, number] };
    voting_window: [number, number];
    registration_window: [number, number];
    release_deadline: number;
    [key: string]: unknown;
  };
  frozen: { n: number; t: number } | null;
  holder_pks: string[];
  counts: { holders: number; ballots: number; valid_releases: number };
  result: string | null;
  chain_head: string;
}

export interface LogPage {
  total: number;
  offset: number;
  events: Array<{ seq: number; type: string; payload: Record<string, unknown>; chain: string }>;
  chain_head: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkUnavailable(String(err));
    }
    const body = await response.json();
    if (!response.ok) {
      const error = (body as ErrorBody).error ?? { code: "HttpError", message: "" };
      throw new GatewayError(error.code, error.message, response.status);
    }
    return body as T;
  }

  private post<T>(path: string, doc: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  session(): Promise<SessionView> {
    return this.request("/v1/session");
  }

  holders(): Promise<{ holders: Array<Record<string, unknown>>; chain_head: string }> {
    return this.request("/v1/holders");
  }

  register(onceDigest: string, pk: string): Promise<{ holder_index: number; chain_head: string }> {
    return this.post("/v1/register", { once_digest: onceDigest, pk });
  }

  submitBallot(wire: {
    ephemeral: string;
    alphas: string[];
    nonce: string;
    ciphertext: string;
  }): Promise<{ seq: number; chain_head: string }> {
    return this.post("/v1/ballot", wire);
  }

  release(holderIndex: number, skHex: string): Promise<{ valid: boolean; chain_head: string }> {
    return this.post("/v1/release", { holder_index: holderIndex, sk: skHex });
  }

  result(): Promise<{ transcript: Record<string, unknown>; chain_head: string }> {
    return this.request("/v1/result");
  }

  async fullLog(): Promise<LogPage> {
    const first = await this.request<LogPage>("/v1/log?offset=0&limit=1000");
    let events = first.events;
    while (events.length < first.total) {
      const page = await this.request<LogPage>(`/v1/log?offset=${events.length}&limit=1000`);
      events = events.concat(page.events);
    }
    return { ...first, events };
  }
}
