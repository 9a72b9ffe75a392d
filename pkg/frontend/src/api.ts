/** Typed client for the segmentation service's JSON-over-HTTP protocol. */

import type { Stroke } from "./strokes.js";

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
}

export interface ScribbleCounts {
  fg_count: number;
  bg_count: number;
}

export interface TraceRecord {
  layer: number;
  n_ev: number;
  energy_before: number;
  energy_after: number;
  flips: number;
  seconds: number;
}

export type RunStatus = "IDLE" | "RUNNING" | "DONE" | "ERROR";

export interface ResultPayload {
  status: RunStatus;
  mask_png: string | null;
  trace: TraceRecord[];
  error: string | null;
}

export interface ConfigOverrides {
  preset?: "desk" | "full";
  n_layers?: number;
  nev_start?: number;
  nev_step?: number;
  alpha?: number;
  beta?: number;
  top_k?: number;
  spatial_scale?: number;
  icm_sweeps?: number;
  rng_seed?: number;
}

/** Server-reported failure; message is the server's text, verbatim. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "NetworkError", `cannot reach server: ${String(err)}`);
    }
    let payload: any = null;
    try {
      payload = await response.json();
    } catch {
      // non-JSON body; fall through with the status line only
    }
    if (!response.ok) {
      throw new ApiError(
        response.status,
        payload?.error ?? "HttpError",
        payload?.message ?? `${method} ${path} failed with ${response.status}`,
      );
    }
    return payload as T;
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ status: string }>("GET", "/healthz");
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  createSession(imagePngBase64: string): Promise<SessionInfo> {
    return this.request("POST", "/sessions", { image_png: imagePngBase64 });
  }

  setScribbles(sessionId: string, strokes: Stroke[]): Promise<ScribbleCounts> {
    return this.request("POST", `/sessions/${sessionId}/scribbles`, { strokes });
  }

  startSegmentation(sessionId: string, overrides: ConfigOverrides = {}): Promise<void> {
    return this.request("POST", `/sessions/${sessionId}/segment`, overrides);
  }

  getResult(sessionId: string): Promise<ResultPayload> {
    return this.request("GET", `/sessions/${sessionId}/result`);
  }
}
