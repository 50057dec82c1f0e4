import type { ActOutcome, ApiError, BundleDoc, ChatReply, QMapsPayload, SceneDoc } from "./types.js";

export class ApiFailure extends Error {
  constructor(public status: number, public body: ApiError) {
    super(`${body.error}: ${body.message}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: ApiError = { error: `http_${response.status}`, message: response.statusText };
    try {
      body = (await response.json()) as ApiError;
    } catch {
      // non-JSON error body; keep the status fallback
    }
    throw new ApiFailure(response.status, body);
  }
  return (await response.json()) as T;
}

export class InspectorApi {
  constructor(public base: string) {}

  health(): Promise<{ status: string; scenario: string }> {
    return request(this.base, "/health");
  }

  newScene(seed: number): Promise<SceneDoc> {
    return request(this.base, "/scene", { method: "POST", body: JSON.stringify({ seed }) });
  }

  scene(): Promise<SceneDoc> {
    return request(this.base, "/scene");
  }

  qmaps(): Promise<QMapsPayload> {
    return request(this.base, "/qmaps");
  }

  explain(): Promise<BundleDoc> {
    return request(this.base, "/explain", { method: "POST", body: JSON.stringify({}) });
  }

  actGreedy(): Promise<ActOutcome> {
    return request(this.base, "/act", { method: "POST", body: JSON.stringify({}) });
  }

  chat(question: string): Promise<ChatReply> {
    return request(this.base, "/chat", { method: "POST", body: JSON.stringify({ question }) });
  }
}
