// Thin HTTP client for the simulator service.

import type { CommandPreview, RenderPayload, RunResult, SceneSummary } from "./types.js";

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      const detail = await res.text();
      throw new Error(`POST ${path} -> ${res.status}: ${detail}`);
    }
    return (await res.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`);
    if (!res.ok) throw new Error(`GET ${path} -> ${res.status}`);
    return (await res.json()) as T;
  }

  createScene(seed: number, objectCount = 9): Promise<SceneSummary> {
    return this.post("/scenes", { seed, object_count: objectCount });
  }

  sceneRender(sceneId: string): Promise<RenderPayload> {
    return this.get(`/scenes/${sceneId}/render`);
  }

  async createSession(sceneId: string): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", {
      scene_id: sceneId,
    });
    return body.session_id;
  }

  sendPixels(sessionId: string, pixels: [number, number][]): Promise<{
    frames: number;
    heatmap_center: [number, number];
    sigma_px: number;
  }> {
    return this.post(`/sessions/${sessionId}/gaze`, { pixels });
  }

  sendCommand(sessionId: string, utterance: string): Promise<CommandPreview> {
    return this.post(`/sessions/${sessionId}/command`, { utterance });
  }

  run(sessionId: string): Promise<RunResult> {
    return this.post(`/sessions/${sessionId}/run`, {});
  }

  record(sessionId: string): Promise<Record<string, unknown>> {
    return this.get(`/sessions/${sessionId}`);
  }

  streamUrl(sessionId: string): string {
    return `${this.baseUrl.replace(/^http/, "ws")}/sessions/${sessionId}/stream`;
  }
}
