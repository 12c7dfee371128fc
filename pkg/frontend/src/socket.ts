// Session event stream over WebSocket with a stale indicator instead of a
// crash when the link drops mid-run.

import type { StreamEvent } from "./types.js";

export type EventListener = (event: StreamEvent) => void;
export type StatusListener = (status: "live" | "stale" | "closed") => void;

export class EventStream {
  private ws: WebSocket | null = null;

  constructor(
    private readonly url: string,
    private readonly onEvent: EventListener,
    private readonly onStatus: StatusListener,
  ) {}

  connect(): void {
    if (this.ws) return;
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.onStatus("live");
    this.ws.onmessage = (msg) => {
      const event = JSON.parse(String(msg.data)) as StreamEvent;
      this.onEvent(event);
      if (event.kind === "run_complete") {
        this.onStatus("closed");
      }
    };
    this.ws.onerror = () => this.onStatus("stale");
    this.ws.onclose = () => {
      this.ws = null;
      this.onStatus("closed");
    };
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }
}
