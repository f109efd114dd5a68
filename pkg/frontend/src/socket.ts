/** Reconnecting WebSocket client. Messages are parsed and fanned out to
 * callbacks; sends are dropped (not queued) while disconnected so stale
 * drag positions never replay after a reconnect. */

import { reconnectDelayMs } from "./backoff.js";
import { parseServerMessage, type StateFrame } from "./protocol.js";

export interface SocketCallbacks {
  onFrame(frame: StateFrame): void;
  onServerError(message: string): void;
  onStatus(connected: boolean): void;
}

export class ReconnectingSocket {
  private ws: WebSocket | null = null;
  private attempt = 0;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly cb: SocketCallbacks,
  ) {
    this.connect();
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(payload: string): boolean {
    if (!this.connected) return false;
    this.ws!.send(payload);
    return true;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  private connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempt = 0;
      this.cb.onStatus(true);
    };
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg.kind === "frame") this.cb.onFrame(msg.frame);
      else if (msg.kind === "error") this.cb.onServerError(msg.message);
    };
    ws.onclose = () => {
      this.cb.onStatus(false);
      if (this.closed) return;
      const delay = reconnectDelayMs(this.attempt++);
      setTimeout(() => this.connect(), delay);
    };
    ws.onerror = () => ws.close();
  }
}
