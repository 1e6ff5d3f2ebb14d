// Single websocket to the gateway with automatic reconnect.
// Frames sent while disconnected are queued and flushed once the
// connection comes back; the caller gets told so it can warn the user.

import { ClientFrame, ServerFrame, parseServerFrame } from "./schema";

const BASE_DELAY_MS = 1000;
const MAX_DELAY_MS = 10_000;

export type SocketFactory = (url: string) => WebSocket;

export interface GatewayEvents {
  frame: (frame: ServerFrame) => void;
  open: () => void;
  close: () => void;
  queued: (frame: ClientFrame, depth: number) => void;
}

export class GatewayClient {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private queue: ClientFrame[] = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private handlers: { [K in keyof GatewayEvents]: Set<GatewayEvents[K]> } = {
    frame: new Set(),
    open: new Set(),
    close: new Set(),
    queued: new Set(),
  };

  constructor(
    private url: string,
    private makeSocket: SocketFactory = (u) => new WebSocket(u),
  ) {}

  on<K extends keyof GatewayEvents>(event: K, fn: GatewayEvents[K]): void {
    this.handlers[event].add(fn);
  }

  get isOpen(): boolean {
    return this.ws !== null && this.ws.readyState === 1; // OPEN
  }

  get queueDepth(): number {
    return this.queue.length;
  }

  connect(): void {
    if (this.stopped) return;
    let ws: WebSocket;
    try {
      ws = this.makeSocket(this.url);
    } catch (err) {
      console.warn("websocket construct failed", err);
      this.scheduleReconnect();
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      console.log("gateway connected");
      this.attempts = 0;
      this.flush();
      this.handlers.open.forEach((fn) => fn());
    };
    ws.onmessage = (event: MessageEvent) => {
      const frame = parseServerFrame(String(event.data));
      if (!frame) {
        console.warn("dropping unparseable frame", event.data);
        return;
      }
      this.handlers.frame.forEach((fn) => fn(frame));
    };
    ws.onclose = () => {
      this.ws = null;
      this.handlers.close.forEach((fn) => fn());
      this.scheduleReconnect();
    };
    ws.onerror = () => {
      // onclose follows; nothing to do here but keep jsdom quiet
    };
  }

  /** Send a frame, or queue it when offline. Returns true when it went
   * out on the wire right away. */
  send(frame: ClientFrame): boolean {
    if (this.isOpen) {
      this.ws!.send(JSON.stringify(frame));
      return true;
    }
    this.queue.push(frame);
    this.handlers.queued.forEach((fn) => fn(frame, this.queue.length));
    return false;
  }

  close(): void {
    this.stopped = true;
    if (this.timer) clearTimeout(this.timer);
    this.timer = null;
    if (this.ws) {
      const ws = this.ws;
      this.ws = null;
      ws.onclose = null;
      ws.close();
    }
  }

  /** Exponential backoff, capped at 10 s. */
  reconnectDelay(): number {
    return Math.min(MAX_DELAY_MS, BASE_DELAY_MS * 2 ** this.attempts);
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.timer) return;
    const delay = this.reconnectDelay();
    this.attempts += 1;
    console.log(`gateway closed, retrying in ${delay} ms`);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }

  private flush(): void {
    while (this.queue.length > 0 && this.isOpen) {
      const frame = this.queue.shift()!;
      this.ws!.send(JSON.stringify(frame));
    }
  }
}
