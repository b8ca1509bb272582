// WebSocket client for the workbench: command/ack correlation with unique
// ids, latest-snapshot tracking, and a trailing-edge throttle for drag
// streams. Works in the browser (native WebSocket) and in Node tests (pass
// the `ws` implementation).
import {
  AckFrame,
  CommandEnvelope,
  CommandType,
  SceneFrame,
  SnapshotFrame,
  parseServerFrame,
} from "./protocol";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

interface PendingCommand {
  resolve: (ack: AckFrame) => void;
  reject: (err: Error) => void;
}

export class WorkbenchClient {
  onSnapshot: ((snap: SnapshotFrame) => void) | null = null;
  onScene: ((scene: SceneFrame) => void) | null = null;
  onConnectionError: ((code: string, message: string) => void) | null = null;

  latestSnapshot: SnapshotFrame | null = null;
  scene: SceneFrame | null = null;

  commandsSent = 0;
  acksReceived = 0;
  duplicateAcks = 0;

  private sock: WebSocketLike;
  private seq = 0;
  private readonly prefix: string;
  private pending = new Map<string, PendingCommand>();
  private settled = new Set<string>();

  private constructor(sock: WebSocketLike, prefix: string) {
    this.sock = sock;
    this.prefix = prefix;
    sock.onmessage = (ev) => this.handleMessage(String(ev.data));
    sock.onclose = () => this.failPending("connection closed");
    sock.onerror = () => this.failPending("connection error");
  }

  static connect(url: string, factory?: WebSocketFactory, prefix = "ui"): Promise<WorkbenchClient> {
    const make: WebSocketFactory =
      factory ?? ((u) => new WebSocket(u) as unknown as WebSocketLike);
    return new Promise((resolve, reject) => {
      const sock = make(url);
      const client = new WorkbenchClient(sock, prefix);
      sock.onopen = () => resolve(client);
      sock.onerror = (err) => reject(new Error(`cannot connect to ${url}: ${err}`));
    });
  }

  close(): void {
    this.sock.close();
  }

  nextId(): string {
    this.seq += 1;
    return `${this.prefix}-${this.seq}`;
  }

  command(type: CommandType, payload: Record<string, unknown> = {}): Promise<AckFrame> {
    const envelope: CommandEnvelope = { id: this.nextId(), type, payload };
    return new Promise((resolve, reject) => {
      this.pending.set(envelope.id, { resolve, reject });
      this.commandsSent += 1;
      this.sock.send(JSON.stringify(envelope));
    });
  }

  async expectOk(type: CommandType, payload: Record<string, unknown> = {}): Promise<Record<string, unknown>> {
    const ack = await this.command(type, payload);
    if (!ack.ok) {
      throw new Error(`${type} failed: ${ack.error?.code}: ${ack.error?.message}`);
    }
    return ack.result ?? {};
  }

  private handleMessage(raw: string): void {
    let frame;
    try {
      frame = parseServerFrame(raw);
    } catch (err) {
      console.warn("unparseable frame from server", err);
      return;
    }
    switch (frame.type) {
      case "snapshot":
        this.latestSnapshot = frame;
        this.onSnapshot?.(frame);
        break;
      case "scene":
        this.scene = frame;
        this.onScene?.(frame);
        break;
      case "ack": {
        if (this.settled.has(frame.id)) {
          this.duplicateAcks += 1;
          return;
        }
        this.settled.add(frame.id);
        this.acksReceived += 1;
        const pending = this.pending.get(frame.id);
        if (pending) {
          this.pending.delete(frame.id);
          pending.resolve(frame);
        }
        break;
      }
      case "error":
        this.onConnectionError?.(frame.error.code, frame.error.message);
        break;
    }
  }

  private failPending(reason: string): void {
    for (const [, entry] of this.pending) {
      entry.reject(new Error(reason));
    }
    this.pending.clear();
  }
}

// Trailing-edge throttle: at most one call per interval, always ending with
// the latest value. Drag streams go through this so the wire sees <= 60/s.
export class Throttle<T> {
  private last = 0;
  private queued: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly intervalMs: number,
    private readonly emit: (value: T) => void,
    private readonly now: () => number = () => Date.now(),
  ) {}

  push(value: T): void {
    const t = this.now();
    if (t - this.last >= this.intervalMs && this.timer === null) {
      this.last = t;
      this.emit(value);
      return;
    }
    this.queued = value;
    if (this.timer === null) {
      const wait = Math.max(0, this.intervalMs - (t - this.last));
      this.timer = setTimeout(() => {
        this.timer = null;
        if (this.queued !== null) {
          const v = this.queued;
          this.queued = null;
          this.last = this.now();
          this.emit(v);
        }
      }, wait);
    }
  }

  flushPendingCount(): number {
    return this.queued === null ? 0 : 1;
  }
}
