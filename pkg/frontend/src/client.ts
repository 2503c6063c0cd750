/**
 * Phone-side session client.
 *
 * Holds the connection, the current UI tree, and the single-pending-selection
 * invariant. All state transitions run through one message handler; consumers
 * subscribe to typed events and re-render from the state snapshot. Reconnects
 * preserve the session id, and the server re-syncs the current tree on rejoin.
 */

import {
  ErrorMsg,
  LocationMsg,
  SelectMsg,
  ServerMsg,
  UITreeMsg,
  parseServerMsg,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "reconnecting" | "closed";

export interface ClientState {
  status: ConnectionStatus;
  sessionId: string | null;
  tree: UITreeMsg | null;
  pending: boolean;
  lastError: ErrorMsg | null;
  lastLocation: LocationMsg | null;
}

export type ClientEvent =
  | { kind: "status"; status: ConnectionStatus }
  | { kind: "tree"; tree: UITreeMsg; changed: boolean }
  | { kind: "pending"; pending: boolean }
  | { kind: "announce"; message: string }
  | { kind: "error"; error: ErrorMsg };

type Listener = (event: ClientEvent) => void;

/** Minimal constructor shape so tests can inject a fake or the `ws` package. */
export type SocketFactory = (url: string) => WebSocket;

const RECONNECT_BASE_MS = 250;
const RECONNECT_MAX_MS = 5000;

export class PhoneClient {
  readonly state: ClientState = {
    status: "closed",
    sessionId: null,
    tree: null,
    pending: false,
    lastError: null,
    lastLocation: null,
  };

  private socket: WebSocket | null = null;
  private listeners: Listener[] = [];
  private reconnectAttempts = 0;
  private closedByUser = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly serverUrl: string,
    sessionId: string | null,
    private readonly makeSocket: SocketFactory = (url) => new WebSocket(url),
  ) {
    this.state.sessionId = sessionId;
  }

  on(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(event: ClientEvent): void {
    for (const l of [...this.listeners]) l(event);
  }

  private setStatus(status: ConnectionStatus): void {
    if (this.state.status !== status) {
      this.state.status = status;
      this.emit({ kind: "status", status });
    }
  }

  connect(): void {
    this.closedByUser = false;
    this.setStatus(this.reconnectAttempts > 0 ? "reconnecting" : "connecting");
    const sock = this.makeSocket(this.serverUrl);
    this.socket = sock;
    sock.onopen = () => {
      const hello: Record<string, unknown> = { type: "hello", role: "phone" };
      if (this.state.sessionId) hello.session_id = this.state.sessionId;
      sock.send(JSON.stringify(hello));
    };
    sock.onmessage = (ev: MessageEvent) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg) this.handle(msg);
    };
    sock.onclose = () => {
      this.socket = null;
      if (this.closedByUser) {
        this.setStatus("closed");
        return;
      }
      this.scheduleReconnect();
    };
    sock.onerror = () => {
      /* close follows; reconnect handles it */
    };
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer) clearTimeout(this.reconnectTimer);
    this.socket?.close();
    this.setStatus("closed");
  }

  private scheduleReconnect(): void {
    this.setStatus("reconnecting");
    this.emit({ kind: "announce", message: "Connection lost. Reconnecting." });
    const delay = Math.min(RECONNECT_BASE_MS * 2 ** this.reconnectAttempts, RECONNECT_MAX_MS);
    this.reconnectAttempts += 1;
    this.reconnectTimer = setTimeout(() => this.connect(), delay);
  }

  private handle(msg: ServerMsg): void {
    switch (msg.type) {
      case "hello":
        this.reconnectAttempts = 0;
        this.state.sessionId = msg.session_id ?? this.state.sessionId;
        this.setStatus("connected");
        break;
      case "ui": {
        const changed = this.state.tree !== null && this.state.tree.screen_id !== msg.screen_id;
        this.state.tree = msg;
        this.clearPending();
        this.emit({ kind: "tree", tree: msg, changed });
        break;
      }
      case "touch_done":
        this.clearPending();
        if (!msg.screen_changed) {
          this.emit({
            kind: "announce",
            message: msg.hit ? `Activated ${msg.hit}.` : "Touch missed. Try again.",
          });
        }
        break;
      case "error":
        this.state.lastError = msg;
        this.clearPending();
        this.emit({ kind: "error", error: msg });
        break;
      case "location":
        this.state.lastLocation = msg;
        break;
    }
  }

  private clearPending(): void {
    if (this.state.pending) {
      this.state.pending = false;
      this.emit({ kind: "pending", pending: false });
    }
  }

  /**
   * Send one selection. Ignored (with an announcement) while another
   * selection is in flight or the connection is down.
   */
  select(elementId: string): boolean {
    if (this.state.pending) {
      this.emit({ kind: "announce", message: "Action in progress. Please wait." });
      return false;
    }
    if (this.state.status !== "connected" || !this.socket || !this.state.sessionId) {
      this.emit({ kind: "announce", message: "Not connected." });
      return false;
    }
    const msg: SelectMsg = {
      type: "select",
      session_id: this.state.sessionId,
      element_id: elementId,
    };
    this.socket.send(JSON.stringify(msg));
    this.state.pending = true;
    this.emit({ kind: "pending", pending: true });
    return true;
  }
}
