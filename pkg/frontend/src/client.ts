// Session state over the guidance socket. The socket is injected so tests
// can drive the client with a fake or a Node-side WebSocket; the browser
// entry point passes the native one.

import {
  ClientMessage,
  FrameMessage,
  OverlayMessage,
  PlanMessage,
  ServerMessage,
  parseServerMessage,
  serializeClientMessage,
} from "./protocol.js";
import type { ToolPose } from "./pose.js";

// The subset of the WebSocket API the client touches; both the browser
// WebSocket and the `ws` package satisfy it. Handler parameters are typed
// loosely because the two implementations disagree on the event shapes.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((...args: any[]) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((...args: any[]) => void) | null;
}

export interface SessionState {
  connected: boolean;
  plan: PlanMessage | null;
  overlay: OverlayMessage | null;
  lastFrame: FrameMessage | null;
  lastFrameAtMs: number;
  lastError: string | null;
  protocolWarnings: number;
}

export class GuidanceClient {
  readonly state: SessionState = {
    connected: false,
    plan: null,
    overlay: null,
    lastFrame: null,
    lastFrameAtMs: 0,
    lastError: null,
    protocolWarnings: 0,
  };

  private readonly pending: ClientMessage[] = [];

  constructor(private readonly socket: SocketLike,
              private readonly onUpdate: (state: SessionState) => void = () => {},
              private readonly now: () => number = () => Date.now()) {
    socket.onopen = () => {
      this.state.connected = true;
      for (const msg of this.pending.splice(0)) this.transmit(msg);
      this.onUpdate(this.state);
    };
    socket.onmessage = (ev) => this.receive(String(ev.data));
    socket.onclose = () => {
      this.state.connected = false;
      this.onUpdate(this.state);
    };
  }

  // Disconnected sends are buffered and flushed on (re)connect, so steering
  // input is never silently dropped.
  sendPose(pose: ToolPose): void {
    this.transmitOrBuffer({ kind: "pose", tip: pose.tip, direction: pose.direction });
  }

  selectPlan(id: string, mode?: "marking" | "insertion"): void {
    this.transmitOrBuffer(mode === undefined
      ? { kind: "select_plan", id }
      : { kind: "select_plan", id, mode });
  }

  close(): void {
    this.socket.close();
  }

  private transmitOrBuffer(msg: ClientMessage): void {
    if (this.state.connected) this.transmit(msg);
    else this.pending.push(msg);
  }

  private transmit(msg: ClientMessage): void {
    this.socket.send(serializeClientMessage(msg));
  }

  private receive(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.state.protocolWarnings += 1;
      this.onUpdate(this.state);
      return;
    }
    this.apply(msg);
    this.onUpdate(this.state);
  }

  private apply(msg: ServerMessage): void {
    switch (msg.kind) {
      case "plan":
        this.state.plan = msg;
        break;
      case "overlay":
        this.state.overlay = msg;
        break;
      case "frame":
        this.state.lastFrame = msg;
        this.state.lastFrameAtMs = this.now();
        break;
      case "error":
        this.state.lastError = msg.message;
        break;
    }
  }
}
