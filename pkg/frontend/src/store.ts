// View state for the whole page: chat transcript, robot pose + trail,
// map, latest metrics report, connection status. Server frames are folded
// in strictly in arrival order so the transcript mirrors the session.

import {
  MapData,
  MetricsReport,
  ServerFrame,
  StateFrame,
} from "./schema";

export type Role = "user" | "robot" | "error" | "notice";

export interface ChatTurn {
  role: Role;
  text: string;
  utteranceId?: string;
  intentLabel?: string;
  intentSlots?: Record<string, unknown>;
  pending?: boolean; // optimistic user turn, not yet echoed by the server
}

export interface Pose {
  x: number;
  y: number;
  theta: number;
}

export interface ViewState {
  connection: "connecting" | "open" | "closed";
  mode: "text" | "voice";
  chat: ChatTurn[];
  pose: Pose | null;
  linearV: number;
  angularV: number;
  status: string;
  simTime: number;
  trail: Array<[number, number]>;
  map: MapData | null;
  report: MetricsReport | null;
}

const TRAIL_CAP = 2000;

export type Listener = (state: ViewState) => void;

export class Store {
  state: ViewState = {
    connection: "connecting",
    mode: "text",
    chat: [],
    pose: null,
    linearV: 0,
    angularV: 0,
    status: "idle",
    simTime: 0,
    trail: [],
    map: null,
    report: null,
  };

  private listeners = new Set<Listener>();
  private repliedIds = new Set<string>();

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    this.listeners.forEach((fn) => fn(this.state));
  }

  setConnection(connection: ViewState["connection"]): void {
    this.state.connection = connection;
    this.notify();
  }

  setMode(mode: "text" | "voice"): void {
    this.state.mode = mode;
    this.notify();
  }

  setMap(map: MapData): void {
    this.state.map = map;
    this.notify();
  }

  setReport(report: MetricsReport): void {
    this.state.report = report;
    this.notify();
  }

  /** Optimistic user turn, rendered before the server echoes it back. */
  addUserTurn(text: string): ChatTurn {
    const turn: ChatTurn = { role: "user", text, pending: true };
    this.state.chat.push(turn);
    this.notify();
    return turn;
  }

  addNotice(text: string): void {
    this.state.chat.push({ role: "notice", text });
    this.notify();
  }

  /** Fold one server frame into the view. Chat entries appear in the
   * exact order the frames came in. */
  applyFrame(frame: ServerFrame): void {
    switch (frame.type) {
      case "transcript": {
        // reconcile with the oldest still-pending user turn
        const turn = this.state.chat.find(
          (t) => t.role === "user" && t.pending,
        );
        if (turn) {
          turn.pending = false;
          turn.utteranceId = frame.utterance_id;
          if (frame.text) turn.text = frame.text;
        }
        break;
      }
      case "intent": {
        // text turns produce no transcript frame, so the intent echo may
        // be the first time we learn the utterance id
        let turn = this.state.chat.find(
          (t) => t.role === "user" && t.utteranceId === frame.utterance_id,
        );
        if (!turn) {
          turn = this.state.chat.find((t) => t.role === "user" && t.pending);
        }
        if (turn) {
          turn.pending = false;
          turn.utteranceId = frame.utterance_id;
          turn.intentLabel = frame.label;
          turn.intentSlots = frame.slots;
        }
        break;
      }
      case "reply":
        this.repliedIds.add(frame.utterance_id);
        this.state.chat.push({
          role: "robot",
          text: frame.text,
          utteranceId: frame.utterance_id,
        });
        break;
      case "outcome": {
        // A turn that was answered with a reply already has its bubble;
        // motion turns get one from the outcome instead.
        if (!this.repliedIds.has(frame.utterance_id)) {
          const text =
            frame.result === "success"
              ? `Done — now at x=${frame.final_pose.x.toFixed(2)}, ` +
                `y=${frame.final_pose.y.toFixed(2)}.`
              : `Could not finish (${frame.result}): ${frame.detail}`;
          this.state.chat.push({
            role: frame.result === "success" ? "robot" : "error",
            text,
            utteranceId: frame.utterance_id,
          });
        }
        break;
      }
      case "state":
        this.applyState(frame);
        break;
      case "metrics":
        this.state.report = frame.report;
        break;
      case "error":
        this.state.chat.push({
          role: "error",
          text: `${frame.code}: ${frame.message}`,
        });
        break;
    }
    this.notify();
  }

  private applyState(frame: StateFrame): void {
    this.state.pose = { x: frame.x, y: frame.y, theta: frame.theta };
    this.state.linearV = frame.linear_v;
    this.state.angularV = frame.angular_v;
    this.state.status = frame.status;
    this.state.simTime = frame.sim_time;
    const trail = this.state.trail;
    const last = trail[trail.length - 1];
    if (!last || last[0] !== frame.x || last[1] !== frame.y) {
      trail.push([frame.x, frame.y]);
      if (trail.length > TRAIL_CAP) trail.shift();
    }
  }
}
