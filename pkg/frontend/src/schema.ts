// Wire types for the gateway websocket. One JSON object per frame,
// discriminated by "type". Keep this file in sync with the recorded
// fixtures under tests/fixtures/ — the contract tests replay those.

export type Mode = "text" | "voice" | "dual";

// ---- client -> server --------------------------------------------------

export interface TextFrame {
  type: "text";
  text: string;
  speaker?: string;
}

export interface ClipFrame {
  type: "clip";
  id: string;
}

export interface AudioFrame {
  type: "audio";
  ref: string;
}

export type ClientFrame = TextFrame | ClipFrame | AudioFrame;

export function makeTextFrame(text: string, speaker?: string): TextFrame {
  const frame: TextFrame = { type: "text", text };
  if (speaker) frame.speaker = speaker;
  return frame;
}

export function makeClipFrame(id: string): ClipFrame {
  return { type: "clip", id };
}

export function makeAudioFrame(ref: string): AudioFrame {
  return { type: "audio", ref };
}

// ---- server -> client --------------------------------------------------

export interface TranscriptFrame {
  type: "transcript";
  utterance_id: string;
  text: string;
  confidence: number;
  error: string | null;
}

export interface IntentFrame {
  type: "intent";
  utterance_id: string;
  label: string;
  slots: Record<string, unknown>;
  confidence: number;
}

export interface ReplyFrame {
  type: "reply";
  utterance_id: string;
  text: string;
  objects: string[];
}

export interface OutcomeFrame {
  type: "outcome";
  utterance_id: string;
  result: string; // "success" | "failure" | "preempted"
  detail: string;
  final_pose: { x: number; y: number; theta: number };
}

export interface StateFrame {
  type: "state";
  x: number;
  y: number;
  theta: number;
  linear_v: number;
  angular_v: number;
  status: string;
  sim_time: number;
}

export interface MetricsReport {
  vcua_pct: number | null;
  nsr_pct: number | null;
  oia_pct: number | null;
  art_s: number | null;
  mean_wer: number | null;
  counts: Record<string, number>;
  labels: string[];
  confusion: number[][];
  config: Record<string, unknown>;
}

export interface MetricsFrame {
  type: "metrics";
  report: MetricsReport;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  message: string;
}

export type ServerFrame =
  | TranscriptFrame
  | IntentFrame
  | ReplyFrame
  | OutcomeFrame
  | StateFrame
  | MetricsFrame
  | ErrorFrame;

// ---- HTTP payloads -----------------------------------------------------

export interface MapData {
  name: string;
  resolution: number;
  grid: string[]; // row strings of "0"/"1", row 0 = south edge
  locations: Record<string, [number, number, number]>;
  objects: Array<{ name: string; kind: string; x: number; y: number; theta: number }>;
}

// ---- parsing -----------------------------------------------------------

const str = (v: unknown): v is string => typeof v === "string";
const num = (v: unknown): v is number => typeof v === "number" && isFinite(v);

/** Parse one incoming websocket payload. Returns null for anything that
 * does not match the schema — the caller logs and drops it rather than
 * letting a bad frame take down the render loop. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!msg || typeof msg !== "object") return null;
  switch (msg.type) {
    case "transcript":
      if (str(msg.utterance_id) && str(msg.text) && num(msg.confidence) &&
          (msg.error === null || str(msg.error))) {
        return msg as TranscriptFrame;
      }
      return null;
    case "intent":
      if (str(msg.utterance_id) && str(msg.label) && num(msg.confidence) &&
          msg.slots && typeof msg.slots === "object") {
        return msg as IntentFrame;
      }
      return null;
    case "reply":
      if (str(msg.utterance_id) && str(msg.text) && Array.isArray(msg.objects) &&
          msg.objects.every(str)) {
        return msg as ReplyFrame;
      }
      return null;
    case "outcome":
      if (str(msg.utterance_id) && str(msg.result) && str(msg.detail) &&
          msg.final_pose && num(msg.final_pose.x) && num(msg.final_pose.y) &&
          num(msg.final_pose.theta)) {
        return msg as OutcomeFrame;
      }
      return null;
    case "state":
      if (num(msg.x) && num(msg.y) && num(msg.theta) && num(msg.linear_v) &&
          num(msg.angular_v) && str(msg.status) && num(msg.sim_time)) {
        return msg as StateFrame;
      }
      return null;
    case "metrics":
      if (msg.report && typeof msg.report === "object" &&
          Array.isArray(msg.report.labels) && Array.isArray(msg.report.confusion)) {
        return msg as MetricsFrame;
      }
      return null;
    case "error":
      if (str(msg.code) && str(msg.message)) return msg as ErrorFrame;
      return null;
    default:
      return null;
  }
}
