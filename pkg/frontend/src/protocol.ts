// Wire protocol v1: canonical-JSON text messages over the websocket.
// Canonical = recursively key-sorted; encode(decode(encode(x))) === encode(x).

export const PROTOCOL_VERSION = 1;

export type TaskId = "tracking" | "sysmon" | "resman" | "comms";

export const ALL_TASKS: TaskId[] = ["tracking", "sysmon", "resman", "comms"];

export type InputKind =
  | "joystick_vector"
  | "mouse_click"
  | "key_press"
  | "speech_utterance"
  | "move_to_station";

export interface InputPayload {
  kind: InputKind;
  task: TaskId;
  data?: Record<string, unknown>;
}

export type ClientMessage =
  | { kind: "join" }
  | { kind: "input"; payload: InputPayload }
  | { kind: "station_focus"; task: TaskId }
  | { kind: "push_to_talk"; state: "start" | "end" }
  | { kind: "heartbeat" };

export interface GaugeState {
  pos: number;
  oor: boolean;
}

export interface StationFrames {
  tracking?: {
    visible: boolean;
    alert?: boolean;
    target?: [number, number];
    center?: [number, number];
    mode?: "manual" | "automatic";
  };
  sysmon?: {
    visible: boolean;
    alert?: boolean;
    green_on?: boolean;
    red_on?: boolean;
    gauges?: GaugeState[];
  };
  resman?: {
    visible: boolean;
    alert?: boolean;
    tanks?: Record<string, { level: number; capacity: number | null }>;
    pumps?: Record<string, { on: boolean; failed: boolean; source: string; sink: string }>;
  };
  comms?: {
    visible: boolean;
    alert?: boolean;
    radios?: Record<string, number>;
    requests?: { uid: number; text: string; radio: string; frequency: number; deadline: number }[];
    speech_mode?: boolean;
  };
}

export interface Frame {
  kind: "frame";
  tick: number;
  t: number;
  focus: TaskId | null;
  stations: StationFrames;
  icons: { left: Record<TaskId, "green" | "red" | "grey">; speech_available: boolean };
  stimuli: { stimulus: string; task: TaskId; until: number }[];
  walk: { to: TaskId; until: number } | null;
}

export type ServerMessage = Frame | { kind: "error"; message: string };

const CLIENT_KINDS = new Set(["join", "input", "station_focus", "push_to_talk", "heartbeat"]);
const SERVER_KINDS = new Set(["frame", "error"]);

function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeysDeep);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeysDeep((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function canonicalStringify(value: unknown): string {
  return JSON.stringify(sortKeysDeep(value));
}

export function encodeMessage(msg: ClientMessage | ServerMessage): string {
  return canonicalStringify({ v: PROTOCOL_VERSION, ...msg });
}

export function decodeMessage(text: string): (ClientMessage | ServerMessage) & { v: number } {
  const data = JSON.parse(text) as Record<string, unknown>;
  if (data === null || typeof data !== "object" || Array.isArray(data)) {
    throw new Error("protocol message must be a JSON object");
  }
  if (data.v !== PROTOCOL_VERSION) {
    throw new Error(`unsupported protocol version ${String(data.v)}`);
  }
  const kind = data.kind as string;
  if (!CLIENT_KINDS.has(kind) && !SERVER_KINDS.has(kind)) {
    throw new Error(`unknown message kind ${kind}`);
  }
  return data as (ClientMessage | ServerMessage) & { v: number };
}

export function isFrame(msg: { kind: string }): msg is Frame {
  return msg.kind === "frame";
}
