// Device events -> client messages. Pure mapping functions so the bindings
// are testable without a DOM; main.ts wires them to real listeners.

import type { ClientMessage, Frame, InputPayload, TaskId } from "./protocol.js";

export const JOYSTICK_DEADZONE = 0.08;

export const STATION_KEYS: Record<string, TaskId> = {
  "1": "tracking",
  "2": "sysmon",
  "3": "resman",
  "4": "comms",
};

export const PTT_KEY = " ";

export function gamepadJoystick(
  axes: readonly number[],
): ClientMessage | null {
  const x = axes[0] ?? 0;
  const y = axes[1] ?? 0;
  const magnitude = Math.hypot(x, y);
  if (magnitude < JOYSTICK_DEADZONE) {
    return { kind: "input", payload: { kind: "joystick_vector", task: "tracking", data: { x: 0, y: 0 } } };
  }
  const clamped = magnitude > 1 ? 1 / magnitude : 1;
  return {
    kind: "input",
    payload: {
      kind: "joystick_vector",
      task: "tracking",
      data: { x: x * clamped, y: y * clamped },
    },
  };
}

export function stationKeyMessage(key: string, focus: TaskId | null): ClientMessage | null {
  const dest = STATION_KEYS[key];
  if (!dest || dest === focus) return null;
  return { kind: "station_focus", task: dest };
}

export function pushToTalkMessage(down: boolean): ClientMessage {
  return { kind: "push_to_talk", state: down ? "start" : "end" };
}

// Hit regions are laid out by render.ts; each carries the input it produces.
export interface HitRegion {
  x: number;
  y: number;
  w: number;
  h: number;
  payload: InputPayload;
}

export function clickMessage(
  regions: HitRegion[],
  px: number,
  py: number,
  frame: Frame | null,
): ClientMessage | null {
  if (!frame) return null;
  for (const region of regions) {
    if (px >= region.x && px < region.x + region.w && py >= region.y && py < region.y + region.h) {
      const station = frame.stations[region.payload.task];
      if (!station || !station.visible) {
        return null; // focused view lacks this target: ignore locally
      }
      return { kind: "input", payload: region.payload };
    }
  }
  return null;
}

export function radioTuneMessage(radio: string, frequency: number): ClientMessage {
  return {
    kind: "input",
    payload: {
      kind: "mouse_click",
      task: "comms",
      data: { target: "radio", radio, frequency },
    },
  };
}
