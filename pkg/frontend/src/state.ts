// View model: the last decoded frame plus local focus intent, input bindings,
// and connection status. Renders only what frames carry; never infers hidden
// state (icon colors in particular are a straight passthrough).

import type { Frame, TaskId } from "./protocol.js";

export type Connection = "connecting" | "live" | "stale" | "closed";

export interface ViewModel {
  frame: Frame | null;
  connection: Connection;
  lastFrameAt: number;        // wall clock ms of last frame
  pendingFocus: TaskId | null;
  talking: boolean;
  walkStartT: number | null;  // sim time the current walk was first seen
  seenStimuli: Set<string>;   // "task:until" keys already played as audio
}

export function initialViewModel(): ViewModel {
  return {
    frame: null,
    connection: "connecting",
    lastFrameAt: 0,
    pendingFocus: null,
    talking: false,
    walkStartT: null,
    seenStimuli: new Set(),
  };
}

export function applyFrame(vm: ViewModel, frame: Frame, nowMs: number): ViewModel {
  const next = { ...vm, frame, connection: "live" as Connection, lastFrameAt: nowMs };
  if (vm.pendingFocus !== null && frame.focus === vm.pendingFocus) {
    next.pendingFocus = null;
  }
  if (frame.walk === null) {
    next.walkStartT = null;
  } else if (vm.walkStartT === null || vm.frame?.walk?.to !== frame.walk.to) {
    next.walkStartT = frame.t;
  }
  return next;
}

export function markStale(vm: ViewModel, nowMs: number, staleAfterMs = 1500): ViewModel {
  if (vm.connection === "live" && nowMs - vm.lastFrameAt > staleAfterMs) {
    return { ...vm, connection: "stale" };
  }
  return vm;
}

export function iconColor(vm: ViewModel, task: TaskId): "green" | "red" | "grey" {
  return vm.frame?.icons.left[task] ?? "grey";
}

export function speechAvailable(vm: ViewModel): boolean {
  return vm.frame?.icons.speech_available ?? false;
}

export function walking(vm: ViewModel): { to: TaskId; until: number } | null {
  return vm.frame?.walk ?? null;
}

export function walkProgress(vm: ViewModel): number | null {
  // fraction of the walk completed, judged purely from frame data
  const frame = vm.frame;
  if (!frame || !frame.walk || vm.walkStartT === null) return null;
  const total = frame.walk.until - vm.walkStartT;
  if (total <= 0) return 1;
  return Math.max(0, Math.min(1, (frame.t - vm.walkStartT) / total));
}

export function trackingInputEnabled(vm: ViewModel): boolean {
  const tracking = vm.frame?.stations.tracking;
  return !!tracking && tracking.visible && tracking.mode === "manual" && !vm.frame?.walk;
}

export function newAuditoryStimuli(vm: ViewModel): { task: TaskId; key: string }[] {
  // auditory cues present in the frame that have not been played yet;
  // each plays exactly once
  const frame = vm.frame;
  if (!frame) return [];
  const out: { task: TaskId; key: string }[] = [];
  for (const s of frame.stimuli) {
    if (s.stimulus !== "auditory") continue;
    const key = `${s.task}:${s.until}`;
    if (!vm.seenStimuli.has(key)) {
      vm.seenStimuli.add(key);
      out.push({ task: s.task, key });
    }
  }
  return out;
}
