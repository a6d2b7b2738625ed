/** Console-side view of the vehicle: latest telemetry plus history trails. */

import { FrameStatus, ScanStatus, StatusMessage, TrackStatus } from "./protocol.js";

export const STALE_AFTER_MS = 1500;
const TRAIL_MAX = 600;
const TRACK_HISTORY_MAX = 100;

export interface ConsoleState {
  socketOpen: boolean;
  lastStatusAt: number | null; // ms epoch of last status push
  frame: FrameStatus | null;
  scan: ScanStatus | null;
  tracks: TrackStatus[];
  trail: { x: number; y: number }[];
  trackHistory: Map<number, { x: number; y: number }[]>;
  pendingGoal: { x: number; y: number } | null;
}

export function initialState(): ConsoleState {
  return {
    socketOpen: false,
    lastStatusAt: null,
    frame: null,
    scan: null,
    tracks: [],
    trail: [],
    trackHistory: new Map(),
    pendingGoal: null,
  };
}

export function applyStatus(state: ConsoleState, msg: StatusMessage,
                            nowMs: number): void {
  state.lastStatusAt = nowMs;
  state.frame = msg.frame;
  if (msg.scan) state.scan = msg.scan;
  state.tracks = msg.tracks ?? [];

  const last = state.trail[state.trail.length - 1];
  if (!last || Math.hypot(last.x - msg.frame.x, last.y - msg.frame.y) > 0.02) {
    state.trail.push({ x: msg.frame.x, y: msg.frame.y });
    if (state.trail.length > TRAIL_MAX) state.trail.shift();
  }
  for (const track of state.tracks) {
    let history = state.trackHistory.get(track.id);
    if (!history) {
      history = [];
      state.trackHistory.set(track.id, history);
    }
    history.push({ x: track.x, y: track.y });
    if (history.length > TRACK_HISTORY_MAX) history.shift();
  }
  // drop history of vanished tracks so trails do not linger forever
  const alive = new Set(state.tracks.map((t) => t.id));
  for (const id of state.trackHistory.keys()) {
    if (!alive.has(id)) state.trackHistory.delete(id);
  }
}

/** Telemetry is stale when pushes stop arriving, even if the socket is up. */
export function isStale(state: ConsoleState, nowMs: number): boolean {
  if (!state.socketOpen) return true;
  if (state.lastStatusAt === null) return true;
  return nowMs - state.lastStatusAt > STALE_AFTER_MS;
}
