/** Message schema shared with the gateway (docs/ui_protocol.md). */

export interface FrameStatus {
  t: number;
  x: number;
  y: number;
  theta: number;
  v: number;
  delta: number;
  safety_state: "INIT" | "STANDBY" | "ACTIVE" | "FAULT_LATCHED";
  safety_reason: string;
  motor_power: boolean;
  brake_engaged: boolean;
  steer_feedback_v: number;
  motor_units: number;
  battery_v: number;
  mode: "MANUAL" | "AUTONOMOUS";
  connected: boolean;
}

export interface ScanStatus {
  angle_min: number;
  angle_increment: number;
  ranges: (number | null)[];
}

export interface TrackStatus {
  id: number;
  x: number;
  y: number;
  vx: number;
  vy: number;
}

export interface StatusMessage {
  type: "status";
  frame: FrameStatus;
  scan: ScanStatus | null;
  tracks: TrackStatus[];
}

export type OutboundMessage =
  | { type: "joy"; x: number; y: number }
  | { type: "enable"; held: boolean }
  | { type: "estop" }
  | { type: "reset" }
  | { type: "goal"; x: number; y: number; heading?: number }
  | { type: "mode"; mode: "MANUAL" | "AUTONOMOUS" };

export function parseStatus(raw: string): StatusMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as Record<string, unknown>;
  if (msg.type !== "status" || typeof msg.frame !== "object") return null;
  return msg as unknown as StatusMessage;
}

export const clamp = (v: number): number => Math.max(-1, Math.min(1, v));
