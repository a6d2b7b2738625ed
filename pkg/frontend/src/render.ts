/** Map view rendering: pose trail, scan rays, tracks with history, safety
 * lamps, battery, and the STALE banner.
 *
 * View convention: top-down, world +x to the right, +y up, vehicle kept at
 * the canvas center. All world-to-pixel math lives in worldToScreen so it
 * can be checked headlessly.
 */

import { FrameStatus, ScanStatus, TrackStatus } from "./protocol.js";
import { ConsoleState } from "./state.js";

export interface View {
  widthPx: number;
  heightPx: number;
  pxPerMeter: number;
  center: { x: number; y: number }; // world point at the canvas center
}

export function worldToScreen(view: View, px: number, py: number):
    { sx: number; sy: number } {
  return {
    sx: view.widthPx / 2 + (px - view.center.x) * view.pxPerMeter,
    sy: view.heightPx / 2 - (py - view.center.y) * view.pxPerMeter,
  };
}

/** World-frame endpoint of scan ray i, given the vehicle pose it was taken
 * from. Returns null for no-return rays. */
export function scanRayEndpoint(frame: FrameStatus, scan: ScanStatus,
                                i: number): { x: number; y: number } | null {
  const r = scan.ranges[i];
  if (r === null || r === undefined) return null;
  const bearing = frame.theta + scan.angle_min + i * scan.angle_increment;
  return {
    x: frame.x + r * Math.cos(bearing),
    y: frame.y + r * Math.sin(bearing),
  };
}

const LAMP_COLORS: Record<string, string> = {
  ACTIVE: "#2ecc40",
  STANDBY: "#ffb700",
  FAULT_LATCHED: "#ff4136",
  INIT: "#aaaaaa",
};

export function lampColor(state: string): string {
  return LAMP_COLORS[state] ?? "#aaaaaa";
}

export function renderMap(ctx: CanvasRenderingContext2D, state: ConsoleState,
                          view: View, stale: boolean): void {
  ctx.clearRect(0, 0, view.widthPx, view.heightPx);
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, view.widthPx, view.heightPx);

  if (state.frame) {
    view.center = { x: state.frame.x, y: state.frame.y };
    drawGrid(ctx, view);
    if (state.scan) drawScan(ctx, state.frame, state.scan, view);
    drawTrail(ctx, state.trail, view);
    drawTracks(ctx, state.tracks, state.trackHistory, view);
    if (state.pendingGoal) drawGoal(ctx, state.pendingGoal, view);
    drawVehicle(ctx, state.frame, view);
  } else {
    ctx.fillStyle = "#888";
    ctx.font = "16px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for telemetry…",
                 view.widthPx / 2, view.heightPx / 2);
  }

  if (stale) {
    ctx.fillStyle = "rgba(255, 65, 54, 0.85)";
    ctx.fillRect(0, 0, view.widthPx, 34);
    ctx.fillStyle = "#fff";
    ctx.font = "bold 18px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("STALE — no telemetry", view.widthPx / 2, 24);
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, view: View): void {
  ctx.strokeStyle = "#1d2733";
  ctx.lineWidth = 1;
  const meters = Math.ceil(view.widthPx / view.pxPerMeter / 2) + 1;
  const cx = Math.round(view.center.x);
  const cy = Math.round(view.center.y);
  for (let gx = cx - meters; gx <= cx + meters; gx++) {
    const { sx } = worldToScreen(view, gx, 0);
    ctx.beginPath();
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, view.heightPx);
    ctx.stroke();
  }
  for (let gy = cy - meters; gy <= cy + meters; gy++) {
    const { sy } = worldToScreen(view, 0, gy);
    ctx.beginPath();
    ctx.moveTo(0, sy);
    ctx.lineTo(view.widthPx, sy);
    ctx.stroke();
  }
}

function drawScan(ctx: CanvasRenderingContext2D, frame: FrameStatus,
                  scan: ScanStatus, view: View): void {
  ctx.strokeStyle = "rgba(46, 204, 64, 0.25)";
  ctx.fillStyle = "#2ecc40";
  const origin = worldToScreen(view, frame.x, frame.y);
  for (let i = 0; i < scan.ranges.length; i++) {
    const hit = scanRayEndpoint(frame, scan, i);
    if (!hit) continue;
    const s = worldToScreen(view, hit.x, hit.y);
    ctx.beginPath();
    ctx.moveTo(origin.sx, origin.sy);
    ctx.lineTo(s.sx, s.sy);
    ctx.stroke();
    ctx.fillRect(s.sx - 1.5, s.sy - 1.5, 3, 3);
  }
}

function drawTrail(ctx: CanvasRenderingContext2D,
                   trail: { x: number; y: number }[], view: View): void {
  if (trail.length < 2) return;
  ctx.strokeStyle = "#3d9970";
  ctx.lineWidth = 2;
  ctx.beginPath();
  trail.forEach((p, i) => {
    const s = worldToScreen(view, p.x, p.y);
    if (i === 0) ctx.moveTo(s.sx, s.sy);
    else ctx.lineTo(s.sx, s.sy);
  });
  ctx.stroke();
}

function drawTracks(ctx: CanvasRenderingContext2D, tracks: TrackStatus[],
                    history: Map<number, { x: number; y: number }[]>,
                    view: View): void {
  for (const [, points] of history) {
    ctx.strokeStyle = "rgba(255, 220, 0, 0.5)";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach((p, i) => {
      const s = worldToScreen(view, p.x, p.y);
      if (i === 0) ctx.moveTo(s.sx, s.sy);
      else ctx.lineTo(s.sx, s.sy);
    });
    ctx.stroke();
  }
  for (const track of tracks) {
    const s = worldToScreen(view, track.x, track.y);
    ctx.fillStyle = "#ffdc00";
    ctx.beginPath();
    ctx.arc(s.sx, s.sy, 6, 0, 2 * Math.PI);
    ctx.fill();
    const tip = worldToScreen(view, track.x + track.vx, track.y + track.vy);
    ctx.strokeStyle = "#ffdc00";
    ctx.beginPath();
    ctx.moveTo(s.sx, s.sy);
    ctx.lineTo(tip.sx, tip.sy);
    ctx.stroke();
    ctx.fillStyle = "#ccc";
    ctx.font = "11px sans-serif";
    ctx.fillText(String(track.id), s.sx + 8, s.sy - 8);
  }
}

function drawGoal(ctx: CanvasRenderingContext2D,
                  goal: { x: number; y: number }, view: View): void {
  const s = worldToScreen(view, goal.x, goal.y);
  ctx.strokeStyle = "#7fdbff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(s.sx, s.sy, 8, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(s.sx - 12, s.sy);
  ctx.lineTo(s.sx + 12, s.sy);
  ctx.moveTo(s.sx, s.sy - 12);
  ctx.lineTo(s.sx, s.sy + 12);
  ctx.stroke();
}

function drawVehicle(ctx: CanvasRenderingContext2D, frame: FrameStatus,
                     view: View): void {
  const s = worldToScreen(view, frame.x, frame.y);
  ctx.save();
  ctx.translate(s.sx, s.sy);
  ctx.rotate(-frame.theta); // canvas y is flipped
  ctx.fillStyle = frame.motor_power ? "#2ecc40" : "#aaaaaa";
  ctx.beginPath();
  ctx.moveTo(14, 0);
  ctx.lineTo(-9, 7);
  ctx.lineTo(-9, -7);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}
