/** Headless coordinate checks: a track 3 m ahead of the vehicle must land
 * 3 m ahead of the vehicle glyph on the map view. */

import { describe, expect, it } from "vitest";

import { FrameStatus } from "../src/protocol.js";
import { lampColor, scanRayEndpoint, View, worldToScreen } from "../src/render.js";

const VIEW: View = { widthPx: 800, heightPx: 600, pxPerMeter: 40,
                     center: { x: 0, y: 0 } };

function frameAt(x: number, y: number, theta: number): FrameStatus {
  return {
    t: 0, x, y, theta, v: 0, delta: 0,
    safety_state: "ACTIVE", safety_reason: "ALL_CLEAR",
    motor_power: true, brake_engaged: false, steer_feedback_v: 2.5,
    motor_units: 0, battery_v: 24.8, mode: "MANUAL", connected: true,
  };
}

describe("worldToScreen", () => {
  it("puts a track at (3, 0) exactly 3 m ahead of the vehicle glyph", () => {
    const vehicle = worldToScreen(VIEW, 0, 0);
    const marker = worldToScreen(VIEW, 3, 0);
    expect(marker.sx - vehicle.sx).toBeCloseTo(3 * VIEW.pxPerMeter);
    expect(marker.sy - vehicle.sy).toBeCloseTo(0);
  });

  it("flips y so world-left is screen-up", () => {
    const vehicle = worldToScreen(VIEW, 0, 0);
    const left = worldToScreen(VIEW, 0, 2);
    expect(left.sy - vehicle.sy).toBeCloseTo(-2 * VIEW.pxPerMeter);
  });

  it("is view-centered: the view center lands mid-canvas", () => {
    const view: View = { ...VIEW, center: { x: 10, y: -5 } };
    const s = worldToScreen(view, 10, -5);
    expect(s.sx).toBe(400);
    expect(s.sy).toBe(300);
  });
});

describe("scanRayEndpoint", () => {
  const scan = { angle_min: -0.4, angle_increment: 0.4,
                 ranges: [2.0, null, 1.0] as (number | null)[] };

  it("returns null on no-return rays", () => {
    expect(scanRayEndpoint(frameAt(0, 0, 0), scan, 1)).toBeNull();
  });

  it("projects center ray straight ahead in world frame", () => {
    const hit = scanRayEndpoint(frameAt(1, 2, 0), scan, 1 + 1)!;
    // bearing = theta + (-0.4) + 2 * 0.4 = +0.4 rad
    expect(hit.x).toBeCloseTo(1 + Math.cos(0.4));
    expect(hit.y).toBeCloseTo(2 + Math.sin(0.4));
  });

  it("rotates with the vehicle heading", () => {
    const hit = scanRayEndpoint(frameAt(0, 0, Math.PI / 2), scan, 0)!;
    const bearing = Math.PI / 2 - 0.4;
    expect(hit.x).toBeCloseTo(2 * Math.cos(bearing));
    expect(hit.y).toBeCloseTo(2 * Math.sin(bearing));
  });
});

describe("lampColor", () => {
  it("maps the safety states to distinct colors", () => {
    const colors = new Set(["ACTIVE", "STANDBY", "FAULT_LATCHED", "INIT"]
      .map(lampColor));
    expect(colors.size).toBe(4);
  });

  it("falls back to grey for unknown states", () => {
    expect(lampColor("WAT")).toBe("#aaaaaa");
  });
});
