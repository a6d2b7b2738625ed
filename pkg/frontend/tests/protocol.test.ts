import { describe, expect, it } from "vitest";

import { clamp, parseStatus } from "../src/protocol.js";

describe("parseStatus", () => {
  it("accepts a well-formed status push", () => {
    const msg = parseStatus(JSON.stringify({
      type: "status",
      frame: { t: 1, safety_state: "ACTIVE" },
      scan: null,
      tracks: [],
    }));
    expect(msg).not.toBeNull();
    expect(msg!.frame.safety_state).toBe("ACTIVE");
  });

  it("rejects garbage without throwing", () => {
    expect(parseStatus("{nope")).toBeNull();
    expect(parseStatus("42")).toBeNull();
    expect(parseStatus(JSON.stringify({ type: "other" }))).toBeNull();
  });
});

describe("clamp", () => {
  it("clamps to [-1, 1] and passes interior values through", () => {
    expect(clamp(3)).toBe(1);
    expect(clamp(-7)).toBe(-1);
    expect(clamp(0.25)).toBe(0.25);
  });
});
