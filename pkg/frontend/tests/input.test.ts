/** Console gating: no drive messages without enable, exactly one zero on
 * release, e-stop bypasses gating. */

import { describe, expect, it } from "vitest";

import { InputSender, MessageSink } from "../src/input.js";

class MockSocket implements MessageSink {
  sent: { type: string; [k: string]: unknown }[] = [];
  open = true;

  send(data: string): void {
    this.sent.push(JSON.parse(data));
  }

  ofType(type: string) {
    return this.sent.filter((m) => m.type === type);
  }
}

describe("InputSender gating", () => {
  it("emits zero drive messages while enable is not held", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    sender.setAxes(1, 1);
    for (let i = 0; i < 50; i++) sender.tick();
    expect(sock.ofType("joy")).toHaveLength(0);
  });

  it("streams joy at cadence while enabled, raw clamped axes only", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    sender.setEnable(true);
    sender.setAxes(2.0, -0.5); // clamped to 1, passed through otherwise
    for (let i = 0; i < 10; i++) sender.tick();
    const joys = sock.ofType("joy");
    expect(joys).toHaveLength(10);
    for (const j of joys) {
      expect(j.x).toBe(1);
      expect(j.y).toBe(-0.5);
    }
  });

  it("sends exactly one zero command on release, then silence", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    sender.setEnable(true);
    sender.setAxes(0.8, 0.9);
    for (let i = 0; i < 5; i++) sender.tick();
    sock.sent.length = 0;

    sender.setEnable(false);
    for (let i = 0; i < 50; i++) sender.tick();

    const joys = sock.ofType("joy");
    expect(joys).toHaveLength(1);
    expect(joys[0]).toMatchObject({ x: 0, y: 0 });
    expect(sock.ofType("enable")).toEqual([{ type: "enable", held: false }]);
  });

  it("release zero is sent once even with repeated setEnable(false)", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    sender.setEnable(true);
    sender.setEnable(false);
    sender.setEnable(false);
    sender.setEnable(false);
    expect(sock.ofType("joy")).toHaveLength(1);
  });

  it("e-stop bypasses the enable gate", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    expect(sender.enableHeld).toBe(false);
    sender.pressEstop();
    expect(sock.ofType("estop")).toHaveLength(1);
  });

  it("e-stop is not rate limited", () => {
    const sock = new MockSocket();
    const sender = new InputSender(sock);
    for (let i = 0; i < 5; i++) sender.pressEstop();
    expect(sock.ofType("estop")).toHaveLength(5);
  });

  it("never touches a closed socket", () => {
    const sock = new MockSocket();
    sock.open = false;
    const sender = new InputSender(sock);
    sender.setEnable(true);
    sender.tick();
    sender.pressEstop();
    expect(sock.sent).toHaveLength(0);
  });
});
