/** Operator input to outbound messages.
 *
 * Gating rules (the gateway re-checks all of them; the console still must
 * behave):
 *   - joy messages flow only while the enable (software DMH) is held;
 *   - releasing enable sends exactly one zero joy, then silence;
 *   - e-stop bypasses everything: sent immediately, never rate-limited;
 *   - axes are clamped to [-1, 1] and nothing else — no smoothing, no
 *     scaling; all safety-relevant mapping lives in the gateway.
 */

import { clamp, OutboundMessage } from "./protocol.js";

export interface MessageSink {
  send(data: string): void;
  readonly open: boolean;
}

export const INPUT_CADENCE_MS = 50; // 20 Hz, below the gateway tick rate

export class InputSender {
  private enabled = false;
  private x = 0;
  private y = 0;

  constructor(private sink: MessageSink) {}

  private post(msg: OutboundMessage): void {
    if (this.sink.open) this.sink.send(JSON.stringify(msg));
  }

  setAxes(x: number, y: number): void {
    this.x = clamp(x);
    this.y = clamp(y);
  }

  setEnable(held: boolean): void {
    if (held === this.enabled) return;
    this.enabled = held;
    this.post({ type: "enable", held });
    if (!held) {
      // one explicit zero so the gateway never holds a stale setpoint
      this.post({ type: "joy", x: 0, y: 0 });
    }
  }

  /** Called at the input cadence (20 Hz). */
  tick(): void {
    if (!this.enabled) return;
    this.post({ type: "joy", x: this.x, y: this.y });
  }

  /** Safety path: never gated by enable, connection rate, or cadence. */
  pressEstop(): void {
    this.post({ type: "estop" });
  }

  pressReset(): void {
    this.post({ type: "reset" });
  }

  sendGoal(x: number, y: number): void {
    this.post({ type: "goal", x, y });
  }

  setMode(mode: "MANUAL" | "AUTONOMOUS"): void {
    this.post({ type: "mode", mode });
  }

  get enableHeld(): boolean {
    return this.enabled;
  }
}
