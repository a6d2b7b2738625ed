/** Physical input: browser Gamepad API when a pad is present, keyboard
 * fallback otherwise (space = enable hold, arrows = axes). */

import { InputSender } from "./input.js";

const ENABLE_BUTTON = 0; // XBox A
const STEER_AXIS = 0;    // left stick horizontal; stick right is +, we need left +
const SPEED_AXIS = 1;    // left stick vertical; stick up is -, we need forward +

export class KeyboardPad {
  private keys = new Set<string>();

  attach(target: Pick<Document, "addEventListener">): void {
    target.addEventListener("keydown", (ev) =>
      this.keys.add((ev as KeyboardEvent).code));
    target.addEventListener("keyup", (ev) =>
      this.keys.delete((ev as KeyboardEvent).code));
  }

  read(): { enable: boolean; x: number; y: number } {
    const val = (neg: string, pos: string) =>
      (this.keys.has(pos) ? 1 : 0) - (this.keys.has(neg) ? 1 : 0);
    return {
      enable: this.keys.has("Space"),
      x: val("ArrowRight", "ArrowLeft"),
      y: val("ArrowDown", "ArrowUp"),
    };
  }
}

export function pollInputs(sender: InputSender, keyboard: KeyboardPad): void {
  const pads = typeof navigator !== "undefined" && navigator.getGamepads
    ? Array.from(navigator.getGamepads()).filter((p) => p !== null)
    : [];
  if (pads.length > 0) {
    const pad = pads[0] as Gamepad;
    sender.setEnable(pad.buttons[ENABLE_BUTTON]?.pressed ?? false);
    // stick conventions: invert so left/forward are positive
    sender.setAxes(-(pad.axes[STEER_AXIS] ?? 0), -(pad.axes[SPEED_AXIS] ?? 0));
    return;
  }
  const keys = keyboard.read();
  sender.setEnable(keys.enable);
  sender.setAxes(keys.x, keys.y);
}
