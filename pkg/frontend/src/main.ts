/** Console entry point: socket, input cadence, render loop, panel DOM. */

import { KeyboardPad, pollInputs } from "./gamepad.js";
import { INPUT_CADENCE_MS, InputSender, MessageSink } from "./input.js";
import { parseStatus } from "./protocol.js";
import { applyStatus, initialState, isStale } from "./state.js";
import { lampColor, renderMap, View } from "./render.js";

const state = initialState();
const params = new URLSearchParams(location.search);
const wsUrl = params.get("ws") ?? `ws://${location.hostname || "127.0.0.1"}:8080`;

let socket: WebSocket | null = null;

const sink: MessageSink = {
  send: (data) => socket?.send(data),
  get open() {
    return socket?.readyState === WebSocket.OPEN;
  },
};
const sender = new InputSender(sink);
const keyboard = new KeyboardPad();

function connect(): void {
  socket = new WebSocket(wsUrl);
  socket.onopen = () => {
    state.socketOpen = true;
  };
  socket.onmessage = (ev) => {
    const msg = parseStatus(String(ev.data));
    if (msg) applyStatus(state, msg, Date.now());
  };
  socket.onclose = () => {
    state.socketOpen = false;
    setTimeout(connect, 1000);
  };
  socket.onerror = () => socket?.close();
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function updatePanel(): void {
  const frame = state.frame;
  const lamp = el<HTMLSpanElement>("lamp");
  const stale = isStale(state, Date.now());
  lamp.style.background = frame && !stale ? lampColor(frame.safety_state)
                                          : "#aaaaaa";
  el<HTMLSpanElement>("safety-text").textContent = frame
    ? `${frame.safety_state} (${frame.safety_reason})`
    : "no telemetry";
  el<HTMLSpanElement>("speed").textContent =
    frame ? `${frame.v.toFixed(2)} m/s  units ${frame.motor_units}` : "—";
  el<HTMLSpanElement>("battery").textContent =
    frame ? `${frame.battery_v.toFixed(1)} V` : "—";
  el<HTMLSpanElement>("mode").textContent = frame ? frame.mode : "—";
  el<HTMLSpanElement>("enable-state").textContent =
    sender.enableHeld ? "ENABLE HELD" : "enable up (hold Space or pad A)";
  const reset = el<HTMLButtonElement>("reset");
  reset.disabled = !(frame?.safety_state === "FAULT_LATCHED");
}

function start(): void {
  connect();
  keyboard.attach(document);

  const canvas = el<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d")!;
  const view: View = {
    widthPx: canvas.width,
    heightPx: canvas.height,
    pxPerMeter: 40,
    center: { x: 0, y: 0 },
  };

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const sx = ev.clientX - rect.left;
    const sy = ev.clientY - rect.top;
    const wx = view.center.x + (sx - view.widthPx / 2) / view.pxPerMeter;
    const wy = view.center.y - (sy - view.heightPx / 2) / view.pxPerMeter;
    state.pendingGoal = { x: wx, y: wy };
    sender.sendGoal(wx, wy);
  });

  el<HTMLButtonElement>("estop").addEventListener("click",
    () => sender.pressEstop());
  el<HTMLButtonElement>("reset").addEventListener("click",
    () => sender.pressReset());
  el<HTMLSelectElement>("mode-select").addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    sender.setMode(value === "AUTONOMOUS" ? "AUTONOMOUS" : "MANUAL");
  });

  setInterval(() => {
    pollInputs(sender, keyboard);
    sender.tick();
  }, INPUT_CADENCE_MS);

  const draw = () => {
    renderMap(ctx, state, view, isStale(state, Date.now()));
    updatePanel();
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

document.addEventListener("DOMContentLoaded", start);
