/** Browser entry point: wires the WebSocket session to the DOM. */

import type { ClientMsg, ServerMsg } from "./protocol.js";
import { renderApp } from "./render.js";
import { canSubmitFragment, initialState, reduce, started, State } from "./state.js";

let state: State = initialState();
let socket: WebSocket | null = null;

function redraw(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.innerHTML = renderApp(state);

  const submit = document.getElementById("submit");
  const skip = document.getElementById("skip");
  const abort = document.getElementById("abort");
  submit?.addEventListener("click", () => {
    const area = document.getElementById("fragment") as HTMLTextAreaElement | null;
    if (area && canSubmitFragment(state)) {
      send({ type: "fragment", text: area.value });
    }
  });
  skip?.addEventListener("click", () => send({ type: "command", name: "skip" }));
  abort?.addEventListener("click", () => send({ type: "command", name: "abort" }));
}

function send(msg: ClientMsg): void {
  socket?.send(JSON.stringify(msg));
}

function connect(moduleText: string, theorem: string): void {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  socket = new WebSocket(`${proto}//${location.host}/session`);
  socket.addEventListener("open", () => {
    state = started(state, theorem);
    send({ type: "start", module: moduleText, theorem });
    redraw();
  });
  socket.addEventListener("message", (ev) => {
    const msg = JSON.parse(ev.data) as ServerMsg;
    state = reduce(state, msg);
    redraw();
  });
}

document.addEventListener("DOMContentLoaded", () => {
  redraw();
  const form = document.getElementById("start-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const module = (document.getElementById("module") as HTMLTextAreaElement).value;
    const theorem = (document.getElementById("theorem") as HTMLInputElement).value;
    connect(module, theorem);
  });
});
