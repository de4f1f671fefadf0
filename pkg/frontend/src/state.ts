/** Pure session state machine driven by server messages. */

import type { PromptMsg, ServerMsg } from "./protocol.js";

export type Phase =
  | "idle"
  | "starting"
  | "awaiting_user"
  | "done"
  | "done_with_gaps"
  | "failed";

export interface State {
  phase: Phase;
  theorem: string;
  prompt: PromptMsg | null;
  elaboratedGapped: string;
  elaboratedFull: string;
  failureReason: string;
  lastError: string;
  log: string[];
}

export function initialState(): State {
  return {
    phase: "idle",
    theorem: "",
    prompt: null,
    elaboratedGapped: "",
    elaboratedFull: "",
    failureReason: "",
    lastError: "",
    log: [],
  };
}

export function started(state: State, theorem: string): State {
  return {
    ...initialState(),
    phase: "starting",
    theorem,
    log: [...state.log, `start ${theorem}`],
  };
}

/** Fragments may only be submitted while the prover is waiting on the user. */
export function canSubmitFragment(state: State): boolean {
  return state.phase === "awaiting_user";
}

export function reduce(state: State, msg: ServerMsg): State {
  switch (msg.type) {
    case "prompt":
      return {
        ...state,
        phase: "awaiting_user",
        theorem: msg.theorem,
        prompt: msg,
        lastError: msg.error ? msg.error.message : "",
        log: [...state.log, "prompt"],
      };
    case "done":
      return {
        ...state,
        phase: msg.gaps ? "done_with_gaps" : "done",
        prompt: null,
        elaboratedGapped: msg.elaborated_gapped,
        elaboratedFull: msg.elaborated_full,
        log: [...state.log, msg.gaps ? "done (gaps)" : "done"],
      };
    case "failed":
      return {
        ...state,
        phase: "failed",
        prompt: null,
        failureReason: msg.reason,
        log: [...state.log, `failed: ${msg.reason}`],
      };
    case "error":
      return {
        ...state,
        lastError: msg.line ? `${msg.message} (line ${msg.line})` : msg.message,
        log: [...state.log, `error: ${msg.message}`],
      };
  }
}
