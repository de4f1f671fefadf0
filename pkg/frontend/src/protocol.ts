/** Wire protocol messages exchanged with the proof server over a WebSocket. */

export interface Hypothesis {
  label: string;
  formula: string;
}

export interface TraceEntry {
  kind: string;
  goal: string;
  strategy?: string;
  var?: string;
  pattern?: string;
  hypotheses?: Hypothesis[];
}

export interface PromptMsg {
  type: "prompt";
  session: string;
  theorem: string;
  goal: string;
  trace: TraceEntry[];
  trace_text: string;
  hypotheses: Hypothesis[];
  error?: { message: string; line?: number };
}

export interface DoneMsg {
  type: "done";
  session: string;
  gaps: boolean;
  elaborated_gapped: string;
  elaborated_full: string;
}

export interface FailedMsg {
  type: "failed";
  session: string;
  reason: string;
}

export interface ErrorMsg {
  type: "error";
  where: string;
  message: string;
  line?: number;
}

export type ServerMsg = PromptMsg | DoneMsg | FailedMsg | ErrorMsg;

export interface StartMsg {
  type: "start";
  module: string;
  theorem: string;
  max_depth?: number;
}

export interface FragmentMsg {
  type: "fragment";
  text: string;
}

export interface CommandMsg {
  type: "command";
  name: string;
}

export type ClientMsg = StartMsg | FragmentMsg | CommandMsg;
