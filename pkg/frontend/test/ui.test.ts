import { describe, expect, it } from "vitest";

import type { DoneMsg, FailedMsg, PromptMsg } from "../src/protocol.js";
import { renderApp, renderControls, renderPrompt } from "../src/render.js";
import { canSubmitFragment, initialState, reduce, started, State } from "../src/state.js";

const prompt: PromptMsg = {
  type: "prompt",
  session: "s1",
  theorem: "sum-total-comm",
  goal: "∃ (n₃ : ℕ) : Sum(S(m₁), S(m₂), n₃) ∧ Sum(S(m₂), S(m₁), n₃)",
  trace: [
    { kind: "goal", strategy: "induction", goal: "∀ (n₁ : ℕ) : ..." },
    {
      kind: "case",
      var: "n₁",
      pattern: "S(m₁)",
      goal: "∀ (n₂ : ℕ) : ...",
      hypotheses: [{ label: "ind-hyp₁", formula: "∀ (n₂ : ℕ) : ..." }],
    },
  ],
  trace_text: "...",
  hypotheses: [
    { label: "ind-hyp₂", formula: "∃ (n₃ : ℕ) : ..." },
    { label: "ind-hyp₁", formula: "∀ (n₂ : ℕ) : ..." },
  ],
};

const done: DoneMsg = {
  type: "done",
  session: "s1",
  gaps: false,
  elaborated_gapped: "theorem ...",
  elaborated_full: "theorem ... <full>",
};

const failed: FailedMsg = { type: "failed", session: "s1", reason: "aborted" };

function awaitingState(): State {
  return reduce(started(initialState(), "sum-total-comm"), prompt);
}

describe("rendering determinism", () => {
  it("renders the same state to identical markup every time", () => {
    const state = awaitingState();
    const first = renderApp(state);
    for (let i = 0; i < 50; i++) {
      expect(renderApp(state)).toBe(first);
    }
  });

  it("renders independently rebuilt equal states identically", () => {
    const a = renderApp(awaitingState());
    const b = renderApp(awaitingState());
    expect(a).toBe(b);
  });

  it("keeps hypothesis and trace order as given by the server", () => {
    const html = renderPrompt(awaitingState());
    const i2 = html.indexOf("ind-hyp₂");
    const i1 = html.indexOf("ind-hyp₁", i2 + 1);
    expect(i2).toBeGreaterThan(-1);
    expect(i1).toBeGreaterThan(i2);
    expect(html.indexOf("induction")).toBeLessThan(html.indexOf("S(m₁)"));
  });

  it("escapes markup in formulas", () => {
    const state = awaitingState();
    const injected = {
      ...prompt,
      goal: "<script>alert(1)</script>",
    };
    const html = renderPrompt(reduce(state, injected));
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("fragment submission gating", () => {
  it("is enabled exactly in the awaiting_user phase", () => {
    const idle = initialState();
    expect(canSubmitFragment(idle)).toBe(false);
    const starting = started(idle, "sum-total-comm");
    expect(canSubmitFragment(starting)).toBe(false);
    const awaiting = reduce(starting, prompt);
    expect(canSubmitFragment(awaiting)).toBe(true);
    expect(canSubmitFragment(reduce(awaiting, done))).toBe(false);
    expect(canSubmitFragment(reduce(awaiting, failed))).toBe(false);
    expect(
      canSubmitFragment(reduce(awaiting, { ...done, gaps: true }))
    ).toBe(false);
  });

  it("renders disabled controls outside awaiting_user", () => {
    const awaiting = awaitingState();
    expect(renderControls(awaiting)).not.toContain("disabled");
    for (const state of [
      initialState(),
      started(initialState(), "t"),
      reduce(awaiting, done),
      reduce(awaiting, failed),
    ]) {
      const html = renderControls(state);
      expect(html).toContain('<button id="submit" disabled>');
      expect(html).toContain("<textarea");
      expect(html).toContain(" disabled></textarea>");
    }
  });

  it("a protocol error keeps the session awaiting and submission enabled", () => {
    const awaiting = awaitingState();
    const after = reduce(awaiting, {
      type: "error",
      where: "fragment",
      message: "unknown identifier",
      line: 3,
    });
    expect(after.phase).toBe("awaiting_user");
    expect(canSubmitFragment(after)).toBe(true);
    expect(renderApp(after)).toContain("unknown identifier (line 3)");
  });
});
