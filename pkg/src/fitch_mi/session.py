"""Mixed-initiative proving sessions.

A ``Session`` proves one theorem of a module with the search engine,
suspending whenever the search gets stuck and publishing a prompt.  The
user answers with a proof fragment, ``skip`` or ``abort``; accepted
responses are replayed into a fresh engine run, which keeps the state
machine trivially deterministic and makes transcripts replayable.
"""

from __future__ import annotations

import json
import time

from .checker import CheckError, Signature, check_module
from .derivation import Derivation, has_gaps
from .elaborate import elaborate_full, elaborate_gapped, elaborated_module
from .parser import ParseError
from .printer import print_module
from .search import (
    ABORT,
    FRAGMENT,
    SKIP,
    Prompt,
    SearchAborted,
    SearchEngine,
    SearchStuck,
    autonomous_hook,
)
from .syntax import DataDecl, ModuleAST, RuleDecl, TheoremDecl
from .validator import validate_theorem

# phases
SEARCHING = "searching"
AWAITING_USER = "awaiting-user"
DONE = "done"
DONE_WITH_GAPS = "done-with-gaps"
FAILED = "failed"

TERMINAL = (DONE, DONE_WITH_GAPS, FAILED)

COMMANDS = ("context", "trace", "abort", "skip")


class SessionError(Exception):
    pass


class _Suspend(Exception):
    """Raised by the replay helper when the recorded answers run out."""

    def __init__(self, prompt: Prompt):
        super().__init__("awaiting user input")
        self.prompt = prompt


def _error_json(e: Exception) -> dict:
    out = {"type": "error", "where": "fragment", "message": str(e)}
    line = getattr(e, "line", None) or getattr(e, "pos", None)
    if line:
        out["line"] = line
    return out


class Session:
    """One theorem, one linear thread of prompts and responses."""

    def __init__(self, module: ModuleAST, theorem: str, max_depth: int = 32):
        self.module = module
        self.theorem = theorem
        self.max_depth = max_depth
        self.decl = None
        self.sig = self._prefix_signature()
        self.answers: list[tuple] = []
        self.transcript: list[dict] = []
        self.derivation: Derivation | None = None
        self.fragments: tuple = ()
        self.reason = ""
        self.phase = SEARCHING
        self._prompt: Prompt | None = None
        self._record("start", theorem=theorem, max_depth=max_depth)
        self._run()

    # -- setup

    def _prefix_signature(self) -> Signature:
        """Signature of the module prefix before the target theorem, with
        every prefix theorem checked (search enabled) to fill the proved set."""
        prefix = []
        for d in self.module.declarations:
            if isinstance(d, TheoremDecl) and d.name == self.theorem:
                self.decl = d
                break
            prefix.append(d)
        if self.decl is None:
            raise SessionError(f"no theorem named {self.theorem!r} in the module")
        sig = Signature()
        report = check_module(
            ModuleAST(tuple(prefix)), search_hook=autonomous_hook(self.max_depth)
        )
        proved = {r.name for r in report.results if r.proved}
        for d in prefix:
            if isinstance(d, DataDecl):
                sig.add_data(d)
            elif isinstance(d, RuleDecl):
                sig.rules[d.name] = d
            else:
                sig.theorems[d.name] = d
        sig.proved = proved
        sig.theorems[self.theorem] = self.decl
        return sig

    # -- transcript

    def _record(self, event: str, **payload) -> None:
        self.transcript.append({"event": event, "time": time.time(), **payload})

    def save_transcript(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.transcript:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    @classmethod
    def replay(cls, module: ModuleAST, theorem: str, transcript_path: str,
               max_depth: int = 32) -> "Session":
        """A fresh session fed the responses recorded in a transcript file."""
        session = cls(module, theorem, max_depth)
        with open(transcript_path, encoding="utf-8") as fh:
            for raw in fh:
                entry = json.loads(raw)
                if session.phase not in (AWAITING_USER,):
                    break
                if entry["event"] == "fragment":
                    session.submit_fragment(entry["text"])
                elif entry["event"] == "command":
                    session.submit_command(entry["name"])
        return session

    # -- the replay run

    def _run(self) -> None:
        queue = list(self.answers)

        def helper(prompt: Prompt, ctx):
            if not queue:
                raise _Suspend(prompt)
            answer = queue.pop(0)
            if answer[0] == "fragment":
                return (FRAGMENT, answer[1])
            if answer[0] == "skip":
                return (SKIP,)
            return (ABORT,)

        engine = SearchEngine(
            self.sig, self.theorem, helper=helper, max_depth=self.max_depth
        )
        try:
            d = engine.prove_theorem(self.decl)
        except _Suspend as e:
            self._prompt = e.prompt
            self.phase = AWAITING_USER
            self._record("prompt", prompt=self.prompt_json())
            return
        except SearchAborted:
            self.phase = FAILED
            self.reason = "user abort"
            self._record("failed", reason=self.reason)
            return
        except (SearchStuck, CheckError) as e:
            self.phase = FAILED
            self.reason = str(e)
            self._record("failed", reason=self.reason)
            return
        validate_theorem(
            d, self.sig, self.decl.premises, self.decl.conclusion, allow_gaps=True
        )
        self.derivation = d
        self.fragments = tuple(engine.user_fragments)
        self.phase = DONE_WITH_GAPS if has_gaps(d) else DONE
        self._record("done", gaps=self.phase == DONE_WITH_GAPS)

    # -- user responses

    def submit_fragment(self, text: str) -> dict:
        self._need_awaiting()
        self._record("fragment", text=text)
        self.answers.append(("fragment", text))
        self._run()
        if self.phase == AWAITING_USER and self._prompt.error is not None:
            # the fragment was rejected; forget it so replays stay clean
            self.answers.pop()
            message = _error_json(self._prompt.error)
            self._record("error", **{k: v for k, v in message.items() if k != "type"})
            return message
        return self.outcome_json()

    def submit_command(self, name: str) -> dict:
        self._need_awaiting()
        if name not in COMMANDS:
            raise SessionError(f"unknown command {name!r}")
        self._record("command", name=name)
        if name == "context":
            return {"type": "prompt", **self.prompt_json()}
        if name == "trace":
            return {"type": "prompt", **self.prompt_json()}
        self.answers.append((name,))
        self._run()
        return self.outcome_json()

    def _need_awaiting(self) -> None:
        if self.phase != AWAITING_USER:
            raise SessionError(f"session is not awaiting input (phase {self.phase})")

    # -- views

    def prompt_json(self) -> dict:
        p = self._prompt
        assert p is not None
        out = {
            "theorem": p.theorem,
            "trace": p.trace,
            "trace_text": p.trace_text,
            "goal": p.goal_text,
            "hypotheses": p.hypotheses,
        }
        if p.error is not None:
            out["error"] = _error_json(p.error)
        return out

    def prompt_text(self) -> str:
        self._need_awaiting()
        return self._prompt.trace_text

    def outcome_json(self) -> dict:
        if self.phase == AWAITING_USER:
            return {"type": "prompt", **self.prompt_json()}
        if self.phase == FAILED:
            return {"type": "failed", "reason": self.reason}
        return {
            "type": "done",
            "gaps": self.phase == DONE_WITH_GAPS,
            "elaborated_gapped": self.elaborate("gapped"),
            "elaborated_full": self.elaborate("full"),
        }

    # -- elaboration

    def elaborate(self, mode: str = "gapped") -> str:
        if self.phase not in (DONE, DONE_WITH_GAPS):
            raise SessionError("nothing to elaborate, the session is not done")
        if mode == "full":
            script = elaborate_full(self.derivation, self.sig)
        elif mode == "gapped":
            script = elaborate_gapped(
                self.derivation, self.sig, self.decl, self.fragments
            )
        else:
            raise SessionError(f"unknown elaboration mode {mode!r}")
        module = elaborated_module(self.module, self.theorem, script)
        return print_module(module)
