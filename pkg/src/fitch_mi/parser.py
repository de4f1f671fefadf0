"""Parser for the module language and Fitch-style proof scripts.

Fitch nesting is recognized from the ``|`` prefix depth of each line; the
hypothesis separator is a run of three or more ``-`` characters inside the
bars.  Every Unicode symbol has a plain-keyboard alias (``forall``,
``exists``, ``/\\``, ``\\/``, ``==>``, ``not``, ``|-``, ``Nat``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import (
    ConstructorSig,
    Ctor,
    Formula,
    Pred,
    And,
    Or,
    Implies,
    Not,
    Forall,
    Exists,
    PropParam,
    Bottom,
    RigidVar,
    SchematicVar,
    Term,
)
from .syntax import (
    BUILTIN_ALIASES,
    Assumption,
    BuiltIn,
    ByCaseAnalysis,
    ByInduction,
    ByInversion,
    ByRule,
    ByTheorem,
    Case,
    DataDecl,
    ForAny,
    ForSome,
    Hypothesis,
    InversionCase,
    Justification,
    Line,
    ModuleAST,
    ProofScript,
    Prove,
    RuleDecl,
    Step,
    Subproof,
    TheoremDecl,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class DuplicateName(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {
    "by", "on", "rule", "theorem", "data", "case", "for", "all", "any",
    "some", "propositions", "induction", "analysis", "inversion", "prove",
    "schema",
}

_WORD_ALIASES = {"forall": "∀", "exists": "∃", "not": "¬", "Nat": "ℕ"}

_SYMBOLS = [
    ("==>", "⟹"),
    ("|-", "⊢"),
    ("/\\", "∧"),
    ("\\/", "∨"),
    ("->", "->"),
    ("⟹", "⟹"),
    ("⊢", "⊢"),
    ("∧", "∧"),
    ("∨", "∨"),
    ("∀", "∀"),
    ("∃", "∃"),
    ("¬", "¬"),
    ("⊥", "⊥"),
    ("(", "("),
    (")", ")"),
    (",", ","),
    (":", ":"),
    ("=", "="),
    ("|", "|"),
]

_CONNECTIVE_HEADS = {"∀", "∃", "∧", "∨", "⟹", "¬", "⊥"}

_SUBSCRIPTS = "₀₁₂₃₄₅₆₇₈₉"
_WORD_EXTRA = _SUBSCRIPTS + "-_'′→"


def _is_word_start(c: str) -> bool:
    return c.isalpha() or c.isdigit()


def _is_word_char(c: str) -> bool:
    return c.isalpha() or c.isdigit() or c in _WORD_EXTRA


@dataclass(frozen=True)
class Token:
    kind: str  # WORD | KW | BUILTIN | a symbol literal | EOL
    value: str
    line: int
    col: int


def lex(content: str, line: int, col0: int) -> list[Token]:
    toks: list[Token] = []
    i = 0
    n = len(content)
    while i < n:
        c = content[i]
        if c.isspace():
            i += 1
            continue
        col = col0 + i
        if _is_word_start(c):
            j = i + 1
            while j < n and _is_word_char(content[j]):
                j += 1
            word = content[i:j]
            if word in KEYWORDS:
                toks.append(Token("KW", word, line, col))
            elif word in _WORD_ALIASES:
                alias = _WORD_ALIASES[word]
                if alias in ("∀", "∃", "¬"):
                    toks.append(Token(alias, alias, line, col))
                else:
                    toks.append(Token("WORD", alias, line, col))
            elif word in BUILTIN_ALIASES:
                toks.append(Token("BUILTIN", BUILTIN_ALIASES[word], line, col))
            else:
                toks.append(Token("WORD", word, line, col))
            i = j
            continue
        matched = False
        for raw, canon in _SYMBOLS:
            if content.startswith(raw, i):
                j = i + len(raw)
                if canon in _CONNECTIVE_HEADS:
                    for suffix in ("-intro", "-elim"):
                        name = canon + suffix
                        if content.startswith(suffix, j) and name in BUILTIN_ALIASES:
                            end = j + len(suffix)
                            if end >= n or not _is_word_char(content[end]):
                                toks.append(
                                    Token("BUILTIN", BUILTIN_ALIASES[name], line, col)
                                )
                                i = end
                                break
                    else:
                        toks.append(Token(canon, canon, line, col))
                        i = j
                    matched = True
                    break
                toks.append(Token(canon, canon, line, col))
                i = j
                matched = True
                break
        if not matched:
            raise ParseError(f"unexpected character {c!r}", line, col + 1)
    toks.append(Token("EOL", "", line, col0 + n))
    return toks


# ---------------------------------------------------------------------------
# physical lines


@dataclass
class PLine:
    num: int
    depth: int
    content: str
    col: int  # 0-based column where content starts
    is_sep: bool


def split_lines(text: str) -> list[PLine]:
    out: list[PLine] = []
    for num, raw in enumerate(text.splitlines(), start=1):
        if "#" in raw:
            raw = raw.split("#", 1)[0]
        i = 0
        depth = 0
        n = len(raw)
        sep = False
        while i < n:
            c = raw[i]
            if c.isspace():
                i += 1
                continue
            if c == "|":
                tail = raw[i + 1 :].strip()
                if tail and set(tail) == {"-"} and len(tail) >= 3:
                    # the last bar of a hypothesis separator, e.g. "|  |---"
                    depth += 1
                    sep = True
                    break
                if raw.startswith("|-", i):
                    break  # an ASCII turnstile, part of the content
                depth += 1
                i += 1
                continue
            break
        rest = raw[i:]
        stripped = rest.strip()
        if sep:
            out.append(PLine(num, depth, "", i, True))
            continue
        if not stripped and depth == 0:
            continue
        if stripped and set(stripped) == {"-"} and len(stripped) >= 3:
            out.append(PLine(num, depth, "", i, True))
            continue
        out.append(PLine(num, depth, stripped, i + (len(rest) - len(rest.lstrip())), False))
    return out


# ---------------------------------------------------------------------------
# parse environment


@dataclass
class ParseContext:
    """Names visible to the parser: signature plus ambient scope."""

    sorts: dict[str, tuple[str, ...]] = field(default_factory=dict)  # sort -> ctor names
    ctors: dict[str, tuple[str, ConstructorSig]] = field(default_factory=dict)
    preds: dict[str, tuple[str, ...]] = field(default_factory=dict)  # name -> arg sorts
    rules: dict[str, RuleDecl] = field(default_factory=dict)
    theorems: dict[str, TheoremDecl] = field(default_factory=dict)
    decl_names: set[str] = field(default_factory=set)
    # ambient scope for fragments
    vars: dict[str, tuple[str, str]] = field(default_factory=dict)  # name -> (kind, sort)
    labels: set[str] = field(default_factory=set)


class _Parser:
    def __init__(self, ctx: ParseContext):
        self.ctx = ctx
        self.var_scopes: list[dict[str, tuple[str, str]]] = [dict(ctx.vars)]
        self.label_scopes: list[set[str]] = [set(ctx.labels)]

    # -- scope helpers

    def lookup_var(self, name: str) -> tuple[str, str] | None:
        for scope in reversed(self.var_scopes):
            if name in scope:
                return scope[name]
        return None

    def push_vars(self, vs: dict[str, tuple[str, str]]) -> None:
        self.var_scopes.append(vs)

    def pop_vars(self) -> None:
        self.var_scopes.pop()

    def label_visible(self, name: str) -> bool:
        return any(name in s for s in self.label_scopes)

    def add_label(self, name: str | None, tok: Token | None = None) -> None:
        if name is None:
            return
        if name in self.label_scopes[-1]:
            raise DuplicateName(
                f"duplicate label {name!r}",
                tok.line if tok else 0,
                tok.col + 1 if tok else 0,
            )
        self.label_scopes[-1].add(name)

    # -- token cursor helpers work on an explicit list + index

    def expect(self, toks: list[Token], i: int, kind: str, what: str) -> int:
        t = toks[i]
        if t.kind != kind and not (kind == "KW" and t.kind == "KW"):
            raise ParseError(f"expected {what}, found {t.value or 'end of line'!r}", t.line, t.col + 1)
        return i + 1

    def expect_kw(self, toks: list[Token], i: int, word: str) -> int:
        t = toks[i]
        if t.kind != "KW" or t.value != word:
            raise ParseError(f"expected {word!r}, found {t.value or 'end of line'!r}", t.line, t.col + 1)
        return i + 1

    def expect_word(self, toks: list[Token], i: int, what: str) -> tuple[str, int]:
        t = toks[i]
        if t.kind != "WORD":
            raise ParseError(f"expected {what}, found {t.value or 'end of line'!r}", t.line, t.col + 1)
        return t.value, i + 1

    # -- binder groups: (a, b : S) (c : T)

    def parse_binder_groups(self, toks: list[Token], i: int) -> tuple[list[tuple[str, str]], int]:
        binders: list[tuple[str, str]] = []
        while toks[i].kind == "(":
            i += 1
            names: list[str] = []
            while True:
                name, i = self.expect_word(toks, i, "variable name")
                names.append(name)
                if toks[i].kind == ",":
                    i += 1
                    continue
                break
            i = self.expect(toks, i, ":", "':'")
            sort, i = self.expect_word(toks, i, "sort name")
            if sort not in self.ctx.sorts:
                raise UnknownIdentifier(f"unknown sort {sort!r}", toks[i - 1].line, toks[i - 1].col + 1)
            i = self.expect(toks, i, ")", "')'")
            binders.extend((n, sort) for n in names)
        if not binders:
            t = toks[i]
            raise ParseError("expected '(' starting a binder", t.line, t.col + 1)
        return binders, i

    # -- terms

    def parse_term(self, toks: list[Token], i: int, expected_sort: str | None) -> tuple[Term, int]:
        t = toks[i]
        if t.kind != "WORD":
            raise ParseError(f"expected a term, found {t.value or 'end of line'!r}", t.line, t.col + 1)
        name = t.value
        i += 1
        if name in self.ctx.ctors:
            sort, sig = self.ctx.ctors[name]
            args: list[Term] = []
            if toks[i].kind == "(":
                i += 1
                while True:
                    pos = len(args)
                    want = sig.arg_sorts[pos] if pos < len(sig.arg_sorts) else None
                    arg, i = self.parse_term(toks, i, want)
                    args.append(arg)
                    if toks[i].kind == ",":
                        i += 1
                        continue
                    break
                i = self.expect(toks, i, ")", "')'")
            if len(args) != sig.arity:
                raise ParseError(
                    f"constructor {name} expects {sig.arity} argument(s), got {len(args)}",
                    t.line,
                    t.col + 1,
                )
            if expected_sort is not None and sort != expected_sort:
                raise ParseError(f"expected a term of sort {expected_sort}, got {sort}", t.line, t.col + 1)
            return Ctor(name, tuple(args)), i
        entry = self.lookup_var(name)
        if entry is None:
            raise UnknownIdentifier(f"unknown identifier {name!r}", t.line, t.col + 1)
        kind, sort = entry
        if kind == "prop":
            raise ParseError(f"proposition parameter {name} used as a term", t.line, t.col + 1)
        if expected_sort is not None and sort != expected_sort:
            raise ParseError(f"expected a term of sort {expected_sort}, got {sort}", t.line, t.col + 1)
        if kind == "schematic":
            return SchematicVar(name, sort), i
        return RigidVar(name, sort), i

    def term_sort(self, t: Term) -> str:
        if isinstance(t, Ctor):
            return self.ctx.ctors[t.name][0]
        return t.sort  # type: ignore[union-attr]

    # -- formulas

    def parse_formula(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        return self.parse_implies(toks, i)

    def parse_implies(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        left, i = self.parse_or(toks, i)
        if toks[i].kind == "⟹":
            right, i = self.parse_implies(toks, i + 1)
            return Implies(left, right), i
        return left, i

    def parse_or(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        left, i = self.parse_and(toks, i)
        while toks[i].kind == "∨":
            right, i = self.parse_and(toks, i + 1)
            left = Or(left, right)
        return left, i

    def parse_and(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        left, i = self.parse_unary(toks, i)
        while toks[i].kind == "∧":
            right, i = self.parse_unary(toks, i + 1)
            left = And(left, right)
        return left, i

    def parse_unary(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        t = toks[i]
        if t.kind == "¬":
            body, i = self.parse_unary(toks, i + 1)
            return Not(body), i
        if t.kind in ("∀", "∃"):
            binders, i = self.parse_binder_groups(toks, i + 1)
            i = self.expect(toks, i, ":", "':' after quantifier binder")
            self.push_vars({n: ("rigid", s) for n, s in binders})
            try:
                body, i = self.parse_formula(toks, i)
            finally:
                self.pop_vars()
            cls = Forall if t.kind == "∀" else Exists
            for n, s in reversed(binders):
                body = cls(n, s, body)
            return body, i
        return self.parse_atom(toks, i)

    def parse_atom(self, toks: list[Token], i: int) -> tuple[Formula, int]:
        t = toks[i]
        if t.kind == "⊥":
            return Bottom(), i + 1
        if t.kind == "(":
            f, i = self.parse_formula(toks, i + 1)
            i = self.expect(toks, i, ")", "')'")
            return f, i
        if t.kind != "WORD":
            raise ParseError(f"expected a formula, found {t.value or 'end of line'!r}", t.line, t.col + 1)
        name = t.value
        if toks[i + 1].kind == "(":
            # predicate application
            i += 2
            args: list[Term] = []
            known = self.ctx.preds.get(name)
            while True:
                want = known[len(args)] if known and len(args) < len(known) else None
                arg, i = self.parse_term(toks, i, want)
                args.append(arg)
                if toks[i].kind == ",":
                    i += 1
                    continue
                break
            i = self.expect(toks, i, ")", "')'")
            if known is None:
                self.ctx.preds[name] = tuple(self.term_sort(a) for a in args)
            elif len(known) != len(args):
                raise ParseError(
                    f"predicate {name} expects {len(known)} argument(s), got {len(args)}",
                    t.line,
                    t.col + 1,
                )
            return Pred(name, tuple(args)), i
        entry = self.lookup_var(name)
        if entry is not None and entry[0] == "prop":
            return PropParam(name), i + 1
        if entry is not None or name in self.ctx.ctors:
            raise ParseError(f"term {name} used as a formula", t.line, t.col + 1)
        known = self.ctx.preds.get(name)
        if known is not None and len(known) != 0:
            raise ParseError(
                f"predicate {name} expects {len(known)} argument(s), got 0", t.line, t.col + 1
            )
        if known is None:
            self.ctx.preds[name] = ()
        return Pred(name), i + 1

    # -- justifications

    def parse_refs(self, toks: list[Token], i: int) -> tuple[tuple[str, ...], int]:
        refs: list[str] = []
        while True:
            t = toks[i]
            if t.kind != "WORD":
                raise ParseError(f"expected a label reference, found {t.value or 'end of line'!r}", t.line, t.col + 1)
            if not self.label_visible(t.value):
                raise UnknownIdentifier(f"reference to unknown or out-of-scope label {t.value!r}", t.line, t.col + 1)
            refs.append(t.value)
            i += 1
            if toks[i].kind == ",":
                i += 1
                continue
            break
        return tuple(refs), i

    def parse_justification(
        self, toks: list[Token], i: int
    ) -> tuple[Justification | str, int]:
        """Returns the justification, or a marker string for block forms.

        Block forms (``induction``, ``case-analysis``, ``inversion``) need
        the surrounding line reader to collect their case blocks, so they
        are returned as ('induction', None) style payloads.
        """
        i = self.expect_kw(toks, i, "by")
        t = toks[i]
        if t.kind == "KW" and t.value == "rule":
            i += 1
            nt = toks[i]
            if nt.kind == "BUILTIN":
                rule = nt.value
                i += 1
                refs: tuple[str, ...] = ()
                if toks[i].kind == "KW" and toks[i].value == "on":
                    refs, i = self.parse_refs(toks, i + 1)
                return BuiltIn(rule, refs), i
            name, i = self.expect_word(toks, i, "rule name")
            if name in BUILTIN_ALIASES:
                canonical = BUILTIN_ALIASES[name]
                refs = ()
                if toks[i].kind == "KW" and toks[i].value == "on":
                    refs, i = self.parse_refs(toks, i + 1)
                return BuiltIn(canonical, refs), i
            if name not in self.ctx.rules:
                raise UnknownIdentifier(f"unknown rule {name!r}", nt.line, nt.col + 1)
            refs = ()
            if toks[i].kind == "KW" and toks[i].value == "on":
                refs, i = self.parse_refs(toks, i + 1)
            return ByRule(name, refs), i
        if t.kind == "KW" and t.value == "theorem":
            i += 1
            nt = toks[i]
            name, i = self.expect_word(toks, i, "theorem name")
            if name not in self.ctx.theorems:
                raise UnknownIdentifier(f"unknown theorem {name!r}", nt.line, nt.col + 1)
            refs = ()
            if toks[i].kind == "KW" and toks[i].value == "on":
                refs, i = self.parse_refs(toks, i + 1)
            return ByTheorem(name, refs), i
        if t.kind == "KW" and t.value == "induction":
            i = self.expect(toks, i + 1, ":", "':' after 'by induction'")
            return "induction", i
        if t.kind == "KW" and t.value == "case":
            i = self.expect_kw(toks, i + 1, "analysis")
            i = self.expect_kw(toks, i, "on")
            scrutinee, i = self.parse_term(toks, i, None)
            i = self.expect(toks, i, ":", "':' after case analysis scrutinee")
            return ("case-analysis", scrutinee), i  # type: ignore[return-value]
        if t.kind == "KW" and t.value == "inversion":
            i = self.expect_kw(toks, i + 1, "on")
            ref_tok = toks[i]
            ref, i = self.expect_word(toks, i, "fact label")
            if not self.label_visible(ref):
                raise UnknownIdentifier(
                    f"reference to unknown or out-of-scope label {ref!r}", ref_tok.line, ref_tok.col + 1
                )
            i = self.expect(toks, i, ":", "':' after inversion fact")
            return ("inversion", ref), i  # type: ignore[return-value]
        raise ParseError(
            f"expected rule, theorem, induction, case analysis or inversion, found {t.value or 'end of line'!r}",
            t.line,
            t.col + 1,
        )


# ---------------------------------------------------------------------------
# block reader


class _BlockParser(_Parser):
    """Parses a list of PLines into declarations and proof scripts."""

    def __init__(self, ctx: ParseContext, lines: list[PLine]):
        super().__init__(ctx)
        self.lines = lines
        self.pos = 0

    def peek(self) -> PLine | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self) -> PLine:
        ln = self.lines[self.pos]
        self.pos += 1
        return ln

    def tokens(self, ln: PLine) -> list[Token]:
        return lex(ln.content, ln.num, ln.col)

    # -- labels

    def maybe_label(self, toks: list[Token]) -> tuple[str | None, int]:
        if toks[0].kind == "WORD" and toks[1].kind == ":":
            return toks[0].value, 2
        return None, 0

    def assumption_shaped(self, toks: list[Token]) -> bool:
        """True when a content line can only be an assumption: every step has
        a justification ('by ...' or 'prove'), assumptions never do."""
        _, i = self.maybe_label(toks)
        t = toks[i]
        if t.kind == "|":  # a labeled subproof opening
            return False
        if t.kind == "KW" and t.value == "prove":
            return False
        if t.kind == "KW" and t.value == "for":
            return True
        return not any(t.kind == "KW" and t.value == "by" for t in toks)

    # -- assumptions

    def parse_assumption_tokens(self, toks: list[Token], i: int) -> Assumption:
        t = toks[i]
        if t.kind == "KW" and t.value == "for":
            nxt = toks[i + 1]
            if nxt.kind == "KW" and nxt.value == "any":
                binders, i = self.parse_binder_groups(toks, i + 2)
                self.end_of_line(toks, i)
                return ForAny(tuple(binders))
            raise ParseError("expected 'any' after 'for'", nxt.line, nxt.col + 1)
        label, i = self.maybe_label(toks) if i == 0 else (None, i)
        # look ahead for a 'for some' tail so witnesses scope over the formula
        fs_at = None
        for k in range(i, len(toks) - 1):
            if toks[k].kind == "KW" and toks[k].value == "for" and toks[k + 1].kind == "KW" and toks[k + 1].value == "some":
                fs_at = k
                break
        if fs_at is not None:
            tail = toks[fs_at + 2 :]
            binders, j = self.parse_binder_groups(tail, 0)
            self.end_of_line(tail, j)
            head = toks[i:fs_at] + [Token("EOL", "", toks[fs_at].line, toks[fs_at].col)]
            self.push_vars({n: ("rigid", s) for n, s in binders})
            try:
                f, j2 = self.parse_formula(head, 0)
            finally:
                self.pop_vars()
            self.end_of_line(head, j2)
            return ForSome(label, f, tuple(binders))
        f, i = self.parse_formula(toks, i)
        self.end_of_line(toks, i)
        return Hypothesis(label, f)

    def end_of_line(self, toks: list[Token], i: int) -> None:
        t = toks[i]
        if t.kind != "EOL":
            raise ParseError(f"unexpected {t.value!r}", t.line, t.col + 1)

    def register_assumptions(self, assumptions: list[Assumption]) -> None:
        """Bring assumption labels and eigenvariables into the current scopes."""
        for a in assumptions:
            if isinstance(a, ForAny):
                self.var_scopes[-1].update({n: ("rigid", s) for n, s in a.vars})
            elif isinstance(a, ForSome):
                self.var_scopes[-1].update({n: ("rigid", s) for n, s in a.witnesses})
                if a.label:
                    self.add_label(a.label)
            elif isinstance(a, Hypothesis):
                if a.label:
                    self.add_label(a.label)

    # -- subproofs and case blocks

    def parse_block_interior(self, depth: int, first_assumption_toks: list[Token] | None, opened_at: PLine) -> tuple[tuple[Assumption, ...], ProofScript]:
        """Assumption region, separator and body, all at ``depth``."""
        self.push_vars({})
        self.label_scopes.append(set())
        try:
            assumptions: list[Assumption] = []
            if first_assumption_toks is not None and first_assumption_toks[0].kind != "EOL":
                a = self.parse_assumption_tokens(first_assumption_toks, 0)
                assumptions.append(a)
                self.register_assumptions([a])
            saw_sep = False
            while True:
                ln = self.peek()
                if ln is None or ln.depth < depth:
                    break
                if ln.depth > depth:
                    raise ParseError("misindented bar nesting", ln.num, ln.col + 1)
                if ln.is_sep:
                    self.take()
                    saw_sep = True
                    break
                if not ln.content:
                    self.take()
                    continue
                toks = self.tokens(self.take())
                a = self.parse_assumption_tokens(toks, 0)
                assumptions.append(a)
                self.register_assumptions([a])
            if not saw_sep:
                raise ParseError("missing hypothesis separator (a run of '-')", opened_at.num, opened_at.col + 1)
            body = self.parse_script(depth)
            if not body.steps:
                raise ParseError("empty proof block", opened_at.num, opened_at.col + 1)
            return tuple(assumptions), body
        finally:
            self.pop_vars()
            self.label_scopes.pop()

    def parse_case_blocks(self, depth: int, kind: str) -> list[Case] | list[InversionCase]:
        cases: list = []
        while True:
            ln = self.peek()
            if ln is None or ln.depth != depth or ln.is_sep or not ln.content:
                break
            toks = self.tokens(ln)
            if not (toks[0].kind == "KW" and toks[0].value == "case"):
                break
            self.take()
            i = 1
            if kind == "inversion":
                name_tok = toks[i]
                name, i = self.expect_word(toks, i, "rule name")
                if name not in self.ctx.rules:
                    raise UnknownIdentifier(f"unknown rule {name!r}", name_tok.line, name_tok.col + 1)
                i = self.expect(toks, i, "->", "'->'")
                self.end_of_line(toks, i)
                assumptions, body = self.parse_block_interior(depth + 1, None, ln)
                cases.append(InversionCase(name, assumptions, body, ln.num))
                continue
            name_tok = toks[i]
            name, i = self.expect_word(toks, i, "constructor name")
            if name not in self.ctx.ctors:
                raise UnknownIdentifier(f"unknown constructor {name!r}", name_tok.line, name_tok.col + 1)
            _, sig = self.ctx.ctors[name]
            vars_: list[str] = []
            if toks[i].kind == "(":
                i += 1
                while True:
                    v, i = self.expect_word(toks, i, "pattern variable")
                    vars_.append(v)
                    if toks[i].kind == ",":
                        i += 1
                        continue
                    break
                i = self.expect(toks, i, ")", "')'")
            if len(vars_) != sig.arity:
                raise ParseError(
                    f"constructor {name} expects {sig.arity} pattern variable(s), got {len(vars_)}",
                    name_tok.line,
                    name_tok.col + 1,
                )
            i = self.expect(toks, i, "->", "'->'")
            self.end_of_line(toks, i)
            self.push_vars({v: ("rigid", s) for v, s in zip(vars_, sig.arg_sorts)})
            try:
                assumptions, body = self.parse_block_interior(depth + 1, None, ln)
            finally:
                self.pop_vars()
            cases.append(Case(name, tuple(vars_), assumptions, body, ln.num))
        return cases

    # -- steps

    def parse_script(self, depth: int) -> ProofScript:
        steps: list[Step] = []
        while True:
            ln = self.peek()
            if ln is None or ln.is_sep or ln.depth < depth:
                break
            if ln.depth == depth and not ln.content:
                self.take()
                continue
            if ln.depth > depth:
                if ln.depth != depth + 1:
                    raise ParseError("misindented bar nesting", ln.num, ln.col + 1)
                # unlabeled subproof given as a bare deeper block
                assumptions, body = self.parse_block_interior(depth + 1, None, ln)
                steps.append(Subproof(None, assumptions, body, ln.num))
                continue
            toks = self.tokens(ln)
            if toks[0].kind == "KW" and toks[0].value == "case":
                break  # belongs to an enclosing block form
            if (
                depth == 0
                and toks[0].kind == "KW"
                and toks[0].value in ("data", "rule", "theorem")
            ):
                break  # next top-level declaration
            if self.assumption_shaped(toks):
                # no justification, so this can only be the assumption region
                # of a sibling unlabeled subproof; the enclosing level reopens
                # it as a bare deeper block
                break
            self.take()
            step = self.parse_step(toks, ln, depth)
            steps.append(step)
        return ProofScript(tuple(steps))

    def parse_step(self, toks: list[Token], ln: PLine, depth: int) -> Step:
        label, i = self.maybe_label(toks)
        label_tok = toks[0] if label else None
        t = toks[i]
        if t.kind == "|":
            first = toks[i + 1 :]
            assumptions, body = self.parse_block_interior(depth + 1, first, ln)
            self.add_label(label, label_tok)
            return Subproof(label, assumptions, body, ln.num)
        if t.kind == "KW" and t.value == "prove":
            f, i = self.parse_formula(toks, i + 1)
            self.end_of_line(toks, i)
            self.add_label(label, label_tok)
            return Line(label, f, Prove(), ln.num)
        f, i = self.parse_formula(toks, i)
        just, i = self.parse_justification(toks, i)
        if isinstance(just, Justification):
            self.end_of_line(toks, i)
            self.add_label(label, label_tok)
            return Line(label, f, just, ln.num)
        if just == "induction":
            self.end_of_line(toks, i)
            cases = self.parse_case_blocks(depth, "induction")
            if not cases:
                raise ParseError("'by induction' without case blocks", ln.num, ln.col + 1)
            self.add_label(label, label_tok)
            return Line(label, f, ByInduction(tuple(cases)), ln.num)
        if isinstance(just, tuple) and just[0] == "case-analysis":
            self.end_of_line(toks, i)
            cases = self.parse_case_blocks(depth, "case-analysis")
            if not cases:
                raise ParseError("'by case analysis' without case blocks", ln.num, ln.col + 1)
            self.add_label(label, label_tok)
            return Line(label, f, ByCaseAnalysis(just[1], tuple(cases)), ln.num)
        if isinstance(just, tuple) and just[0] == "inversion":
            self.end_of_line(toks, i)
            cases = self.parse_case_blocks(depth, "inversion")
            self.add_label(label, label_tok)
            return Line(label, f, ByInversion(just[1], tuple(cases)), ln.num)
        raise ParseError("malformed justification", ln.num, ln.col + 1)  # pragma: no cover

    # -- declarations

    def parse_data_decl(self, toks: list[Token], ln: PLine) -> DataDecl:
        i = 1
        name_tok = toks[i]
        name, i = self.expect_word(toks, i, "sort name")
        if name in self.ctx.decl_names:
            raise DuplicateName(f"duplicate name {name!r}", name_tok.line, name_tok.col + 1)
        i = self.expect(toks, i, "=", "'='")
        # allow recursive references to the sort being declared
        self.ctx.sorts[name] = ()
        ctors: list[tuple[str, tuple[str, ...]]] = []
        while True:
            ctor_tok = toks[i]
            cname, i = self.expect_word(toks, i, "constructor name")
            if cname in self.ctx.decl_names or any(c[0] == cname for c in ctors):
                raise DuplicateName(f"duplicate name {cname!r}", ctor_tok.line, ctor_tok.col + 1)
            arg_sorts: list[str] = []
            if toks[i].kind == "(":
                i += 1
                while True:
                    st = toks[i]
                    s, i = self.expect_word(toks, i, "sort name")
                    if s not in self.ctx.sorts:
                        raise UnknownIdentifier(f"unknown sort {s!r}", st.line, st.col + 1)
                    arg_sorts.append(s)
                    if toks[i].kind == ",":
                        i += 1
                        continue
                    break
                i = self.expect(toks, i, ")", "')'")
            ctors.append((cname, tuple(arg_sorts)))
            if toks[i].kind == "|":
                i += 1
                continue
            break
        self.end_of_line(toks, i)
        self.ctx.sorts[name] = tuple(c[0] for c in ctors)
        self.ctx.decl_names.add(name)
        for cname, arg_sorts in ctors:
            self.ctx.ctors[cname] = (name, ConstructorSig(cname, arg_sorts))
            self.ctx.decl_names.add(cname)
        return DataDecl(name, tuple(ctors), ln.num)

    def parse_rule_decl(self, toks: list[Token], ln: PLine) -> RuleDecl:
        i = 1
        name_tok = toks[i]
        name, i = self.expect_word(toks, i, "rule name")
        if name in self.ctx.decl_names:
            raise DuplicateName(f"duplicate name {name!r}", name_tok.line, name_tok.col + 1)
        binders: list[tuple[str, str]] = []
        if toks[i].kind == "KW" and toks[i].value == "for":
            i = self.expect_kw(toks, i + 1, "all")
            binders, i = self.parse_binder_groups(toks, i)
        i = self.expect(toks, i, ":", "':'")
        self.push_vars({n: ("schematic", s) for n, s in binders})
        try:
            premises: list[Formula] = []
            if toks[i].kind != "⊢":
                while True:
                    f, i = self.parse_formula(toks, i)
                    premises.append(f)
                    if toks[i].kind == ",":
                        i += 1
                        continue
                    break
            i = self.expect(toks, i, "⊢", "'⊢'")
            conclusion, i = self.parse_formula(toks, i)
        finally:
            self.pop_vars()
        self.end_of_line(toks, i)
        if not isinstance(conclusion, Pred):
            raise ParseError("a rule's conclusion must be a judgment (predicate)", ln.num, ln.col + 1)
        decl = RuleDecl(name, tuple(binders), tuple(premises), conclusion, ln.num)
        self.ctx.rules[name] = decl
        self.ctx.decl_names.add(name)
        return decl

    def parse_theorem_decl(self, toks: list[Token], ln: PLine) -> TheoremDecl:
        i = 1
        is_schema = False
        if toks[i].kind == "KW" and toks[i].value == "schema":
            is_schema = True
            i += 1
        name_tok = toks[i]
        name, i = self.expect_word(toks, i, "theorem name")
        if name in self.ctx.decl_names:
            raise DuplicateName(f"duplicate name {name!r}", name_tok.line, name_tok.col + 1)
        prop_params: list[str] = []
        if toks[i].kind == "KW" and toks[i].value == "for":
            i = self.expect_kw(toks, i + 1, "all")
            i = self.expect_kw(toks, i, "propositions")
            while True:
                p, i = self.expect_word(toks, i, "proposition name")
                prop_params.append(p)
                if toks[i].kind == ",":
                    i += 1
                    continue
                break
        if prop_params and not is_schema:
            raise ParseError("proposition parameters require 'theorem schema'", ln.num, ln.col + 1)
        if is_schema and not prop_params:
            raise ParseError("a theorem schema must declare proposition parameters", ln.num, ln.col + 1)
        i = self.expect(toks, i, ":", "':'")
        self.push_vars({p: ("prop", "") for p in prop_params})
        try:
            first, i = self.parse_formula(toks, i)
            premises: list[Formula] = []
            conclusion = first
            if toks[i].kind in (",", "⊢"):
                premises = [first]
                while toks[i].kind == ",":
                    f, i = self.parse_formula(toks, i + 1)
                    premises.append(f)
                i = self.expect(toks, i, "⊢", "'⊢'")
                conclusion, i = self.parse_formula(toks, i)
            self.end_of_line(toks, i)
            proof = self.parse_script(0)
        finally:
            self.pop_vars()
        decl = TheoremDecl(name, tuple(prop_params), tuple(premises), conclusion, proof, is_schema, ln.num)
        self.ctx.theorems[name] = decl
        self.ctx.decl_names.add(name)
        return decl


# ---------------------------------------------------------------------------
# public API


def parse_module(text: str, ctx: ParseContext | None = None) -> ModuleAST:
    ctx = ctx or ParseContext()
    lines = split_lines(text)
    decls: list = []
    p = _BlockParser(ctx, lines)
    while True:
        ln = p.peek()
        if ln is None:
            break
        if not ln.content and not ln.is_sep:
            p.take()
            continue
        toks = p.tokens(ln)
        t = toks[0]
        if t.kind == "KW" and t.value == "data":
            p.take()
            decls.append(p.parse_data_decl(toks, ln))
        elif t.kind == "KW" and t.value == "rule":
            p.take()
            decls.append(p.parse_rule_decl(toks, ln))
        elif t.kind == "KW" and t.value == "theorem":
            p.take()
            decls.append(p.parse_theorem_decl(toks, ln))
        else:
            raise ParseError(
                f"expected a declaration, found {t.value or ln.content!r}", ln.num, ln.col + 1
            )
    return ModuleAST(tuple(decls))


def parse_fragment(text: str, ctx: ParseContext) -> ProofScript:
    """Parse a standalone proof block against an ambient scope."""
    lines = split_lines(text)
    p = _BlockParser(ctx, lines)
    script = p.parse_script(0)
    ln = p.peek()
    if ln is not None:
        raise ParseError("unexpected content after proof block", ln.num, ln.col + 1)
    if not script.steps:
        raise ParseError("empty proof", 1, 1)
    return script
