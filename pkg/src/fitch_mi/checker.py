"""Proof checker: verifies Fitch-style scripts and produces Derivations.

Checking is stated-formula-directed: every line states its formula and the
checker verifies the justification rather than inferring anything.  A
``prove`` justification delegates to a pluggable search hook.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import (
    And,
    Bottom,
    ConstructorSig,
    Ctor,
    Exists,
    FMeta,
    Forall,
    Formula,
    FreshGen,
    Implies,
    MetaVar,
    Not,
    Or,
    Pred,
    PropParam,
    RigidVar,
    SchematicVar,
    Sort,
    Subst,
    Term,
    UnifyFailure,
    alpha_equal,
    free_rigids,
    freshen_prop_params,
    freshen_schematics,
    instantiate,
    metas_of,
    fmetas_of,
    replace_rigids,
    replace_rigids_term,
    rigid_refinement,
    term_vars,
)
from .derivation import (
    AND_ELIM_LEFT,
    AND_ELIM_RIGHT,
    AND_INTRO,
    BOTTOM_ELIM,
    CASE,
    CASE_SPLIT,
    EXISTS_ELIM,
    EXISTS_INTRO,
    FORALL_ELIM,
    FORALL_INTRO,
    HYP,
    IMP_ELIM,
    IMP_INTRO,
    INDUCTION,
    INVERSION,
    INV_CASE,
    NOT_ELIM,
    NOT_INTRO,
    OR_ELIM,
    OR_INTRO_LEFT,
    OR_INTRO_RIGHT,
    RULE,
    THEOREM,
    Derivation,
)
from .printer import print_formula
from .syntax import (
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
    Line,
    ModuleAST,
    ProofScript,
    Prove,
    RuleDecl,
    Step,
    Subproof,
    TheoremDecl,
)


class CheckError(Exception):
    def __init__(
        self,
        message: str,
        code: str = "CheckError",
        label: str | None = None,
        pos: int | None = None,
        expected: str | None = None,
        actual: str | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.code = code
        self.label = label
        self.pos = pos
        self.expected = expected
        self.actual = actual

    def to_json(self) -> dict:
        out = {"message": self.message, "code": self.code}
        if self.label is not None:
            out["label"] = self.label
        if self.pos is not None:
            out["line"] = self.pos
        if self.expected is not None:
            out["expected"] = self.expected
        if self.actual is not None:
            out["actual"] = self.actual
        return out


# ---------------------------------------------------------------------------
# signature


@dataclass
class Signature:
    sorts: dict[str, Sort] = field(default_factory=dict)
    ctors: dict[str, tuple[str, ConstructorSig]] = field(default_factory=dict)
    preds: dict[str, tuple[str, ...]] = field(default_factory=dict)
    rules: dict[str, RuleDecl] = field(default_factory=dict)
    theorems: dict[str, TheoremDecl] = field(default_factory=dict)
    proved: set[str] = field(default_factory=set)

    def add_data(self, d: DataDecl) -> None:
        sigs = tuple(ConstructorSig(n, s) for n, s in d.constructors)
        self.sorts[d.name] = Sort(d.name, sigs)
        for sig in sigs:
            self.ctors[sig.name] = (d.name, sig)

    def ground_term(self, sort: str) -> Term:
        """The smallest ground term of a sort (breadth-first over constructors)."""
        memo: dict[str, Term | None] = {}

        def go(s: str, seen: frozenset[str]) -> Term | None:
            if s in memo:
                return memo[s]
            if s in seen:
                return None
            best: Term | None = None
            for c in self.sorts[s].constructors:
                args = []
                ok = True
                for a in c.arg_sorts:
                    t = go(a, seen | {s})
                    if t is None:
                        ok = False
                        break
                    args.append(t)
                if ok:
                    cand = Ctor(c.name, tuple(args))
                    if best is None or _term_size(cand) < _term_size(best):
                        best = cand
            memo[s] = best
            return best

        t = go(sort, frozenset())
        if t is None:
            raise CheckError(f"sort {sort} has no ground terms", code="UninhabitedSort")
        return t


def _term_size(t: Term) -> int:
    if isinstance(t, Ctor):
        return 1 + sum(_term_size(a) for a in t.args)
    return 1


def freshen_rule(r: RuleDecl, gen: FreshGen) -> tuple[tuple[Formula, ...], Formula, dict]:
    """Premises and conclusion of a rule freshened with a shared meta mapping."""
    chain: Formula = r.conclusion
    for p in reversed(r.premises):
        chain = Implies(p, chain)
    fresh, mapping = freshen_schematics(chain, gen)
    prems: list[Formula] = []
    for _ in r.premises:
        assert isinstance(fresh, Implies)
        prems.append(fresh.left)
        fresh = fresh.right
    return tuple(prems), fresh, mapping


# ---------------------------------------------------------------------------
# facts and frames


@dataclass(frozen=True)
class FormulaFact:
    label: str | None
    formula: Formula
    derivation: Derivation


@dataclass(frozen=True)
class SubproofFact:
    label: str | None
    assumptions: tuple[Assumption, ...]
    result: Formula
    result_derivation: Derivation


Fact = FormulaFact | SubproofFact


def fold_implications(premises, conclusion: Formula) -> Formula:
    out = conclusion
    for p in reversed(tuple(premises)):
        out = Implies(p, out)
    return out


def folded(fact: Fact) -> Formula:
    """The single-formula meaning of a fact."""
    if isinstance(fact, FormulaFact):
        return fact.formula
    out = fact.result
    for a in reversed(fact.assumptions):
        if isinstance(a, Hypothesis):
            out = Implies(a.formula, out)
        elif isinstance(a, ForAny):
            for n, s in reversed(a.vars):
                out = Forall(n, s, out)
        else:
            assert isinstance(a, ForSome)
            out = Implies(a.formula, out)
            for n, s in reversed(a.witnesses):
                out = Forall(n, s, out)
    return out


def fact_derivation(fact: Fact) -> Derivation:
    """A derivation of ``folded(fact)``."""
    if isinstance(fact, FormulaFact):
        return fact.derivation
    d = fact.result_derivation
    f = fact.result
    for a in reversed(fact.assumptions):
        if isinstance(a, Hypothesis):
            f = Implies(a.formula, f)
            d = Derivation(IMP_INTRO, f, (d,), assumed=(a.formula,))
        elif isinstance(a, ForAny):
            for n, s in reversed(a.vars):
                f = Forall(n, s, f)
            d = Derivation(FORALL_INTRO, f, (d,), binders=a.vars)
        else:
            assert isinstance(a, ForSome)
            f = Implies(a.formula, f)
            d = Derivation(IMP_INTRO, f, (d,), assumed=(a.formula,))
            for n, s in reversed(a.witnesses):
                f = Forall(n, s, f)
            d = Derivation(FORALL_INTRO, f, (d,), binders=a.witnesses)
    return d


def _subst_fact(fact: Fact, mapping: dict[str, Term]) -> Fact:
    if not mapping:
        return fact
    if isinstance(fact, FormulaFact):
        return FormulaFact(
            fact.label,
            replace_rigids(fact.formula, mapping),
            _subst_derivation(fact.derivation, mapping),
        )
    assumptions = []
    inner = dict(mapping)
    for a in fact.assumptions:
        if isinstance(a, Hypothesis):
            assumptions.append(Hypothesis(a.label, replace_rigids(a.formula, inner)))
        elif isinstance(a, ForAny):
            for n, _ in a.vars:
                inner.pop(n, None)
            assumptions.append(a)
        else:
            for n, _ in a.witnesses:
                inner.pop(n, None)
            assumptions.append(ForSome(a.label, replace_rigids(a.formula, inner), a.witnesses))
    return SubproofFact(
        fact.label,
        tuple(assumptions),
        replace_rigids(fact.result, inner),
        _subst_derivation(fact.result_derivation, inner),
    )


def _subst_derivation(d: Derivation, mapping: dict[str, Term]) -> Derivation:
    inner = {k: v for k, v in mapping.items() if k not in {n for n, _ in d.binders}}
    if not inner:
        return d
    return Derivation(
        d.kind,
        replace_rigids(d.formula, inner),
        tuple(_subst_derivation(c, inner) for c in d.children),
        d.name,
        tuple(replace_rigids_term(t, inner) for t in d.terms),
        d.binders,
        tuple(replace_rigids(f, inner) for f in d.assumed),
        tuple((n, replace_rigids_term(t, inner)) for n, t in d.refine),
        tuple((n, replace_rigids(f, inner)) for n, f in d.props),
    )


@dataclass
class Frame:
    kind: str  # root | subproof | case
    entries: list[Fact] = field(default_factory=list)  # declaration order
    eigen: dict[str, tuple[str, int]] = field(default_factory=dict)  # name -> (sort, index)
    subst: dict[str, Term] = field(default_factory=dict)  # applied to outer facts

    def copy(self) -> "Frame":
        f = Frame(self.kind, list(self.entries), dict(self.eigen), dict(self.subst))
        return f


class Context:
    """Signature plus the current stack of Fitch frames."""

    def __init__(self, signature: Signature, theorem: str = ""):
        self.signature = signature
        self.theorem = theorem  # name of the theorem being proved, if any
        self.frames: list[Frame] = [Frame("root")]
        self._intro = 0

    def copy(self) -> "Context":
        c = Context(self.signature, self.theorem)
        c.frames = [f.copy() for f in self.frames]
        c._intro = self._intro
        return c

    def push(self, kind: str, subst: dict[str, Term] | None = None) -> Frame:
        f = Frame(kind, subst=dict(subst or {}))
        self.frames.append(f)
        return f

    def pop(self) -> Frame:
        return self.frames.pop()

    # -- eigenvariables

    def eigen_lookup(self, name: str) -> tuple[str, int] | None:
        for f in reversed(self.frames):
            if name in f.eigen:
                return f.eigen[name]
        return None

    def eigen_indices(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.frames:
            for n, (_, i) in f.eigen.items():
                out[n] = i
        return out

    def add_eigen(self, name: str, sort: str, pos: int | None = None) -> None:
        if self.eigen_lookup(name) is not None:
            raise CheckError(
                f"variable {name} is already in scope",
                code="FreshnessViolation",
                pos=pos,
            )
        for _, f in self.iter_visible():
            if name in free_rigids(folded(f)):
                raise CheckError(
                    f"variable {name} occurs in a visible fact",
                    code="FreshnessViolation",
                    pos=pos,
                )
        self._intro += 1
        self.frames[-1].eigen[name] = (sort, self._intro)

    # -- facts

    def add_fact(self, fact: Fact, pos: int | None = None) -> None:
        if fact.label is not None:
            for f in self.frames:
                for e in f.entries:
                    if e.label == fact.label:
                        raise CheckError(
                            f"duplicate label {fact.label!r}", code="DuplicateName", pos=pos
                        )
        self.frames[-1].entries.append(fact)

    def iter_visible(self):
        """(frame index, fact) pairs with case substitutions applied."""
        n = len(self.frames)
        for i, frame in enumerate(self.frames):
            # substitutions of all frames strictly inside frame i
            for e in frame.entries:
                fact = e
                for j in range(i + 1, n):
                    if self.frames[j].subst:
                        fact = _subst_fact(fact, self.frames[j].subst)
                yield i, fact

    def lookup(self, label: str, pos: int | None = None) -> Fact:
        n = len(self.frames)
        for i in range(n - 1, -1, -1):
            for e in self.frames[i].entries:
                if e.label == label:
                    fact = e
                    for j in range(i + 1, n):
                        if self.frames[j].subst:
                            fact = _subst_fact(fact, self.frames[j].subst)
                    return fact
        raise CheckError(f"no fact labeled {label!r} in scope", code="DanglingRef", pos=pos)

    def visible_literals(self):
        """Literal (Pred) facts, innermost scope first, declaration order within."""
        n = len(self.frames)
        for i in range(n - 1, -1, -1):
            for e in self.frames[i].entries:
                if isinstance(e, FormulaFact):
                    fact = e
                    for j in range(i + 1, n):
                        if self.frames[j].subst:
                            fact = _subst_fact(fact, self.frames[j].subst)
                    if isinstance(fact.formula, Pred):
                        yield fact


# ---------------------------------------------------------------------------
# report


@dataclass
class TheoremResult:
    name: str
    proved: bool
    derivation: Derivation | None = None
    error: CheckError | None = None

    def to_json(self) -> dict:
        out: dict = {"name": self.name, "status": "proved" if self.proved else "failed"}
        if self.error is not None:
            out["error"] = self.error.to_json()
        return out


@dataclass
class Report:
    results: list[TheoremResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.proved for r in self.results)

    def to_json(self) -> dict:
        return {"ok": self.ok, "theorems": [r.to_json() for r in self.results]}


# ---------------------------------------------------------------------------
# checker


class Checker:
    def __init__(
        self,
        signature: Signature,
        search_hook=None,
        prove_enabled: bool = True,
        assume_failed: bool = False,
    ):
        self.sig = signature
        self.search_hook = search_hook
        self.prove_enabled = prove_enabled
        self.assume_failed = assume_failed
        # name of the theorem currently being checked; search hooks use it
        # to label traces and to avoid applying a theorem to itself
        self.current_theorem = ""

    # -- entry points

    def check_theorem(self, decl: TheoremDecl) -> Derivation:
        if not decl.proof.steps:
            raise CheckError(f"theorem {decl.name} has no proof", code="NoProof", pos=decl.pos)
        ctx = Context(self.sig, decl.name)
        last = self.check_script(ctx, decl.proof)
        target = fold_implications(decl.premises, decl.conclusion)
        got = folded(last)
        if not alpha_equal(got, target):
            raise CheckError(
                f"the proof of {decl.name} establishes the wrong statement",
                code="WrongResult",
                pos=decl.pos,
                expected=print_formula(target),
                actual=print_formula(got),
            )
        return fact_derivation(last)

    def check_script(self, ctx: Context, script: ProofScript) -> Fact:
        last: Fact | None = None
        for step in script.steps:
            last = self.check_step(ctx, step)
            ctx.add_fact(last, pos=step.pos)
        assert last is not None
        return last

    def check_step(self, ctx: Context, step: Step) -> Fact:
        if isinstance(step, Subproof):
            return self.check_subproof(ctx, step)
        assert isinstance(step, Line)
        try:
            deriv = self.check_line(ctx, step)
        except CheckError as e:
            if e.pos is None:
                e.pos = step.pos
            if e.label is None:
                e.label = step.label
            raise
        return FormulaFact(step.label, step.formula, deriv)

    # -- subproofs

    def enter_assumptions(self, ctx: Context, assumptions, pos) -> None:
        for a in assumptions:
            if isinstance(a, ForAny):
                for n, s in a.vars:
                    ctx.add_eigen(n, s, pos)
            elif isinstance(a, ForSome):
                for n, s in a.witnesses:
                    ctx.add_eigen(n, s, pos)
                ctx.add_fact(
                    FormulaFact(a.label, a.formula, Derivation(HYP, a.formula, name=a.label or "")),
                    pos,
                )
            else:
                assert isinstance(a, Hypothesis)
                ctx.add_fact(
                    FormulaFact(a.label, a.formula, Derivation(HYP, a.formula, name=a.label or "")),
                    pos,
                )

    def check_subproof(self, ctx: Context, sp: Subproof) -> SubproofFact:
        ctx.push("subproof")
        try:
            self.enter_assumptions(ctx, sp.assumptions, sp.pos)
            last = self.check_script(ctx, sp.body)
        finally:
            ctx.pop()
        return SubproofFact(sp.label, sp.assumptions, folded(last), fact_derivation(last))

    # -- lines

    def check_line(self, ctx: Context, line: Line) -> Derivation:
        j = line.justification
        stated = line.formula
        if isinstance(j, Prove):
            return self.check_prove(ctx, stated)
        if isinstance(j, BuiltIn):
            return self.check_builtin(ctx, stated, j)
        if isinstance(j, ByRule):
            return self.check_by_rule(ctx, stated, j)
        if isinstance(j, ByTheorem):
            return self.check_by_theorem(ctx, stated, j)
        if isinstance(j, ByInduction):
            return self.check_induction(ctx, stated, j.cases)
        if isinstance(j, ByCaseAnalysis):
            return self.check_case_analysis(ctx, stated, j.scrutinee, j.cases)
        if isinstance(j, ByInversion):
            return self.check_inversion(ctx, stated, j.ref, j.cases)
        raise CheckError(f"unknown justification {type(j).__name__}")  # pragma: no cover

    def resolve(self, ctx: Context, ref: str) -> Fact:
        return ctx.lookup(ref)

    def want_refs(self, j, n: int) -> None:
        if len(j.refs) != n:
            raise CheckError(
                f"{getattr(j, 'rule', getattr(j, 'theorem', '?'))} expects {n} reference(s), got {len(j.refs)}",
                code="WrongRefCount",
            )

    # -- prove

    def check_prove(self, ctx: Context, stated: Formula) -> Derivation:
        if not self.prove_enabled:
            raise CheckError("prove is disabled", code="ProveDisabled")
        if self.search_hook is None:
            raise CheckError("no search available to service prove", code="ProveDisabled")
        return self.search_hook(stated, ctx)

    # -- built-in connective rules

    def check_builtin(self, ctx: Context, stated: Formula, j: BuiltIn) -> Derivation:
        name = j.rule
        method = getattr(self, "bi_" + name.replace("-", "_"))
        return method(ctx, stated, j)

    def _formula_ref(self, ctx: Context, ref: str) -> tuple[Formula, Derivation]:
        fact = self.resolve(ctx, ref)
        return folded(fact), fact_derivation(fact)

    def _subproof_ref(self, ctx: Context, ref: str) -> SubproofFact:
        fact = self.resolve(ctx, ref)
        if not isinstance(fact, SubproofFact):
            raise CheckError(f"reference {ref!r} must be a subproof", code="NotASubproof")
        return fact

    def bi_and_intro(self, ctx, stated, j):
        self.want_refs(j, 2)
        if not isinstance(stated, And):
            raise CheckError("∧-intro must state a conjunction", code="WrongShape")
        fl, dl = self._formula_ref(ctx, j.refs[0])
        fr, dr = self._formula_ref(ctx, j.refs[1])
        if not alpha_equal(fl, stated.left):
            raise CheckError(
                "left conjunct does not match",
                code="UnificationClash",
                expected=print_formula(stated.left),
                actual=print_formula(fl),
            )
        if not alpha_equal(fr, stated.right):
            raise CheckError(
                "right conjunct does not match",
                code="UnificationClash",
                expected=print_formula(stated.right),
                actual=print_formula(fr),
            )
        return Derivation(AND_INTRO, stated, (dl, dr))

    def bi_and_elim(self, ctx, stated, j):
        self.want_refs(j, 1)
        f, d = self._formula_ref(ctx, j.refs[0])
        if not isinstance(f, And):
            raise CheckError(f"reference {j.refs[0]!r} is not a conjunction", code="WrongShape")
        if alpha_equal(stated, f.left):
            return Derivation(AND_ELIM_LEFT, stated, (d,))
        if alpha_equal(stated, f.right):
            return Derivation(AND_ELIM_RIGHT, stated, (d,))
        raise CheckError(
            "stated formula is neither conjunct",
            code="UnificationClash",
            expected=print_formula(f),
            actual=print_formula(stated),
        )

    def bi_or_intro(self, ctx, stated, j):
        self.want_refs(j, 1)
        if not isinstance(stated, Or):
            raise CheckError("∨-intro must state a disjunction", code="WrongShape")
        f, d = self._formula_ref(ctx, j.refs[0])
        if alpha_equal(f, stated.left):
            return Derivation(OR_INTRO_LEFT, stated, (d,))
        if alpha_equal(f, stated.right):
            return Derivation(OR_INTRO_RIGHT, stated, (d,))
        raise CheckError(
            "referenced formula matches neither disjunct",
            code="UnificationClash",
            expected=print_formula(stated),
            actual=print_formula(f),
        )

    def bi_or_elim(self, ctx, stated, j):
        self.want_refs(j, 3)
        f, d = self._formula_ref(ctx, j.refs[0])
        if not isinstance(f, Or):
            raise CheckError(f"reference {j.refs[0]!r} is not a disjunction", code="WrongShape")
        branches = []
        for ref, disjunct in ((j.refs[1], f.left), (j.refs[2], f.right)):
            sp = self._subproof_ref(ctx, ref)
            if len(sp.assumptions) != 1 or not isinstance(sp.assumptions[0], Hypothesis):
                raise CheckError(
                    f"subproof {ref!r} must assume exactly one disjunct", code="WrongShape"
                )
            hyp = sp.assumptions[0].formula
            if not alpha_equal(hyp, disjunct):
                raise CheckError(
                    f"subproof {ref!r} does not assume the disjunct",
                    code="UnificationClash",
                    expected=print_formula(disjunct),
                    actual=print_formula(hyp),
                )
            if not alpha_equal(sp.result, stated):
                raise CheckError(
                    f"subproof {ref!r} does not conclude the stated formula",
                    code="UnificationClash",
                    expected=print_formula(stated),
                    actual=print_formula(sp.result),
                )
            branches.append(sp.result_derivation)
        return Derivation(OR_ELIM, stated, (d, branches[0], branches[1]), assumed=(f.left, f.right))

    def bi_imp_intro(self, ctx, stated, j):
        self.want_refs(j, 1)
        sp = self._subproof_ref(ctx, j.refs[0])
        if not sp.assumptions or not all(isinstance(a, Hypothesis) for a in sp.assumptions):
            raise CheckError(
                "⟹-intro needs a subproof with hypothesis assumptions only", code="WrongShape"
            )
        hyps = tuple(a.formula for a in sp.assumptions)
        target = fold_implications(hyps, sp.result)
        if not alpha_equal(stated, target):
            raise CheckError(
                "stated implication does not match the subproof",
                code="UnificationClash",
                expected=print_formula(target),
                actual=print_formula(stated),
            )
        return Derivation(IMP_INTRO, stated, (sp.result_derivation,), assumed=hyps)

    def bi_imp_elim(self, ctx, stated, j):
        self.want_refs(j, 2)
        fi, di = self._formula_ref(ctx, j.refs[0])
        fa, da = self._formula_ref(ctx, j.refs[1])
        if not isinstance(fi, Implies):
            raise CheckError(f"reference {j.refs[0]!r} is not an implication", code="WrongShape")
        if not alpha_equal(fa, fi.left):
            raise CheckError(
                "argument does not match the implication's premise",
                code="UnificationClash",
                expected=print_formula(fi.left),
                actual=print_formula(fa),
            )
        if not alpha_equal(stated, fi.right):
            raise CheckError(
                "stated formula does not match the implication's conclusion",
                code="UnificationClash",
                expected=print_formula(fi.right),
                actual=print_formula(stated),
            )
        return Derivation(IMP_ELIM, stated, (di, da))

    def bi_not_intro(self, ctx, stated, j):
        self.want_refs(j, 1)
        sp = self._subproof_ref(ctx, j.refs[0])
        if (
            len(sp.assumptions) != 1
            or not isinstance(sp.assumptions[0], Hypothesis)
            or not isinstance(sp.result, Bottom)
        ):
            raise CheckError(
                "¬-intro needs a subproof assuming one formula and concluding ⊥",
                code="WrongShape",
            )
        hyp = sp.assumptions[0].formula
        if not alpha_equal(stated, Not(hyp)):
            raise CheckError(
                "stated negation does not match the subproof hypothesis",
                code="UnificationClash",
                expected=print_formula(Not(hyp)),
                actual=print_formula(stated),
            )
        return Derivation(NOT_INTRO, stated, (sp.result_derivation,), assumed=(hyp,))

    def bi_not_elim(self, ctx, stated, j):
        self.want_refs(j, 2)
        fa, da = self._formula_ref(ctx, j.refs[0])
        fb, db = self._formula_ref(ctx, j.refs[1])
        if not isinstance(stated, Bottom):
            raise CheckError("¬-elim concludes ⊥", code="WrongShape")
        ok = (isinstance(fb, Not) and alpha_equal(fb.body, fa)) or (
            isinstance(fa, Not) and alpha_equal(fa.body, fb)
        )
        if not ok:
            raise CheckError(
                "references are not a formula and its negation",
                code="UnificationClash",
                actual=f"{print_formula(fa)} ; {print_formula(fb)}",
            )
        return Derivation(NOT_ELIM, stated, (da, db))

    def bi_bottom_elim(self, ctx, stated, j):
        self.want_refs(j, 1)
        f, d = self._formula_ref(ctx, j.refs[0])
        if not isinstance(f, Bottom):
            raise CheckError(f"reference {j.refs[0]!r} is not ⊥", code="WrongShape")
        return Derivation(BOTTOM_ELIM, stated, (d,))

    def bi_forall_intro(self, ctx, stated, j):
        self.want_refs(j, 1)
        sp = self._subproof_ref(ctx, j.refs[0])
        if len(sp.assumptions) != 1 or not isinstance(sp.assumptions[0], ForAny):
            raise CheckError(
                "∀-intro needs a 'for any' subproof", code="WrongShape"
            )
        binders = sp.assumptions[0].vars
        target = sp.result
        for n, s in reversed(binders):
            target = Forall(n, s, target)
        if not alpha_equal(stated, target):
            raise CheckError(
                "stated formula does not generalize the subproof result",
                code="UnificationClash",
                expected=print_formula(target),
                actual=print_formula(stated),
            )
        return Derivation(FORALL_INTRO, stated, (sp.result_derivation,), binders=binders)

    def bi_forall_elim(self, ctx, stated, j):
        self.want_refs(j, 1)
        f, d = self._formula_ref(ctx, j.refs[0])
        if not isinstance(f, Forall):
            raise CheckError(
                f"reference {j.refs[0]!r} is not universally quantified", code="WrongShape"
            )
        gen = FreshGen()
        body: Formula = f
        metas: list[MetaVar] = []
        last_err: Exception | None = None
        while isinstance(body, Forall):
            m = gen.fresh_meta(body.sort, body.var)
            metas.append(m)
            body = instantiate(body, m)
            try:
                s = kernel_unify(body, stated)
            except UnifyFailure as e:
                last_err = e
                continue
            terms = tuple(
                _resolve_term(self.sig, s.apply_term(m)) for m in metas
            )
            return Derivation(FORALL_ELIM, stated, (d,), terms=terms)
        raise CheckError(
            "stated formula is not an instance of the quantified fact",
            code="UnificationClash",
            expected=print_formula(f),
            actual=print_formula(stated),
        ) from last_err

    def bi_exists_intro(self, ctx, stated, j):
        self.want_refs(j, 1)
        if not isinstance(stated, Exists):
            raise CheckError("∃-intro must state an existential", code="WrongShape")
        f, d = self._formula_ref(ctx, j.refs[0])
        gen = FreshGen()
        body: Formula = stated
        metas: list[MetaVar] = []
        while isinstance(body, Exists):
            m = gen.fresh_meta(body.sort, body.var)
            metas.append(m)
            body = instantiate(body, m)
            try:
                s = kernel_unify(body, f)
            except UnifyFailure:
                continue
            terms = tuple(_resolve_term(self.sig, s.apply_term(m)) for m in metas)
            return Derivation(EXISTS_INTRO, stated, (d,), terms=terms)
        raise CheckError(
            "referenced formula is not an instance of the existential body",
            code="UnificationClash",
            expected=print_formula(stated),
            actual=print_formula(f),
        )

    def bi_exists_elim(self, ctx, stated, j):
        self.want_refs(j, 2)
        f, d = self._formula_ref(ctx, j.refs[0])
        sp = self._subproof_ref(ctx, j.refs[1])
        if not isinstance(f, Exists):
            raise CheckError(
                f"reference {j.refs[0]!r} is not existentially quantified", code="WrongShape"
            )
        if len(sp.assumptions) != 1 or not isinstance(sp.assumptions[0], ForSome):
            raise CheckError("∃-elim needs a 'for some' subproof", code="WrongShape")
        fs = sp.assumptions[0]
        body: Formula = f
        for n, s in fs.witnesses:
            if not isinstance(body, Exists):
                raise CheckError(
                    "more witnesses than existential binders", code="WrongShape"
                )
            if body.sort != s:
                raise CheckError(
                    f"witness {n} has sort {s}, binder has sort {body.sort}",
                    code="SortMismatch",
                )
            body = instantiate(body, RigidVar(n, s))
        if not alpha_equal(body, fs.formula):
            raise CheckError(
                "subproof assumption does not match the existential body",
                code="UnificationClash",
                expected=print_formula(body),
                actual=print_formula(fs.formula),
            )
        names = {n for n, _ in fs.witnesses}
        if free_rigids(sp.result) & names:
            raise CheckError(
                "the witness escapes the subproof result", code="FreshnessViolation"
            )
        if not alpha_equal(stated, sp.result):
            raise CheckError(
                "stated formula does not match the subproof result",
                code="UnificationClash",
                expected=print_formula(sp.result),
                actual=print_formula(stated),
            )
        return Derivation(
            EXISTS_ELIM,
            stated,
            (d, sp.result_derivation),
            binders=fs.witnesses,
            assumed=(fs.formula,),
        )

    # -- rules and theorems

    def check_by_rule(self, ctx: Context, stated: Formula, j: ByRule) -> Derivation:
        decl = self.sig.rules.get(j.rule)
        if decl is None:
            raise CheckError(f"unknown rule {j.rule!r}", code="DanglingRef")
        self.want_refs(j, len(decl.premises))
        gen = FreshGen()
        prems, concl, mapping = freshen_rule(decl, gen)
        s = Subst()
        children = []
        for ref, pat in zip(j.refs, prems):
            f, d = self._formula_ref(ctx, ref)
            try:
                s = kernel_unify(pat, f, under=s)
            except UnifyFailure as e:
                raise CheckError(
                    f"premise does not match reference {ref!r}",
                    code=_unify_code(e),
                    expected=print_formula(s.apply(pat)),
                    actual=print_formula(f),
                ) from e
            children.append(d)
        try:
            s = kernel_unify(concl, stated, under=s)
        except UnifyFailure as e:
            raise CheckError(
                f"stated formula does not match the conclusion of rule {j.rule}",
                code=_unify_code(e),
                expected=print_formula(s.apply(concl)),
                actual=print_formula(stated),
            ) from e
        terms = []
        for name, sort in decl.schematic_vars:
            m = mapping.get(SchematicVar(name, sort))
            t = s.apply_term(m) if m is not None else self.sig.ground_term(sort)
            if metas_of(t):
                raise CheckError(
                    f"cannot determine the instantiation of {name} in rule {j.rule}",
                    code="Underdetermined",
                )
            terms.append(t)
        return Derivation(RULE, stated, tuple(children), name=j.rule, terms=tuple(terms))

    def check_by_theorem(self, ctx: Context, stated: Formula, j: ByTheorem) -> Derivation:
        decl = self.sig.theorems.get(j.theorem)
        if decl is None:
            raise CheckError(f"unknown theorem {j.theorem!r}", code="DanglingRef")
        if decl.name not in self.sig.proved and not self.assume_failed:
            raise CheckError(
                f"theorem {j.theorem} was not proved and may not be used",
                code="UnprovedTheorem",
            )
        # references discharge a prefix of the premises; the stated formula
        # is the residual statement (with no references, the whole statement)
        if len(j.refs) > len(decl.premises):
            raise CheckError(
                f"{j.theorem} expects at most {len(decl.premises)} reference(s), got {len(j.refs)}",
                code="WrongRefCount",
            )
        gen = FreshGen()
        fmap: dict[str, FMeta] = {}
        prems = [freshen_prop_params(p, gen, fmap) for p in decl.premises]
        concl = freshen_prop_params(decl.conclusion, gen, fmap)
        s = Subst()
        children = []
        for ref, pat in zip(j.refs, prems):
            f, d = self._formula_ref(ctx, ref)
            try:
                s = kernel_unify(pat, f, under=s)
            except UnifyFailure as e:
                raise CheckError(
                    f"premise does not match reference {ref!r}",
                    code=_unify_code(e),
                    expected=print_formula(s.apply(pat)),
                    actual=print_formula(f),
                ) from e
            children.append(d)
        residual = fold_implications(prems[len(j.refs):], concl)
        try:
            s = kernel_unify(residual, stated, under=s)
        except UnifyFailure as e:
            raise CheckError(
                f"stated formula does not match the conclusion of theorem {j.theorem}",
                code=_unify_code(e),
                expected=print_formula(s.apply(residual)),
                actual=print_formula(stated),
            ) from e
        props = []
        for pname in decl.prop_params:
            fm = fmap.get(pname)
            inst = s.apply(fm) if fm is not None else Bottom()
            if fmetas_of(inst) or metas_of(inst):
                raise CheckError(
                    f"cannot determine the instantiation of proposition {pname}",
                    code="Underdetermined",
                )
            props.append((pname, inst))
        # the theorem node yields the whole statement; the references are
        # consumed through an ⟹-elimination chain
        stmt = s.apply(fold_implications(prems, concl))
        d = Derivation(THEOREM, stmt, (), name=j.theorem, props=tuple(props))
        cur = stmt
        for child in children:
            assert isinstance(cur, Implies)
            cur = cur.right
            d = Derivation(IMP_ELIM, cur, (d, child))
        return d

    # -- induction

    def check_induction(self, ctx: Context, stated: Formula, cases) -> Derivation:
        if not isinstance(stated, Forall):
            raise CheckError(
                "induction applies to a universally quantified goal", code="NotUniversal"
            )
        sort = self.sig.sorts.get(stated.sort)
        if sort is None:
            raise CheckError(f"unknown sort {stated.sort!r}", code="UnknownConstructor")
        by_ctor: dict[str, Case] = {}
        for c in cases:
            if c.ctor in by_ctor:
                raise CheckError(f"duplicate case {c.ctor}", code="DuplicateCase", pos=c.pos)
            if c.ctor not in {cs.name for cs in sort.constructors}:
                raise CheckError(
                    f"{c.ctor} is not a constructor of {sort.name}",
                    code="UnknownConstructor",
                    pos=c.pos,
                )
            by_ctor[c.ctor] = c
        case_nodes = []
        for cs in sort.constructors:
            c = by_ctor.pop(cs.name, None)
            if c is None:
                raise CheckError(f"missing case {cs.name}", code="MissingCase")
            case_nodes.append(self.check_induction_case(ctx, stated, cs, c))
        return Derivation(INDUCTION, stated, tuple(case_nodes))

    def check_induction_case(
        self, ctx: Context, goal: Forall, cs: ConstructorSig, c: Case
    ) -> Derivation:
        ctx.push("case")
        try:
            for name, argsort in zip(c.vars, cs.arg_sorts):
                ctx.add_eigen(name, argsort, c.pos)
            pattern = Ctor(cs.name, tuple(RigidVar(n, s) for n, s in zip(c.vars, cs.arg_sorts)))
            ihs = [
                instantiate(goal, RigidVar(n, s))
                for n, s in zip(c.vars, cs.arg_sorts)
                if s == goal.sort
            ]
            stated_hyps = list(c.assumptions)
            if len(stated_hyps) > len(ihs):
                raise CheckError(
                    f"case {cs.name} states more hypotheses than it has", code="WrongShape", pos=c.pos
                )
            for i, a in enumerate(stated_hyps):
                if not isinstance(a, Hypothesis):
                    raise CheckError(
                        "induction cases may only state induction hypotheses",
                        code="WrongShape",
                        pos=c.pos,
                    )
                if not alpha_equal(a.formula, ihs[i]):
                    raise CheckError(
                        f"stated hypothesis in case {cs.name} is not the induction hypothesis",
                        code="UnificationClash",
                        pos=c.pos,
                        expected=print_formula(ihs[i]),
                        actual=print_formula(a.formula),
                    )
            for i, ih in enumerate(ihs):
                label = None
                if i < len(stated_hyps):
                    label = stated_hyps[i].label
                ctx.add_fact(FormulaFact(label, ih, Derivation(HYP, ih, name=label or "")), c.pos)
            target = instantiate(goal, pattern)
            last = self.check_script(ctx, c.body)
            got = folded(last)
            if not alpha_equal(got, target):
                raise CheckError(
                    f"case {cs.name} concludes the wrong formula",
                    code="WrongCaseResult",
                    pos=c.pos,
                    expected=print_formula(target),
                    actual=print_formula(got),
                )
            return Derivation(
                CASE,
                target,
                (fact_derivation(last),),
                name=cs.name,
                binders=tuple(zip(c.vars, cs.arg_sorts)),
                assumed=tuple(ihs),
            )
        finally:
            ctx.pop()

    # -- case analysis

    def check_case_analysis(self, ctx: Context, stated: Formula, scrutinee: Term, cases) -> Derivation:
        if not isinstance(scrutinee, RigidVar):
            raise CheckError(
                "case analysis needs a variable in scope", code="ScrutineeNotInScope"
            )
        entry = ctx.eigen_lookup(scrutinee.name)
        if entry is None:
            raise CheckError(
                f"variable {scrutinee.name} is not in scope", code="ScrutineeNotInScope"
            )
        sort = self.sig.sorts.get(entry[0])
        if sort is None:
            raise CheckError(f"unknown sort {entry[0]!r}", code="UnknownConstructor")
        by_ctor: dict[str, Case] = {}
        for c in cases:
            if c.ctor in by_ctor:
                raise CheckError(f"duplicate case {c.ctor}", code="DuplicateCase", pos=c.pos)
            if c.ctor not in {cs.name for cs in sort.constructors}:
                raise CheckError(
                    f"{c.ctor} is not a constructor of {sort.name}",
                    code="UnknownConstructor",
                    pos=c.pos,
                )
            by_ctor[c.ctor] = c
        case_nodes = []
        for cs in sort.constructors:
            c = by_ctor.pop(cs.name, None)
            if c is None:
                raise CheckError(f"missing case {cs.name}", code="MissingCase")
            if c.assumptions:
                raise CheckError(
                    "case analysis provides no hypotheses", code="WrongShape", pos=c.pos
                )
            pattern = Ctor(cs.name, tuple(RigidVar(n, s) for n, s in zip(c.vars, cs.arg_sorts)))
            sub = {scrutinee.name: pattern}
            ctx.push("case", subst=sub)
            try:
                for name, argsort in zip(c.vars, cs.arg_sorts):
                    ctx.add_eigen(name, argsort, c.pos)
                target = replace_rigids(stated, sub)
                last = self.check_script(ctx, c.body)
                got = folded(last)
                if not alpha_equal(got, target):
                    raise CheckError(
                        f"case {cs.name} concludes the wrong formula",
                        code="WrongCaseResult",
                        pos=c.pos,
                        expected=print_formula(target),
                        actual=print_formula(got),
                    )
                case_nodes.append(
                    Derivation(
                        CASE,
                        target,
                        (fact_derivation(last),),
                        name=cs.name,
                        binders=tuple(zip(c.vars, cs.arg_sorts)),
                    )
                )
            finally:
                ctx.pop()
        return Derivation(CASE_SPLIT, stated, tuple(case_nodes), terms=(scrutinee,))

    # -- inversion

    def check_inversion(self, ctx: Context, stated: Formula, ref: str, cases) -> Derivation:
        fact = self.resolve(ctx, ref)
        target_f = folded(fact)
        if not isinstance(target_f, Pred):
            raise CheckError(
                f"inversion applies to a judgment, {ref!r} is not one", code="NotAJudgment"
            )
        flex = ctx.eigen_indices()
        possible: list[tuple[RuleDecl, Subst, list[Formula]]] = []
        for rdecl in self.sig.rules.values():
            gen = FreshGen()
            prems, concl, _ = freshen_rule(rdecl, gen)
            try:
                s = kernel_unify(concl, target_f, flex_rigids=flex)
            except UnifyFailure:
                continue
            possible.append((rdecl, s, [s.apply(p) for p in prems]))
        by_rule: dict[str, InversionCase] = {}
        for c in cases:
            if c.rule in by_rule:
                raise CheckError(f"duplicate case {c.rule}", code="DuplicateCase", pos=c.pos)
            if c.rule not in {r.name for r, _, _ in possible}:
                if c.rule in self.sig.rules:
                    raise CheckError(
                        f"rule {c.rule} cannot derive {print_formula(target_f)}",
                        code="ImpossibleCase",
                        pos=c.pos,
                    )
                raise CheckError(f"unknown rule {c.rule!r}", code="DanglingRef", pos=c.pos)
            by_rule[c.rule] = c
        branch_nodes = []
        for rdecl, s, learned in possible:
            c = by_rule.pop(rdecl.name, None)
            if c is None:
                raise CheckError(f"missing case {rdecl.name}", code="MissingCase")
            branch_nodes.append(
                self.check_inversion_case(ctx, stated, rdecl, s, learned, c)
            )
        return Derivation(
            INVERSION, stated, (fact_derivation(fact),) + tuple(branch_nodes)
        )

    def check_inversion_case(
        self,
        ctx: Context,
        goal: Formula,
        rdecl: RuleDecl,
        s: Subst,
        learned: list[Formula],
        c: InversionCase,
    ) -> Derivation:
        refinement = {
            k: v
            for k, v in rigid_refinement(s).items()
            if not (isinstance(v, RigidVar) and v.name == k)
        }
        # leftover metavariables stand for undetermined rule schematics
        order: list[MetaVar] = []
        for f in learned:
            for m in _metas_in_order(f):
                if m not in order:
                    order.append(m)
        rho_only: list[MetaVar] = []
        for k in sorted(refinement):
            for m in sorted(metas_of(refinement[k]), key=lambda x: x.id):
                if m not in order and m not in rho_only:
                    rho_only.append(m)
        # the stated assumptions must name the premise metavariables in order
        declared: list[tuple[str, str]] = []
        stated_formulas: list[tuple[str | None, Formula]] = []
        for a in c.assumptions:
            if isinstance(a, ForSome):
                declared.extend(a.witnesses)
                stated_formulas.append((a.label, a.formula))
            elif isinstance(a, Hypothesis):
                stated_formulas.append((a.label, a.formula))
            else:
                raise CheckError(
                    "inversion cases may not introduce 'for any' variables",
                    code="WrongShape",
                    pos=c.pos,
                )
        if len(declared) != len(order):
            raise CheckError(
                f"case {rdecl.name} must name {len(order)} undetermined variable(s), names {len(declared)}",
                code="WrongShape",
                pos=c.pos,
            )
        if len(stated_formulas) != len(learned):
            raise CheckError(
                f"case {rdecl.name} must state {len(learned)} learned premise(s)",
                code="WrongShape",
                pos=c.pos,
            )
        m2v = Subst()
        for m, (name, vsort) in zip(order, declared):
            if m.sort != vsort:
                raise CheckError(
                    f"variable {name} has sort {vsort}, expected {m.sort}",
                    code="SortMismatch",
                    pos=c.pos,
                )
            m2v.terms[m] = RigidVar(name, vsort)
        auto = []
        for i, m in enumerate(rho_only):
            name = f"{m.hint or 'v'}′{i + 1}"
            while ctx.eigen_lookup(name) is not None:
                name += "′"
            m2v.terms[m] = RigidVar(name, m.sort)
            auto.append((name, m.sort))
        learned_final = [m2v.apply(f) for f in learned]
        rho = {k: m2v.apply_term(v) for k, v in refinement.items()}
        # introduce the branch variables before installing the refinement so
        # the freshness check does not see them through the refined facts
        frame = ctx.push("case")
        try:
            for name, vsort in declared + auto:
                ctx.add_eigen(name, vsort, c.pos)
            frame.subst = dict(rho)
            for (label, f_stated), f_learned in zip(stated_formulas, learned_final):
                if not alpha_equal(f_stated, f_learned):
                    raise CheckError(
                        f"stated premise in case {rdecl.name} does not match",
                        code="UnificationClash",
                        pos=c.pos,
                        expected=print_formula(f_learned),
                        actual=print_formula(f_stated),
                    )
                ctx.add_fact(
                    FormulaFact(label, f_learned, Derivation(HYP, f_learned, name=label or "")),
                    c.pos,
                )
            target = replace_rigids(goal, rho)
            last = self.check_script(ctx, c.body)
            got = folded(last)
            if not alpha_equal(got, target):
                raise CheckError(
                    f"case {rdecl.name} concludes the wrong formula",
                    code="WrongCaseResult",
                    pos=c.pos,
                    expected=print_formula(target),
                    actual=print_formula(got),
                )
            return Derivation(
                INV_CASE,
                target,
                (fact_derivation(last),),
                name=rdecl.name,
                binders=tuple(declared) + tuple(auto),
                assumed=tuple(learned_final),
                refine=tuple(sorted(rho.items())),
            )
        finally:
            ctx.pop()


def _metas_in_order(f: Formula) -> list[MetaVar]:
    out: list[MetaVar] = []

    def on_term(t: Term) -> None:
        if isinstance(t, MetaVar):
            if t not in out:
                out.append(t)
        elif isinstance(t, Ctor):
            for a in t.args:
                on_term(a)

    def go(x: Formula) -> None:
        if isinstance(x, Pred):
            for t in x.args:
                on_term(t)
        elif isinstance(x, (And, Or, Implies)):
            go(x.left)
            go(x.right)
        elif isinstance(x, Not):
            go(x.body)
        elif isinstance(x, (Forall, Exists)):
            go(x.body)

    go(f)
    return out


def _resolve_term(sig: Signature, t: Term) -> Term:
    """Replace any unconstrained metavariables by the smallest ground term."""
    ms = metas_of(t)
    if not ms:
        return t
    s = Subst({m: sig.ground_term(m.sort) for m in ms})
    return s.apply_term(t)


def _unify_code(e: UnifyFailure) -> str:
    return {"clash": "UnificationClash", "occurs": "OccursCheck", "sort": "SortMismatch"}[
        e.reason
    ]


def kernel_unify(a, b, under: Subst | None = None, flex_rigids=None) -> Subst:
    from .kernel import unify

    return unify(a, b, under=under, flex_rigids=flex_rigids)


# ---------------------------------------------------------------------------
# module checking


def signature_from_module(module: ModuleAST) -> Signature:
    """Full signature of a module (used when only the declarations matter)."""
    sig = Signature()
    for d in module.declarations:
        if isinstance(d, DataDecl):
            sig.add_data(d)
        elif isinstance(d, RuleDecl):
            sig.rules[d.name] = d
        else:
            sig.theorems[d.name] = d
            sig.proved.add(d.name)
    return sig


def check_module(
    module: ModuleAST,
    search_hook=None,
    prove_enabled: bool = True,
    assume_failed: bool = False,
) -> Report:
    """Check every theorem in declaration order.

    ``search_hook(goal, ctx) -> Derivation`` services ``prove``
    justifications; it should raise CheckError when search cannot finish.
    """
    sig = Signature()
    report = Report()
    checker = Checker(sig, search_hook, prove_enabled, assume_failed)
    for d in module.declarations:
        if isinstance(d, DataDecl):
            sig.add_data(d)
        elif isinstance(d, RuleDecl):
            sig.rules[d.name] = d
        else:
            assert isinstance(d, TheoremDecl)
            sig.theorems[d.name] = d
            checker.current_theorem = d.name
            try:
                deriv = checker.check_theorem(d)
            except CheckError as e:
                report.results.append(TheoremResult(d.name, False, error=e))
            else:
                sig.proved.add(d.name)
                report.results.append(TheoremResult(d.name, True, derivation=deriv))
    return report
