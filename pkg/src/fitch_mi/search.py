"""Simple non-backtracking proof search with human suspension points.

The engine follows a fixed strategy per goal shape and commits to the
first rule or theorem whose conclusion unifies with the goal.  Universally
quantified goals are always attacked by structural induction.  When a
branch cannot be closed, the engine suspends at the innermost enclosing
induction case and asks a helper for a proof fragment for that case's
goal; the fragment is checked in place before search resumes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import (
    CheckError,
    Checker,
    Context,
    FormulaFact,
    Signature,
    fact_derivation,
    folded,
    fold_implications,
    freshen_rule,
)
from .derivation import (
    AND_INTRO,
    CASE,
    EXISTS_INTRO,
    FORALL_ELIM,
    GAP,
    HYP,
    IMP_ELIM,
    IMP_INTRO,
    INDUCTION,
    OR_INTRO_LEFT,
    OR_INTRO_RIGHT,
    RULE,
    THEOREM,
    Derivation,
    apply_subst,
    iter_nodes,
)
from .kernel import (
    And,
    Bottom,
    Ctor,
    Exists,
    FMeta,
    Forall,
    Formula,
    FreshGen,
    Implies,
    Pred,
    Or,
    RigidVar,
    SchematicVar,
    Subst,
    UnifyFailure,
    alpha_equal,
    fmetas_of,
    freshen_prop_params,
    instantiate,
    metas_of,
    unify,
)
from .parser import ParseContext, ParseError, parse_fragment
from .printer import print_formula, print_term
from .syntax import TheoremDecl


_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def _sub(n: int) -> str:
    return str(n).translate(_SUBSCRIPTS)


class SearchStuck(Exception):
    """Search cannot make progress and no helper (or answer) is available."""

    def __init__(self, goal: Formula, trace_text: str, reason: str = "stuck"):
        super().__init__(f"search is stuck on {print_formula(goal)}")
        self.goal = goal
        self.trace_text = trace_text
        self.reason = reason


class SearchAborted(Exception):
    pass


# ---------------------------------------------------------------------------
# trace


@dataclass
class TraceGoal:
    depth: int
    goal: Formula
    strategy: str = "induction"

    def to_json(self, s: Subst) -> dict:
        return {
            "kind": "goal",
            "goal": print_formula(s.apply(self.goal)),
            "strategy": self.strategy,
        }


@dataclass
class TraceCase:
    depth: int
    var: str
    pattern: str
    goal: Formula
    hypotheses: tuple[tuple[str, Formula], ...] = ()
    ctor: str = ""

    def to_json(self, s: Subst) -> dict:
        return {
            "kind": "case",
            "var": self.var,
            "pattern": self.pattern,
            "goal": print_formula(s.apply(self.goal)),
            "hypotheses": [
                {"label": lbl, "formula": print_formula(s.apply(f))}
                for lbl, f in self.hypotheses
            ],
        }


def render_trace(
    theorem: str,
    entries: list[TraceGoal | TraceCase],
    final_goal: Formula,
    s: Subst,
) -> str:
    out = [f"I am solving a theorem `{theorem}'", ""]
    for n, e in enumerate(entries, start=1):
        lead = "  " * e.depth
        head = f"{lead}{n})  "
        cont = " " * len(head)
        if isinstance(e, TraceGoal):
            out.append(f"{head}goal: `{print_formula(s.apply(e.goal))}'")
            out.append(f"{cont}strategy: {e.strategy}")
        else:
            out.append(f"{head}case {e.var} := {e.pattern}")
            out.append(f"{cont}goal: `{print_formula(s.apply(e.goal))}'")
            for lbl, f in e.hypotheses:
                out.append(f"{cont}ind. hypothesis: `{lbl} : {print_formula(s.apply(f))}'")
        out.append("")
    out.append(f"My goal is: `{print_formula(s.apply(final_goal))}'.")
    out.append("Type a command or a proof:")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# prompts


@dataclass
class Prompt:
    """Everything a helper needs to decide how to close a stuck goal."""

    theorem: str
    goal: Formula
    goal_text: str
    trace: list[dict]
    trace_text: str
    hypotheses: list[dict]
    error: Exception | None = None


# helper responses
FRAGMENT = "fragment"
SKIP = "skip"
ABORT = "abort"


# ---------------------------------------------------------------------------
# engine


def autonomous_hook(max_depth: int = 32):
    """A checker search hook that runs one search episode per prove line."""

    def hook(goal: Formula, ctx: Context) -> Derivation:
        eng = SearchEngine(ctx.signature, ctx.theorem, helper=None, max_depth=max_depth)
        return eng.hook(goal, ctx)

    return hook


class SearchEngine:
    def __init__(
        self,
        sig: Signature,
        theorem: str,
        helper=None,
        max_depth: int = 32,
    ):
        self.sig = sig
        self.theorem = theorem
        self.helper = helper
        self.max_depth = max_depth
        self.gen = FreshGen()
        self.trace: list[TraceGoal | TraceCase] = []
        self.ih_depth = 0
        self.var_counter = 0
        self.hyp_counter = 0
        # (case path, parsed script) for every accepted user fragment
        self.user_fragments: list[tuple[tuple[str, ...], object]] = []

    # -- public entry points

    def prove_theorem(self, decl: TheoremDecl) -> Derivation:
        """Prove ``decl`` from scratch, suspending on the helper when stuck."""
        ctx = Context(self.sig)
        hyps: list[Formula] = []
        if decl.premises:
            ctx.push("subproof")
            for i, p in enumerate(decl.premises, start=1):
                label = f"p{_sub(i)}"
                ctx.add_fact(FormulaFact(label, p, Derivation(HYP, p, name=label)))
                hyps.append(p)
        d, s = self.solve(decl.conclusion, ctx, Subst(), 0)
        d = self.finalize(d, s)
        if hyps:
            target = fold_implications(hyps, decl.conclusion)
            d = Derivation(IMP_INTRO, target, (d,), assumed=tuple(hyps))
        return d

    def hook(self, goal: Formula, ctx: Context) -> Derivation:
        """Checker search hook servicing ``prove`` justifications."""
        try:
            d, s = self.solve(goal, ctx, Subst(), 0)
        except SearchStuck as e:
            raise CheckError(str(e), code="SearchStuck") from e
        return self.finalize(d, s)

    def finalize(self, d: Derivation, s: Subst) -> Derivation:
        """Resolve metavariables; anything still loose gets a ground default."""
        d = apply_subst(d, s)
        loose = set()
        fl: set[int] = set()
        for node in iter_nodes(d):
            loose |= metas_of(node.formula)
            fl |= fmetas_of(node.formula)
            for t in node.terms:
                loose |= metas_of(t)
            for f in node.assumed:
                loose |= metas_of(f)
                fl |= fmetas_of(f)
            for _, f in node.props:
                fl |= fmetas_of(f)
        if loose or fl:
            defaults = Subst(
                {m: self.sig.ground_term(m.sort) for m in loose},
                {i: Bottom() for i in fl},
            )
            d = apply_subst(d, defaults)
        return d

    # -- helpers

    def stuck(self, goal: Formula, s: Subst, reason: str = "stuck") -> SearchStuck:
        return SearchStuck(
            goal, render_trace(self.theorem, self.trace, goal, s), reason
        )

    def fresh_var(self, ctx: Context, sort: str) -> str:
        while True:
            self.var_counter += 1
            name = f"m{_sub(self.var_counter)}"
            if ctx.eigen_lookup(name) is None:
                return name

    def visible_facts(self, ctx: Context):
        """Formula facts, innermost scope first, declaration order within."""
        by_frame: dict[int, list[FormulaFact]] = {}
        for i, fact in ctx.iter_visible():
            if isinstance(fact, FormulaFact):
                by_frame.setdefault(i, []).append(fact)
        for i in sorted(by_frame, reverse=True):
            yield from by_frame[i]

    # -- the solver

    def solve(self, goal: Formula, ctx: Context, s: Subst, depth: int):
        if depth > self.max_depth:
            raise self.stuck(s.apply(goal), s, reason="depth")
        goal = s.apply(goal)

        # 1. a visible fact that matches the goal outright
        for fact in self.visible_facts(ctx):
            try:
                s2 = unify(goal, fact.formula, under=s)
            except UnifyFailure:
                continue
            return fact.derivation, s2

        if isinstance(goal, And):
            dl, s = self.solve(goal.left, ctx, s, depth + 1)
            dr, s = self.solve(goal.right, ctx, s, depth + 1)
            return Derivation(AND_INTRO, s.apply(goal), (dl, dr)), s

        if isinstance(goal, Or):
            try:
                dl, s2 = self.solve(goal.left, ctx, s, depth + 1)
                return Derivation(OR_INTRO_LEFT, s2.apply(goal), (dl,)), s2
            except SearchStuck:
                dr, s2 = self.solve(goal.right, ctx, s, depth + 1)
                return Derivation(OR_INTRO_RIGHT, s2.apply(goal), (dr,)), s2

        if isinstance(goal, Implies):
            self.hyp_counter += 1
            label = f"h{_sub(self.hyp_counter)}"
            hyp = goal.left
            ctx.push("subproof")
            try:
                ctx.add_fact(FormulaFact(label, hyp, Derivation(HYP, hyp, name=label)))
                body, s = self.solve(goal.right, ctx, s, depth + 1)
            finally:
                ctx.pop()
            return (
                Derivation(IMP_INTRO, s.apply(goal), (body,), assumed=(s.apply(hyp),)),
                s,
            )

        if isinstance(goal, Exists):
            m = self.gen.fresh_meta(goal.sort, goal.var)
            body, s = self.solve(instantiate(goal, m), ctx, s, depth + 1)
            return (
                Derivation(EXISTS_INTRO, s.apply(goal), (body,), terms=(s.apply_term(m),)),
                s,
            )

        if isinstance(goal, Forall):
            return self.solve_by_induction(goal, ctx, s, depth)

        if isinstance(goal, Pred):
            return self.solve_judgment(goal, ctx, s, depth)

        # ⊥, ¬, proposition parameters: no strategy applies
        raise self.stuck(goal, s)

    # -- induction

    def solve_by_induction(self, goal: Forall, ctx: Context, s: Subst, depth: int):
        sort = self.sig.sorts.get(goal.sort)
        if sort is None or not sort.constructors:
            raise self.stuck(goal, s)
        self.trace.append(TraceGoal(self.ih_depth, goal))
        self.ih_depth += 1
        try:
            cases = []
            for ctor in sort.constructors:
                # each case is closed on its own, so its substitution
                # extensions stay local
                cases.append(self.solve_case(goal, ctor, ctx, s, depth))
            return Derivation(INDUCTION, s.apply(goal), tuple(cases)), s
        finally:
            self.ih_depth -= 1
            self.trace.pop()

    def solve_case(self, goal: Forall, ctor, ctx: Context, s: Subst, depth: int):
        # variable numbering follows the current path: names free up again
        # once a case is closed
        saved_counter = self.var_counter
        binders = tuple((self.fresh_var(ctx, a), a) for a in ctor.arg_sorts)
        pattern = Ctor(ctor.name, tuple(RigidVar(n, srt) for n, srt in binders))
        ihs = tuple(
            instantiate(goal, RigidVar(n, srt))
            for n, srt in binders
            if srt == goal.sort
        )
        base = f"ind-hyp{_sub(self.ih_depth)}"
        labels = (
            [base]
            if len(ihs) <= 1
            else [f"{base}-{i}" for i in range(1, len(ihs) + 1)]
        )
        target = instantiate(goal, pattern)
        self.trace.append(
            TraceCase(
                self.ih_depth - 1,
                goal.var,
                print_term(pattern),
                target,
                tuple(zip(labels, ihs)),
                ctor=ctor.name,
            )
        )
        ctx.push("case")
        try:
            for n, srt in binders:
                ctx.add_eigen(n, srt)
            for label, ih in zip(labels, ihs):
                ctx.add_fact(FormulaFact(label, ih, Derivation(HYP, ih, name=label)))
            try:
                body, s2 = self.solve(target, ctx, s, depth + 1)
            except SearchStuck as cause:
                body = self.consult(s.apply(target), ctx, s, cause)
                s2 = s
            # resolve case-local metavariables now; the substitution does
            # not escape the case
            body = apply_subst(body, s2)
            return Derivation(
                CASE,
                s2.apply(target),
                (body,),
                name=ctor.name,
                binders=binders,
                assumed=tuple(s2.apply(ih) for ih in ihs),
            )
        finally:
            ctx.pop()
            self.trace.pop()
            self.var_counter = saved_counter

    # -- judgments

    def solve_judgment(self, goal: Pred, ctx: Context, s: Subst, depth: int):
        for rdecl in self.sig.rules.values():
            prems, concl, mapping = freshen_rule(rdecl, self.gen)
            try:
                s2 = unify(concl, goal, under=s)
            except UnifyFailure:
                continue
            # committed: the premises must now work out, left to right
            children = []
            for p in prems:
                d, s2 = self.solve(p, ctx, s2, depth + 1)
                children.append(d)
            terms = tuple(
                s2.apply_term(mapping[SchematicVar(n, srt)])
                if SchematicVar(n, srt) in mapping
                else self.gen.fresh_meta(srt)
                for n, srt in rdecl.schematic_vars
            )
            return (
                Derivation(
                    RULE, s2.apply(goal), tuple(children), name=rdecl.name, terms=terms
                ),
                s2,
            )
        for tdecl in self.sig.theorems.values():
            if tdecl.name not in self.sig.proved or tdecl.name == self.theorem:
                continue
            result = self.try_theorem(tdecl, goal, ctx, s, depth)
            if result is not None:
                return result
        raise self.stuck(s.apply(goal), s)

    def try_theorem(self, tdecl: TheoremDecl, goal: Pred, ctx: Context, s: Subst, depth: int):
        """Apply a previously proved theorem, unfolding ∀ and ⟹ as needed."""
        fmap: dict[str, FMeta] = {}
        prems = [freshen_prop_params(p, self.gen, fmap) for p in tdecl.premises]
        concl = freshen_prop_params(tdecl.conclusion, self.gen, fmap)
        stmt = fold_implications(prems, concl)
        # plan the elimination chain; commit only once the head unifies
        plan: list[tuple[str, object]] = []
        cur: Formula = stmt
        s2: Subst | None = None
        while True:
            if isinstance(cur, Pred):
                try:
                    s2 = unify(cur, goal, under=s)
                    break
                except UnifyFailure:
                    return None
            if isinstance(cur, Forall):
                m = self.gen.fresh_meta(cur.sort, cur.var)
                plan.append(("inst", m))
                cur = instantiate(cur, m)
            elif isinstance(cur, Implies):
                plan.append(("arg", cur.left))
                cur = cur.right
            else:
                return None
        # committed
        props = tuple((name, fm) for name, fm in fmap.items())
        d = Derivation(THEOREM, stmt, (), name=tdecl.name, props=props)
        cur = stmt
        for kind, payload in plan:
            if kind == "inst":
                assert isinstance(cur, Forall)
                cur = instantiate(cur, payload)
                d = Derivation(FORALL_ELIM, cur, (d,), terms=(payload,))
            else:
                assert isinstance(cur, Implies)
                arg, s2 = self.solve(payload, ctx, s2, depth + 1)
                cur = cur.right
                d = Derivation(IMP_ELIM, cur, (d, arg))
        return d, s2

    # -- human interaction

    def consult(self, goal: Formula, ctx: Context, s: Subst, cause: SearchStuck) -> Derivation:
        if self.helper is None:
            raise cause
        error: Exception | None = None
        while True:
            prompt = Prompt(
                theorem=self.theorem,
                goal=goal,
                goal_text=print_formula(goal),
                trace=[e.to_json(s) for e in self.trace],
                trace_text=render_trace(self.theorem, self.trace, goal, s),
                hypotheses=[
                    {"label": f.label, "formula": print_formula(f.formula)}
                    for f in self.visible_facts(ctx)
                    if f.label
                ],
                error=error,
            )
            resp = self.helper(prompt, ctx)
            kind = resp[0]
            if kind == SKIP:
                return Derivation(GAP, goal)
            if kind == ABORT:
                raise SearchAborted(f"aborted while proving {self.theorem}")
            assert kind == FRAGMENT, f"unknown helper response {kind!r}"
            try:
                d, script = self.check_fragment(resp[1], goal, ctx)
            except (CheckError, ParseError) as e:
                error = e
                continue
            path = tuple(e.ctor for e in self.trace if isinstance(e, TraceCase))
            self.user_fragments.append((path, script))
            return d

    def check_fragment(self, text: str, goal: Formula, ctx: Context):
        pctx = self.fragment_parse_context(ctx)
        script = parse_fragment(text, pctx)
        sub = Checker(self.sig, search_hook=self.hook, prove_enabled=True)
        ctx.push("subproof")
        try:
            last = sub.check_script(ctx, script)
            got = folded(last)
            if not alpha_equal(got, goal):
                raise CheckError(
                    "the fragment does not establish the current goal",
                    code="WrongResult",
                    expected=print_formula(goal),
                    actual=print_formula(got),
                )
            return fact_derivation(last), script
        finally:
            ctx.pop()

    def fragment_parse_context(self, ctx: Context) -> ParseContext:
        pctx = ParseContext(
            sorts={
                name: tuple(c.name for c in srt.constructors)
                for name, srt in self.sig.sorts.items()
            },
            ctors=dict(self.sig.ctors),
            preds=dict(self.sig.preds),
            rules=dict(self.sig.rules),
            theorems=dict(self.sig.theorems),
        )
        pctx.decl_names = (
            set(pctx.sorts) | set(pctx.ctors) | set(pctx.rules) | set(pctx.theorems)
        )
        for frame in ctx.frames:
            for name, (srt, _) in frame.eigen.items():
                pctx.vars[name] = ("rigid", srt)
            for f in frame.entries:
                if f.label:
                    pctx.labels.add(f.label)
        return pctx
