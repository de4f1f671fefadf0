"""Elaboration of derivations back into checkable proof scripts.

Two renderings are provided:

- ``full``: every derivation node becomes an explicit script step, so the
  result re-checks without any proof search.
- ``gapped``: the induction skeleton the search followed is kept, cases the
  search closed on its own become ``prove`` lines, and proof fragments the
  user contributed are spliced back verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace

from .checker import Signature, fold_implications
from .derivation import (
    AND_ELIM_LEFT,
    AND_ELIM_RIGHT,
    AND_INTRO,
    BOTTOM_ELIM,
    CASE_SPLIT,
    EXISTS_ELIM,
    EXISTS_INTRO,
    FORALL_ELIM,
    FORALL_INTRO,
    GAP,
    HYP,
    IMP_ELIM,
    IMP_INTRO,
    INDUCTION,
    INVERSION,
    NOT_ELIM,
    NOT_INTRO,
    OR_ELIM,
    OR_INTRO_LEFT,
    OR_INTRO_RIGHT,
    RULE,
    THEOREM,
    Derivation,
    iter_nodes,
)
from .kernel import (
    And,
    Forall,
    Formula,
    RigidVar,
    alpha_equal,
    free_rigids,
    instantiate,
    replace_rigids,
)
from .syntax import (
    Assumption,
    BuiltIn,
    ByCaseAnalysis,
    ByInduction,
    ByInversion,
    ByRule,
    ByTheorem,
    Case,
    ForAny,
    ForSome,
    Hypothesis,
    InversionCase,
    Line,
    ModuleAST,
    ProofScript,
    Prove,
    Step,
    Subproof,
    TheoremDecl,
)

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def _sub(n: int) -> str:
    return str(n).translate(_SUB)


class ElaborationError(Exception):
    pass


# ---------------------------------------------------------------------------
# label bookkeeping


def script_labels(script: ProofScript) -> set[str]:
    """Every label bound anywhere in a script, including nested blocks."""
    out: set[str] = set()

    def on_assumption(a: Assumption) -> None:
        if isinstance(a, (Hypothesis, ForSome)) and a.label is not None:
            out.add(a.label)

    def on_script(s: ProofScript) -> None:
        for step in s.steps:
            if step.label is not None:
                out.add(step.label)
            if isinstance(step, Subproof):
                for a in step.assumptions:
                    on_assumption(a)
                on_script(step.body)
            else:
                j = step.justification
                cases = getattr(j, "cases", ())
                for c in cases:
                    for a in c.assumptions:
                        on_assumption(a)
                    on_script(c.body)

    on_script(script)
    return out


# ---------------------------------------------------------------------------
# fact environment (mirrors the checker's frame stack, formulas and labels)


@dataclass
class _Frame:
    entries: list[tuple[Formula, str | None]] = field(default_factory=list)
    subst: dict = field(default_factory=dict)


class _Env:
    def __init__(self) -> None:
        self.frames: list[_Frame] = [_Frame()]

    def push(self, subst: dict | None = None) -> None:
        self.frames.append(_Frame(subst=dict(subst or {})))

    def pop(self) -> None:
        self.frames.pop()

    def add(self, f: Formula, label: str | None) -> None:
        self.frames[-1].entries.append((f, label))

    def lookup(self, f: Formula) -> str | None:
        """Label of a visible fact alpha-equal to ``f``, innermost first."""
        n = len(self.frames)
        for i in range(n - 1, -1, -1):
            for g, label in reversed(self.frames[i].entries):
                if label is None:
                    continue
                for j in range(i + 1, n):
                    if self.frames[j].subst:
                        g = replace_rigids(g, self.frames[j].subst)
                if alpha_equal(g, f):
                    return label
        return None


# ---------------------------------------------------------------------------
# full rendering


class _Renderer:
    def __init__(self, sig: Signature, used_labels: set[str] | None = None):
        self.sig = sig
        self.used = set(used_labels or ())
        self.counter = 0
        self.ih_depth = 0

    def fresh(self, prefix: str = "") -> str:
        while True:
            self.counter += 1
            label = f"{prefix}{self.counter}"
            if label not in self.used:
                self.used.add(label)
                return label

    def ih_labels(self, count: int) -> list[str]:
        base = f"ind-hyp{_sub(self.ih_depth)}"
        if count <= 1:
            return [base]
        return [f"{base}-{i + 1}" for i in range(count)]

    # -- references

    def ref(self, d: Derivation, steps: list[Step], env: _Env) -> str:
        """A label under which ``d``'s conclusion is visible, emitting steps
        for it if no alpha-equal fact is in scope yet."""
        found = env.lookup(d.formula)
        if found is not None:
            return found
        if d.kind == HYP:
            raise ElaborationError(
                "hypothesis is not in scope during elaboration"
            )
        return self.emit(d, steps, env)

    def block(self, d: Derivation, env: _Env) -> list[Step]:
        """Steps whose final fact folds to ``d``'s conclusion."""
        steps: list[Step] = []
        if d.kind == HYP:
            label = env.lookup(d.formula)
            if label is None:
                raise ElaborationError(
                    "hypothesis is not in scope during elaboration"
                )
            self.restate(label, d.formula, steps, env)
        else:
            self.emit(d, steps, env)
        return steps

    def restate(self, label: str, f: Formula, steps: list[Step], env: _Env) -> None:
        """Re-derive an in-scope fact as a fresh line (via a throwaway
        conjunction, since there is no dedicated repetition rule)."""
        pair = And(f, f)
        mid = self.fresh()
        steps.append(Line(mid, pair, BuiltIn("and-intro", (label, label))))
        out = self.fresh()
        steps.append(Line(out, f, BuiltIn("and-elim", (mid,))))
        env.add(pair, mid)
        env.add(f, out)

    # -- node emission

    def emit(self, d: Derivation, steps: list[Step], env: _Env) -> str:
        k = d.kind
        f = d.formula

        def line(justification, label: str | None = None) -> str:
            lbl = label if label is not None else self.fresh()
            steps.append(Line(lbl, f, justification))
            env.add(f, lbl)
            return lbl

        if k == GAP:
            return line(Prove())

        if k == RULE:
            refs = tuple(self.ref(c, steps, env) for c in d.children)
            return line(ByRule(d.name, refs))

        if k == THEOREM:
            return line(ByTheorem(d.name, ()))

        if k == AND_INTRO:
            refs = tuple(self.ref(c, steps, env) for c in d.children)
            return line(BuiltIn("and-intro", refs))

        if k in (AND_ELIM_LEFT, AND_ELIM_RIGHT):
            return line(BuiltIn("and-elim", (self.ref(d.children[0], steps, env),)))

        if k in (OR_INTRO_LEFT, OR_INTRO_RIGHT):
            return line(BuiltIn("or-intro", (self.ref(d.children[0], steps, env),)))

        if k == IMP_ELIM:
            refs = tuple(self.ref(c, steps, env) for c in d.children)
            return line(BuiltIn("imp-elim", refs))

        if k == NOT_ELIM:
            refs = tuple(self.ref(c, steps, env) for c in d.children)
            return line(BuiltIn("not-elim", refs))

        if k == BOTTOM_ELIM:
            return line(BuiltIn("bottom-elim", (self.ref(d.children[0], steps, env),)))

        if k == FORALL_ELIM:
            return line(BuiltIn("forall-elim", (self.ref(d.children[0], steps, env),)))

        if k == EXISTS_INTRO:
            return line(BuiltIn("exists-intro", (self.ref(d.children[0], steps, env),)))

        if k == IMP_INTRO:
            label = self.fresh()
            hyps = tuple(Hypothesis(self.fresh("h"), a) for a in d.assumed)
            env.push()
            for h in hyps:
                env.add(h.formula, h.label)
            body = self.block(d.children[0], env)
            env.pop()
            steps.append(Subproof(label, hyps, ProofScript(tuple(body))))
            env.add(f, label)
            return label

        if k == FORALL_INTRO:
            label = self.fresh()
            env.push()
            body = self.block(d.children[0], env)
            env.pop()
            steps.append(Subproof(label, (ForAny(d.binders),), ProofScript(tuple(body))))
            env.add(f, label)
            return label

        if k == NOT_INTRO:
            sp = self.fresh()
            hyp = Hypothesis(self.fresh("h"), d.assumed[0])
            env.push()
            env.add(hyp.formula, hyp.label)
            body = self.block(d.children[0], env)
            env.pop()
            steps.append(Subproof(sp, (hyp,), ProofScript(tuple(body))))
            env.add(folded_subproof((hyp,), d.children[0].formula), sp)
            return line(BuiltIn("not-intro", (sp,)))

        if k == OR_ELIM:
            major = self.ref(d.children[0], steps, env)
            branch_labels = []
            for hyp_f, child in zip(d.assumed, d.children[1:]):
                sp = self.fresh()
                hyp = Hypothesis(self.fresh("h"), hyp_f)
                env.push()
                env.add(hyp.formula, hyp.label)
                body = self.block(child, env)
                env.pop()
                steps.append(Subproof(sp, (hyp,), ProofScript(tuple(body))))
                env.add(folded_subproof((hyp,), child.formula), sp)
                branch_labels.append(sp)
            return line(BuiltIn("or-elim", (major, *branch_labels)))

        if k == EXISTS_ELIM:
            major = self.ref(d.children[0], steps, env)
            sp = self.fresh()
            assumption = ForSome(self.fresh("h"), d.assumed[0], d.binders)
            env.push()
            env.add(assumption.formula, assumption.label)
            body = self.block(d.children[1], env)
            env.pop()
            steps.append(Subproof(sp, (assumption,), ProofScript(tuple(body))))
            env.add(folded_subproof((assumption,), d.children[1].formula), sp)
            return line(BuiltIn("exists-elim", (major, sp)))

        if k == INDUCTION:
            self.ih_depth += 1
            cases = []
            for c in d.children:
                labels = self.ih_labels(len(c.assumed))
                hyps = tuple(
                    Hypothesis(l, ih) for l, ih in zip(labels, c.assumed)
                )
                env.push()
                for h in hyps:
                    env.add(h.formula, h.label)
                body = self.block(c.children[0], env)
                env.pop()
                cases.append(
                    Case(c.name, tuple(n for n, _ in c.binders), hyps, ProofScript(tuple(body)))
                )
            self.ih_depth -= 1
            return line(ByInduction(tuple(cases)))

        if k == CASE_SPLIT:
            scrut = d.terms[0]
            cases = []
            for c in d.children:
                pattern_sub = {scrut.name: _pattern(c)}
                env.push(pattern_sub)
                body = self.block(c.children[0], env)
                env.pop()
                cases.append(
                    Case(c.name, tuple(n for n, _ in c.binders), (), ProofScript(tuple(body)))
                )
            return line(ByCaseAnalysis(scrut, tuple(cases)))

        if k == INVERSION:
            major = self.ref(d.children[0], steps, env)
            branches = []
            for b in d.children[1:]:
                branches.append(self._inv_case(b, env))
            return line(ByInversion(major, tuple(branches)))

        raise ElaborationError(f"cannot elaborate derivation kind {k!r}")

    def _inv_case(self, b: Derivation, env: _Env) -> InversionCase:
        assumed_names: set[str] = set()
        for a in b.assumed:
            assumed_names |= free_rigids(a)
        declared = [bd for bd in b.binders if bd[0] in assumed_names]
        assumptions: list[Assumption] = []
        placed: set[str] = set()
        hyp_entries: list[tuple[Formula, str]] = []
        for premise in b.assumed:
            names = free_rigids(premise)
            ws = tuple(bd for bd in declared if bd[0] in names and bd[0] not in placed)
            placed |= {n for n, _ in ws}
            label = self.fresh("h")
            if ws:
                assumptions.append(ForSome(label, premise, ws))
            else:
                assumptions.append(Hypothesis(label, premise))
            hyp_entries.append((premise, label))
        env.push(dict(b.refine))
        for premise, label in hyp_entries:
            env.add(premise, label)
        body = self.block(b.children[0], env)
        env.pop()
        return InversionCase(b.name, tuple(assumptions), ProofScript(tuple(body)))


def folded_subproof(assumptions: tuple[Assumption, ...], result: Formula) -> Formula:
    """The folded meaning a checker assigns to a rendered subproof."""
    out = result
    for a in reversed(assumptions):
        if isinstance(a, Hypothesis):
            out = fold_implications((a.formula,), out)
        elif isinstance(a, ForAny):
            for n, s in reversed(a.vars):
                out = Forall(n, s, out)
        else:
            out = fold_implications((a.formula,), out)
            for n, s in reversed(a.witnesses):
                out = Forall(n, s, out)
    return out


def _pattern(c: Derivation):
    from .kernel import Ctor

    return Ctor(c.name, tuple(RigidVar(n, s) for n, s in c.binders))


def elaborate_full(d: Derivation, sig: Signature) -> ProofScript:
    """Render a derivation as a fully explicit proof script."""
    r = _Renderer(sig)
    env = _Env()
    return ProofScript(tuple(r.block(d, env)))


# ---------------------------------------------------------------------------
# gapped rendering


def elaborate_gapped(
    d: Derivation,
    sig: Signature,
    decl: TheoremDecl,
    fragments: tuple[tuple[tuple[str, ...], ProofScript], ...] = (),
) -> ProofScript:
    """Render the search skeleton with prove placeholders and user fragments.

    ``fragments`` pairs each user-contributed script with the path of
    induction case constructors at which it was accepted.
    """
    by_path: dict[tuple[str, ...], ProofScript] = dict(fragments)
    used: set[str] = set()
    for script in by_path.values():
        used |= script_labels(script)
    r = _Renderer(sig, used)
    env = _Env()

    def has_fragment_below(prefix: tuple[str, ...]) -> bool:
        return any(p[: len(prefix)] == prefix for p in by_path)

    def case_body(c: Derivation, prefix: tuple[str, ...], depth: int) -> list[Step]:
        if prefix in by_path:
            return list(by_path[prefix].steps)
        if not has_fragment_below(prefix):
            return [Line(r.fresh(), c.formula, Prove())]
        inner = c.children[0]
        if inner.kind == INDUCTION:
            return render(inner, prefix, depth)
        # a fragment sits below a non-induction step; give the full proof
        return r.block(inner, env)

    def ih_used(node: Derivation) -> bool:
        for c in node.children:
            for n in iter_nodes(c.children[0]):
                if n.kind == HYP and any(
                    alpha_equal(n.formula, ih) for ih in c.assumed
                ):
                    return True
        return False

    def render(node: Derivation, prefix: tuple[str, ...], depth: int) -> list[Step]:
        assert node.kind == INDUCTION
        f = node.formula
        depth += 1
        if not ih_used(node):
            # no case touches its induction hypothesis, so a plain case
            # analysis under a generalized variable proves the same goal
            assert isinstance(f, Forall)
            var = f.var[:1].upper() + f.var[1:]
            opened = instantiate(f, RigidVar(var, f.sort))
            sp_label = r.fresh()
            cases = []
            env.push()
            for c in node.children:
                env.push({var: _pattern(c)})
                body = case_body(c, prefix + (c.name,), depth)
                env.pop()
                cases.append(
                    Case(c.name, tuple(n for n, _ in c.binders), (), ProofScript(tuple(body)))
                )
            env.pop()
            split = Line(None, opened, ByCaseAnalysis(RigidVar(var, f.sort), tuple(cases)))
            sp = Subproof(sp_label, (ForAny(((var, f.sort),)),), ProofScript((split,)))
            final = Line(r.fresh(), f, BuiltIn("forall-intro", (sp_label,)))
            env.add(f, final.label)
            return [sp, final]
        saved = r.ih_depth
        r.ih_depth = depth
        cases = []
        for c in node.children:
            labels = r.ih_labels(len(c.assumed))
            hyps = tuple(Hypothesis(l, ih) for l, ih in zip(labels, c.assumed))
            env.push()
            for h in hyps:
                env.add(h.formula, h.label)
            body = case_body(c, prefix + (c.name,), depth)
            env.pop()
            cases.append(
                Case(c.name, tuple(n for n, _ in c.binders), hyps, ProofScript(tuple(body)))
            )
        r.ih_depth = saved
        env.add(f, None)
        return [Line(None, f, ByInduction(tuple(cases)))]

    root = d
    premise_hyps: tuple[Hypothesis, ...] = ()
    if decl.premises and root.kind == IMP_INTRO:
        premise_hyps = tuple(
            Hypothesis(f"p{_sub(i)}", p) for i, p in enumerate(root.assumed, start=1)
        )
        root = root.children[0]
    if not by_path:
        # nothing came from the user, so one prove line says it all
        if premise_hyps:
            inner = ProofScript((Line(None, root.formula, Prove()),))
            return ProofScript((Subproof(None, premise_hyps, inner),))
        return ProofScript((Line(None, d.formula, Prove()),))
    if root.kind == INDUCTION:
        if premise_hyps:
            env.push()
            for h in premise_hyps:
                env.add(h.formula, h.label)
        body = render(root, (), 0)
        if premise_hyps:
            env.pop()
            return ProofScript((Subproof(None, premise_hyps, ProofScript(tuple(body))),))
        return ProofScript(tuple(body))
    # fall back to the fully explicit rendering
    return elaborate_full(d, sig)


# ---------------------------------------------------------------------------
# module assembly


def elaborated_module(module: ModuleAST, theorem: str, script: ProofScript) -> ModuleAST:
    """The module with one theorem's proof replaced by a rendered script."""
    decls = []
    for decl in module.declarations:
        if isinstance(decl, TheoremDecl) and decl.name == theorem:
            decl = dc_replace(decl, proof=script)
        decls.append(decl)
    return ModuleAST(tuple(decls))


# ---------------------------------------------------------------------------
# structural script comparison (label and variable names up to bijection)


def alpha_equal_scripts(a: ProofScript, b: ProofScript) -> bool:
    """Structural equality of two scripts up to renaming of labels and
    block-introduced variables.  Labels must map one-to-one within a scope;
    a label present on only one side is tolerated unless referenced."""
    try:
        _cmp_script(a, b, {}, {}, {})
    except _Mismatch:
        return False
    return True


class _Mismatch(Exception):
    pass


def _no(cond: bool) -> None:
    if not cond:
        raise _Mismatch


def _bind(mapping: dict, rev: dict, x: str, y: str) -> None:
    if x in mapping:
        _no(mapping[x] == y)
        return
    _no(rev.get(y, x) == x)
    mapping[x] = y
    rev[y] = x


def _teq(ta, tb, names: dict, bound: dict) -> None:
    from .kernel import Ctor, MetaVar, SchematicVar

    _no(type(ta) is type(tb))
    if isinstance(ta, RigidVar):
        want = bound.get(ta.name) or names.get(ta.name, ta.name)
        _no(want == tb.name and ta.sort == tb.sort)
    elif isinstance(ta, Ctor):
        _no(ta.name == tb.name and len(ta.args) == len(tb.args))
        for x, y in zip(ta.args, tb.args):
            _teq(x, y, names, bound)
    elif isinstance(ta, (SchematicVar, MetaVar)):
        _no(ta == tb)
    else:  # pragma: no cover
        raise _Mismatch


def _feq(fa: Formula, fb: Formula, names: dict, bound: dict) -> None:
    from .kernel import Bottom, Exists, FMeta, Implies, Not, Or, Pred, PropParam

    _no(type(fa) is type(fb))
    if isinstance(fa, Pred):
        _no(fa.name == fb.name and len(fa.args) == len(fb.args))
        for x, y in zip(fa.args, fb.args):
            _teq(x, y, names, bound)
    elif isinstance(fa, (And, Or, Implies)):
        _feq(fa.left, fb.left, names, bound)
        _feq(fa.right, fb.right, names, bound)
    elif isinstance(fa, Not):
        _feq(fa.body, fb.body, names, bound)
    elif isinstance(fa, (Forall, Exists)):
        _no(fa.sort == fb.sort)
        inner = dict(bound)
        inner[fa.var] = fb.var
        _feq(fa.body, fb.body, names, inner)
    elif isinstance(fa, (Bottom, PropParam, FMeta)):
        _no(fa == fb)
    else:  # pragma: no cover
        raise _Mismatch


def _cmp_formula(fa: Formula, fb: Formula, names: dict) -> None:
    _feq(fa, fb, names, {})


def _cmp_refs(ra, rb, lab: dict) -> None:
    _no(len(ra) == len(rb))
    for x, y in zip(ra, rb):
        _no(lab.get(x, y) == y)


def _cmp_label(la, lb, lab: dict, rev: dict) -> None:
    if la is None or lb is None:
        return
    _bind(lab, rev, la, lb)


def _cmp_assumptions(aa, ab, lab, rev, names) -> None:
    _no(len(aa) == len(ab))
    for x, y in zip(aa, ab):
        _no(type(x) is type(y))
        if isinstance(x, ForAny):
            _no(len(x.vars) == len(y.vars))
            for (nx, sx), (ny, sy) in zip(x.vars, y.vars):
                _no(sx == sy)
                names[nx] = ny
            continue
        _cmp_label(x.label, y.label, lab, rev)
        if isinstance(x, ForSome):
            _no(len(x.witnesses) == len(y.witnesses))
            for (nx, sx), (ny, sy) in zip(x.witnesses, y.witnesses):
                _no(sx == sy)
                names[nx] = ny
        _cmp_formula(x.formula, y.formula, names)


def _cmp_script(a: ProofScript, b: ProofScript, lab, rev, names) -> None:
    _no(len(a.steps) == len(b.steps))
    for sa, sb in zip(a.steps, b.steps):
        _no(type(sa) is type(sb))
        _cmp_label(sa.label, sb.label, lab, rev)
        if isinstance(sa, Subproof):
            inner_lab, inner_rev, inner_names = dict(lab), dict(rev), dict(names)
            _cmp_assumptions(
                sa.assumptions, sb.assumptions, inner_lab, inner_rev, inner_names
            )
            _cmp_script(sa.body, sb.body, inner_lab, inner_rev, inner_names)
            continue
        _cmp_formula(sa.formula, sb.formula, names)
        ja, jb = sa.justification, sb.justification
        _no(type(ja) is type(jb))
        if isinstance(ja, (ByRule, BuiltIn)):
            _no(ja.rule == jb.rule)
            _cmp_refs(ja.refs, jb.refs, lab)
        elif isinstance(ja, ByTheorem):
            _no(ja.theorem == jb.theorem)
            _cmp_refs(ja.refs, jb.refs, lab)
        elif isinstance(ja, Prove):
            pass
        elif isinstance(ja, (ByInduction, ByCaseAnalysis, ByInversion)):
            if isinstance(ja, ByCaseAnalysis):
                _teq(ja.scrutinee, jb.scrutinee, names, {})
            if isinstance(ja, ByInversion):
                _cmp_refs((ja.ref,), (jb.ref,), lab)
            _no(len(ja.cases) == len(jb.cases))
            for ca, cb in zip(ja.cases, jb.cases):
                inner_lab, inner_rev, inner_names = dict(lab), dict(rev), dict(names)
                if isinstance(ca, Case):
                    _no(ca.ctor == cb.ctor and len(ca.vars) == len(cb.vars))
                    for nx, ny in zip(ca.vars, cb.vars):
                        inner_names[nx] = ny
                else:
                    _no(ca.rule == cb.rule)
                _cmp_assumptions(
                    ca.assumptions, cb.assumptions, inner_lab, inner_rev, inner_names
                )
                _cmp_script(ca.body, cb.body, inner_lab, inner_rev, inner_names)
        else:  # pragma: no cover
            raise _Mismatch
