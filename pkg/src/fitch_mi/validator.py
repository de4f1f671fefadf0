"""Independent re-validation of Derivation trees.

``validate`` walks a finished derivation and re-checks every node locally
against the signature, tracking the hypotheses in scope.  It shares the
kernel with the checker but none of the checker's bookkeeping, so it acts
as a second line of defense for proof artifacts.
"""

from __future__ import annotations

from .checker import Signature, fold_implications, freshen_rule
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
    GAP,
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
    Not,
    Or,
    Pred,
    PropParam,
    RigidVar,
    SchematicVar,
    Subst,
    UnifyFailure,
    alpha_equal,
    free_rigids,
    instantiate,
    metas_of,
    replace_rigids,
    unify,
)
from .printer import print_formula


class ValidationError(Exception):
    pass


def _fail(msg: str) -> None:
    raise ValidationError(msg)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


def _subst_props(f: Formula, mapping: dict[str, Formula]) -> Formula:
    if isinstance(f, PropParam):
        return mapping.get(f.name, f)
    if isinstance(f, And):
        return And(_subst_props(f.left, mapping), _subst_props(f.right, mapping))
    if isinstance(f, Or):
        return Or(_subst_props(f.left, mapping), _subst_props(f.right, mapping))
    if isinstance(f, Implies):
        return Implies(_subst_props(f.left, mapping), _subst_props(f.right, mapping))
    if isinstance(f, Not):
        return Not(_subst_props(f.body, mapping))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, _subst_props(f.body, mapping))
    return f


def validate(
    d: Derivation,
    sig: Signature,
    assumptions: tuple[Formula, ...] = (),
    allow_gaps: bool = False,
) -> None:
    """Raise ValidationError unless ``d`` is a correct derivation.

    ``assumptions`` are the formulas the derivation may use as hypotheses.
    """
    k = d.kind
    f = d.formula
    cs = d.children

    def rec(child: Derivation, extra: tuple[Formula, ...] = (), env=None) -> None:
        validate(child, sig, (env if env is not None else assumptions) + extra, allow_gaps)

    if k == GAP:
        _need(allow_gaps, "derivation contains an unproven gap")
        return

    if k == HYP:
        _need(
            any(alpha_equal(f, a) for a in assumptions),
            f"hypothesis {print_formula(f)} is not among the assumptions",
        )
        return

    if k == RULE:
        decl = sig.rules.get(d.name)
        _need(decl is not None, f"unknown rule {d.name!r}")
        _need(len(d.terms) == len(decl.schematic_vars), "wrong number of instantiation terms")
        s = Subst(
            {SchematicVar(n, srt): t for (n, srt), t in zip(decl.schematic_vars, d.terms)}
        )
        _need(len(cs) == len(decl.premises), "wrong number of premises")
        for child, p in zip(cs, decl.premises):
            _need(
                alpha_equal(child.formula, s.apply(p)),
                f"premise mismatch in rule {d.name}",
            )
            rec(child)
        _need(
            alpha_equal(f, s.apply(decl.conclusion)),
            f"conclusion mismatch in rule {d.name}",
        )
        return

    if k == THEOREM:
        decl = sig.theorems.get(d.name)
        _need(decl is not None, f"unknown theorem {d.name!r}")
        pm = dict(d.props)
        _need(set(pm) == set(decl.prop_params), "wrong proposition instantiation")
        _need(not cs, "theorem node takes no premises directly")
        stmt = _subst_props(
            fold_implications(decl.premises, decl.conclusion), pm
        )
        _need(
            alpha_equal(f, stmt),
            f"statement mismatch in theorem {d.name}",
        )
        return

    if k == AND_INTRO:
        _need(isinstance(f, And) and len(cs) == 2, "malformed ∧-intro")
        _need(alpha_equal(cs[0].formula, f.left), "left conjunct mismatch")
        _need(alpha_equal(cs[1].formula, f.right), "right conjunct mismatch")
        rec(cs[0])
        rec(cs[1])
        return

    if k in (AND_ELIM_LEFT, AND_ELIM_RIGHT):
        _need(len(cs) == 1 and isinstance(cs[0].formula, And), "malformed ∧-elim")
        side = cs[0].formula.left if k == AND_ELIM_LEFT else cs[0].formula.right
        _need(alpha_equal(f, side), "∧-elim conclusion mismatch")
        rec(cs[0])
        return

    if k in (OR_INTRO_LEFT, OR_INTRO_RIGHT):
        _need(isinstance(f, Or) and len(cs) == 1, "malformed ∨-intro")
        side = f.left if k == OR_INTRO_LEFT else f.right
        _need(alpha_equal(cs[0].formula, side), "∨-intro premise mismatch")
        rec(cs[0])
        return

    if k == OR_ELIM:
        _need(len(cs) == 3 and len(d.assumed) == 2, "malformed ∨-elim")
        disj = cs[0].formula
        _need(isinstance(disj, Or), "∨-elim major premise is not a disjunction")
        _need(alpha_equal(disj.left, d.assumed[0]), "left branch hypothesis mismatch")
        _need(alpha_equal(disj.right, d.assumed[1]), "right branch hypothesis mismatch")
        _need(alpha_equal(cs[1].formula, f), "left branch conclusion mismatch")
        _need(alpha_equal(cs[2].formula, f), "right branch conclusion mismatch")
        rec(cs[0])
        rec(cs[1], (d.assumed[0],))
        rec(cs[2], (d.assumed[1],))
        return

    if k == IMP_INTRO:
        _need(len(cs) == 1 and d.assumed, "malformed ⟹-intro")
        body = f
        for a in d.assumed:
            _need(isinstance(body, Implies), "⟹-intro conclusion is not an implication")
            _need(alpha_equal(body.left, a), "discharged hypothesis mismatch")
            body = body.right
        _need(alpha_equal(cs[0].formula, body), "⟹-intro body mismatch")
        rec(cs[0], tuple(d.assumed))
        return

    if k == IMP_ELIM:
        _need(len(cs) == 2, "malformed ⟹-elim")
        imp = cs[0].formula
        _need(isinstance(imp, Implies), "⟹-elim major premise is not an implication")
        _need(alpha_equal(cs[1].formula, imp.left), "⟹-elim argument mismatch")
        _need(alpha_equal(f, imp.right), "⟹-elim conclusion mismatch")
        rec(cs[0])
        rec(cs[1])
        return

    if k == NOT_INTRO:
        _need(
            len(cs) == 1 and len(d.assumed) == 1 and isinstance(f, Not),
            "malformed ¬-intro",
        )
        _need(alpha_equal(f.body, d.assumed[0]), "¬-intro hypothesis mismatch")
        _need(isinstance(cs[0].formula, Bottom), "¬-intro body must conclude ⊥")
        rec(cs[0], (d.assumed[0],))
        return

    if k == NOT_ELIM:
        _need(len(cs) == 2 and isinstance(f, Bottom), "malformed ¬-elim")
        fa, fb = cs[0].formula, cs[1].formula
        ok = (isinstance(fb, Not) and alpha_equal(fb.body, fa)) or (
            isinstance(fa, Not) and alpha_equal(fa.body, fb)
        )
        _need(ok, "¬-elim premises are not contradictory")
        rec(cs[0])
        rec(cs[1])
        return

    if k == BOTTOM_ELIM:
        _need(len(cs) == 1 and isinstance(cs[0].formula, Bottom), "malformed ⊥-elim")
        rec(cs[0])
        return

    if k == FORALL_INTRO:
        _need(len(cs) == 1 and d.binders, "malformed ∀-intro")
        body = f
        for n, srt in d.binders:
            _need(
                isinstance(body, Forall) and body.sort == srt,
                "∀-intro binder mismatch",
            )
            for a in assumptions:
                _need(
                    n not in free_rigids(a),
                    f"eigenvariable {n} occurs in an assumption",
                )
            body = instantiate(body, RigidVar(n, srt))
        _need(alpha_equal(cs[0].formula, body), "∀-intro body mismatch")
        rec(cs[0])
        return

    if k == FORALL_ELIM:
        _need(len(cs) == 1 and d.terms, "malformed ∀-elim")
        body = cs[0].formula
        for t in d.terms:
            _need(isinstance(body, Forall), "∀-elim premise has too few binders")
            body = instantiate(body, t)
        _need(alpha_equal(f, body), "∀-elim conclusion mismatch")
        rec(cs[0])
        return

    if k == EXISTS_INTRO:
        _need(len(cs) == 1 and d.terms, "malformed ∃-intro")
        body = f
        for t in d.terms:
            _need(isinstance(body, Exists), "∃-intro conclusion has too few binders")
            body = instantiate(body, t)
        _need(alpha_equal(cs[0].formula, body), "∃-intro witness mismatch")
        rec(cs[0])
        return

    if k == EXISTS_ELIM:
        _need(
            len(cs) == 2 and d.binders and len(d.assumed) == 1,
            "malformed ∃-elim",
        )
        ex = cs[0].formula
        for n, srt in d.binders:
            _need(
                isinstance(ex, Exists) and ex.sort == srt,
                "∃-elim binder mismatch",
            )
            ex = instantiate(ex, RigidVar(n, srt))
        _need(alpha_equal(ex, d.assumed[0]), "∃-elim hypothesis mismatch")
        names = {n for n, _ in d.binders}
        _need(not (free_rigids(f) & names), "witness escapes the ∃-elim conclusion")
        for a in assumptions:
            _need(
                not (free_rigids(a) & names),
                "∃-elim witness occurs in an assumption",
            )
        _need(alpha_equal(cs[1].formula, f), "∃-elim body conclusion mismatch")
        rec(cs[0])
        rec(cs[1], (d.assumed[0],))
        return

    if k == INDUCTION:
        _need(isinstance(f, Forall), "induction conclusion must be universal")
        sort = sig.sorts.get(f.sort)
        _need(sort is not None, f"unknown sort {f.sort!r}")
        _need(len(cs) == len(sort.constructors), "wrong number of induction cases")
        for child, ctor in zip(cs, sort.constructors):
            _need(
                child.kind == CASE and child.name == ctor.name,
                f"expected a case for {ctor.name}",
            )
            _need(
                tuple(s for _, s in child.binders) == ctor.arg_sorts,
                f"case {ctor.name} binds the wrong sorts",
            )
            names = {n for n, _ in child.binders}
            for a in assumptions:
                _need(
                    not (free_rigids(a) & names),
                    f"case variable of {ctor.name} occurs in an assumption",
                )
            ihs = tuple(
                instantiate(f, RigidVar(n, s))
                for n, s in child.binders
                if s == f.sort
            )
            _need(len(child.assumed) == len(ihs), f"case {ctor.name} has wrong hypotheses")
            for got, want in zip(child.assumed, ihs):
                _need(
                    alpha_equal(got, want),
                    f"case {ctor.name} states a wrong induction hypothesis",
                )
            pattern = Ctor(ctor.name, tuple(RigidVar(n, s) for n, s in child.binders))
            target = instantiate(f, pattern)
            _need(
                alpha_equal(child.formula, target),
                f"case {ctor.name} concludes the wrong formula",
            )
            _need(len(child.children) == 1, "malformed case")
            _need(
                alpha_equal(child.children[0].formula, target),
                f"case {ctor.name} body mismatch",
            )
            rec(child.children[0], ihs)
        return

    if k == CASE_SPLIT:
        _need(len(d.terms) == 1 and isinstance(d.terms[0], RigidVar), "malformed case split")
        scrut = d.terms[0]
        sort = sig.sorts.get(scrut.sort)
        _need(sort is not None, f"unknown sort {scrut.sort!r}")
        _need(len(cs) == len(sort.constructors), "wrong number of cases")
        for child, ctor in zip(cs, sort.constructors):
            _need(
                child.kind == CASE and child.name == ctor.name,
                f"expected a case for {ctor.name}",
            )
            _need(
                tuple(s for _, s in child.binders) == ctor.arg_sorts,
                f"case {ctor.name} binds the wrong sorts",
            )
            _need(not child.assumed, "case analysis provides no hypotheses")
            pattern = Ctor(ctor.name, tuple(RigidVar(n, s) for n, s in child.binders))
            sub = {scrut.name: pattern}
            target = replace_rigids(f, sub)
            _need(
                alpha_equal(child.formula, target),
                f"case {ctor.name} concludes the wrong formula",
            )
            _need(len(child.children) == 1, "malformed case")
            _need(
                alpha_equal(child.children[0].formula, target),
                f"case {ctor.name} body mismatch",
            )
            env = tuple(replace_rigids(a, sub) for a in assumptions)
            rec(child.children[0], env=env)
        return

    if k == INVERSION:
        _need(len(cs) >= 1, "malformed inversion")
        fact = cs[0].formula
        _need(isinstance(fact, Pred), "inversion applies to a judgment")
        rec(cs[0])
        flex_names = sorted(free_rigids(fact))
        flex = {n: i for i, n in enumerate(flex_names)}
        possible = []
        for rdecl in sig.rules.values():
            gen = FreshGen()
            _, concl, _ = freshen_rule(rdecl, gen)
            try:
                unify(concl, fact, flex_rigids=flex)
            except UnifyFailure:
                continue
            possible.append(rdecl)
        branches = cs[1:]
        _need(
            [b.name for b in branches] == [r.name for r in possible],
            "inversion branches do not cover exactly the applicable rules",
        )
        for branch, rdecl in zip(branches, possible):
            _need(branch.kind == INV_CASE, "malformed inversion branch")
            rho = dict(branch.refine)
            names = {n for n, _ in branch.binders}
            for a in assumptions:
                _need(
                    not (free_rigids(a) & names),
                    "inversion branch variable occurs in an assumption",
                )
            # the refined fact must be derivable by the branch rule with the
            # learned premises as its premise instances
            fact_r = replace_rigids(fact, rho)
            gen = FreshGen()
            prems, concl, _ = freshen_rule(rdecl, gen)
            try:
                s = unify(concl, fact_r)
                for p, learned in zip(prems, branch.assumed):
                    s = unify(p, learned, under=s)
            except UnifyFailure as e:
                _fail(f"learned premises of branch {rdecl.name} do not fit: {e}")
            _need(len(prems) == len(branch.assumed), "wrong number of learned premises")
            target = replace_rigids(f, rho)
            _need(
                alpha_equal(branch.formula, target),
                f"branch {rdecl.name} concludes the wrong formula",
            )
            _need(len(branch.children) == 1, "malformed inversion branch")
            _need(
                alpha_equal(branch.children[0].formula, target),
                f"branch {rdecl.name} body mismatch",
            )
            env = tuple(replace_rigids(a, rho) for a in assumptions)
            rec(branch.children[0], tuple(branch.assumed), env=env)
        return

    _fail(f"unknown derivation kind {k!r}")


def validate_theorem(
    d: Derivation,
    sig: Signature,
    premises: tuple[Formula, ...],
    conclusion: Formula,
    allow_gaps: bool = False,
) -> None:
    """Validate a theorem derivation against its declared statement."""
    target = fold_implications(premises, conclusion)
    if not alpha_equal(d.formula, target):
        raise ValidationError(
            f"derivation concludes {print_formula(d.formula)}, "
            f"theorem states {print_formula(target)}"
        )
    validate(d, sig, (), allow_gaps)
