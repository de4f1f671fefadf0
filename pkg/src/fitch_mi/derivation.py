"""Checker-verified proof trees.

A ``Derivation`` is the only evidence of theoremhood.  Every node records
enough of its instantiation that an independent validator can re-check it
locally against the signature.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .kernel import Formula, Subst, Term


# node kinds
HYP = "hyp"
RULE = "rule"
THEOREM = "theorem"
AND_INTRO = "and-intro"
AND_ELIM_LEFT = "and-elim-left"
AND_ELIM_RIGHT = "and-elim-right"
OR_INTRO_LEFT = "or-intro-left"
OR_INTRO_RIGHT = "or-intro-right"
OR_ELIM = "or-elim"
IMP_INTRO = "imp-intro"
IMP_ELIM = "imp-elim"
NOT_INTRO = "not-intro"
NOT_ELIM = "not-elim"
BOTTOM_ELIM = "bottom-elim"
FORALL_INTRO = "forall-intro"
FORALL_ELIM = "forall-elim"
EXISTS_INTRO = "exists-intro"
EXISTS_ELIM = "exists-elim"
INDUCTION = "induction"
CASE = "case"
CASE_SPLIT = "case-split"
INVERSION = "inversion"
INV_CASE = "inv-case"
GAP = "gap"


@dataclass(frozen=True)
class Derivation:
    """One applied rule instance.

    ``formula`` is the node's conclusion.  The meaning of the other fields
    depends on ``kind``:

    - hyp: ``name`` is the hypothesis label (may be empty).
    - rule: ``name`` names the declaration; ``children`` derive the
      premises in order; ``terms`` give the schematic instantiation in
      declaration order.
    - theorem: ``name`` names a previously proved theorem; the node has
      no children and states an instance of the theorem's full statement
      (premises folded into the conclusion as implications); ``props``
      give the proposition instantiation (schemas only).
    - imp-intro / not-intro: ``assumed`` lists the discharged hypotheses;
      the child concludes under them.
    - or-elim: children are (disjunction, left branch, right branch) and
      ``assumed`` the two branch hypotheses.
    - forall-intro: ``binders`` are the generalized eigenvariables.
    - forall-elim / exists-intro: ``terms`` are the instantiation terms /
      witnesses, one per stripped binder.
    - exists-elim: children are (existential, body); ``binders`` the fresh
      eigenvariables; ``assumed`` the instantiated body hypothesis.
    - induction / case-split: children are ``case`` nodes; for case-split
      ``terms`` holds the scrutinee.
    - case: ``name`` is the constructor, ``binders`` the pattern
      variables, ``assumed`` the induction hypotheses, the single child
      the case body.
    - inversion: children are (inverted fact, inv-case nodes...).
    - inv-case: ``name`` is the rule, ``binders`` the variables standing
      for undetermined rule schematics, ``assumed`` the learned premises,
      ``refine`` the eigenvariable refinement, the single child the
      branch body.
    - gap: an unproven goal explicitly skipped by the user.
    """

    kind: str
    formula: Formula
    children: tuple["Derivation", ...] = ()
    name: str = ""
    terms: tuple[Term, ...] = ()
    binders: tuple[tuple[str, str], ...] = ()
    assumed: tuple[Formula, ...] = ()
    refine: tuple[tuple[str, Term], ...] = field(default=())
    props: tuple[tuple[str, Formula], ...] = field(default=())


def apply_subst(d: Derivation, s: Subst) -> Derivation:
    """Apply a substitution across a whole tree (metavariable resolution)."""
    return replace(
        d,
        formula=s.apply(d.formula),
        children=tuple(apply_subst(c, s) for c in d.children),
        terms=tuple(s.apply_term(t) for t in d.terms),
        assumed=tuple(s.apply(f) for f in d.assumed),
        refine=tuple((n, s.apply_term(t)) for n, t in d.refine),
        props=tuple((n, s.apply(f)) for n, f in d.props),
    )


def iter_nodes(d: Derivation):
    yield d
    for c in d.children:
        yield from iter_nodes(c)


def has_gaps(d: Derivation) -> bool:
    return any(n.kind == GAP for n in iter_nodes(d))
