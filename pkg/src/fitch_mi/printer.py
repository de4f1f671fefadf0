"""Canonical pretty printer.

Output round-trips through the parser: ``parse(print(x))`` equals ``x`` up
to source positions, and printing is stable (printing the reparse gives the
same text).  Quantifiers are printed one binder at a time; rule headers keep
their grouped binder lists.
"""

from __future__ import annotations

from .kernel import (
    And,
    Bottom,
    Ctor,
    Exists,
    FMeta,
    Forall,
    Formula,
    Implies,
    MetaVar,
    Not,
    Or,
    Pred,
    PropParam,
    RigidVar,
    SchematicVar,
    Term,
)
from .syntax import (
    BUILTIN_DISPLAY,
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


def print_term(t: Term) -> str:
    if isinstance(t, (RigidVar, SchematicVar)):
        return t.name
    if isinstance(t, MetaVar):
        base = t.hint or "?x"
        return f"?{base}{t.id}" if not base.startswith("?") else f"{base}{t.id}"
    assert isinstance(t, Ctor)
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(print_term(a) for a in t.args)})"


# precedence levels: implies 1 (right assoc), or 2, and 3, unary 4, atom 5
def _fmla(f: Formula, prec: int) -> str:
    if isinstance(f, Pred):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(print_term(a) for a in f.args)})"
    if isinstance(f, PropParam):
        return f.name
    if isinstance(f, FMeta):
        return f"?P{f.id}"
    if isinstance(f, Bottom):
        return "⊥"
    if isinstance(f, Implies):
        s = f"{_fmla(f.left, 2)} ⟹ {_fmla(f.right, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, Or):
        s = f"{_fmla(f.left, 2)} ∨ {_fmla(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, And):
        s = f"{_fmla(f.left, 3)} ∧ {_fmla(f.right, 4)}"
        return f"({s})" if prec > 3 else s
    if isinstance(f, Not):
        return f"¬{_fmla(f.body, 4)}"
    if isinstance(f, (Forall, Exists)):
        q = "∀" if isinstance(f, Forall) else "∃"
        s = f"{q} ({f.var} : {f.sort}) : {_fmla(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"cannot print {type(f).__name__}")


def print_formula(f: Formula) -> str:
    return _fmla(f, 0)


def _binder_groups(binders: tuple[tuple[str, str], ...]) -> str:
    groups: list[str] = []
    names: list[str] = []
    sort = None
    for n, s in binders:
        if sort is None or s == sort:
            names.append(n)
            sort = s
        else:
            groups.append(f"({', '.join(names)} : {sort})")
            names = [n]
            sort = s
    if names:
        groups.append(f"({', '.join(names)} : {sort})")
    return " ".join(groups)


def print_assumption(a: Assumption) -> str:
    if isinstance(a, ForAny):
        return f"for any {_binder_groups(a.vars)}"
    if isinstance(a, ForSome):
        head = f"{a.label}: " if a.label else ""
        return f"{head}{print_formula(a.formula)} for some {_binder_groups(a.witnesses)}"
    assert isinstance(a, Hypothesis)
    head = f"{a.label}: " if a.label else ""
    return f"{head}{print_formula(a.formula)}"


def _just_text(j) -> str:
    if isinstance(j, Prove):
        return ""
    if isinstance(j, ByRule):
        tail = f" on {', '.join(j.refs)}" if j.refs else ""
        return f" by rule {j.rule}{tail}"
    if isinstance(j, BuiltIn):
        tail = f" on {', '.join(j.refs)}" if j.refs else ""
        return f" by rule {BUILTIN_DISPLAY[j.rule]}{tail}"
    if isinstance(j, ByTheorem):
        tail = f" on {', '.join(j.refs)}" if j.refs else ""
        return f" by theorem {j.theorem}{tail}"
    if isinstance(j, ByInduction):
        return " by induction :"
    if isinstance(j, ByCaseAnalysis):
        return f" by case analysis on {print_term(j.scrutinee)} :"
    if isinstance(j, ByInversion):
        return f" by inversion on {j.ref} :"
    raise TypeError(f"cannot print {type(j).__name__}")


def _bars(depth: int) -> str:
    return "| " * depth


def _emit_block(
    out: list[str],
    depth: int,
    assumptions: tuple[Assumption, ...],
    body: ProofScript,
    label: str | None,
) -> None:
    """A subproof: assumption region, separator, body."""
    assums = [print_assumption(a) for a in assumptions] or [""]
    first = assums[0]
    if label is not None:
        out.append(f"{_bars(depth)}{label}: | {first}".rstrip())
    else:
        out.append(f"{_bars(depth + 1)}{first}".rstrip())
    for a in assums[1:]:
        out.append(f"{_bars(depth + 1)}{a}")
    out.append(f"{_bars(depth)}|---")
    _emit_script(out, depth + 1, body)


def _emit_case(out: list[str], depth: int, c: Case | InversionCase) -> None:
    if isinstance(c, Case):
        pat = c.ctor if not c.vars else f"{c.ctor}({', '.join(c.vars)})"
    else:
        pat = c.rule
    out.append(f"{_bars(depth)}case {pat} ->")
    assums = [print_assumption(a) for a in c.assumptions]
    for a in assums:
        out.append(f"{_bars(depth + 1)}{a}")
    out.append(f"{_bars(depth + 1)}---")
    _emit_script(out, depth + 1, c.body)


def _emit_script(out: list[str], depth: int, script: ProofScript) -> None:
    for step in script.steps:
        _emit_step(out, depth, step)


def _emit_step(out: list[str], depth: int, step: Step) -> None:
    if isinstance(step, Subproof):
        _emit_block(out, depth, step.assumptions, step.body, step.label)
        return
    assert isinstance(step, Line)
    head = f"{step.label}: " if step.label else ""
    j = step.justification
    if isinstance(j, Prove):
        out.append(f"{_bars(depth)}{head}prove {print_formula(step.formula)}")
        return
    out.append(f"{_bars(depth)}{head}{print_formula(step.formula)}{_just_text(j)}")
    if isinstance(j, (ByInduction, ByCaseAnalysis, ByInversion)):
        for c in j.cases:
            _emit_case(out, depth, c)


def print_script(script: ProofScript, depth: int = 0) -> str:
    out: list[str] = []
    _emit_script(out, depth, script)
    return "\n".join(out)


def print_data_decl(d: DataDecl) -> str:
    parts = []
    for name, arg_sorts in d.constructors:
        parts.append(name if not arg_sorts else f"{name}({', '.join(arg_sorts)})")
    return f"data {d.name} = {' | '.join(parts)}"


def print_rule_decl(r: RuleDecl) -> str:
    binders = f" for all {_binder_groups(r.schematic_vars)}" if r.schematic_vars else ""
    prem = ", ".join(print_formula(p) for p in r.premises)
    prem = f"{prem} " if prem else ""
    return f"rule {r.name}{binders} : {prem}⊢ {print_formula(r.conclusion)}"


def print_theorem_header(t: TheoremDecl) -> str:
    kw = "theorem schema" if t.is_schema else "theorem"
    props = f" for all propositions {', '.join(t.prop_params)}" if t.prop_params else ""
    if t.premises:
        prem = ", ".join(print_formula(p) for p in t.premises)
        stmt = f"{prem} ⊢ {print_formula(t.conclusion)}"
    else:
        stmt = print_formula(t.conclusion)
    return f"{kw} {t.name}{props} : {stmt}"


def print_theorem_decl(t: TheoremDecl) -> str:
    lines = [print_theorem_header(t)]
    body = print_script(t.proof)
    if body:
        lines.append(body)
    return "\n".join(lines)


def print_module(m: ModuleAST) -> str:
    chunks: list[str] = []
    for d in m.declarations:
        if isinstance(d, DataDecl):
            chunks.append(print_data_decl(d))
        elif isinstance(d, RuleDecl):
            chunks.append(print_rule_decl(d))
        else:
            chunks.append(print_theorem_decl(d))
    return "\n\n".join(chunks) + "\n"
