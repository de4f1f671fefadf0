"""Random surface-syntax generators for the round-trip and alpha tests."""

from __future__ import annotations

import itertools

from fitch_mi.kernel import (
    And,
    Bottom,
    Ctor,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Pred,
    PropParam,
    RigidVar,
    SchematicVar,
    Term,
)
from fitch_mi.syntax import (
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
    Subproof,
    TheoremDecl,
)

USORT = "t"

# ---------------------------------------------------------------------------
# quantified formulas over an uninterpreted signature, for alpha equivalence


def random_qformula(rng, depth: int = 3) -> Formula:
    names = ("x", "y", "z", "w")

    def term(env: list[str], d: int) -> Term:
        if env and rng.random() < 0.6:
            return RigidVar(rng.choice(env), USORT)
        if d == 0 or rng.random() < 0.4:
            return Ctor("z")
        return Ctor("s", (term(env, d - 1),))

    def go(env: list[str], d: int) -> Formula:
        roll = rng.random()
        if d == 0 or roll < 0.25:
            return Pred(rng.choice(("P", "Q")), (term(env, 2),))
        if roll < 0.5:
            v = rng.choice(names)
            cls = Forall if rng.random() < 0.5 else Exists
            return cls(v, USORT, go(env + [v], d - 1))
        if roll < 0.62:
            return Not(go(env, d - 1))
        cls = rng.choice((And, Or, Implies))
        return cls(go(env, d - 1), go(env, d - 1))

    return go([], depth)


def rename_binders(f: Formula, counter=None) -> Formula:
    """An alpha-variant of ``f`` with every bound variable freshly renamed."""
    counter = counter if counter is not None else itertools.count(1)

    def rterm(t: Term, env: dict[str, str]) -> Term:
        if isinstance(t, RigidVar) and t.name in env:
            return RigidVar(env[t.name], t.sort)
        if isinstance(t, Ctor):
            return Ctor(t.name, tuple(rterm(a, env) for a in t.args))
        return t

    def go(x: Formula, env: dict[str, str]) -> Formula:
        if isinstance(x, Pred):
            return Pred(x.name, tuple(rterm(a, env) for a in x.args))
        if isinstance(x, (And, Or, Implies)):
            return type(x)(go(x.left, env), go(x.right, env))
        if isinstance(x, Not):
            return Not(go(x.body, env))
        if isinstance(x, (Forall, Exists)):
            fresh = f"v{next(counter)}"
            return type(x)(fresh, x.sort, go(x.body, {**env, x.var: fresh}))
        return x

    return go(f, {})


# ---------------------------------------------------------------------------
# whole random modules, for the parse/pretty-print round trip


class ModuleGen:
    def __init__(self, rng):
        self.rng = rng
        self.fresh = itertools.count(1)
        self.sorts: dict[str, tuple[tuple[str, tuple[str, ...]], ...]] = {}
        self.preds: dict[str, tuple[str, ...]] = {}
        self.rules: list[str] = []
        self.theorems: list[str] = []

    def module(self) -> ModuleAST:
        rng = self.rng
        decls = []
        for i in range(rng.randint(1, 2)):
            decls.append(self.data_decl(i))
        for i in range(rng.randint(1, 3)):
            name = f"R{i + 1}"
            self.preds[name] = tuple(
                rng.choice(list(self.sorts)) for _ in range(rng.randint(1, 2))
            )
        for i in range(rng.randint(0, 3)):
            decls.append(self.rule_decl(i))
        for i in range(rng.randint(1, 2)):
            decls.append(self.theorem_decl(i))
        return ModuleAST(tuple(decls))

    def data_decl(self, i: int) -> DataDecl:
        rng = self.rng
        name = f"d{i + 1}"
        known = list(self.sorts) + [name]
        ctors = [(f"c{i + 1}0", ())]
        for j in range(rng.randint(1, 2)):
            args = tuple(rng.choice(known) for _ in range(rng.randint(1, 2)))
            ctors.append((f"c{i + 1}{j + 1}", args))
        self.sorts[name] = tuple(ctors)
        return DataDecl(name, tuple(ctors))

    # -- terms and formulas

    def term(self, sort: str, env: dict[str, Term], depth: int = 2) -> Term:
        rng = self.rng
        candidates = [t for t in env.values() if t.sort == sort]
        if candidates and rng.random() < 0.5:
            return rng.choice(candidates)
        nullary = [c for c, a in self.sorts[sort] if not a]
        if depth == 0:
            return Ctor(rng.choice(nullary))
        c, args = rng.choice(self.sorts[sort])
        return Ctor(c, tuple(self.term(a, env, depth - 1) for a in args))

    def pred(self, env: dict[str, Term]) -> Pred:
        name = self.rng.choice(list(self.preds))
        return Pred(name, tuple(self.term(s, env) for s in self.preds[name]))

    def formula(self, env: dict[str, Term], depth: int = 2,
                props: tuple[str, ...] = ()) -> Formula:
        rng = self.rng
        roll = rng.random()
        if depth == 0 or roll < 0.35:
            if props and rng.random() < 0.3:
                return PropParam(rng.choice(props))
            if rng.random() < 0.1:
                return Bottom()
            return self.pred(env)
        if roll < 0.55:
            v = f"b{next(self.fresh)}"
            sort = rng.choice(list(self.sorts))
            cls = Forall if rng.random() < 0.5 else Exists
            body = self.formula({**env, v: RigidVar(v, sort)}, depth - 1, props)
            return cls(v, sort, body)
        if roll < 0.65:
            return Not(self.formula(env, depth - 1, props))
        cls = rng.choice((And, Or, Implies))
        return cls(
            self.formula(env, depth - 1, props), self.formula(env, depth - 1, props)
        )

    # -- declarations

    def rule_decl(self, i: int) -> RuleDecl:
        rng = self.rng
        svars = tuple(
            (f"v{next(self.fresh)}", rng.choice(list(self.sorts)))
            for _ in range(rng.randint(1, 2))
        )
        env = {n: SchematicVar(n, s) for n, s in svars}
        premises = tuple(self.pred(env) for _ in range(rng.randint(0, 2)))
        name = f"q{i + 1}"
        self.rules.append(name)
        return RuleDecl(name, svars, premises, self.pred(env))

    def theorem_decl(self, i: int) -> TheoremDecl:
        rng = self.rng
        is_schema = rng.random() < 0.2
        props = ("A", "B") if is_schema else ()
        premises = tuple(
            self.formula({}, 1, props) for _ in range(rng.randint(0, 1))
        )
        conclusion = self.formula({}, 2, props)
        name = f"t{i + 1}"
        script = self.script({}, set(), depth=2, props=props)
        self.theorems.append(name)
        return TheoremDecl(name, props, premises, conclusion, script, is_schema)

    # -- proof scripts

    def label(self) -> str:
        return f"l{next(self.fresh)}"

    def script(self, env: dict[str, Term], labels: set[str], depth: int,
               props: tuple[str, ...]) -> ProofScript:
        steps = []
        labels = set(labels)
        for _ in range(self.rng.randint(1, 3)):
            step = self.step(env, labels, depth, props)
            if step.label is not None:
                labels.add(step.label)
            steps.append(step)
        return ProofScript(tuple(steps))

    def refs(self, labels: set[str]) -> tuple[str, ...]:
        rng = self.rng
        pool = sorted(labels)
        k = rng.randint(0, min(2, len(pool)))
        return tuple(rng.sample(pool, k))

    def step(self, env: dict[str, Term], labels: set[str], depth: int,
             props: tuple[str, ...]):
        rng = self.rng
        label = self.label() if rng.random() < 0.6 else None
        roll = rng.random()
        if depth > 0 and roll < 0.25:
            return self.subproof(env, labels, depth, props, label)
        if depth > 0 and roll < 0.35:
            return self.case_line(env, labels, depth, props, label)
        f = self.formula(env, 1, props)
        roll = rng.random()
        if roll < 0.35 or (not self.rules and not labels):
            return Line(label, f, Prove())
        if roll < 0.6 and self.rules:
            return Line(label, f, ByRule(rng.choice(self.rules), self.refs(labels)))
        if roll < 0.8 and self.theorems:
            return Line(label, f, ByTheorem(rng.choice(self.theorems), self.refs(labels)))
        builtin = rng.choice(("and-intro", "imp-elim", "forall-elim", "exists-intro"))
        return Line(label, f, BuiltIn(builtin, self.refs(labels)))

    def subproof(self, env, labels, depth, props, label) -> Subproof:
        rng = self.rng
        env = dict(env)
        inner_labels = set(labels)
        assumptions = []
        for _ in range(rng.randint(1, 2)):
            roll = rng.random()
            if roll < 0.4:
                sort = rng.choice(list(self.sorts))
                names = tuple(f"a{next(self.fresh)}" for _ in range(rng.randint(1, 2)))
                assumptions.append(ForAny(tuple((n, sort) for n in names)))
                for n in names:
                    env[n] = RigidVar(n, sort)
            elif roll < 0.8:
                h = f"h{next(self.fresh)}" if rng.random() < 0.8 else None
                assumptions.append(Hypothesis(h, self.formula(env, 1, props)))
                if h:
                    inner_labels.add(h)
            else:
                sort = rng.choice(list(self.sorts))
                w = f"w{next(self.fresh)}"
                env[w] = RigidVar(w, sort)
                h = f"h{next(self.fresh)}"
                inner_labels.add(h)
                assumptions.append(
                    ForSome(h, self.formula(env, 1, props), ((w, sort),))
                )
        body = self.script(env, inner_labels, depth - 1, props)
        return Subproof(label, tuple(assumptions), body)

    def case_line(self, env, labels, depth, props, label):
        rng = self.rng
        sort = rng.choice(list(self.sorts))
        cases = []
        for ctor, arg_sorts in self.sorts[sort]:
            sub_env = dict(env)
            vars_ = tuple(f"a{next(self.fresh)}" for _ in arg_sorts)
            for v, s in zip(vars_, arg_sorts):
                sub_env[v] = RigidVar(v, s)
            sub_labels = set(labels)
            assumptions = []
            if rng.random() < 0.5:
                h = f"ih{next(self.fresh)}"
                assumptions.append(Hypothesis(h, self.formula(sub_env, 1, props)))
                sub_labels.add(h)
            cases.append(
                Case(ctor, vars_, tuple(assumptions),
                     self.script(sub_env, sub_labels, depth - 1, props))
            )
        f = self.formula(env, 1, props)
        scrutinees = [t for t in env.values() if t.sort == sort]
        if scrutinees and rng.random() < 0.5:
            scrutinee = rng.choice(scrutinees)
            return Line(label, f, ByCaseAnalysis(scrutinee, tuple(cases)))
        v = f"b{next(self.fresh)}"
        stated = Forall(v, sort, self.formula({**env, v: RigidVar(v, sort)}, 1, props))
        return Line(label, stated, ByInduction(tuple(cases)))


def random_module(rng) -> ModuleAST:
    return ModuleGen(rng).module()
