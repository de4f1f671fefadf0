"""Independent oracles and random generators for the property tests.

The forward-chaining oracle derives ground facts bottom-up from literal
rules and theorem facts.  It shares no code path with the backward-chaining
search engine, so the two can be used as a cross-check on each other.
"""

from __future__ import annotations

import itertools

from fitch_mi.kernel import (
    And,
    Ctor,
    Formula,
    Implies,
    MetaVar,
    Or,
    Pred,
    RigidVar,
    Term,
)

# ---------------------------------------------------------------------------
# ground term universes


def term_depth(t: Term) -> int:
    if isinstance(t, Ctor):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 1


def term_universe(sig, max_depth: int, cap: int = 4000) -> dict[str, list[Term]]:
    """All ground terms of each sort up to a constructor depth."""
    exact: dict[str, list[list[Term]]] = {s: [[]] for s in sig.sorts}
    for d in range(1, max_depth + 1):
        for s, srt in sig.sorts.items():
            layer: list[Term] = []
            for c in srt.constructors:
                if not c.arg_sorts:
                    if d == 1:
                        layer.append(Ctor(c.name))
                    continue
                pools = []
                for a in c.arg_sorts:
                    pools.append([t for lay in exact[a][:d] for t in lay])
                for args in itertools.product(*pools):
                    t = Ctor(c.name, tuple(args))
                    if term_depth(t) == d:
                        layer.append(t)
            exact[s].append(layer)
        if sum(len(lay) for lays in exact.values() for lay in lays) > cap:
            break
    return {s: [t for lay in lays for t in lay] for s, lays in exact.items()}


def _inst_term(t: Term, env: dict[str, Term]) -> Term:
    if isinstance(t, Ctor):
        return Ctor(t.name, tuple(_inst_term(a, env) for a in t.args))
    if hasattr(t, "name") and t.name in env:
        return env[t.name]
    return t


def _inst_pred(p: Pred, env: dict[str, Term]) -> Pred:
    return Pred(p.name, tuple(_inst_term(a, env) for a in p.args))


def _is_ground(t: Term) -> bool:
    if isinstance(t, Ctor):
        return all(_is_ground(a) for a in t.args)
    return False


# ---------------------------------------------------------------------------
# forward chaining


def forward_closure(sig, extra_facts=(), max_term_depth: int = 6) -> set[Pred]:
    """Every ground literal derivable from the rules, the proved literal
    theorems and ``extra_facts``, over terms up to ``max_term_depth``."""
    universe = term_universe(sig, max_term_depth)
    facts: set[Pred] = set(extra_facts)
    for tdecl in sig.theorems.values():
        if (
            tdecl.name in sig.proved
            and not tdecl.premises
            and isinstance(tdecl.conclusion, Pred)
            and all(_is_ground(a) for a in tdecl.conclusion.args)
        ):
            facts.add(tdecl.conclusion)
    changed = True
    while changed:
        changed = False
        for rdecl in sig.rules.values():
            pools = [universe[sort] for _, sort in rdecl.schematic_vars]
            names = [name for name, _ in rdecl.schematic_vars]
            for values in itertools.product(*pools):
                env = dict(zip(names, values))
                if not all(_inst_pred(p, env) in facts for p in rdecl.premises):
                    continue
                concl = _inst_pred(rdecl.conclusion, env)
                if max(term_depth(a) for a in concl.args) > max_term_depth:
                    continue
                if concl not in facts:
                    facts.add(concl)
                    changed = True
    return facts


class Oracle:
    """Provability of literal combinations, by forward chaining."""

    def __init__(self, sig, max_term_depth: int = 6):
        self.sig = sig
        self.max_term_depth = max_term_depth
        self._closures: dict[frozenset, set[Pred]] = {}

    def closure(self, facts: frozenset) -> set[Pred]:
        if facts not in self._closures:
            self._closures[facts] = forward_closure(
                self.sig, facts, self.max_term_depth
            )
        return self._closures[facts]

    def provable(self, goal: Formula, facts: frozenset = frozenset()) -> bool:
        if isinstance(goal, Pred):
            return goal in self.closure(facts)
        if isinstance(goal, And):
            return self.provable(goal.left, facts) and self.provable(goal.right, facts)
        if isinstance(goal, Or):
            return self.provable(goal.left, facts) or self.provable(goal.right, facts)
        if isinstance(goal, Implies):
            assert isinstance(goal.left, Pred)
            return self.provable(goal.right, facts | {goal.left})
        raise TypeError(f"oracle cannot evaluate {type(goal).__name__}")


# ---------------------------------------------------------------------------
# random rule databases
#
# The generated family is deliberately constrained so that the
# non-backtracking search is complete on it and the oracle is decisive:
#
# - constructors are nullary or unary within their own sort, so every
#   subterm of a pattern has the pattern's sort;
# - rule conclusions are pairwise non-unifiable, so committing to the first
#   matching rule is never a wrong choice;
# - every schematic variable of a rule occurs in its conclusion, and each
#   premise either has a strictly smaller argument or a predicate of lower
#   rank, so the pair (argument size, predicate rank) strictly decreases
#   along every backward chain and the search always terminates;
# - theorem facts conclude a predicate that no rule concludes.

_SORT_NAMES = ("sa", "sb", "sc")


class _Pattern:
    """A linear pattern: a chain of unary wrappers around a core, which is
    either the rule's variable or a nullary constructor."""

    def __init__(self, wrappers: tuple[str, ...], core: str, is_var: bool):
        self.wrappers = wrappers
        self.core = core
        self.is_var = is_var

    def text(self) -> str:
        s = self.core
        for w in reversed(self.wrappers):
            s = f"{w}({s})"
        return s

    def subterm_texts(self) -> list[str]:
        out = [self.core]
        s = self.core
        for w in reversed(self.wrappers):
            s = f"{w}({s})"
            out.append(s)
        return out

    def overlaps(self, other: "_Pattern") -> bool:
        a, b = list(self.wrappers), list(other.wrappers)
        while a and b:
            if a[0] != b[0]:
                return False
            a.pop(0)
            b.pop(0)
        if a:
            return other.is_var
        if b:
            return self.is_var
        return self.is_var or other.is_var or self.core == other.core


def random_db_text(rng) -> str:
    """Module text for a random rule database in the constrained family."""
    decls: list[str] = []
    sort_ctors: dict[str, list[str]] = {}
    for i in range(rng.randint(1, 3)):
        s = _SORT_NAMES[i]
        tag = s[1]
        ctors = [f"z{tag}"] + [f"u{tag}{j + 1}" for j in range(rng.randint(1, 2))]
        sort_ctors[s] = ctors
        parts = [ctors[0]] + [f"{c}({s})" for c in ctors[1:]]
        decls.append(f"data {s} = {' | '.join(parts)}")
    sorts = list(sort_ctors)

    preds: dict[str, str] = {}
    for i in range(rng.randint(2, 3)):
        preds[f"P{i + 1}"] = rng.choice(sorts)
    fact_pred = "T1"
    preds[fact_pred] = rng.choice(sorts)

    def nullary(sort: str) -> str:
        return sort_ctors[sort][0]

    def unaries(sort: str) -> list[str]:
        return sort_ctors[sort][1:]

    rank = {p: i for i, p in enumerate(preds)}
    taken: dict[str, list[_Pattern]] = {}
    n_rules = 0
    for _ in range(rng.randint(2, 6)):
        pred = rng.choice([p for p in preds if p != fact_pred])
        sort = preds[pred]
        is_var = rng.random() < 0.7
        core = "x" if is_var else nullary(sort)
        wrappers = tuple(
            rng.choice(unaries(sort)) for _ in range(rng.randint(0, 2))
        )
        pat = _Pattern(wrappers, core, is_var)
        if any(pat.overlaps(old) for old in taken.get(pred, [])):
            continue
        taken.setdefault(pred, []).append(pat)
        premises = []
        proper = pat.subterm_texts()[:-1]  # strictly smaller than the pattern
        lower = [q for q in preds if q != fact_pred and rank[q] < rank[pred]]
        for _ in range(rng.randint(0, 2)):
            roll = rng.random()
            if roll < 0.5 and proper:
                matching = [q for q, qs in preds.items() if qs == sort]
                premises.append(f"{rng.choice(matching)}({rng.choice(proper)})")
            elif roll < 0.8 and lower:
                q = rng.choice(lower)
                premises.append(f"{q}({nullary(preds[q])})")
            else:
                arg = print_ground(
                    random_ground(rng, sort_ctors[preds[fact_pred]], max_wraps=2)
                )
                premises.append(f"{fact_pred}({arg})")
        n_rules += 1
        binder = f" for all (x : {sort})" if is_var else ""
        prem = f"{', '.join(premises)} " if premises else ""
        decls.append(f"rule r{n_rules}{binder} : {prem}⊢ {pred}({pat.text()})")

    fact_sort = preds[fact_pred]
    seen_args: set[str] = set()
    for k in range(rng.randint(0, 2)):
        arg = print_ground(random_ground(rng, sort_ctors[fact_sort], max_wraps=2))
        if arg in seen_args:
            continue
        seen_args.add(arg)
        decls.append(
            f"theorem t{k + 1} : {fact_pred}({arg})\nprove {fact_pred}({arg})"
        )
    return "\n\n".join(decls) + "\n"


def random_ground(rng, ctors: list[str], max_wraps: int = 3) -> Term:
    t: Term = Ctor(ctors[0])
    for _ in range(rng.randint(0, max_wraps)):
        if len(ctors) == 1:
            break
        t = Ctor(rng.choice(ctors[1:]), (t,))
    return t


def print_ground(t: Term) -> str:
    assert isinstance(t, Ctor)
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(print_ground(a) for a in t.args)})"


def db_preds(module) -> dict[str, str]:
    """Predicate name to argument sort, recovered from the parsed rules and
    theorems of a generated database."""
    from fitch_mi.checker import signature_from_module
    from fitch_mi.kernel import term_sort

    sig = signature_from_module(module)
    out: dict[str, str] = {}

    def note(f: Formula) -> None:
        assert isinstance(f, Pred)
        (arg,) = f.args
        if isinstance(arg, Ctor):
            out[f.name] = sig.ctors[arg.name][0]
        else:
            out[f.name] = arg.sort

    for r in sig.rules.values():
        note(r.conclusion)
        for p in r.premises:
            note(p)
    for t in sig.theorems.values():
        note(t.conclusion)
    return out


def random_goal(rng, preds: dict[str, str], sort_ctors: dict[str, list[str]],
                depth: int = 2) -> Formula:
    def literal() -> Pred:
        name = rng.choice(list(preds))
        return Pred(name, (random_ground(rng, sort_ctors[preds[name]]),))

    def go(d: int) -> Formula:
        if d == 0 or rng.random() < 0.4:
            return literal()
        kind = rng.choice(("and", "or", "imp"))
        if kind == "imp":
            return Implies(literal(), go(d - 1))
        cls = And if kind == "and" else Or
        return cls(go(d - 1), go(d - 1))

    return go(depth)


# ---------------------------------------------------------------------------
# random terms over an uninterpreted signature, for the unification tests

USORT = "t"


def random_uterm(rng, depth: int = 3, n_metas: int = 2) -> Term:
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        leaf = rng.random()
        if leaf < 0.5:
            return MetaVar(rng.randrange(n_metas), USORT)
        if leaf < 0.7:
            return RigidVar(rng.choice("ab"), USORT)
        return Ctor("z")
    if roll < 0.75:
        return Ctor("s", (random_uterm(rng, depth - 1, n_metas),))
    return Ctor(
        "f",
        (random_uterm(rng, depth - 1, n_metas), random_uterm(rng, depth - 1, n_metas)),
    )


def ground_uterms(max_depth: int) -> list[Term]:
    layers: list[list[Term]] = [[Ctor("z")]]
    for _ in range(max_depth - 1):
        everything = [t for lay in layers for t in lay]
        layers.append(
            [Ctor("s", (t,)) for t in layers[-1]]
            + [
                Ctor("f", (a, b))
                for a in everything
                for b in everything
                if max(term_depth(a), term_depth(b)) == len(layers)
            ]
        )
    return [t for lay in layers for t in lay]


def apply_ground(t: Term, env: dict[int, Term]) -> Term:
    if isinstance(t, MetaVar):
        return env[t.id]
    if isinstance(t, Ctor):
        return Ctor(t.name, tuple(apply_ground(a, env) for a in t.args))
    return t
