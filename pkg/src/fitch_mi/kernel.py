"""Core syntax: sorts, terms, formulas, substitution and unification.

Everything here is immutable value data.  Metavariable freshness comes from
an episode-local ``FreshGen`` owned by the caller, so the module itself is
safe to use from any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# signature


@dataclass(frozen=True)
class ConstructorSig:
    name: str
    arg_sorts: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Sort:
    name: str
    constructors: tuple[ConstructorSig, ...]


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class RigidVar(Term):
    """An eigenvariable (or a bound-variable occurrence under a binder)."""

    name: str
    sort: str


@dataclass(frozen=True)
class SchematicVar(Term):
    """A variable bound by a rule or theorem schema header."""

    name: str
    sort: str


@dataclass(frozen=True)
class MetaVar(Term):
    """A unification placeholder.  Ids are unique within one episode."""

    id: int
    sort: str
    hint: str = field(default="", compare=False)


@dataclass(frozen=True)
class Ctor(Term):
    name: str
    args: tuple[Term, ...] = ()


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class PropParam(Formula):
    """A proposition placeholder of a theorem schema."""

    name: str


@dataclass(frozen=True)
class FMeta(Formula):
    """A formula-level unification placeholder (freshened PropParam)."""

    id: int


@dataclass(frozen=True)
class Bottom(Formula):
    pass


BOTTOM = Bottom()


# ---------------------------------------------------------------------------
# errors


class KernelError(Exception):
    pass


class SortMismatch(KernelError):
    pass


class UnifyFailure(KernelError):
    """Raised when two pieces of syntax cannot be unified.

    ``reason`` is one of ``"clash"``, ``"occurs"``, ``"sort"``.
    """

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


# ---------------------------------------------------------------------------
# traversal helpers


def term_vars(t: Term) -> set[Term]:
    """All variable leaves (rigid, schematic, meta) occurring in ``t``."""
    out: set[Term] = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Ctor):
            stack.extend(x.args)
        else:
            out.add(x)
    return out


def _formula_terms(f: Formula) -> list[Term]:
    out: list[Term] = []
    stack = [f]
    while stack:
        x = stack.pop()
        if isinstance(x, Pred):
            out.extend(x.args)
        elif isinstance(x, (And, Or, Implies)):
            stack.append(x.left)
            stack.append(x.right)
        elif isinstance(x, Not):
            stack.append(x.body)
        elif isinstance(x, (Forall, Exists)):
            stack.append(x.body)
    return out


def free_rigids(x: Term | Formula) -> set[str]:
    """Names of rigid variables occurring free in ``x``."""
    if isinstance(x, Term):
        return {v.name for v in term_vars(x) if isinstance(v, RigidVar)}
    out: set[str] = set()

    def go(f: Formula, bound: frozenset[str]) -> None:
        if isinstance(f, Pred):
            for t in f.args:
                for v in term_vars(t):
                    if isinstance(v, RigidVar) and v.name not in bound:
                        out.add(v.name)
        elif isinstance(f, (And, Or, Implies)):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, Not):
            go(f.body, bound)
        elif isinstance(f, (Forall, Exists)):
            go(f.body, bound | {f.var})

    go(x, frozenset())
    return out


def metas_of(x: Term | Formula) -> set[MetaVar]:
    if isinstance(x, Term):
        return {v for v in term_vars(x) if isinstance(v, MetaVar)}
    out: set[MetaVar] = set()
    for t in _formula_terms(x):
        out |= {v for v in term_vars(t) if isinstance(v, MetaVar)}
    return out


def fmetas_of(f: Formula) -> set[int]:
    out: set[int] = set()
    stack = [f]
    while stack:
        x = stack.pop()
        if isinstance(x, FMeta):
            out.add(x.id)
        elif isinstance(x, (And, Or, Implies)):
            stack.append(x.left)
            stack.append(x.right)
        elif isinstance(x, Not):
            stack.append(x.body)
        elif isinstance(x, (Forall, Exists)):
            stack.append(x.body)
    return out


def term_sort(t: Term, ctors: dict[str, tuple[str, ConstructorSig]] | None = None) -> str:
    """Sort of a term.  ``ctors`` maps constructor name to (sort, sig)."""
    if isinstance(t, (RigidVar, SchematicVar, MetaVar)):
        return t.sort
    assert isinstance(t, Ctor)
    if ctors is None:
        raise SortMismatch(f"cannot determine sort of constructor term {t.name}")
    if t.name not in ctors:
        raise SortMismatch(f"unknown constructor {t.name}")
    return ctors[t.name][0]


# ---------------------------------------------------------------------------
# rigid-variable replacement (capture avoiding)


def _prime(name: str) -> str:
    return name + "′"


def replace_rigids_term(t: Term, mapping: dict[str, Term]) -> Term:
    if isinstance(t, RigidVar):
        return mapping.get(t.name, t)
    if isinstance(t, Ctor):
        return Ctor(t.name, tuple(replace_rigids_term(a, mapping) for a in t.args))
    return t


def replace_rigids(f: Formula, mapping: dict[str, Term]) -> Formula:
    """Replace free rigid variables by terms, renaming binders to avoid capture."""
    if not mapping:
        return f
    if isinstance(f, Pred):
        return Pred(f.name, tuple(replace_rigids_term(a, mapping) for a in f.args))
    if isinstance(f, And):
        return And(replace_rigids(f.left, mapping), replace_rigids(f.right, mapping))
    if isinstance(f, Or):
        return Or(replace_rigids(f.left, mapping), replace_rigids(f.right, mapping))
    if isinstance(f, Implies):
        return Implies(replace_rigids(f.left, mapping), replace_rigids(f.right, mapping))
    if isinstance(f, Not):
        return Not(replace_rigids(f.body, mapping))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        if not inner:
            return f
        var = f.var
        body = f.body
        clashing = set()
        for v in inner.values():
            clashing |= free_rigids(v)
        if var in clashing:
            fresh = var
            taken = clashing | free_rigids(body) | set(inner)
            while fresh in taken:
                fresh = _prime(fresh)
            body = replace_rigids(body, {var: RigidVar(fresh, f.sort)})
            var = fresh
        body = replace_rigids(body, inner)
        return type(f)(var, f.sort, body)
    return f


def instantiate(f: Forall | Exists, t: Term) -> Formula:
    """Body of a quantified formula with the bound variable replaced by ``t``."""
    return replace_rigids(f.body, {f.var: t})


# ---------------------------------------------------------------------------
# alpha equivalence


def alpha_equal(a: Formula, b: Formula) -> bool:
    """True iff ``a`` and ``b`` differ only in bound-variable names."""

    def go(x: Formula, y: Formula, ex: dict[str, int], ey: dict[str, int], lvl: int) -> bool:
        if type(x) is not type(y):
            return False
        if isinstance(x, Pred):
            assert isinstance(y, Pred)
            if x.name != y.name or len(x.args) != len(y.args):
                return False
            return all(term_eq(s, t, ex, ey) for s, t in zip(x.args, y.args))
        if isinstance(x, (And, Or, Implies)):
            assert isinstance(y, (And, Or, Implies))
            return go(x.left, y.left, ex, ey, lvl) and go(x.right, y.right, ex, ey, lvl)
        if isinstance(x, Not):
            assert isinstance(y, Not)
            return go(x.body, y.body, ex, ey, lvl)
        if isinstance(x, (Forall, Exists)):
            assert isinstance(y, (Forall, Exists))
            if x.sort != y.sort:
                return False
            ex2 = dict(ex)
            ey2 = dict(ey)
            ex2[x.var] = lvl
            ey2[y.var] = lvl
            return go(x.body, y.body, ex2, ey2, lvl + 1)
        return x == y  # PropParam, FMeta, Bottom

    def term_eq(s: Term, t: Term, ex: dict[str, int], ey: dict[str, int]) -> bool:
        if isinstance(s, RigidVar) and isinstance(t, RigidVar):
            ls, lt = ex.get(s.name), ey.get(t.name)
            if ls is None and lt is None:
                return s == t
            return ls is not None and ls == lt and s.sort == t.sort
        if isinstance(s, Ctor) and isinstance(t, Ctor):
            return s.name == t.name and len(s.args) == len(t.args) and all(
                term_eq(a, b, ex, ey) for a, b in zip(s.args, t.args)
            )
        return s == t

    return go(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# substitutions


class Subst:
    """An idempotent, sort-preserving substitution.

    Maps metavariables / schematic variables to terms and formula
    metavariables to formulas.
    """

    __slots__ = ("terms", "formulas")

    def __init__(
        self,
        terms: dict[Term, Term] | None = None,
        formulas: dict[int, Formula] | None = None,
    ):
        self.terms: dict[Term, Term] = dict(terms or {})
        self.formulas: dict[int, Formula] = dict(formulas or {})

    def copy(self) -> "Subst":
        return Subst(self.terms, self.formulas)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subst)
            and self.terms == other.terms
            and self.formulas == other.formulas
        )

    def __repr__(self) -> str:
        items = [f"{k} -> {v}" for k, v in self.terms.items()]
        items += [f"?F{k} -> {v}" for k, v in self.formulas.items()]
        return "{" + ", ".join(items) + "}"

    def __len__(self) -> int:
        return len(self.terms) + len(self.formulas)

    # -- application

    def apply_term(self, t: Term) -> Term:
        if isinstance(t, (MetaVar, SchematicVar)):
            return self.terms.get(t, t)
        if isinstance(t, Ctor):
            return Ctor(t.name, tuple(self.apply_term(a) for a in t.args))
        return t

    def apply(self, f: Formula) -> Formula:
        if isinstance(f, Pred):
            return Pred(f.name, tuple(self.apply_term(a) for a in f.args))
        if isinstance(f, And):
            return And(self.apply(f.left), self.apply(f.right))
        if isinstance(f, Or):
            return Or(self.apply(f.left), self.apply(f.right))
        if isinstance(f, Implies):
            return Implies(self.apply(f.left), self.apply(f.right))
        if isinstance(f, Not):
            return Not(self.apply(f.body))
        if isinstance(f, (Forall, Exists)):
            # binders capture rigid names only; substitution values may
            # contain rigids that must not be captured
            values = [self.terms[k] for k in self.terms]
            clashing: set[str] = set()
            for v in values:
                clashing |= free_rigids(v)
            if f.var in clashing:
                fresh = f.var
                taken = clashing | free_rigids(f.body)
                while fresh in taken:
                    fresh = _prime(fresh)
                body = replace_rigids(f.body, {f.var: RigidVar(fresh, f.sort)})
                return type(f)(fresh, f.sort, self.apply(body))
            return type(f)(f.var, f.sort, self.apply(f.body))
        if isinstance(f, FMeta):
            return self.formulas.get(f.id, f)
        return f

    # -- extension

    def bind(self, var: MetaVar | SchematicVar, term: Term, bound: frozenset[str] = frozenset()) -> None:
        term = self.apply_term(term)
        if term == var:
            return
        tv = term_vars(term)
        if var in tv:
            raise UnifyFailure("occurs", f"{var} occurs in {term}")
        for v in tv:
            if isinstance(v, RigidVar) and v.name in bound:
                raise UnifyFailure("clash", f"bound variable {v.name} would escape")
        one = Subst({var: term})
        self.terms = {k: one.apply_term(v) for k, v in self.terms.items()}
        self.formulas = {k: one.apply(v) for k, v in self.formulas.items()}
        self.terms[var] = term

    def bind_formula(self, fid: int, f: Formula) -> None:
        f = self.apply(f)
        if f == FMeta(fid):
            return
        if fid in fmetas_of(f):
            raise UnifyFailure("occurs", f"formula metavariable ?F{fid} occurs in {f}")
        one = Subst({}, {fid: f})
        self.terms = dict(self.terms)
        self.formulas = {k: one.apply(v) for k, v in self.formulas.items()}
        self.formulas[fid] = f


# ---------------------------------------------------------------------------
# freshness


class FreshGen:
    """Episode-local source of fresh metavariables and rigid names."""

    def __init__(self) -> None:
        self._next = 0

    def fresh_meta(self, sort: str, hint: str = "") -> MetaVar:
        self._next += 1
        return MetaVar(self._next, sort, hint)

    def fresh_fmeta(self) -> FMeta:
        self._next += 1
        return FMeta(self._next)


def freshen_schematics(f: Formula, gen: FreshGen) -> tuple[Formula, dict[Term, MetaVar]]:
    """Replace every schematic variable in ``f`` with a fresh metavariable."""
    mapping: dict[Term, MetaVar] = {}

    def on_term(t: Term) -> Term:
        if isinstance(t, SchematicVar):
            if t not in mapping:
                mapping[t] = gen.fresh_meta(t.sort, t.name)
            return mapping[t]
        if isinstance(t, Ctor):
            return Ctor(t.name, tuple(on_term(a) for a in t.args))
        return t

    def on_formula(x: Formula) -> Formula:
        if isinstance(x, Pred):
            return Pred(x.name, tuple(on_term(a) for a in x.args))
        if isinstance(x, And):
            return And(on_formula(x.left), on_formula(x.right))
        if isinstance(x, Or):
            return Or(on_formula(x.left), on_formula(x.right))
        if isinstance(x, Implies):
            return Implies(on_formula(x.left), on_formula(x.right))
        if isinstance(x, Not):
            return Not(on_formula(x.body))
        if isinstance(x, (Forall, Exists)):
            return type(x)(x.var, x.sort, on_formula(x.body))
        return x

    return on_formula(f), mapping


def freshen_prop_params(f: Formula, gen: FreshGen, mapping: dict[str, FMeta]) -> Formula:
    """Replace PropParams with fresh formula metavariables (shared mapping)."""
    if isinstance(f, PropParam):
        if f.name not in mapping:
            mapping[f.name] = gen.fresh_fmeta()
        return mapping[f.name]
    if isinstance(f, And):
        return And(freshen_prop_params(f.left, gen, mapping), freshen_prop_params(f.right, gen, mapping))
    if isinstance(f, Or):
        return Or(freshen_prop_params(f.left, gen, mapping), freshen_prop_params(f.right, gen, mapping))
    if isinstance(f, Implies):
        return Implies(freshen_prop_params(f.left, gen, mapping), freshen_prop_params(f.right, gen, mapping))
    if isinstance(f, Not):
        return Not(freshen_prop_params(f.body, gen, mapping))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, freshen_prop_params(f.body, gen, mapping))
    return f


# ---------------------------------------------------------------------------
# unification


def unify(
    a: Term | Formula,
    b: Term | Formula,
    under: Subst | None = None,
    flex_rigids: dict[str, int] | None = None,
) -> Subst:
    """Most general unifier of ``a`` and ``b`` extending ``under``.

    Rigid variables unify only with themselves or a metavariable, except
    for names listed in ``flex_rigids`` (used for inversion), which behave
    as unknowns; when two flexible rigids meet, the one with the larger
    introduction index is bound to the other.  The result is a fresh
    substitution; ``under`` is not mutated.
    """
    s = under.copy() if under is not None else Subst()
    flex = flex_rigids or {}
    # flexible rigids are routed through stand-in metavariables so the
    # standard discipline applies; map back on exit
    standins: dict[str, MetaVar] = {}

    def encode_term(t: Term) -> Term:
        if isinstance(t, RigidVar) and t.name in flex:
            if t.name not in standins:
                standins[t.name] = MetaVar(-1 - flex[t.name], t.sort, t.name)
            return standins[t.name]
        if isinstance(t, Ctor):
            return Ctor(t.name, tuple(encode_term(a) for a in t.args))
        return t

    def encode(f: Formula) -> Formula:
        if isinstance(f, Pred):
            return Pred(f.name, tuple(encode_term(a) for a in f.args))
        if isinstance(f, And):
            return And(encode(f.left), encode(f.right))
        if isinstance(f, Or):
            return Or(encode(f.left), encode(f.right))
        if isinstance(f, Implies):
            return Implies(encode(f.left), encode(f.right))
        if isinstance(f, Not):
            return Not(encode(f.body))
        if isinstance(f, (Forall, Exists)):
            # binders shadow: occurrences of the bound name stay rigid
            if f.var in flex:
                inner_flex = {k: v for k, v in flex.items() if k != f.var}
                return type(f)(f.var, f.sort, unify_encode_with(f.body, inner_flex))
            return type(f)(f.var, f.sort, encode(f.body))
        return f

    def unify_encode_with(f: Formula, fl: dict[str, int]) -> Formula:
        nonlocal flex
        saved = flex
        flex = fl
        try:
            return encode(f)
        finally:
            flex = saved

    def is_flexvar(t: Term) -> bool:
        return isinstance(t, (MetaVar, SchematicVar))

    def pick(u: Term, v: Term) -> tuple[Term, Term]:
        """Order a flexible pair so the preferred survivor is the value."""
        if isinstance(u, MetaVar) and isinstance(v, MetaVar) and u.id < 0 and v.id < 0:
            # two flexible rigids: newer binds to older
            if -u.id > -v.id:
                return u, v
            return v, u
        if isinstance(u, MetaVar) and u.id < 0 and isinstance(v, MetaVar):
            # plain meta binds to the stand-in? prefer binding the plain meta
            return v, u
        return u, v

    def uterm(u: Term, v: Term, bound: frozenset[str]) -> None:
        u = s.apply_term(u)
        v = s.apply_term(v)
        if u == v:
            return
        if is_flexvar(u) and is_flexvar(v):
            key, val = pick(u, v)
            s.bind(key, val, bound)
            return
        if is_flexvar(u):
            if isinstance(v, RigidVar) and v.sort != u.sort:
                raise UnifyFailure("sort", f"{u.sort} vs {v.sort}")
            s.bind(u, v, bound)
            return
        if is_flexvar(v):
            s.bind(v, u, bound)
            return
        if isinstance(u, Ctor) and isinstance(v, Ctor):
            if u.name != v.name or len(u.args) != len(v.args):
                raise UnifyFailure("clash", f"{u.name} vs {v.name}")
            for x, y in zip(u.args, v.args):
                uterm(x, y, bound)
            return
        raise UnifyFailure("clash", f"{u} vs {v}")

    def uformula(x: Formula, y: Formula, bound: frozenset[str]) -> None:
        x = s.apply(x)
        y = s.apply(y)
        if isinstance(x, FMeta):
            s.bind_formula(x.id, y)
            return
        if isinstance(y, FMeta):
            s.bind_formula(y.id, x)
            return
        if type(x) is not type(y):
            raise UnifyFailure("clash", f"{type(x).__name__} vs {type(y).__name__}")
        if isinstance(x, Pred):
            assert isinstance(y, Pred)
            if x.name != y.name or len(x.args) != len(y.args):
                raise UnifyFailure("clash", f"{x.name} vs {y.name}")
            for a2, b2 in zip(x.args, y.args):
                uterm(a2, b2, bound)
            return
        if isinstance(x, (And, Or, Implies)):
            assert isinstance(y, (And, Or, Implies))
            uformula(x.left, y.left, bound)
            uformula(x.right, y.right, bound)
            return
        if isinstance(x, Not):
            assert isinstance(y, Not)
            uformula(x.body, y.body, bound)
            return
        if isinstance(x, (Forall, Exists)):
            assert isinstance(y, (Forall, Exists))
            if x.sort != y.sort:
                raise UnifyFailure("sort", f"{x.sort} vs {y.sort}")
            fresh = x.var
            taken = free_rigids(x.body) | free_rigids(y.body) | bound
            while fresh in taken:
                fresh = _prime(fresh)
            bx = replace_rigids(x.body, {x.var: RigidVar(fresh, x.sort)})
            by = replace_rigids(y.body, {y.var: RigidVar(fresh, y.sort)})
            uformula(bx, by, bound | {fresh})
            return
        if isinstance(x, (PropParam, Bottom)):
            if x != y:
                raise UnifyFailure("clash", f"{x} vs {y}")
            return
        raise UnifyFailure("clash", f"unhandled {type(x).__name__}")  # pragma: no cover

    if isinstance(a, Term) != isinstance(b, Term):
        raise UnifyFailure("clash", "term against formula")
    if isinstance(a, Term):
        assert isinstance(b, Term)
        if not isinstance(a, Ctor) and not isinstance(b, Ctor):
            if a.sort != b.sort:  # type: ignore[union-attr]
                raise UnifyFailure("sort")
        uterm(encode_term(a), encode_term(b), frozenset())
    else:
        assert isinstance(b, Formula)
        uformula(encode(a), encode(b), frozenset())

    if standins:
        # translate stand-in bindings back to rigid refinements
        decode_map = {m: RigidVar(name, m.sort) for name, m in standins.items()}

        def dec(t: Term) -> Term:
            if isinstance(t, MetaVar) and t in decode_map:
                return decode_map[t]
            if isinstance(t, Ctor):
                return Ctor(t.name, tuple(dec(a) for a in t.args))
            return t

        new_terms: dict[Term, Term] = {}
        for k, v in s.terms.items():
            if isinstance(k, MetaVar) and k in decode_map:
                new_terms[decode_map[k]] = dec(v)  # type: ignore[index]
            else:
                new_terms[k] = dec(v)
        s.terms = new_terms
        s.formulas = {k: _decode_formula(v, decode_map) for k, v in s.formulas.items()}
    return s


def _decode_formula(f: Formula, decode_map: dict[MetaVar, RigidVar]) -> Formula:
    def dec(t: Term) -> Term:
        if isinstance(t, MetaVar) and t in decode_map:
            return decode_map[t]
        if isinstance(t, Ctor):
            return Ctor(t.name, tuple(dec(a) for a in t.args))
        return t

    if isinstance(f, Pred):
        return Pred(f.name, tuple(dec(a) for a in f.args))
    if isinstance(f, And):
        return And(_decode_formula(f.left, decode_map), _decode_formula(f.right, decode_map))
    if isinstance(f, Or):
        return Or(_decode_formula(f.left, decode_map), _decode_formula(f.right, decode_map))
    if isinstance(f, Implies):
        return Implies(_decode_formula(f.left, decode_map), _decode_formula(f.right, decode_map))
    if isinstance(f, Not):
        return Not(_decode_formula(f.body, decode_map))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, _decode_formula(f.body, decode_map))
    return f


def rigid_refinement(s: Subst) -> dict[str, Term]:
    """Extract the rigid-variable refinements recorded by flexible unification."""
    return {k.name: v for k, v in s.terms.items() if isinstance(k, RigidVar)}


def strip_rigid_bindings(s: Subst) -> Subst:
    return Subst({k: v for k, v in s.terms.items() if not isinstance(k, RigidVar)}, s.formulas)
