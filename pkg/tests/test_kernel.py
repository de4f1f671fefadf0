import pytest

from fitch_mi.kernel import (
    And,
    Ctor,
    Exists,
    Forall,
    Implies,
    MetaVar,
    Pred,
    RigidVar,
    Subst,
    UnifyFailure,
    alpha_equal,
    instantiate,
    unify,
)

T = "t"
Z = Ctor("z")


def m(i: int) -> MetaVar:
    return MetaVar(i, T)


def s(t) -> Ctor:
    return Ctor("s", (t,))


def f(a, b) -> Ctor:
    return Ctor("f", (a, b))


class TestUnify:
    @pytest.mark.parametrize(
        "a,b",
        [
            (m(0), Z),
            (m(0), s(Z)),
            (f(m(0), m(1)), f(Z, s(Z))),
            (f(m(0), m(0)), f(m(1), s(Z))),
            (s(s(m(0))), s(m(1))),
        ],
    )
    def test_unifier_equalises(self, a, b):
        subst = unify(a, b)
        assert subst.apply_term(a) == subst.apply_term(b)

    def test_occurs_check(self):
        x = m(0)
        with pytest.raises(UnifyFailure) as exc:
            unify(x, s(x))
        assert exc.value.reason == "occurs"

    @pytest.mark.parametrize(
        "a,b",
        [
            (Z, s(Z)),
            (s(m(0)), f(m(1), m(2))),
            (RigidVar("a", T), Z),
            (RigidVar("a", T), RigidVar("b", T)),
        ],
    )
    def test_clashes(self, a, b):
        with pytest.raises(UnifyFailure):
            unify(a, b)

    def test_rigid_unifies_with_meta(self):
        subst = unify(m(0), RigidVar("a", T))
        assert subst.apply_term(m(0)) == RigidVar("a", T)

    def test_extends_existing_substitution(self):
        subst = unify(m(0), s(m(1)))
        subst = unify(m(1), Z, under=subst)
        assert subst.apply_term(m(0)) == s(Z)

    def test_application_is_idempotent(self):
        subst = unify(f(m(0), m(1)), f(s(m(1)), s(Z)))
        once = subst.apply_term(f(m(0), m(1)))
        assert subst.apply_term(once) == once

    def test_formula_unification(self):
        goal = Pred("Sum", (Z, m(0), m(0)))
        concl = Pred("Sum", (Z, s(Z), s(Z)))
        subst = unify(goal, concl)
        assert subst.apply(goal) == concl

    def test_bound_variable_does_not_escape(self):
        # ?x cannot be solved with the bound occurrence of v
        a = Forall("v", T, Pred("P", (RigidVar("v", T), m(0))))
        b = Forall("v", T, Pred("P", (RigidVar("v", T), RigidVar("v", T))))
        with pytest.raises(UnifyFailure):
            unify(a, b)


class TestAlphaEqual:
    def test_bound_renaming(self):
        a = Forall("x", T, Pred("P", (RigidVar("x", T),)))
        b = Forall("y", T, Pred("P", (RigidVar("y", T),)))
        assert alpha_equal(a, b)

    def test_nested_swap(self):
        def make(u, v):
            return Forall(
                u, T, Exists(v, T, Pred("P", (RigidVar(u, T), RigidVar(v, T))))
            )

        assert alpha_equal(make("x", "y"), make("y", "x"))

    def test_free_rigids_compare_by_name(self):
        assert not alpha_equal(
            Pred("P", (RigidVar("a", T),)), Pred("P", (RigidVar("b", T),))
        )

    def test_shadowing(self):
        a = Forall("x", T, Forall("x", T, Pred("P", (RigidVar("x", T),))))
        b = Forall("y", T, Forall("z", T, Pred("P", (RigidVar("z", T),))))
        c = Forall("y", T, Forall("z", T, Pred("P", (RigidVar("y", T),))))
        assert alpha_equal(a, b)
        assert not alpha_equal(a, c)

    def test_connectives_must_match(self):
        p = Pred("P", ())
        assert not alpha_equal(And(p, p), Implies(p, p))


def test_instantiate():
    body = Pred("P", (RigidVar("x", T), Z))
    assert instantiate(Forall("x", T, body), s(Z)) == Pred("P", (s(Z), Z))


def test_subst_composition_applies_transitively():
    subst = Subst()
    subst.bind(m(0), s(m(1)))
    subst.bind(m(1), Z)
    assert subst.apply_term(m(0)) == s(Z)
