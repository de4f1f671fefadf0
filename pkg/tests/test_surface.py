import random

import pytest

from fitch_mi import parse_module, print_module
from fitch_mi.parser import ParseError
from fitch_mi.syntax import BuiltIn, Line, TheoremDecl

from gen import random_module

BASE = """data d = c0 | c1(d)

theorem t1 : R(c0)
%s
"""


def test_fixture_round_trips(peano_text, peano_module):
    printed = print_module(peano_module)
    again = parse_module(printed)
    assert again == peano_module
    assert print_module(again) == printed


def test_parse_positions(peano_module):
    decl = peano_module.declarations[0]
    assert decl.pos == 1


@pytest.mark.parametrize(
    "body",
    [
        "R(c0) by rule nosuch",
        "R(c0) by rule ∧-intro on nowhere",
        "R(x) by rule ∧-intro",
        "l1: prove R(c0)\nl1: prove R(c0)",
        "prove R(c0) extra",
    ],
)
def test_malformed_scripts_rejected(body):
    with pytest.raises(ParseError):
        parse_module(BASE % body)


def test_parse_error_carries_location():
    with pytest.raises(ParseError) as exc:
        parse_module(BASE % "R(c0) by rule nosuch")
    assert exc.value.line == 4


@pytest.mark.parametrize("spelling", ["∧-intro", "and-intro", "/\\-intro"])
def test_builtin_aliases(spelling):
    module = parse_module(BASE % f"a: prove R(c0)\nR(c0) by rule {spelling} on a")
    decl = module.declarations[-1]
    assert isinstance(decl, TheoremDecl)
    line = decl.proof.steps[-1]
    assert isinstance(line, Line)
    assert line.justification == BuiltIn("and-intro", ("a",))


def test_sibling_unlabeled_subproofs():
    """An assumption line directly after a sibling subproof closes it."""
    body = (
        "l1: | h1: R(c0)\n"
        "|---\n"
        "| prove R(c0)\n"
        "| h2: R(c0)\n"
        "|---\n"
        "| prove R(c0)\n"
        "prove R(c0)"
    )
    module = parse_module(BASE % body)
    decl = module.declarations[-1]
    first, second, last = decl.proof.steps
    assert first.label == "l1"
    assert second.label is None
    assert second.assumptions[0].label == "h2"


def test_labels_scope_to_their_block():
    body = (
        "l1: | h1: R(c0)\n"
        "|---\n"
        "| l2: prove R(c0)\n"
        "R(c0) by rule ∧-elim on l2"
    )
    with pytest.raises(ParseError):
        parse_module(BASE % body)


def test_random_modules_round_trip():
    rng = random.Random(2024)
    for _ in range(100):
        module = random_module(rng)
        assert parse_module(print_module(module)) == module
