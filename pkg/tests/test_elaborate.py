import pytest

from fitch_mi import (
    alpha_equal_scripts,
    check_module,
    elaborate_full,
    elaborate_gapped,
    elaborated_module,
    parse_module,
    print_module,
    signature_from_module,
)
from fitch_mi.search import autonomous_hook
from fitch_mi.session import Session
from fitch_mi.syntax import Line, Prove, TheoremDecl


@pytest.fixture()
def checked(peano_module):
    report = check_module(peano_module, search_hook=autonomous_hook())
    assert report.ok
    sig = signature_from_module(peano_module)
    return report, sig


def test_full_elaborations_recheck_without_search(peano_module, checked):
    report, sig = checked
    module = peano_module
    for result in report.results:
        script = elaborate_full(result.derivation, sig)
        module = elaborated_module(module, result.name, script)
    text = print_module(module)
    again = check_module(parse_module(text), prove_enabled=False)
    assert again.ok, [r.error and r.error.message for r in again.results]


def test_full_elaboration_round_trips(peano_module, checked):
    report, sig = checked
    script = elaborate_full(report.results[-1].derivation, sig)
    module = elaborated_module(peano_module, "sum-total-comm", script)
    text = print_module(module)
    assert print_module(parse_module(text)) == text


def test_gapped_without_fragments_is_one_prove_line(peano_module, checked):
    report, sig = checked
    result = report.results[1]  # sum-zero-rhs, solved autonomously
    decl = sig.theorems[result.name]
    script = elaborate_gapped(result.derivation, sig, decl)
    (step,) = script.steps
    assert isinstance(step, Line)
    assert isinstance(step.justification, Prove)
    assert step.formula == decl.conclusion


def test_gapped_session_output_matches_reference(peano_module, fragment_text):
    session = Session(peano_module, "sum-total-comm")
    session.submit_fragment(fragment_text)
    assert session.phase == "done"
    text = session.elaborate("gapped")
    module = parse_module(text)
    produced = next(
        d for d in module.declarations
        if isinstance(d, TheoremDecl) and d.name == "sum-total-comm"
    )
    reference = next(
        d for d in peano_module.declarations
        if isinstance(d, TheoremDecl) and d.name == "sum-total-comm"
    )
    assert alpha_equal_scripts(produced.proof, reference.proof)


def test_alpha_equal_scripts_tolerates_renaming(peano_module):
    reference = next(
        d for d in peano_module.declarations
        if isinstance(d, TheoremDecl) and d.name == "sum-s-rhs"
    )
    renamed = print_module(peano_module).replace("m₁", "k").replace("ih", "hyp")
    other = next(
        d for d in parse_module(renamed).declarations
        if isinstance(d, TheoremDecl) and d.name == "sum-s-rhs"
    )
    assert alpha_equal_scripts(reference.proof, other.proof)


def test_alpha_equal_scripts_detects_differences(peano_module):
    decls = [
        d for d in peano_module.declarations
        if isinstance(d, TheoremDecl) and d.name in ("sum-zero-rhs", "sum-s-rhs")
    ]
    assert not alpha_equal_scripts(decls[0].proof, decls[1].proof)
