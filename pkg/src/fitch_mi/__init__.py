"""A mixed-initiative proof assistant for Fitch-style natural deduction
over user-declared datatypes and inference rules."""

from .checker import (
    CheckError,
    Checker,
    Context,
    Report,
    Signature,
    check_module,
    signature_from_module,
)
from .derivation import Derivation, has_gaps
from .elaborate import (
    alpha_equal_scripts,
    elaborate_full,
    elaborate_gapped,
    elaborated_module,
)
from .kernel import Formula, Subst, Term, alpha_equal, unify
from .parser import ParseError, parse_fragment, parse_module
from .printer import print_formula, print_module, print_script, print_term
from .search import Prompt, SearchAborted, SearchEngine, SearchStuck, autonomous_hook
from .session import Session, SessionError
from .syntax import ModuleAST, ProofScript
from .validator import ValidationError, validate, validate_theorem

__version__ = "0.1.0"

__all__ = [
    "CheckError",
    "Checker",
    "Context",
    "Derivation",
    "Formula",
    "ModuleAST",
    "ParseError",
    "Prompt",
    "ProofScript",
    "Report",
    "SearchAborted",
    "SearchEngine",
    "SearchStuck",
    "Session",
    "SessionError",
    "Signature",
    "Subst",
    "Term",
    "ValidationError",
    "alpha_equal",
    "alpha_equal_scripts",
    "autonomous_hook",
    "check_module",
    "elaborate_full",
    "elaborate_gapped",
    "elaborated_module",
    "has_gaps",
    "parse_fragment",
    "parse_module",
    "print_formula",
    "print_module",
    "print_script",
    "print_term",
    "signature_from_module",
    "unify",
    "validate",
    "validate_theorem",
]
