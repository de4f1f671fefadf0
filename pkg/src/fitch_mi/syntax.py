"""Abstract syntax for the module language and Fitch-style proof scripts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import Formula, Term


# ---------------------------------------------------------------------------
# justifications

BUILTIN_RULES = {
    "and-intro",
    "and-elim",
    "or-intro",
    "or-elim",
    "imp-intro",
    "imp-elim",
    "not-intro",
    "not-elim",
    "bottom-elim",
    "forall-intro",
    "forall-elim",
    "exists-intro",
    "exists-elim",
}

# canonical internal id -> display name
BUILTIN_DISPLAY = {
    "and-intro": "∧-intro",
    "and-elim": "∧-elim",
    "or-intro": "∨-intro",
    "or-elim": "∨-elim",
    "imp-intro": "⟹-intro",
    "imp-elim": "⟹-elim",
    "not-intro": "¬-intro",
    "not-elim": "¬-elim",
    "bottom-elim": "⊥-elim",
    "forall-intro": "∀-intro",
    "forall-elim": "∀-elim",
    "exists-intro": "∃-intro",
    "exists-elim": "∃-elim",
}

# every accepted spelling -> canonical id
BUILTIN_ALIASES: dict[str, str] = {}
for _id, _disp in BUILTIN_DISPLAY.items():
    BUILTIN_ALIASES[_id] = _id
    BUILTIN_ALIASES[_disp] = _id
BUILTIN_ALIASES.update(
    {
        "/\\-intro": "and-intro",
        "/\\-elim": "and-elim",
        "\\/-intro": "or-intro",
        "\\/-elim": "or-elim",
        "==>-intro": "imp-intro",
        "==>-elim": "imp-elim",
    }
)


@dataclass(frozen=True)
class Justification:
    pass


@dataclass(frozen=True)
class ByRule(Justification):
    rule: str
    refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class BuiltIn(Justification):
    rule: str  # canonical id from BUILTIN_RULES
    refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ByTheorem(Justification):
    theorem: str
    refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Prove(Justification):
    pass


@dataclass(frozen=True)
class ByInduction(Justification):
    cases: tuple["Case", ...] = ()


@dataclass(frozen=True)
class ByCaseAnalysis(Justification):
    scrutinee: Term = None  # type: ignore[assignment]
    cases: tuple["Case", ...] = ()


@dataclass(frozen=True)
class ByInversion(Justification):
    """Case analysis on the derivation of a judgment fact (SASyLF-style)."""

    ref: str = ""
    cases: tuple["InversionCase", ...] = ()


# ---------------------------------------------------------------------------
# proof structure


@dataclass(frozen=True)
class Assumption:
    pass


@dataclass(frozen=True)
class Hypothesis(Assumption):
    label: str | None
    formula: Formula


@dataclass(frozen=True)
class ForAny(Assumption):
    vars: tuple[tuple[str, str], ...]  # (name, sort)


@dataclass(frozen=True)
class ForSome(Assumption):
    label: str | None
    formula: Formula
    witnesses: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Step:
    pass


@dataclass(frozen=True)
class Line(Step):
    label: str | None
    formula: Formula
    justification: Justification
    pos: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Subproof(Step):
    label: str | None
    assumptions: tuple[Assumption, ...]
    body: "ProofScript"
    pos: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ProofScript:
    steps: tuple[Step, ...] = ()


@dataclass(frozen=True)
class Case:
    ctor: str
    vars: tuple[str, ...]
    assumptions: tuple[Assumption, ...]  # stated induction hypotheses
    body: ProofScript
    pos: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class InversionCase:
    rule: str
    assumptions: tuple[Assumption, ...]  # stated learned premises / fresh vars
    body: ProofScript
    pos: int | None = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class DataDecl:
    name: str
    constructors: tuple[tuple[str, tuple[str, ...]], ...]  # (ctor, arg sorts)
    pos: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RuleDecl:
    name: str
    schematic_vars: tuple[tuple[str, str], ...]  # (name, sort)
    premises: tuple[Formula, ...]
    conclusion: Formula
    pos: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TheoremDecl:
    name: str
    prop_params: tuple[str, ...]
    premises: tuple[Formula, ...]
    conclusion: Formula
    proof: ProofScript
    is_schema: bool = False
    pos: int | None = field(default=None, compare=False)


Declaration = DataDecl | RuleDecl | TheoremDecl


@dataclass(frozen=True)
class ModuleAST:
    declarations: tuple[Declaration, ...] = ()
