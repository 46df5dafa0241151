"""First-order justification logic toolkit: syntax, a proof kernel, proof
transformers, template operations and Fitting-model semantics."""

from .axioms import ConstantSpecification, cs_contains, csv_contains, identify, match_axiom
from .kernel import Derivation, Step, check, check_theorem
from .semantics import FittingModel, audit, eval_formula, evidence, valid
from .syntax import free_vars, substitute
from .textio import (
    ParseError, parse_cs, parse_derivation, parse_formula, parse_model, parse_term,
    print_derivation, print_formula, print_term,
)
from .transform import (
    converse_barcan, converse_buridan, deduction, generalize_witness, internalize,
    jt45_barcan, replace_witness,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantSpecification", "Derivation", "FittingModel", "ParseError", "Step", "audit",
    "check", "check_theorem", "converse_barcan", "converse_buridan", "cs_contains",
    "csv_contains", "deduction", "eval_formula", "evidence", "free_vars",
    "generalize_witness", "identify", "internalize", "jt45_barcan", "match_axiom",
    "parse_cs", "parse_derivation", "parse_formula", "parse_model", "parse_term",
    "print_derivation", "print_formula", "print_term", "replace_witness", "substitute",
    "valid",
]
