"""Unbiased derivatives of expected values of probabilistic programs.

Programs are written in a small typed functional language, translated by a
forward-mode transformation into programs that estimate both the expected
value and its derivative, and run with explicit, replayable seeds.
"""

from .compiler import Compiled, compile_program
from .dual import Dual
from .errors import (
    AdevError, AdevRuntimeError, NonFiniteError, OracleError, ParseError, TranslationError,
    TypeCheckError, WitnessUnavailable,
)
from .harness import GradReport, SgdTrace, mc_gradient, sgd, validate
from .oracles import enumerate_expectation, naive_derivative
from .parser import load_program, parse_program
from .printer import pretty_print
from .runtime import RuntimeConfig
from .seed import Seed
from .specialize import specialize
from .transform import ad_term, ad_type, normalize, translate
from .typecheck import check_entry
from .witness import WitnessReport, eval_witness, probe_witness

__all__ = [
    "Compiled", "compile_program", "Dual", "AdevError", "AdevRuntimeError", "NonFiniteError",
    "OracleError", "ParseError", "TranslationError", "TypeCheckError", "WitnessUnavailable",
    "GradReport", "SgdTrace", "mc_gradient", "sgd", "validate", "enumerate_expectation",
    "naive_derivative", "load_program", "parse_program", "pretty_print", "RuntimeConfig",
    "Seed", "specialize", "ad_term", "ad_type", "normalize", "translate", "check_entry",
    "WitnessReport", "eval_witness", "probe_witness",
]
