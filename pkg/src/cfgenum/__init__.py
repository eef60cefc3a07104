"""Enumerate the outputs of annotated context-free grammars.

Preprocessing is cubic in the input length (quadratic for rigid grammars)
and enumeration has output-linear delay.
"""

from .ecs import NodeStore, SetHandle
from .enumerator import Evaluation, evaluate, preprocess
from .errors import CfgEnumError, FormatError, SemanticError, UnitCycle
from .grammar import AnnotatedGrammar, Rule, Terminal, parse_grammar, render_grammar, to_2nf
from .pdann import PDAnn, compute_profile, grammar_to_pdann, parse_pdann, pdann_to_grammar
from .spanner import enumerate_mappings, parse_extraction_grammar, translate

__all__ = [
    "AnnotatedGrammar", "CfgEnumError", "Evaluation", "FormatError", "NodeStore", "PDAnn",
    "Rule", "SemanticError", "SetHandle", "Terminal", "UnitCycle", "compute_profile",
    "enumerate_mappings", "evaluate", "grammar_to_pdann", "parse_extraction_grammar",
    "parse_grammar", "parse_pdann", "pdann_to_grammar", "preprocess", "render_grammar",
    "to_2nf", "translate",
]
