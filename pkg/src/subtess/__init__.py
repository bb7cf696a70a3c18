"""Decision procedures for logics over the subword order."""

from .automata import Alphabet, Dfa, Nfa, is_cover, is_incomparable, is_subword
from .dsl import Job, ParseError, parse_job
from .logic import Var, Word

__all__ = [
    "Alphabet", "Dfa", "Nfa", "Job", "ParseError", "Var", "Word",
    "is_cover", "is_incomparable", "is_subword", "parse_job",
]
