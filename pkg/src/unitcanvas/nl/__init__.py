"""Utterance interpretation: normalization, template matching, and
lexicon/n-gram similarity matching with ambiguity detection."""
from .tokens import normalize, tokenize_raw, STOPWORDS, STOPWORD_VERSION
from .parser import (
    Ambiguity,
    Complete,
    Interpretation,
    ParseOutcome,
    Partial,
    Unintelligible,
    detect_ambiguity,
    match_templates,
    ngram_match,
    parse,
    parse_all,
)
from .similarity import CompositeSimilarity, default_similarity
from .templates import Template, load_templates, example_command

__all__ = [
    "Ambiguity",
    "Complete",
    "CompositeSimilarity",
    "Interpretation",
    "ParseOutcome",
    "Partial",
    "STOPWORDS",
    "STOPWORD_VERSION",
    "Template",
    "Unintelligible",
    "default_similarity",
    "detect_ambiguity",
    "example_command",
    "load_templates",
    "match_templates",
    "ngram_match",
    "normalize",
    "parse",
    "parse_all",
    "tokenize_raw",
]
