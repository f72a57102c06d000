"""Utterance tokenization and normalization.

Stopwords deliberately exclude comparator and negation words ("more",
"less", "not", "except", "over", "under") and deictic words ("here",
"these", "them"): those carry command structure.
"""
from __future__ import annotations

import re

STOPWORD_VERSION = 1

STOPWORDS = frozenset(
    """
    a an the and or then of in on at to by with for from as into onto
    all any each every some than that which who whom whose what when how why
    is are was were be been being am do does did done have has had having
    will would can could should shall may might must please just also too
    very so such it its their his her my our your they he she we you i
    """.split()
)

# "30,000" and "30k" style literals
_COMMA_NUMBER = re.compile(r"^\d{1,3}(,\d{3})+(\.\d+)?$")
_K_NUMBER = re.compile(r"^(\d+(\.\d+)?)k$")
_TOKEN = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?k?|[a-z]+")


def normalize_number_token(token: str) -> str:
    if _COMMA_NUMBER.match(token):
        token = token.replace(",", "")
    m = _K_NUMBER.match(token)
    if m:
        value = float(m.group(1)) * 1000
        return str(int(value)) if value.is_integer() else str(value)
    return token


def is_number_token(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def tokenize_raw(utterance: str) -> list[str]:
    """Lowercase, punctuation-stripped tokens with numbers normalized.
    Stopwords are kept; compound-command splitting needs them."""
    lowered = utterance.lower().replace("-", " ").replace("_", " ").replace("/", " ")
    lowered = lowered.replace("'", "")
    tokens = _TOKEN.findall(lowered)
    return [normalize_number_token(t) for t in tokens]


def normalize(utterance: str) -> list[str]:
    """Token list with stopwords removed; the parser's input form."""
    return [t for t in tokenize_raw(utterance) if t not in STOPWORDS]
