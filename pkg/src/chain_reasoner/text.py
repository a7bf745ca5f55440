"""Small text helpers: tokenization, first-person detection, conjunction joins.

Everything here is pure and deterministic; the rest of the package builds its
sentence surgery on these primitives so the behavior is testable in one place.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z]+)?")

# Tokens that mark a sentence as first-person persona style.
FIRST_PERSON_MARKERS = frozenset({"i", "i'm", "my", "me", "mine"})

_TERMINAL_PUNCT = ".!?"


def word_tokens(text: str) -> list[str]:
    """Lowercased word tokens; internal apostrophes kept ("i'm", "don't")."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


def has_first_person_marker(text: str) -> bool:
    return any(tok in FIRST_PERSON_MARKERS for tok in word_tokens(text))


def strip_terminal_punct(text: str) -> str:
    """Remove one trailing '.', '!' or '?' (plus surrounding whitespace)."""
    stripped = text.rstrip()
    if stripped and stripped[-1] in _TERMINAL_PUNCT:
        stripped = stripped[:-1]
    return stripped.rstrip()


def decapitalize_first(sentence: str, context: tuple[str, ...] | list[str] = ()) -> str:
    """Lowercase the sentence's first letter unless it looks like a proper noun.

    Proper-noun heuristic: the leading word is kept as-is when it is the
    pronoun "I" (or a contraction of it), an all-caps acronym, or when the
    same capitalized form occurs mid-sentence in the sentence itself or in
    any of the ``context`` sentences.
    """
    match = re.search(r"[A-Za-z]", sentence)
    if match is None:
        return sentence
    start = match.start()
    word_match = _WORD_RE.match(sentence, start)
    first_word = word_match.group(0) if word_match else sentence[start]
    if not first_word[0].isupper():
        return sentence
    if first_word == "I" or first_word.startswith("I'"):
        return sentence
    if len(first_word) > 1 and first_word.isupper():
        return sentence
    for text in (sentence, *context):
        words = [m.group(0) for m in _WORD_RE.finditer(text)]
        if first_word in words[1:]:
            return sentence
    return sentence[:start] + first_word[0].lower() + sentence[start + 1 :]


def join_with_and(left: str, right: str, context: tuple[str, ...] | list[str] = ()) -> str:
    """Conjoin two sentences: drop left's terminal period, keep right's.

    ``"You eat too much." + "Eating too much can make people fat."`` becomes
    ``"You eat too much and eating too much can make people fat."``.
    """
    return strip_terminal_punct(left) + " and " + decapitalize_first(right.strip(), context)
