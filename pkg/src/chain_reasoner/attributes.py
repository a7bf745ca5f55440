"""Rule-based categorization of first-person persona attributes.

Pure surface-pattern rules over the leading tokens; no parser, no lexicon
beyond the small verb/number tables below, so every assignment is auditable.

Rule table (applied in order; all matching is case-insensitive):

    leading tokens          category  subcategory
    ----------------------  --------  --------------------------------------
    "i am" / "i'm"          AM        AM-number   predicate has a cardinal number
                                      AM-noun     predicate starts "a"/"an"
                                      AM-status   progressive ("-ing") or a
                                                  one-word (adjectival) predicate
                                      AM-other    otherwise
    "my"                    MY        MY-preference  second word "favorite"
                                      MY-other       otherwise
    "i will"                OTHER     (modal future, not a personal action)
    "i've"                  HAVE      HAVE-other
    "i" + verb              HAVE      HAVE-preference  verb in like/love/hate/
                                                       enjoy/prefer
                                      HAVE-status      verb have/has
                                      HAVE-other       otherwise
    anything else           OTHER
"""

from __future__ import annotations

from typing import Iterable

from .chain_model import Attribute, Category, Subcategory
from .text import word_tokens

PREFERENCE_VERBS = frozenset({"like", "love", "hate", "enjoy", "prefer"})

NUMBER_WORDS = frozenset(
    """one two three four five six seven eight nine ten eleven twelve thirteen
    fourteen fifteen sixteen seventeen eighteen nineteen twenty thirty forty
    fifty sixty seventy eighty ninety hundred thousand""".split()
)


def _is_number_token(token: str) -> bool:
    return token.isdigit() or token in NUMBER_WORDS


def _am_subcategory(predicate: list[str]) -> Subcategory:
    if any(_is_number_token(tok) for tok in predicate):
        return Subcategory.AM_NUMBER
    if predicate and predicate[0] in ("a", "an"):
        return Subcategory.AM_NOUN
    if predicate and (predicate[0].endswith("ing") or len(predicate) == 1):
        return Subcategory.AM_STATUS
    return Subcategory.AM_OTHER


def categorize(text: str) -> Attribute:
    """Assign a category and subcategory; total and deterministic."""
    tokens = word_tokens(text)
    if not tokens:
        return Attribute(text=text, category=Category.OTHER)
    head = tokens[0]

    if head == "i'm" or (head == "i" and tokens[1:2] == ["am"]):
        predicate = tokens[1:] if head == "i'm" else tokens[2:]
        return Attribute(text=text, category=Category.AM, subcategory=_am_subcategory(predicate))

    if head == "my":
        sub = (
            Subcategory.MY_PREFERENCE
            if tokens[1:2] in (["favorite"], ["favourite"])
            else Subcategory.MY_OTHER
        )
        return Attribute(text=text, category=Category.MY, subcategory=sub)

    if head == "i've":
        return Attribute(text=text, category=Category.HAVE, subcategory=Subcategory.HAVE_OTHER)

    if head == "i" and len(tokens) > 1:
        verb = tokens[1]
        if verb == "will":
            return Attribute(text=text, category=Category.OTHER)
        if verb in PREFERENCE_VERBS:
            sub = Subcategory.HAVE_PREFERENCE
        elif verb in ("have", "has"):
            sub = Subcategory.HAVE_STATUS
        else:
            sub = Subcategory.HAVE_OTHER
        return Attribute(text=text, category=Category.HAVE, subcategory=sub)

    return Attribute(text=text, category=Category.OTHER)


def categorize_corpus(texts: Iterable[str]) -> tuple[list[Attribute], dict[Category, int]]:
    """Categorize every sentence; histogram counts sum to the input count."""
    attributes = [categorize(text) for text in texts]
    histogram = {category: 0 for category in Category}
    for attr in attributes:
        histogram[attr.category] += 1
    return attributes, histogram
