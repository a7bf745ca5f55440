from chain_reasoner.text import (
    decapitalize_first,
    has_first_person_marker,
    join_with_and,
    strip_terminal_punct,
    word_tokens,
)


def test_word_tokens_keep_contractions():
    assert word_tokens("I'm scared, don't you know?") == ["i'm", "scared", "don't", "you", "know"]


def test_first_person_markers():
    assert has_first_person_marker("I eat lots of pancakes and syrup.")
    assert has_first_person_marker("My favorite sport is football.")
    assert has_first_person_marker("That belongs to me.")
    assert not has_first_person_marker("You are fat.")
    assert not has_first_person_marker("")


def test_strip_terminal_punct_takes_one():
    assert strip_terminal_punct("You eat too much.") == "You eat too much"
    assert strip_terminal_punct("Really?!") == "Really?"
    assert strip_terminal_punct("no punctuation") == "no punctuation"


def test_join_with_and_matches_rendered_example():
    joined = join_with_and("You eat too much.", "Eating too much can make people fat.")
    assert joined == "You eat too much and eating too much can make people fat."


def test_decapitalize_plain_word():
    assert decapitalize_first("Classic things are usually old.") == "classic things are usually old."


def test_decapitalize_keeps_pronoun_and_acronyms():
    assert decapitalize_first("I never agreed.") == "I never agreed."
    assert decapitalize_first("I'm never wrong.") == "I'm never wrong."
    assert decapitalize_first("NASA launches rockets.") == "NASA launches rockets."


def test_decapitalize_keeps_mid_sentence_capitalized_token():
    # "Famous" recurs capitalized mid-sentence in the context, so it reads as
    # a proper-noun-like token and keeps its case.
    context = ("They said Famous is a brand.",)
    assert (
        decapitalize_first("Famous comedians are always on TV.", context)
        == "Famous comedians are always on TV."
    )
    assert (
        decapitalize_first("Famous comedians are always on TV.")
        == "famous comedians are always on TV."
    )


def test_decapitalize_no_letters():
    assert decapitalize_first("1234.") == "1234."
