"""Deterministic text statistics and readability grade estimates.

The tokenization rules below are normative: every count this module
produces can be reproduced by hand, which is what the test fixtures do.

* Sentence: a run of ``.``, ``!`` or ``?`` followed by whitespace or end
  of text closes a sentence. Segments without any word do not count.
  Abbreviations are not special-cased.
* Word: maximal run of alphanumeric characters, allowing internal
  apostrophes and hyphens ("don't", "self-doubt" are single words).
* Character: letters and digits inside words only (apostrophes and
  hyphens are not counted).
* Syllables: number of maximal vowel groups (a, e, i, o, u, y) in the
  lowercased word, minus one for a silent trailing 'e' (kept when the
  word ends in consonant + 'le'), with a minimum of one per word.
* Complex word / polysyllable: any word with three or more syllables.
  No proper-noun or jargon exclusions are applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_WORD_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*", re.UNICODE)
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+(?:\s+|$)")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_VOWELS = set("aeiouy")


class DegenerateTextError(ValueError):
    """Raised when a text has no words or no sentences."""


@dataclass(frozen=True)
class TokenizedText:
    """Counts feeding the readability indices."""

    sentences: int
    words: int
    characters: int
    syllables: int
    complex_words: int
    polysyllables: int


@dataclass(frozen=True)
class ReadabilityScores:
    """Grade-level estimates from the five classic indices."""

    fkg: float
    gfi: float
    smog: float
    ari: float
    cli: float

    def as_dict(self) -> dict[str, float]:
        return {
            "fkg": self.fkg,
            "gfi": self.gfi,
            "smog": self.smog,
            "ari": self.ari,
            "cli": self.cli,
        }


def words(text: str) -> list[str]:
    """All word tokens of *text* under the normative word rule."""
    return _WORD_RE.findall(text)


def syllable_count(word: str) -> int:
    """Syllables in a single word per the documented heuristic."""
    w = word.lower()
    groups = len(_VOWEL_GROUP_RE.findall(w))
    if w.endswith("e") and not (
        len(w) >= 3 and w.endswith("le") and w[-3] not in _VOWELS
    ):
        groups -= 1
    return max(groups, 1)


def tokenize(text: str) -> TokenizedText:
    """Count sentences, words, characters and syllables in *text*.

    Pure and deterministic; empty input yields all-zero counts.
    """
    all_words = words(text)
    n_sentences = sum(
        1 for seg in _SENTENCE_SPLIT_RE.split(text) if _WORD_RE.search(seg)
    )
    n_chars = sum(1 for w in all_words for ch in w if ch.isalnum())
    n_syllables = 0
    n_complex = 0
    for w in all_words:
        s = syllable_count(w)
        n_syllables += s
        if s >= 3:
            n_complex += 1
    return TokenizedText(
        sentences=n_sentences,
        words=len(all_words),
        characters=n_chars,
        syllables=n_syllables if all_words else 0,
        complex_words=n_complex,
        polysyllables=n_complex,
    )


def readability(tok: TokenizedText) -> ReadabilityScores:
    """Five readability indices from the counts in *tok*.

    Raises:
        DegenerateTextError: if the text has no words or no sentences.
    """
    if tok.words <= 0 or tok.sentences <= 0:
        raise DegenerateTextError("degenerate text: needs at least one word and one sentence")
    wps = tok.words / tok.sentences
    fkg = 0.39 * wps + 11.8 * (tok.syllables / tok.words) - 15.59
    gfi = 0.4 * (wps + 100.0 * (tok.complex_words / tok.words))
    smog = 1.0430 * (tok.polysyllables * 30.0 / tok.sentences) ** 0.5 + 3.1291
    ari = 4.71 * (tok.characters / tok.words) + 0.5 * wps - 21.43
    letters_per_100 = 100.0 * tok.characters / tok.words
    sentences_per_100 = 100.0 * tok.sentences / tok.words
    cli = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8
    return ReadabilityScores(fkg=fkg, gfi=gfi, smog=smog, ari=ari, cli=cli)


def score_text(text: str) -> ReadabilityScores:
    """Tokenize *text* and compute all five indices."""
    return readability(tokenize(text))
