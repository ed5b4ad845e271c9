"""English Snowball (Porter2) stemmer.

Implements the classic Porter2 rules. Regions R1/R2 are tracked as start
offsets into the word; suffix edits only ever touch the end of the word so
the offsets stay valid through every step.
"""
from __future__ import annotations

from functools import lru_cache

VOWELS = frozenset("aeiouy")
DOUBLES = ("bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt")
LI_ENDING = frozenset("cdeghkmnrt")
PASSTHROUGH_PREFIXES = ("@", "#", "<")

EXCEPTIONS = {
    "skis": "ski",
    "skies": "sky",
    "dying": "die",
    "lying": "lie",
    "tying": "tie",
    "idly": "idl",
    "gently": "gentl",
    "ugly": "ugli",
    "early": "earli",
    "only": "onli",
    "singly": "singl",
    "sky": "sky",
    "news": "news",
    "howe": "howe",
    "atlas": "atlas",
    "cosmos": "cosmos",
    "bias": "bias",
    "andes": "andes",
}
# words left alone once step 1a has run
POST_1A_EXCEPTIONS = frozenset(
    ["inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed"]
)

STEP2 = [
    ("ization", "ize"), ("ational", "ate"), ("fulness", "ful"), ("ousness", "ous"),
    ("iveness", "ive"), ("tional", "tion"), ("biliti", "ble"), ("lessli", "less"),
    ("entli", "ent"), ("ation", "ate"), ("alism", "al"), ("aliti", "al"), ("ousli", "ous"),
    ("iviti", "ive"), ("fulli", "ful"), ("enci", "ence"), ("anci", "ance"), ("abli", "able"),
    ("izer", "ize"), ("ator", "ate"), ("alli", "al"), ("bli", "ble"), ("ogi", "og"), ("li", ""),
]
STEP3 = [
    ("ational", "ate"), ("tional", "tion"), ("alize", "al"), ("icate", "ic"), ("iciti", "ic"),
    ("ative", ""), ("ical", "ic"), ("ness", ""), ("ful", ""),
]
STEP4 = [
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti", "ous",
    "ive", "ize", "ion", "al", "er", "ic",
]


def _is_vowel(ch: str) -> bool:
    return ch in VOWELS


def _region_start(word: str, start: int) -> int:
    # first non-vowel following a vowel, at or after ``start``
    for i in range(max(start, 1), len(word)):
        if not _is_vowel(word[i]) and _is_vowel(word[i - 1]):
            return i + 1
    return len(word)


def _regions(word: str) -> tuple[int, int]:
    for prefix in ("gener", "commun", "arsen"):
        if word.startswith(prefix):
            r1 = len(prefix)
            break
    else:
        r1 = _region_start(word, 1)
    return r1, _region_start(word, r1 + 1)


def _ends_short_syllable(word: str) -> bool:
    n = len(word)
    if n == 2:
        return _is_vowel(word[0]) and not _is_vowel(word[1])
    if n >= 3:
        return (
            not _is_vowel(word[-3])
            and _is_vowel(word[-2])
            and not _is_vowel(word[-1])
            and word[-1] not in "wxY"
        )
    return False


def _is_short(word: str, r1: int) -> bool:
    return r1 >= len(word) and _ends_short_syllable(word)


def _longest_suffix(word: str, suffixes) -> str | None:
    best = None
    for suf in suffixes:
        if word.endswith(suf) and (best is None or len(suf) > len(best)):
            best = suf
    return best


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ied") or word.endswith("ies"):
        return word[:-2] if len(word) > 4 else word[:-1]
    if word.endswith("us") or word.endswith("ss"):
        return word
    if word.endswith("s"):
        if any(_is_vowel(c) for c in word[:-2]):
            return word[:-1]
    return word


def _step1b(word: str, r1: int) -> str:
    suf = _longest_suffix(word, ("eed", "eedly", "ed", "edly", "ing", "ingly"))
    if suf is None:
        return word
    if suf in ("eed", "eedly"):
        if len(word) - len(suf) >= r1:
            return word[: -len(suf)] + "ee"
        return word
    stem = word[: -len(suf)]
    if not any(_is_vowel(c) for c in stem):
        return word
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if stem.endswith(DOUBLES):
        return stem[:-1]
    if _is_short(stem, r1):
        return stem + "e"
    return stem


def _step1c(word: str) -> str:
    if len(word) > 2 and word[-1] in "yY" and not _is_vowel(word[-2]):
        return word[:-1] + "i"
    return word


def _step2(word: str, r1: int) -> str:
    suf = _longest_suffix(word, [s for s, _ in STEP2])
    if suf is None or len(word) - len(suf) < r1:
        return word
    base = word[: -len(suf)]
    if suf == "ogi":
        return base + "og" if base.endswith("l") else word
    if suf == "li":
        return base if base and base[-1] in LI_ENDING else word
    return base + dict(STEP2)[suf]


def _step3(word: str, r1: int, r2: int) -> str:
    suf = _longest_suffix(word, [s for s, _ in STEP3])
    if suf is None or len(word) - len(suf) < r1:
        return word
    if suf == "ative" and len(word) - len(suf) < r2:
        return word
    return word[: -len(suf)] + dict(STEP3)[suf]


def _step4(word: str, r2: int) -> str:
    suf = _longest_suffix(word, STEP4)
    if suf is None or len(word) - len(suf) < r2:
        return word
    if suf == "ion" and not word[:-3].endswith(("s", "t")):
        return word
    return word[: -len(suf)]


def _step5(word: str, r1: int, r2: int) -> str:
    if word.endswith("e"):
        pos = len(word) - 1
        if pos >= r2 or (pos >= r1 and not _ends_short_syllable(word[:-1])):
            return word[:-1]
    elif word.endswith("l"):
        if len(word) - 1 >= r2 and word[-2:-1] == "l":
            return word[:-1]
    return word


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Porter2 stem of a lowercase token; mentions, hashtags and ``<...>`` markers pass through."""
    if not token or token.startswith(PASSTHROUGH_PREFIXES):
        return token
    word = token.replace("’", "'").replace("‘", "'").replace("‛", "'")
    if len(word) <= 2:
        return word
    if word in EXCEPTIONS:
        return EXCEPTIONS[word]
    if word.startswith("'"):
        word = word[1:]
    if word.startswith("y"):
        word = "Y" + word[1:]
    chars = list(word)
    for i in range(1, len(chars)):
        if chars[i] == "y" and chars[i - 1] in VOWELS:
            chars[i] = "Y"
    word = "".join(chars)

    r1, r2 = _regions(word)

    for suf in ("'s'", "'s", "'"):
        if word.endswith(suf):
            word = word[: -len(suf)]
            break

    word = _step1a(word)
    if word in POST_1A_EXCEPTIONS:
        return word
    word = _step1b(word, r1)
    word = _step1c(word)
    word = _step2(word, r1)
    word = _step3(word, r1, r2)
    word = _step4(word, r2)
    word = _step5(word, r1, r2)
    return word.replace("Y", "y")
