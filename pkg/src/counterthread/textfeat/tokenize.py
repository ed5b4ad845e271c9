from __future__ import annotations

import re

URL_TOKEN = "<url>"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "‛": "'", "ʼ": "'"})
# A token is the url marker, or a word optionally led by @/# (only at a
# token boundary) with apostrophes allowed between word characters.
_TOKEN_RE = re.compile(r"<url>|(?<!\w)[@#]?[^\W_]\w*(?:'\w+)*|\w+(?:'\w+)*")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; URLs collapse to ``<url>``, mentions and hashtags stay whole."""
    if not text:
        return []
    text = _URL_RE.sub(f" {URL_TOKEN} ", text.translate(_APOSTROPHES))
    return [tok.lower() for tok in _TOKEN_RE.findall(text)]
