"""Annotation code vocabulary and the four analysis classes."""
from __future__ import annotations

from enum import Enum, IntEnum


class LabelCode(IntEnum):
    """Raw codes from the thread annotation scheme.

    Codes 1-6 may be combined on one post. ``UNDECIDED`` marks posts an
    annotator could not settle and never co-occurs with another code.
    """

    HATE = 0
    SUPPORT = 1
    DISAGREE = 2
    INSULT = 3
    SUPPORT_EVIDENCE = 4
    DISAGREE_EVIDENCE = 5
    GENERAL = 6
    UNDECIDED = -1

    @classmethod
    def parse(cls, token: str) -> "LabelCode":
        token = token.strip()
        if token.upper() == "U":
            return cls.UNDECIDED
        return cls(int(token))

    def render(self) -> str:
        return "U" if self is LabelCode.UNDECIDED else str(int(self))


class ConflatedClass(IntEnum):
    CYBER_HATE = 0
    SUPPORT_HATE = 1
    DISAGREE_OR_INSULT = 2
    GENERAL = 3

    @property
    def title(self) -> str:
        return _CLASS_TITLES[self]


_CLASS_TITLES = {
    ConflatedClass.CYBER_HATE: "Cyber Hate",
    ConflatedClass.SUPPORT_HATE: "Support",
    ConflatedClass.DISAGREE_OR_INSULT: "Disagree&Insults",
    ConflatedClass.GENERAL: "General",
}

N_CLASSES = len(ConflatedClass)


class Strand(str, Enum):
    SEXIST = "sexist"
    RACIST = "racist"
    HOMOPHOBIC = "homophobic"

    @classmethod
    def parse(cls, value: "str | Strand") -> "Strand":
        if isinstance(value, Strand):
            return value
        return cls(value.strip().lower())

    @property
    def title(self) -> str:
        return self.value.capitalize()
