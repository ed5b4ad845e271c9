"""Exception hierarchy shared by every stage of the pipeline."""


class CounterthreadError(Exception):
    """Base class for all library errors."""


# thread_core
class EmptyThread(CounterthreadError):
    pass


class MultipleSources(CounterthreadError):
    pass


class DuplicatePostId(CounterthreadError):
    pass


class MissingLabel(CounterthreadError):
    pass


# annotation
class DuplicateAnnotation(CounterthreadError):
    pass


class UnknownCode(CounterthreadError):
    pass


class EmptyCodeSet(CounterthreadError):
    pass


# regression
class EmptyInput(CounterthreadError):
    pass


class InsufficientRows(CounterthreadError):
    pass


class AllColumnsOmitted(CounterthreadError):
    pass


class InvalidDf(CounterthreadError):
    pass


class MismatchedPredictors(CounterthreadError):
    pass


# textfeat
class MalformedLine(CounterthreadError):
    pass


class HeadOutOfRange(CounterthreadError):
    pass


class EmptyLexicon(UserWarning):
    """Warning, not an error: a lexicon file produced no terms."""


# svm
class SingleClassInput(CounterthreadError):
    pass


class NonFiniteFeature(CounterthreadError):
    pass


class DimensionMismatch(CounterthreadError):
    pass


class TooFewSamples(CounterthreadError):
    pass


class LengthMismatch(CounterthreadError):
    pass


# cli / file formats
class MalformedCsv(CounterthreadError):
    pass


class UnknownPostId(CounterthreadError):
    pass


class MalformedCodes(CounterthreadError):
    pass


class MissingParses(CounterthreadError):
    pass


class VersionMismatch(CounterthreadError):
    pass
