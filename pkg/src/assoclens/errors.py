"""Exception hierarchy shared by all assoclens stages."""


class AssocLensError(Exception):
    """Base class; the CLI reports these as one-line errors."""


class MissingGroup(AssocLensError):
    pass


class DomainError(AssocLensError, ValueError):
    pass


class NetworkError(AssocLensError):
    def __init__(self, tag, message):
        super().__init__(f"{tag}: {message}")
        self.tag = tag
        self.retryable = True


class PageNotFound(AssocLensError):
    pass


class EmptyVocabulary(AssocLensError):
    pass


class FormatError(AssocLensError):
    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path


class UnknownWord(AssocLensError, KeyError):
    def __init__(self, words):
        if isinstance(words, str):
            words = [words]
        self.words = list(words)
        super().__init__(", ".join(self.words))

    def __str__(self):
        return "unknown word(s): " + ", ".join(self.words)


class TooFewWords(AssocLensError):
    pass


class MissingAssociation(AssocLensError):
    def __init__(self, word):
        super().__init__(f"no association result for {word!r}")
        self.word = word


class ParseError(AssocLensError):
    def __init__(self, path, offset, message):
        super().__init__(f"{path}@{offset}: {message}")
        self.path = path
        self.offset = offset


class MissingFile(AssocLensError, FileNotFoundError):
    pass


class Unlabelable(AssocLensError):
    pass


class ClusterTooSmall(AssocLensError):
    pass


class ShapeMismatch(AssocLensError):
    pass


class DegenerateAgreement(AssocLensError):
    pass
