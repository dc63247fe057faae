"""
Exception hierarchy shared by the library and the command handlers.

Every error carries the process exit code the command line reports for it:
1 for usage/configuration problems, 2 for bad input data, 3 for anything internal.
"""


class PipelineError(Exception):
    """Base class for all errors raised by the lending pipeline."""
    exit_code = 3


class UsageError(PipelineError):
    exit_code = 1


class ConfigError(UsageError):
    """A configuration key or command-line value is missing or out of range."""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"invalid setting {key}: {reason}")


class DataError(PipelineError):
    exit_code = 2


# --- ingest ---
class MalformedRow(DataError):
    def __init__(self, line: int, reason: str, source: str = ""):
        self.line = line
        self.reason = reason
        self.source = source
        where = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"malformed row at {where}: {reason}")


class DuplicateAccount(DataError):
    def __init__(self, account_no: str, line: int | None = None):
        self.account_no = account_no
        self.line = line
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate account_no {account_no!r}{suffix}")


class SchemaMismatch(DataError):
    pass


# --- features ---
class UnknownAccount(DataError):
    def __init__(self, account_no: str):
        self.account_no = account_no
        super().__init__(f"transaction references unknown account_no {account_no!r}")


class EmptyDataset(DataError):
    pass


class NonPositiveSanction(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class InvalidWeights(DataError):
    pass


class OutOfRange(DataError):
    pass


# --- tree / prune / rules ---
class EmptyDistribution(DataError):
    pass


class UnknownAttribute(DataError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"unknown attribute {attribute!r}")


class MissingAttributeValue(DataError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"row has no value for attribute {attribute!r}")


class UnseenValue(DataError):
    def __init__(self, attribute: str, value: str):
        self.attribute = attribute
        self.value = value
        super().__init__(f"value {value!r} of attribute {attribute!r} has no branch in the tree")


class InvalidCounts(DataError):
    pass


class NoMatch(DataError):
    pass


# --- eval / synth ---
class TooFewRows(DataError):
    pass


class InvalidProfile(DataError):
    pass
