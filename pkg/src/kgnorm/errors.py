"""Exception hierarchy shared by every stage."""

from __future__ import annotations


class KgnormError(Exception):
    """Base class for all errors raised by kgnorm."""


class MalformedCurie(KgnormError, ValueError):
    def __init__(self, text: str, line: int | None = None, path: str | None = None):
        self.text = text
        self.line = line
        self.path = path
        where = ""
        if line is not None:
            where = f" at {path or '<input>'}:{line}"
        super().__init__(f"malformed CURIE {text!r}{where}")


class MalformedRecord(KgnormError, ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        if line is not None:
            message = f"{path or '<input>'}:{line}: {message}"
        super().__init__(message)


class SchemaViolation(MalformedRecord):
    """A serialized artifact line does not match its documented schema."""


class MalformedInput(MalformedRecord):
    """A parser could not read a raw source file."""


class MalformedTable(MalformedRecord):
    """A predicate mapping table line is invalid."""


class NoTypeAvailable(KgnormError):
    pass


class UnresolvableCurie(KgnormError, KeyError):
    def __str__(self) -> str:
        return f"identifier {self.args[0]} belongs to no loaded clique"


class DuplicateLeader(KgnormError):
    pass


class NotFound(KgnormError, KeyError):
    def __str__(self) -> str:
        return f"unknown identifier {self.args[0]}"


class UnknownParser(KgnormError, KeyError):
    def __str__(self) -> str:
        return f"no parser registered under {self.args[0]!r}"


class EmptySource(KgnormError, ValueError):
    pass


class SpillDirUnwritable(KgnormError, OSError):
    pass


class GraphSpecError(KgnormError, ValueError):
    pass


class BuildFailed(KgnormError):
    """One or more graphspec sources failed; artifacts of earlier stages are kept."""

    def __init__(self, failures: dict[str, BaseException]):
        self.failures = failures
        detail = "; ".join(f"{k}: {v}" for k, v in failures.items())
        super().__init__(f"graph build failed: {detail}")
