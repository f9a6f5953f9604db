"""Source spans and rule-coded diagnostics shared by every pipeline stage."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class SourceSpan:
    """Location of a piece of source text.

    Offsets are UTF-8 byte offsets into the input; ``line`` and ``column``
    are 1-based and count characters.
    """

    start: int
    end: int
    line: int = 1
    column: int = 1

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"span start {self.start} after end {self.end}")

    def cover(self, other: "SourceSpan") -> "SourceSpan":
        if other.start < self.start:
            return SourceSpan(other.start, max(self.end, other.end), other.line, other.column)
        return SourceSpan(self.start, max(self.end, other.end), self.line, self.column)


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


# Published rule table. Every diagnostic code emitted anywhere must be listed.
RULES: dict[str, str] = {
    "P001": "unterminated string literal",
    "P002": "invalid character",
    "P010": "unexpected token",
    "P011": "unknown kind or enumeration literal",
    "P012": "duplicate attribute in block",
    "P013": "invalid attribute value or attribute not applicable to kind",
    "P014": "missing required attribute",
    "P020": "cannot print a tree containing error placeholders",
    "R001": "duplicate identifier",
    "R002": "unresolved reference",
    "R003": "reference resolves to the wrong element family",
    "R004": "flow endpoints are not siblings",
    "R005": "flow cycle within a container",
    "R006": "participant references a non-role",
    "R007": "criterion baseline/target fail the dataType check",
    "R008": "metric minThreshold exceeds maxThreshold",
    "R009": "kind-specific payload on the wrong activity kind",
    "R010": "flaw relatedTo is not an AIModelRequirement",
    "R011": "requiresAll set on a leaf activity",
    "R012": "data identification activity without selected data sources",
    "R013": "model evaluation activity without a Test dataset input",
    "R014": "optional activity is the only producer of an artifact a mandatory activity consumes",
    "E001": "model has validation errors",
    "E002": "identifier sanitization collision overflow",
    "D001": "model has validation errors",
    "N001": "model has validation errors",
    "N002": "activity is not Ready",
    "N003": "activity is not Running",
    "N004": "requiresAll violated: sub-activities incomplete",
    "N005": "activity is mandatory",
    "N006": "activity cannot be skipped in its current state",
    "N007": "event log is malformed or not a legal trace",
    "N008": "unknown activity",
}

WARNING_CODES = frozenset({"R011", "R012", "R013", "R014"})


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Optional[SourceSpan] = None
    # element ids the diagnostic is about; used for comparison and filtering
    subjects: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.code not in RULES:
            raise ValueError(f"unknown diagnostic code {self.code!r}")

    @classmethod
    def error(cls, code: str, message: str, span: Optional[SourceSpan] = None,
              subjects: Iterable[str] = ()) -> "Diagnostic":
        return cls(Severity.ERROR, code, message, span, tuple(subjects))

    @classmethod
    def warning(cls, code: str, message: str, span: Optional[SourceSpan] = None,
                subjects: Iterable[str] = ()) -> "Diagnostic":
        return cls(Severity.WARNING, code, message, span, tuple(subjects))

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self, filename: str = "<input>") -> str:
        """Format as ``<file>:<line>:<col>: <severity> <code>: <message>``."""
        line, col = (self.span.line, self.span.column) if self.span else (1, 1)
        return f"{filename}:{line}:{col}: {self.severity.value} {self.code}: {self.message}"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


class MlprocError(Exception):
    """Raised by operations whose failure is a single coded diagnostic."""

    def __init__(self, code: str, message: str, diagnostics: Iterable[Diagnostic] = ()):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.diagnostics = list(diagnostics)
