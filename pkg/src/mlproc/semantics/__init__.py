"""Name resolution and rule validation, plus the one-call front end."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..diagnostics import Diagnostic, has_errors
from ..metamodel import Method
from ..syntax import Node, parse
from .resolve import ResolutionResult, resolve
from .validate import validate


@dataclass
class CompileResult:
    ast: Node
    model: Optional[Method]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True when a model was built and no error was reported."""
        return self.model is not None and not has_errors(self.diagnostics)


def compile_source(text: Union[str, bytes]) -> CompileResult:
    """Parse, resolve and validate ``text``, stopping at the first failing stage."""
    parsed = parse(text)
    if not parsed.ok:
        return CompileResult(parsed.ast, None, parsed.diagnostics)
    resolved = resolve(parsed.ast)
    diagnostics = parsed.diagnostics + resolved.diagnostics
    if resolved.model is None:
        return CompileResult(parsed.ast, None, diagnostics)
    return CompileResult(parsed.ast, resolved.model, diagnostics + validate(resolved.model))


__all__ = ["CompileResult", "ResolutionResult", "compile_source", "resolve", "validate"]
