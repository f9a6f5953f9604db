"""Canonical formatting of syntax trees.

Two-space indentation, one attribute per line, attributes in grammar-table
order, nested declarations in their original order. Empty blocks are
omitted except on ``method``.
"""
from __future__ import annotations

from decimal import Decimal

from ..diagnostics import MlprocError
from .ast import BLOCKS, Node

INDENT = "  "


def quote(text: str) -> str:
    escaped = (text.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n").replace("\t", "\\t"))
    return f'"{escaped}"'


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Decimal):
        return format(value, "f")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, tuple):
        return ", ".join(value)
    return str(value)


def _header(node: Node) -> str:
    header = BLOCKS[node.tag].header
    parts = [node.tag]
    if header == "method":
        parts.append(quote(node.display or ""))
    elif header in ("named", "typed", "bare"):
        parts.append(node.id or "")
        if node.display is not None and header != "bare":
            parts.append(quote(node.display))
        if header == "typed":
            parts.append(":")
            parts.append(node.kind or "")
            if node.label is not None:
                parts.append(quote(node.label))
    elif header == "participant":
        parts += [node.attrs["role"], "as", node.attrs["responsibility"]]
    elif header == "flow":
        parts += [node.attrs["source"], "->", node.attrs["target"]]
    return " ".join(parts)


def _emit(node: Node, depth: int, out: list[str]) -> None:
    block = BLOCKS[node.tag]
    pad = INDENT * depth
    attr_lines = []
    if block.header not in ("participant", "flow"):
        for attr in block.attrs:
            if attr.name in node.attrs:
                value = node.attrs[attr.name]
                text = quote(value) if attr.type in ("str", "nonempty") else format_value(value)
                attr_lines.append(f"{pad}{INDENT}{attr.name} {text}")
    if not attr_lines and not node.children and node.tag != "method":
        out.append(pad + _header(node))
        return
    out.append(f"{pad}{_header(node)} {{")
    out.extend(attr_lines)
    for child in node.children:
        _emit(child, depth + 1, out)
    out.append(pad + "}")


def print_canonical(ast: Node) -> str:
    """Render ``ast`` as canonical source text.

    Raises :class:`MlprocError` (P020) if the tree holds error placeholders.
    """
    for node in ast.walk():
        if node.is_error:
            raise MlprocError("P020", "cannot print a tree that contains parse errors")
    out: list[str] = []
    _emit(ast, 0, out)
    return "\n".join(out) + "\n"
