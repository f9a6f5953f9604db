"""Recursive descent parser for ``.mlproc`` files.

Grammar (``{}`` repetition, ``[]`` option)::

    file        = method EOF
    method      = "method" STRING "{" { item } "}"
    item        = attribute | declaration
    declaration = KEYWORD header [ "{" { item } "}" ]
    header      = IDENT [STRING]                     (named)
                | IDENT [STRING] ":" KIND [STRING]   (typed; label only for Custom roles)
                | IDENT                              (bare)
                | IDENT "as" RESPONSIBILITY          (participant)
                | IDENT "->" IDENT                   (flow)
                |                                    (anonymous)
    attribute   = KEYWORD value
    value       = STRING | NUMBER | "true" | "false" | IDENT { "," IDENT }

Syntax errors abandon the current item and resume after the enclosing
``}``; lesser problems (unknown kinds, duplicate attributes, bad literal
values) are reported without disturbing the parse.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Optional, Union

from ..diagnostics import Diagnostic, SourceSpan
from .ast import BLOCKS, Attr, Block, Node, error_node
from .lexer import Token, TokenKind, tokenize

MAX_DEPTH = 64


class _SyntaxError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


@dataclass
class ParseResult:
    ast: Node
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


def _describe(tok: Token) -> str:
    if tok.kind is TokenKind.EOF:
        return "end of input"
    return f"{tok.kind.value.lower()} {tok.text!r}"


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # token helpers -----------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def prev_span(self) -> SourceSpan:
        return self.tokens[max(self.pos - 1, 0)].span

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise _SyntaxError(Diagnostic.error("P010", f"{message}, found {_describe(tok)}",
                                            tok.span))

    def report(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(Diagnostic.error(code, message, span))

    def expect_punct(self, ch: str) -> Token:
        if not self.tok.is_punct(ch):
            self.fail(f"expected '{ch}'")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not self.tok.is_keyword(word):
            self.fail(f"expected '{word}'")
        return self.advance()

    def expect(self, kind: TokenKind, what: str) -> Token:
        if self.tok.kind is not kind:
            self.fail(f"expected {what}")
        return self.advance()

    def optional_string(self) -> Optional[str]:
        if self.tok.kind is TokenKind.STRING:
            return self.advance().value
        return None

    def synchronize(self) -> None:
        """Skip to just past the block that encloses the error.

        Stops in front of a ``}`` that closes the block being parsed, so the
        caller's loop can consume it.
        """
        depth = 0
        while self.tok.kind is not TokenKind.EOF:
            if self.tok.is_punct("{"):
                depth += 1
            elif self.tok.is_punct("}"):
                if depth == 0:
                    return
                depth -= 1
                if depth == 0:
                    self.advance()
                    return
            self.advance()

    # grammar -----------------------------------------------------------------

    def parse_file(self) -> Node:
        start = self.tok
        if start.is_keyword("method"):
            try:
                root = self.parse_declaration(BLOCKS["method"], 0)
            except _SyntaxError as exc:
                self.diagnostics.append(exc.diagnostic)
                root = Node("method", display="", span=start.span,
                            children=[error_node(exc.diagnostic.span)])
        else:
            root = Node("method", display="", span=start.span)
            try:
                self.fail("expected 'method'")
            except _SyntaxError as exc:
                self.diagnostics.append(exc.diagnostic)
                root.children.append(error_node(exc.diagnostic.span))
        while self.tok.kind is not TokenKind.EOF:
            tok = self.tok
            self.report("P010", f"only one method per file, found {_describe(tok)}", tok.span)
            root.children.append(error_node(tok.span))
            self.synchronize()
            if self.tok.is_punct("}"):
                self.advance()
        return root

    def parse_declaration(self, block: Block, depth: int) -> Node:
        if depth > MAX_DEPTH:
            self.fail("declarations nested too deeply")
        start = self.expect_keyword(block.tag)
        node = Node(block.tag, span=start.span)
        header = block.header
        if header == "method":
            node.display = self.expect(TokenKind.STRING, "method name").value
        elif header in ("named", "typed", "bare"):
            node.id = self.expect(TokenKind.IDENTIFIER, "identifier").text
            if header != "bare":
                node.display = self.optional_string()
            if header == "typed":
                self.expect_punct(":")
                kind_tok = self.expect(TokenKind.IDENTIFIER, f"{block.tag} kind")
                node.kind = kind_tok.text
                if node.kind not in block.kinds:
                    self.report("P011", f"unknown {block.tag} kind {node.kind!r}", kind_tok.span)
                if block.tag == "role" and self.tok.kind is TokenKind.STRING:
                    label_tok = self.advance()
                    node.label = label_tok.value
                    if node.kind != "Custom":
                        self.report("P013", "only Custom roles take a label", label_tok.span)
        elif header == "participant":
            role_tok = self.expect(TokenKind.IDENTIFIER, "role identifier")
            self.expect_keyword("as")
            resp_tok = self.expect(TokenKind.IDENTIFIER, "responsibility")
            self._check_enum(resp_tok, ("Responsible", "Accountable", "Consulted", "Informed"))
            node.attrs = {"role": role_tok.text, "responsibility": resp_tok.text}
            node.ref_spans = {"role": (role_tok.span,)}
        elif header == "flow":
            src = self.expect(TokenKind.IDENTIFIER, "activity identifier")
            self.expect(TokenKind.ARROW, "'->'")
            dst = self.expect(TokenKind.IDENTIFIER, "activity identifier")
            node.attrs = {"source": src.text, "target": dst.text}
            node.ref_spans = {"source": (src.span,), "target": (dst.span,)}

        if header == "method" or self.tok.is_punct("{"):
            self.parse_block(block, node, depth)
        node.span = start.span.cover(self.prev_span())
        for attr in block.attrs:
            if attr.required_for(node.kind) and attr.name not in node.attrs:
                self.report("P014", f"{block.tag} {node.id or ''} lacks required "
                            f"attribute '{attr.name}'".replace("  ", " "), node.span)
        return node

    def parse_block(self, block: Block, node: Node, depth: int) -> None:
        self.expect_punct("{")
        seen_children: set[str] = set()
        while True:
            tok = self.tok
            if tok.is_punct("}"):
                self.advance()
                return
            if tok.kind is TokenKind.EOF:
                self.fail("expected '}'")
            try:
                if tok.kind is TokenKind.KEYWORD and block.attr(tok.text) is not None:
                    self.parse_attribute(block, block.attr(tok.text), node)
                elif tok.kind is TokenKind.KEYWORD and tok.text in block.children:
                    child = self.parse_declaration(BLOCKS[tok.text], depth + 1)
                    allowed = block.child_kinds.get(child.tag)
                    if allowed is not None and node.kind not in allowed:
                        self.report("P013", f"'{child.tag}' is not applicable to "
                                    f"{block.tag} kind {node.kind}", child.span)
                    if child.tag in block.unique_children:
                        if child.tag in seen_children:
                            self.report("P012", f"duplicate '{child.tag}' section", child.span)
                        seen_children.add(child.tag)
                    node.children.append(child)
                else:
                    self.fail(f"unexpected item in {block.tag} block", tok)
            except _SyntaxError as exc:
                self.diagnostics.append(exc.diagnostic)
                node.children.append(error_node(exc.diagnostic.span))
                self.synchronize()

    def parse_attribute(self, block: Block, attr: Attr, node: Node) -> None:
        key_tok = self.advance()
        spans: tuple[SourceSpan, ...] = ()
        value: Union[str, bool, Decimal, int, tuple[str, ...], None]
        if attr.type in ("str", "nonempty"):
            tok = self.expect(TokenKind.STRING, "string")
            value = tok.value
            if attr.type == "nonempty" and not value.strip():
                self.report("P013", f"'{attr.name}' must not be empty", tok.span)
        elif attr.type == "bool":
            tok = self.tok
            if not (tok.is_keyword("true") or tok.is_keyword("false")):
                self.fail("expected 'true' or 'false'")
            value = self.advance().text == "true"
        elif attr.type == "num":
            value = Decimal(self.expect(TokenKind.NUMBER, "number").text)
        elif attr.type == "posint":
            tok = self.expect(TokenKind.NUMBER, "integer")
            if "." in tok.text or int(tok.text) < 1:
                self.report("P013", f"'{attr.name}' must be a positive integer", tok.span)
                value = None
            else:
                value = int(tok.text)
        elif attr.type == "ref":
            tok = self.expect(TokenKind.IDENTIFIER, "identifier")
            value, spans = tok.text, (tok.span,)
        elif attr.type == "refs":
            toks = [self.expect(TokenKind.IDENTIFIER, "identifier")]
            while self.tok.is_punct(","):
                self.advance()
                toks.append(self.expect(TokenKind.IDENTIFIER, "identifier"))
            value = tuple(t.text for t in toks)
            spans = tuple(t.span for t in toks)
        else:  # enum
            tok = self.expect(TokenKind.IDENTIFIER, f"{attr.name} value")
            self._check_enum(tok, attr.choices)
            value = tok.text
        if not attr.applies_to(node.kind):
            self.report("P013", f"'{attr.name}' is not applicable to {block.tag} kind "
                        f"{node.kind}", key_tok.span)
        if attr.name in node.attrs:
            self.report("P012", f"duplicate attribute '{attr.name}'", key_tok.span)
            return
        if value is not None:
            node.attrs[attr.name] = value
            if spans:
                node.ref_spans[attr.name] = spans

    def _check_enum(self, tok: Token, choices: tuple[str, ...]) -> None:
        if tok.text not in choices:
            self.report("P011", f"unknown literal {tok.text!r}; expected one of "
                        + ", ".join(choices), tok.span)


def parse(text: Union[str, bytes]) -> ParseResult:
    """Parse a whole ``.mlproc`` file. Total: never raises on bad input."""
    tokens, diagnostics = tokenize(text)
    parser = Parser(tokens)
    root = parser.parse_file()
    # unclosed blocks at end of input report once per level; keep one
    unique: list[Diagnostic] = []
    seen = set()
    for d in diagnostics + parser.diagnostics:
        key = (d.code, d.message, d.span)
        if key not in seen:
            seen.add(key)
            unique.append(d)
    return ParseResult(root, unique)
