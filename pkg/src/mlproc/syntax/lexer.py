"""Tokenizer for ``.mlproc`` source text.

Whitespace, ``//`` comments and rejected characters are kept as leading
trivia on the following token, so joining ``trivia + text`` over the token
stream gives back the input exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from ..diagnostics import Diagnostic, SourceSpan

KEYWORDS = frozenset("""
    method role technique artifact resource activity flow participant
    input output uses applies goal criterion requirement hyperparameter
    deployment monitoring metric flaw optional requiresAll description
    location template baseline target dataType pattern strategy inference
    min max selected external ranking attribute correlatedTo expertIn as
    true false statement evaluates relatedTo derivedFrom collectedFrom
    platform scripts dataset feature type searchSpace optimal measure
    threshold direction unit requires interpreter
""".split())

PUNCT = frozenset("{}:,")

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class TokenKind(enum.Enum):
    KEYWORD = "Keyword"
    IDENTIFIER = "Identifier"
    STRING = "String"
    NUMBER = "Number"
    ARROW = "Arrow"
    PUNCT = "Punct"
    EOF = "Eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    trivia: str = field(default="", repr=False)
    # decoded string contents for STRING tokens
    value: str = field(default="", repr=False)

    def is_punct(self, ch: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.text == ch

    def is_keyword(self, word: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text == word


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ("0" <= ch <= "9")


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


class _Cursor:
    """Character cursor that tracks byte offset, line and column."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.byte = 0
        self.line = 1
        self.col = 1

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        self.byte += len(ch.encode("utf-8", "surrogatepass"))
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def mark(self) -> tuple[int, int, int, int]:
        return self.pos, self.byte, self.line, self.col

    def span_from(self, mark: tuple[int, int, int, int]) -> SourceSpan:
        _, byte, line, col = mark
        return SourceSpan(byte, self.byte, line, col)


def tokenize(text: Union[str, bytes]) -> tuple[list[Token], list[Diagnostic]]:
    """Split ``text`` into tokens; never raises on malformed input."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    cur = _Cursor(text)
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    trivia_start = 0

    def emit(kind: TokenKind, mark, value: str = "") -> None:
        nonlocal trivia_start
        start = mark[0]
        tokens.append(Token(kind, text[start:cur.pos], cur.span_from(mark),
                            text[trivia_start:start], value))
        trivia_start = cur.pos

    while cur.pos < len(text):
        ch = cur.peek()
        if ch in " \t\r\n":
            cur.advance()
            continue
        if ch == "/" and cur.peek(1) == "/":
            while cur.pos < len(text) and cur.peek() != "\n":
                cur.advance()
            continue
        mark = cur.mark()
        if _is_ident_start(ch):
            while _is_ident_char(cur.peek()):
                cur.advance()
            word = text[mark[0]:cur.pos]
            emit(TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENTIFIER, mark)
        elif _is_digit(ch) or (ch == "-" and _is_digit(cur.peek(1))):
            cur.advance()
            while _is_digit(cur.peek()):
                cur.advance()
            if cur.peek() == "." and _is_digit(cur.peek(1)):
                cur.advance()
                while _is_digit(cur.peek()):
                    cur.advance()
            emit(TokenKind.NUMBER, mark)
        elif ch == "-" and cur.peek(1) == ">":
            cur.advance()
            cur.advance()
            emit(TokenKind.ARROW, mark)
        elif ch in PUNCT:
            cur.advance()
            emit(TokenKind.PUNCT, mark)
        elif ch == '"':
            cur.advance()
            chars: list[str] = []
            closed = False
            while cur.pos < len(text):
                c = cur.peek()
                if c == "\n":
                    break
                cur.advance()
                if c == '"':
                    closed = True
                    break
                if c == "\\" and cur.peek() in _ESCAPES:
                    chars.append(_ESCAPES[cur.advance()])
                else:
                    chars.append(c)
            if closed:
                emit(TokenKind.STRING, mark, "".join(chars))
            else:
                # the broken literal becomes trivia
                diags.append(Diagnostic.error("P001", "unterminated string literal",
                                              cur.span_from(mark)))
        else:
            cur.advance()
            diags.append(Diagnostic.error("P002", f"invalid character {ch!r}",
                                          cur.span_from(mark)))
    eof_mark = cur.mark()
    emit(TokenKind.EOF, eof_mark)
    return tokens, diags


def reconstruct(tokens: list[Token]) -> str:
    return "".join(t.trivia + t.text for t in tokens)
