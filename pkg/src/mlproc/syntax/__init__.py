"""Concrete syntax: tokenizer, parser and canonical printer."""
from .ast import BLOCKS, Node
from .lexer import KEYWORDS, Token, TokenKind, reconstruct, tokenize
from .parser import ParseResult, parse
from .printer import print_canonical

__all__ = ["BLOCKS", "KEYWORDS", "Node", "ParseResult", "Token", "TokenKind", "parse",
           "print_canonical", "reconstruct", "tokenize"]
