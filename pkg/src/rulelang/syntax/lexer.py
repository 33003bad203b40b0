from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

from .diagnostics import SYNTAX, ParseError, diag

KEYWORDS = {
    "rules", "class", "extends", "def", "defun", "if", "else", "while", "for", "in",
    "some", "each", "not", "and", "or", "is", "new", "infer", "return", "skip",
    "self", "super", "True", "False", "None",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<str>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<name>\$?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|!=|<=|>=|[-+*/%<>(){}\[\],;:|.=])
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


@dataclass(frozen=True)
class Token:
    kind: str  # name, kw, int, str, op, eof
    text: str
    value: object
    line: int
    col: int

    @property
    def loc(self) -> tuple:
        return (self.line, self.col)


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(source: str, allow_internal: bool = False) -> List[Token]:
    """Split source text into tokens.  Names starting with '$' are reserved for
    compiler-generated variables and rejected unless ``allow_internal``."""
    tokens: List[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError([diag(SYNTAX, f"unexpected character {source[pos]!r}", (line, col))])
        kind = m.lastgroup
        text = m.group()
        if kind in ("ws", "comment"):
            pass
        elif kind == "int":
            tokens.append(Token("int", text, int(text), line, col))
        elif kind == "str":
            tokens.append(Token("str", text, unescape(text[1:-1]), line, col))
        elif kind == "name":
            if text.startswith("$") and not allow_internal:
                raise ParseError([diag(SYNTAX, f"reserved identifier {text!r}", (line, col))])
            tokens.append(Token("kw" if text in KEYWORDS else "name", text, text, line, col))
        else:
            tokens.append(Token("op", text, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", None, line, pos - line_start + 1))
    return tokens
