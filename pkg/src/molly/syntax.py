"""Shared tokenizer and cursor for the text formats (roles, procs, values)."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

PUNCT = {"(": "(", ")": ")", "[": "[", "]": "]", ",": ",", ";": ";", "=": "="}


@dataclass(frozen=True)
class Token:
    kind: str  # one of the PUNCT keys, "|->", "str", "int", "ident", "eof"
    text: str
    line: int
    col: int
    value: object = None


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def adv(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if src[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = src[i]
        if c in " \t\r\n":
            adv(1)
        elif c == "#":
            while i < n and src[i] != "\n":
                adv(1)
        elif src.startswith("(*", i):
            l0, c0 = line, col
            depth = 0
            while i < n:
                if src.startswith("(*", i):
                    depth += 1
                    adv(2)
                elif src.startswith("*)", i):
                    depth -= 1
                    adv(2)
                    if depth == 0:
                        break
                else:
                    adv(1)
            if depth:
                raise ParseError("unterminated comment", l0, c0, "'*)'")
        elif src.startswith("|->", i):
            toks.append(Token("|->", "|->", line, col))
            adv(3)
        elif c in PUNCT:
            toks.append(Token(c, c, line, col))
            adv(1)
        elif c == '"':
            l0, c0 = line, col
            adv(1)
            buf = []
            while True:
                if i >= n or src[i] == "\n":
                    raise ParseError("unterminated string", l0, c0, "'\"'")
                if src[i] == "\\" and i + 1 < n:
                    buf.append(src[i + 1])
                    adv(2)
                elif src[i] == '"':
                    adv(1)
                    break
                else:
                    buf.append(src[i])
                    adv(1)
            s = "".join(buf)
            toks.append(Token("str", s, l0, c0, s))
        elif c.isdigit() or (c == "-" and i + 1 < n and src[i + 1].isdigit()):
            l0, c0 = line, col
            j = i + 1
            while j < n and src[j].isdigit():
                j += 1
            text = src[i:j]
            adv(j - i)
            toks.append(Token("int", text, l0, c0, int(text)))
        elif c.isalpha() or c == "_":
            l0, c0 = line, col
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            adv(j - i)
            toks.append(Token("ident", text, l0, c0, text))
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


class Cursor:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    @classmethod
    def of(cls, src: str) -> "Cursor":
        return cls(tokenize(src))

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        want = what or (repr(text) if text else kind)
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {got}", t.line, t.col, want)

    def fail(self, what: str) -> ParseError:
        t = self.peek()
        got = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"unexpected {got}", t.line, t.col, what)

    def int_(self) -> int:
        return self.expect("int", what="a number").value  # type: ignore[return-value]

    def str_(self) -> str:
        return self.expect("str", what="a string literal").value  # type: ignore[return-value]

    def done(self) -> None:
        self.expect("eof", what="end of input")
