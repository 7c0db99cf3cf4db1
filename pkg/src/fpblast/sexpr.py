"""Minimal s-expression reader with source positions.

Atoms are :class:`Atom` strings carrying ``line``/``col``; lists are
:class:`SList` lists carrying the position of their opening parenthesis.
``;`` starts a comment that runs to end of line.  ``"..."`` and ``|...|``
are single atoms (quotes are kept for strings, bars are stripped).
"""

from __future__ import annotations


class SexprError(ValueError):
    def __init__(self, message, line=0, col=0):
        super().__init__("%d:%d: %s" % (line, col, message) if line else message)
        self.line = line
        self.col = col


class Atom(str):
    line = 0
    col = 0

    def __new__(cls, text, line=0, col=0, quoted=False):
        obj = super().__new__(cls, text)
        obj.line = line
        obj.col = col
        obj.quoted = quoted
        return obj


class SList(list):
    line = 0
    col = 0


def tokenize(text: str):
    i, n = 0, len(text)
    line, col = 1, 1
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield ch, line, col, False
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch in "\"|":
            j = i + 1
            while j < n and text[j] != ch:
                j += 1
            if j >= n:
                raise SexprError("unterminated %s" % ("string" if ch == '"' else "quoted symbol"),
                                 start_line, start_col)
            body = text[i + 1:j]
            tok = '"' + body + '"' if ch == '"' else body
            newlines = body.count("\n")
            if newlines:
                line += newlines
                col = len(body) - body.rfind("\n")
            else:
                col += j + 1 - i
            i = j + 1
            yield tok, start_line, start_col, True
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();\"":
            j += 1
        yield text[i:j], start_line, start_col, False
        col += j - i
        i = j


def parse_all(text: str) -> list:
    """All top-level expressions in ``text``."""
    stack: list[SList] = []
    out: list = []
    for tok, line, col, quoted in tokenize(text):
        if tok == "(" and not quoted:
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")" and not quoted:
            if not stack:
                raise SexprError("unexpected ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            atom = Atom(tok, line, col, quoted)
            (stack[-1] if stack else out).append(atom)
    if stack:
        raise SexprError("unbalanced '(' opened here", stack[-1].line, stack[-1].col)
    return out


def parse_one(text: str):
    items = parse_all(text)
    if len(items) != 1:
        raise SexprError("expected exactly one expression, found %d" % len(items))
    return items[0]


def dumps(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(dumps(e) for e in x) + ")"
    if getattr(x, "quoted", False) and not x.startswith('"'):
        return "|%s|" % x
    return str(x)
