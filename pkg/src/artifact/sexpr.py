"""Minimal s-expression reader shared by every text format in the package."""

from __future__ import annotations

import re

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


class ParseError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split(";", 1)[0]
        out.extend(_TOKEN.findall(line))
    return out


def _read(tokens: list[str], pos: int):
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ParseError("unbalanced '('")
            if tokens[pos] == ")":
                return items, pos + 1
            item, pos = _read(tokens, pos)
            items.append(item)
    if tok == ")":
        raise ParseError("unexpected ')'")
    return tok, pos + 1


def parse_all(text: str) -> list:
    """Parse every top-level form in ``text``; atoms stay strings, lists become lists."""
    tokens = tokenize(text)
    forms = []
    pos = 0
    while pos < len(tokens):
        form, pos = _read(tokens, pos)
        forms.append(form)
    return forms


def parse_one(text: str):
    forms = parse_all(text)
    if len(forms) != 1:
        raise ParseError(f"expected one form, found {len(forms)}")
    return forms[0]


def dump(form) -> str:
    if isinstance(form, list):
        return "(" + " ".join(dump(f) for f in form) + ")"
    return str(form)
