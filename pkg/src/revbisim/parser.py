"""Concrete syntax for terms and formulas.

Term grammar: `0` is nil, `a.P` prefixes, `a!.P` marks an executed action
(`!` stands in for the dagger), `P + Q` chooses, `.` binds tighter than `+`,
`+` parses left-associatively, parentheses group, whitespace is ignored.

Formula grammar: `tt`, `init`, `~phi`, `phi & phi` (left-associative,
looser than modalities and negation), `<a>phi` / `<a!>phi` strong forward
and backward diamonds, `<<tau>>phi` / `<<b>>phi` weak forward diamonds,
`<<tau!>>phi` / `<<b!>>phi` weak backward diamonds (b must not be tau), and
`until(phi1, a, phi2)`.

Rendering is canonical: `parse(render(x)) == x` for every AST, and
re-rendering a parsed string is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .logic import (
    And,
    BackDiamond,
    Formula,
    Init,
    Not,
    StrongDiamond,
    Truth,
    Until,
    WeakBackDiamond,
    WeakBackTauDiamond,
    WeakDiamond,
    WeakTauDiamond,
)
from .term import Action, Choice, ExecPrefix, Nil, NIL, Prefix, ProcessTerm

__all__ = [
    "ParseError",
    "parse_term",
    "parse_formula",
    "render_term",
    "render_formula",
]


@dataclass
class ParseError(ValueError):
    position: int
    expected: str
    found: str

    def __str__(self) -> str:
        return f"at offset {self.position}: expected {self.expected}, found {self.found!r}"


_PUNCT = {
    "<<": "<<",
    ">>": ">>",
    ".": ".",
    "+": "+",
    "!": "!",
    "(": "(",
    ")": ")",
    "&": "&",
    "~": "~",
    "<": "<",
    ">": ">",
    ",": ",",
    "0": "0",
}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        i, n = 0, len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            two = text[i : i + 2]
            if two in ("<<", ">>"):
                self.toks.append((two, two, i))
                i += 2
                continue
            if c in _PUNCT:
                self.toks.append((c, c, i))
                i += 1
                continue
            if c.isascii() and c.islower():
                j = i + 1
                while j < n and (text[j].islower() or text[j].isdigit() or text[j] == "_"):
                    j += 1
                self.toks.append(("ident", text[i:j], i))
                i = j
                continue
            raise ParseError(i, "a token", c)
        self.toks.append(("eof", "end of input", n))
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.toks[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(tok[2], what or kind, tok[1])
        return self.next()

    def fail(self, expected: str):
        tok = self.peek()
        raise ParseError(tok[2], expected, tok[1])


def parse_term(text: str) -> ProcessTerm:
    """Parse a process term; the result need not be reachable."""
    toks = _Tokens(text)
    p = _term(toks)
    toks.expect("eof", "end of input")
    return p


def _term(toks: _Tokens) -> ProcessTerm:
    p = _prefix_term(toks)
    while toks.peek()[0] == "+":
        toks.next()
        p = Choice(p, _prefix_term(toks))
    return p


def _prefix_term(toks: _Tokens) -> ProcessTerm:
    kind, text, pos = toks.peek()
    if kind == "0":
        toks.next()
        return NIL
    if kind == "(":
        toks.next()
        p = _term(toks)
        toks.expect(")", ")")
        return p
    if kind == "ident":
        toks.next()
        action = Action(text)
        executed = False
        if toks.peek()[0] == "!":
            toks.next()
            executed = True
        toks.expect(".", ".")
        cont = _prefix_term(toks)
        return ExecPrefix(action, cont) if executed else Prefix(action, cont)
    toks.fail("a term ('0', an action prefix, or '(')")


def parse_formula(text: str) -> Formula:
    toks = _Tokens(text)
    f = _formula(toks)
    toks.expect("eof", "end of input")
    return f


def _formula(toks: _Tokens) -> Formula:
    f = _unary(toks)
    while toks.peek()[0] == "&":
        toks.next()
        f = And(f, _unary(toks))
    return f


def _unary(toks: _Tokens) -> Formula:
    kind, text, pos = toks.peek()
    if kind == "~":
        toks.next()
        return Not(_unary(toks))
    if kind == "<":
        toks.next()
        _, name, _ = toks.expect("ident", "an action name")
        back = toks.peek()[0] == "!"
        if back:
            toks.next()
        toks.expect(">", ">")
        body = _unary(toks)
        action = Action(name)
        return BackDiamond(action, body) if back else StrongDiamond(action, body)
    if kind == "<<":
        toks.next()
        _, name, npos = toks.expect("ident", "an action name")
        back = toks.peek()[0] == "!"
        if back:
            toks.next()
        toks.expect(">>", ">>")
        body = _unary(toks)
        if name == "tau":
            return WeakBackTauDiamond(body) if back else WeakTauDiamond(body)
        action = Action(name)
        return WeakBackDiamond(action, body) if back else WeakDiamond(action, body)
    if kind == "(":
        toks.next()
        f = _formula(toks)
        toks.expect(")", ")")
        return f
    if kind == "ident":
        if text == "tt":
            toks.next()
            return Truth()
        if text == "init":
            toks.next()
            return Init()
        if text == "until":
            toks.next()
            toks.expect("(", "(")
            left = _formula(toks)
            toks.expect(",", ",")
            _, name, _ = toks.expect("ident", "an action name")
            toks.expect(",", ",")
            right = _formula(toks)
            toks.expect(")", ")")
            return Until(left, Action(name), right)
    toks.fail("a formula ('tt', 'init', '~', a modality, 'until', or '(')")


def render_term(p: ProcessTerm, dagger: bool = False) -> str:
    """Canonical text for p; with dagger=True the executed mark prints as a dagger."""
    mark = "†" if dagger else "!"

    def cont(q: ProcessTerm) -> str:
        return f"({go(q)})" if isinstance(q, Choice) else go(q)

    def go(q: ProcessTerm) -> str:
        match q:
            case Nil():
                return "0"
            case Prefix(a, c):
                return f"{a.name}.{cont(c)}"
            case ExecPrefix(a, c):
                return f"{a.name}{mark}.{cont(c)}"
            case Choice(left, right):
                rhs = f"({go(right)})" if isinstance(right, Choice) else go(right)
                return f"{go(left)} + {rhs}"
        raise TypeError(f"not a process term: {q!r}")

    return go(p)


def render_formula(f: Formula) -> str:
    def tight(g: Formula) -> str:
        # Argument position of ~ and the modalities: only & needs parens.
        return f"({go(g)})" if isinstance(g, And) else go(g)

    def go(g: Formula) -> str:
        match g:
            case Truth():
                return "tt"
            case Init():
                return "init"
            case Not(body):
                return f"~{tight(body)}"
            case And(left, right):
                rhs = f"({go(right)})" if isinstance(right, And) else go(right)
                return f"{go(left)} & {rhs}"
            case StrongDiamond(a, body):
                return f"<{a.name}>{tight(body)}"
            case BackDiamond(a, body):
                return f"<{a.name}!>{tight(body)}"
            case WeakTauDiamond(body):
                return f"<<tau>>{tight(body)}"
            case WeakDiamond(a, body):
                return f"<<{a.name}>>{tight(body)}"
            case WeakBackTauDiamond(body):
                return f"<<tau!>>{tight(body)}"
            case WeakBackDiamond(a, body):
                return f"<<{a.name}!>>{tight(body)}"
            case Until(left, a, right):
                return f"until({go(left)}, {a.name}, {go(right)})"
        raise TypeError(f"not a formula: {g!r}")

    return go(f)
