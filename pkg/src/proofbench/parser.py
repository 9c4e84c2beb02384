"""Parser and printer for a TPTP-style untyped FOF problem format.

Accepted statements:

    fof(name, role, formula).
    include('relative/path').
    % line comments

Formula grammar is the plain FOF core: quantifiers `![X]:`/`?[X]:`,
connectives `~ & | => <= <=> <~>`, equality `= !=`, `$true`/`$false`,
parentheses.  `&` and `|` chains associate left; mixing distinct binary
connectives without parentheses is a syntax error, as in TPTP.

Free variables in a formula are universally closed with a recorded
warning rather than rejected.  Quoted atoms ('foo') are normalized to
bare identifiers when the quoted text already is one.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .fol import (
    And, AnnotatedFormula, App, Atom, BINARY, Clause, Eq, Exists, FALSE,
    Forall, Formula, Iff, Implies, Literal, Not, Or, Problem, ProblemError,
    ROLES, TRUE, TrueF, FalseF, Term, Var, make_problem, universal_closure,
)


class ParseError(ProblemError):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = ""):
        where = f"{source or '<input>'}:{line}:{col}" if line else (source or "<input>")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.col = col
        self.source = source


class IncludeError(ProblemError):
    pass


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<op><=>|<~>|=>|<=|!=|=|&|\||~|!|\?|\(|\)|\[|\]|,|\.|:)
  | (?P<dollar>\$[a-z][a-zA-Z0-9_]*)
  | (?P<upper>[A-Z][a-zA-Z0-9_]*)
  | (?P<lower>[a-z0-9][a-zA-Z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "") -> list:
    tokens = []
    pos, line, linestart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - linestart + 1, source)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            tokens.append(Token(kind, tok, line, m.start() - linestart + 1))
        line += tok.count("\n")
        if "\n" in tok:
            linestart = m.start() + tok.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - linestart + 1))
    return tokens


def _unquote(text: str) -> str:
    body = text[1:-1].replace("\\'", "'").replace("\\\\", "\\")
    return body


_IDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


def normalize_name(text: str) -> str:
    """Quoted atoms collapse to bare identifiers when possible."""
    if text.startswith("'"):
        body = _unquote(text)
        return body
    return text


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens, source=""):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg: str):
        t = self.cur
        raise ParseError(msg, t.line, t.col, self.source)

    def eat(self, text: str) -> Token:
        if self.cur.text != text:
            self.error(f"expected {text!r}, found {self.cur.text!r}")
        t = self.cur
        self.pos += 1
        return t

    def take(self) -> Token:
        t = self.cur
        self.pos += 1
        return t

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        lhs = self.unitary()
        op = self.cur.text
        if op in ("&", "|"):
            parts = [lhs]
            while self.cur.text == op:
                self.take()
                parts.append(self.unitary())
            if self.cur.text in ("&", "|", "=>", "<=", "<=>", "<~>"):
                self.error(f"cannot mix {op!r} with {self.cur.text!r} without parentheses")
            out = parts[0]
            for p in parts[1:]:
                out = (And if op == "&" else Or)(out, p)
            return out
        if op in ("=>", "<=", "<=>", "<~>"):
            self.take()
            rhs = self.unitary()
            if self.cur.text in ("&", "|", "=>", "<=", "<=>", "<~>"):
                self.error(f"{op!r} is non-associative; use parentheses")
            if op == "=>":
                return Implies(lhs, rhs)
            if op == "<=":
                return Implies(rhs, lhs)
            if op == "<=>":
                return Iff(lhs, rhs)
            return Not(Iff(lhs, rhs))
        return lhs

    def unitary(self) -> Formula:
        t = self.cur
        if t.text == "(":
            self.take()
            f = self.formula()
            self.eat(")")
            return f
        if t.text == "~":
            self.take()
            return Not(self.unitary())
        if t.text in ("!", "?"):
            quant = Forall if t.text == "!" else Exists
            self.take()
            self.eat("[")
            names = [self.variable()]
            while self.cur.text == ",":
                self.take()
                names.append(self.variable())
            self.eat("]")
            self.eat(":")
            body = self.unitary()
            for name in reversed(names):
                body = quant(name, body)
            return body
        if t.kind == "dollar":
            self.take()
            if t.text == "$true":
                return TRUE
            if t.text == "$false":
                return FALSE
            self.error(f"unknown defined constant {t.text!r}")
        return self.atomic()

    def variable(self) -> str:
        t = self.cur
        if t.kind != "upper":
            self.error(f"expected variable, found {t.text!r}")
        self.take()
        return t.text

    def atomic(self) -> Formula:
        lhs = self.term()
        if self.cur.text == "=":
            self.take()
            return Eq(lhs, self.term())
        if self.cur.text == "!=":
            self.take()
            return Not(Eq(lhs, self.term()))
        if isinstance(lhs, Var):
            self.error(f"variable {lhs.name!r} cannot stand as a formula")
        return Atom(lhs.symbol, lhs.args)

    def term(self) -> Term:
        t = self.cur
        if t.kind == "upper":
            self.take()
            return Var(t.text)
        if t.kind in ("lower", "quoted"):
            self.take()
            name = normalize_name(t.text)
            args = []
            if self.cur.text == "(":
                self.take()
                args.append(self.term())
                while self.cur.text == ",":
                    self.take()
                    args.append(self.term())
                self.eat(")")
            return App(name, tuple(args))
        self.error(f"expected term, found {t.text!r}")

    # -- statements ---------------------------------------------------------

    def name(self) -> str:
        t = self.cur
        if t.kind in ("lower", "quoted"):
            self.take()
            return normalize_name(t.text)
        self.error(f"expected name, found {t.text!r}")

    def statement(self):
        t = self.cur
        if t.text == "fof":
            self.take()
            self.eat("(")
            name = self.name()
            self.eat(",")
            role = self.name()
            if role not in ROLES:
                self.error(f"unknown role {role!r} (expected one of {', '.join(ROLES)})")
            self.eat(",")
            f = self.formula()
            self.eat(")")
            self.eat(".")
            return ("fof", name, role, f)
        if t.text == "include":
            self.take()
            self.eat("(")
            path = self.cur
            if path.kind != "quoted":
                self.error("include path must be quoted")
            self.take()
            self.eat(")")
            self.eat(".")
            return ("include", _unquote(path.text))
        self.error(f"expected fof or include, found {t.text!r}")

    def statements(self):
        out = []
        while self.cur.kind != "eof":
            out.append(self.statement())
        return out


def _parse_statements(text: str, source: str) -> list:
    return _Parser(tokenize(text, source), source).statements()


def parse_problem(text: str, include_dirs=(), source: str = "<string>") -> Problem:
    """Parse a problem, resolving includes and auto-closing free variables."""
    formulas = []
    warnings = []
    seen_files: set = set()

    def ingest(stmts, current_dir):
        for stmt in stmts:
            if stmt[0] == "include":
                rel = stmt[1]
                for d in [current_dir] + list(include_dirs):
                    if d is None:
                        continue
                    cand = os.path.join(d, rel)
                    if os.path.exists(cand):
                        real = os.path.realpath(cand)
                        if real in seen_files:
                            raise IncludeError(f"circular include of {rel!r}")
                        seen_files.add(real)
                        with open(cand, encoding="utf-8") as fh:
                            ingest(_parse_statements(fh.read(), cand),
                                   os.path.dirname(cand))
                        break
                else:
                    raise IncludeError(f"cannot resolve include {rel!r}")
            else:
                _, name, role, f = stmt
                closed, closed_vars = universal_closure(f)
                if closed_vars:
                    warnings.append(
                        f"{name}: free variables auto-closed: {', '.join(closed_vars)}")
                formulas.append(AnnotatedFormula(name, role, closed))

    ingest(_parse_statements(text, source), None)
    return make_problem(formulas, warnings)


def parse_problem_file(path: str, include_dirs=()) -> Problem:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    dirs = [os.path.dirname(path)] + list(include_dirs)
    return parse_problem(text, dirs, source=path)


def parse_formula(text: str) -> Formula:
    """Parse a bare formula (no fof wrapper); free variables left open."""
    p = _Parser(tokenize(text), "<formula>")
    f = p.formula()
    if p.cur.kind != "eof":
        p.error(f"trailing input {p.cur.text!r}")
    return f


# ---------------------------------------------------------------------------
# Printer

def _print_symbol(name: str) -> str:
    if _IDENT_RE.match(name) or name.isdigit():
        return name
    body = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{body}'"


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return _print_symbol(t.symbol)
    return f"{_print_symbol(t.symbol)}({','.join(print_term(a) for a in t.args)})"


def print_formula(f: Formula) -> str:
    """Emit text that reparses to an alpha-equivalent formula.

    Binary connectives are fully parenthesized except same-operator left
    spines, which print as flat chains and re-fold identically.
    """
    if isinstance(f, Atom):
        if not f.args:
            return _print_symbol(f.pred)
        return f"{_print_symbol(f.pred)}({','.join(print_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{print_term(f.lhs)} = {print_term(f.rhs)}"
    if isinstance(f, TrueF):
        return "$true"
    if isinstance(f, FalseF):
        return "$false"
    if isinstance(f, Not):
        if isinstance(f.sub, Eq):
            return f"{print_term(f.sub.lhs)} != {print_term(f.sub.rhs)}"
        return f"~ {_print_unitary(f.sub)}"
    if isinstance(f, (And, Or)):
        op, cls = ("&", And) if isinstance(f, And) else ("|", Or)
        parts = []
        g = f
        while isinstance(g, cls):
            parts.append(g.rhs)
            g = g.lhs
        parts.append(g)
        parts.reverse()
        return "(" + f" {op} ".join(_print_unitary(p) for p in parts) + ")"
    if isinstance(f, Implies):
        return f"({_print_unitary(f.lhs)} => {_print_unitary(f.rhs)})"
    if isinstance(f, Iff):
        return f"({_print_unitary(f.lhs)} <=> {_print_unitary(f.rhs)})"
    if isinstance(f, Forall):
        return f"![{f.var}]: {_print_unitary(f.body)}"
    if isinstance(f, Exists):
        return f"?[{f.var}]: {_print_unitary(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _print_unitary(f: Formula) -> str:
    # binary operands need their own parentheses; print_formula adds them
    return print_formula(f)


def print_annotated(af: AnnotatedFormula) -> str:
    return f"fof({_print_symbol(af.name)}, {af.role}, {print_formula(af.formula)})."


def print_problem(p: Problem) -> str:
    return "\n".join(print_annotated(af) for af in p.formulas) + "\n"


def print_literal(lit: Literal) -> str:
    if isinstance(lit.atom, Eq):
        op = "=" if lit.positive else "!="
        return f"{print_term(lit.atom.lhs)} {op} {print_term(lit.atom.rhs)}"
    body = print_formula(lit.atom)
    return body if lit.positive else f"~ {body}"


def print_clause(c: Clause, role: str = "axiom") -> str:
    """Clause dump line: cnf(id, role, (l1 | l2 | ...))."""
    if c.literals:
        body = " | ".join(print_literal(l) for l in c.literals)
    else:
        body = "$false"
    return f"cnf({_print_symbol(c.clause_id or c.origin or 'c')}, {role}, ({body}))."
