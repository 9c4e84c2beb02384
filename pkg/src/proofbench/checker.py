"""Independent proof-object verification by replay.

This module re-derives a proof from scratch: it renames clause instances
by its own counter, recomputes every unifier, and tracks the tableau
agenda itself, trusting nothing from the proof object beyond clause ids,
literal indices and path positions.  It shares no step-application code
with the search; substitutions here are eagerly composed maps rather
than the prover's trail-and-walk bindings, so a defect in one side's
unification cannot hide in the other.

A proof checks iff replaying its steps closes every branch and its
used_premises field matches the origins of the clauses it references.
"""
from __future__ import annotations

from .clausify import ClauseSet
from .fol import App, Atom, Eq, Literal, Term, Var
from .prover import ExtensionStep, ProofObject, ReductionStep, StartStep


class CheckError(Exception):
    """Structurally malformed proof (unknown clause id, bad step kind)."""


def _apply(theta: dict, t: Term) -> Term:
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, tuple(_apply(theta, a) for a in t.args))


def _occurs(name: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs(name, a) for a in t.args)


def _mgu(pairs) -> dict | None:
    """Most general unifier of term pairs, or None; inputs pre-applied."""
    theta: dict = {}
    work = list(pairs)
    while work:
        a, b = work.pop()
        a = _apply(theta, a)
        b = _apply(theta, b)
        if a == b:
            continue
        if isinstance(a, Var) or isinstance(b, Var):
            if not isinstance(a, Var):
                a, b = b, a
            if _occurs(a.name, b):
                return None
            delta = {a.name: b}
            theta = {v: _apply(delta, t) for v, t in theta.items()}
            theta[a.name] = b
            continue
        if a.symbol != b.symbol or len(a.args) != len(b.args):
            return None
        work.extend(zip(a.args, b.args))
    return theta


def _compose(theta: dict, delta: dict) -> dict:
    out = {v: _apply(delta, t) for v, t in theta.items()}
    for v, t in delta.items():
        out.setdefault(v, t)
    return out


def _lit_args(lit: Literal) -> tuple:
    if isinstance(lit.atom, Eq):
        return (lit.atom.lhs, lit.atom.rhs)
    return lit.atom.args


def _lit_key(lit: Literal) -> tuple:
    if isinstance(lit.atom, Eq):
        return ("=", 2)
    return (lit.atom.pred, len(lit.atom.args))


def _rename(lit: Literal, k: int) -> Literal:
    def r(t):
        if isinstance(t, Var):
            return Var(f"{t.name}_i{k}")
        if not t.args:
            return t
        return App(t.symbol, tuple(r(a) for a in t.args))

    if isinstance(lit.atom, Eq):
        return Literal(lit.positive, Eq(r(lit.atom.lhs), r(lit.atom.rhs)))
    return Literal(lit.positive,
                   Atom(lit.atom.pred, tuple(r(a) for a in lit.atom.args)))


def check_proof(proof: ProofObject, clause_set: ClauseSet) -> bool:
    by_id = {c.clause_id: c for c in clause_set.clauses}
    theta: dict = {}
    agenda: list = []        # (literal instance, path tuple)
    used: set = set()
    counter = 0
    started = False

    for step in proof.steps:
        if isinstance(step, StartStep):
            if started:
                return False
            started = True
            clause = by_id.get(step.clause_id)
            if clause is None:
                raise CheckError(f"unknown clause id {step.clause_id!r}")
            counter += 1
            agenda = [(_rename(l, counter), ()) for l in clause.literals]
            used.add(clause.origin)
            continue
        if not started or not agenda:
            return False
        goal, path = agenda.pop(0)
        if step.goal != goal:
            return False
        if isinstance(step, ExtensionStep):
            clause = by_id.get(step.clause_id)
            if clause is None:
                raise CheckError(f"unknown clause id {step.clause_id!r}")
            if not (0 <= step.lit_index < len(clause.literals)):
                return False
            counter += 1
            lits = [_rename(l, counter) for l in clause.literals]
            target = lits[step.lit_index]
            if target.positive == goal.positive or _lit_key(target) != _lit_key(goal):
                return False
            pairs = [( _apply(theta, a), _apply(theta, b))
                     for a, b in zip(_lit_args(goal), _lit_args(target))]
            delta = _mgu(pairs)
            if delta is None:
                return False
            theta = _compose(theta, delta)
            used.add(clause.origin)
            new_path = path + (goal,)
            rest = lits[:step.lit_index] + lits[step.lit_index + 1:]
            agenda = [(l, new_path) for l in rest] + agenda
        elif isinstance(step, ReductionStep):
            if not (0 <= step.path_index < len(path)):
                return False
            plit = path[step.path_index]
            if plit.positive == goal.positive or _lit_key(plit) != _lit_key(goal):
                return False
            pairs = [(_apply(theta, a), _apply(theta, b))
                     for a, b in zip(_lit_args(goal), _lit_args(plit))]
            delta = _mgu(pairs)
            if delta is None:
                return False
            theta = _compose(theta, delta)
        else:
            raise CheckError(f"unknown step type {type(step).__name__}")
    if not started or agenda:
        return False
    return used == set(proof.used_premises)
