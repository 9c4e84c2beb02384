"""Independent oracles and random generators for the test suite.

Everything here is deliberately separate from the package code paths it
checks: the propositional oracle enumerates valuations, the finite
oracle enumerates whole interpretations, and the evaluator below walks
formulas directly with explicit variable assignments.
"""
from __future__ import annotations

import itertools
import random

from proofbench.fol import (
    And, App, Atom, Clause, Eq, Exists, FALSE, FalseF, Forall, Iff, Implies,
    Literal, Not, Or, TRUE, TrueF, Var, make_clause,
)


# ---------------------------------------------------------------------------
# Propositional truth-table oracle (atoms are 0-ary predicates)


def prop_atoms(clauses) -> list:
    names = []
    for c in clauses:
        for lit in c.literals:
            if lit.atom.pred not in names:
                names.append(lit.atom.pred)
    return sorted(names)


def prop_clause_satisfiable(clauses) -> bool:
    atoms = prop_atoms(clauses)
    for bits in itertools.product([False, True], repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if all(any(val[l.atom.pred] == l.positive for l in c.literals)
               for c in clauses):
            return True
    return False


def prop_formula_atoms(f) -> list:
    out = []

    def walk(g):
        if isinstance(g, Atom):
            if g.pred not in out:
                out.append(g.pred)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or, Implies, Iff)):
            walk(g.lhs)
            walk(g.rhs)

    walk(f)
    return out


def prop_eval(f, val: dict) -> bool:
    if isinstance(f, Atom):
        return val[f.pred]
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not prop_eval(f.sub, val)
    if isinstance(f, And):
        return prop_eval(f.lhs, val) and prop_eval(f.rhs, val)
    if isinstance(f, Or):
        return prop_eval(f.lhs, val) or prop_eval(f.rhs, val)
    if isinstance(f, Implies):
        return (not prop_eval(f.lhs, val)) or prop_eval(f.rhs, val)
    if isinstance(f, Iff):
        return prop_eval(f.lhs, val) == prop_eval(f.rhs, val)
    raise TypeError(f)


def prop_equivalent(f, g) -> bool:
    atoms = sorted(set(prop_formula_atoms(f)) | set(prop_formula_atoms(g)))
    for bits in itertools.product([False, True], repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if prop_eval(f, val) != prop_eval(g, val):
            return False
    return True


# ---------------------------------------------------------------------------
# Brute-force finite interpretations


def all_interpretations(funcs: dict, preds: dict, n: int):
    """Yield every interpretation {(kind, sym): table} over domain n."""
    domain = list(range(n))
    cells = []
    for sym, ar in sorted(funcs.items()):
        for args in itertools.product(domain, repeat=ar):
            cells.append(("f", sym, args, domain))
    for sym, ar in sorted(preds.items()):
        for args in itertools.product(domain, repeat=ar):
            cells.append(("p", sym, args, [False, True]))
    for values in itertools.product(*[c[3] for c in cells]):
        funcs_t: dict = {sym: {} for sym in funcs}
        preds_t: dict = {sym: {} for sym in preds}
        for (kind, sym, args, _vals), v in zip(cells, values):
            (funcs_t if kind == "f" else preds_t)[sym][args] = v
        yield funcs_t, preds_t


def brute_eval_term(t, funcs_t, env) -> int:
    if isinstance(t, Var):
        return env[t.name]
    return funcs_t[t.symbol][tuple(brute_eval_term(a, funcs_t, env) for a in t.args)]


def brute_eval(f, funcs_t, preds_t, n, env=None) -> bool:
    """Direct evaluator, written separately from proofbench.models."""
    env = env or {}
    if isinstance(f, Atom):
        args = tuple(brute_eval_term(a, funcs_t, env) for a in f.args)
        return preds_t[f.pred][args]
    if isinstance(f, Eq):
        return brute_eval_term(f.lhs, funcs_t, env) == brute_eval_term(f.rhs, funcs_t, env)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not brute_eval(f.sub, funcs_t, preds_t, n, env)
    if isinstance(f, And):
        return brute_eval(f.lhs, funcs_t, preds_t, n, env) and \
            brute_eval(f.rhs, funcs_t, preds_t, n, env)
    if isinstance(f, Or):
        return brute_eval(f.lhs, funcs_t, preds_t, n, env) or \
            brute_eval(f.rhs, funcs_t, preds_t, n, env)
    if isinstance(f, Implies):
        return (not brute_eval(f.lhs, funcs_t, preds_t, n, env)) or \
            brute_eval(f.rhs, funcs_t, preds_t, n, env)
    if isinstance(f, Iff):
        return brute_eval(f.lhs, funcs_t, preds_t, n, env) == \
            brute_eval(f.rhs, funcs_t, preds_t, n, env)
    if isinstance(f, Forall):
        return all(brute_eval(f.body, funcs_t, preds_t, n, {**env, f.var: d})
                   for d in range(n))
    if isinstance(f, Exists):
        return any(brute_eval(f.body, funcs_t, preds_t, n, {**env, f.var: d})
                   for d in range(n))
    raise TypeError(f)


def brute_clause_eval(c: Clause, funcs_t, preds_t, n) -> bool:
    vs = sorted({v for lit in c.literals for a in lit.args for v in _tvars(a)})
    for vals in itertools.product(range(n), repeat=len(vs)):
        env = dict(zip(vs, vals))
        ok = False
        for lit in c.literals:
            if isinstance(lit.atom, Eq):
                val = brute_eval_term(lit.atom.lhs, funcs_t, env) == \
                    brute_eval_term(lit.atom.rhs, funcs_t, env)
            else:
                args = tuple(brute_eval_term(a, funcs_t, env) for a in lit.atom.args)
                val = preds_t[lit.atom.pred][args]
            if val == lit.positive:
                ok = True
                break
        if not ok:
            return False
    return True


def _tvars(t):
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from _tvars(a)


def brute_has_model(f, funcs: dict, preds: dict, max_n: int) -> bool:
    for n in range(1, max_n + 1):
        for funcs_t, preds_t in all_interpretations(funcs, preds, n):
            if brute_eval(f, funcs_t, preds_t, n):
                return True
    return False


def brute_clauses_have_model(clauses, funcs: dict, preds: dict, max_n: int) -> bool:
    for n in range(1, max_n + 1):
        for funcs_t, preds_t in all_interpretations(funcs, preds, n):
            if all(brute_clause_eval(c, funcs_t, preds_t, n) for c in clauses):
                return True
    return False


# ---------------------------------------------------------------------------
# Random generators (all seeded, all deterministic)


PROP_ATOMS = ["p", "q", "r", "s"]


def random_prop_clauses(rng: random.Random, max_atoms=4, origin="ax"):
    n_atoms = rng.randint(1, max_atoms)
    atoms = PROP_ATOMS[:n_atoms]
    n_clauses = rng.randint(1, 6)
    out = []
    for i in range(n_clauses):
        width = rng.randint(1, 3)
        lits = [Literal(rng.random() < 0.5, Atom(rng.choice(atoms), ()))
                for _ in range(width)]
        out.append(make_clause(lits, origin=f"{origin}{i}", clause_id=f"{origin}{i}_0"))
    return out


def random_term(rng: random.Random, vars_in_scope, depth=2, unary_only=False):
    choices = []
    if vars_in_scope:
        choices.append("var")
    choices.append("const")
    if depth > 0:
        choices.append("fun")
    kind = rng.choice(choices)
    if kind == "var":
        return Var(rng.choice(vars_in_scope))
    if kind == "const":
        return App("c" if unary_only else rng.choice(["c", "d"]), ())
    return App("f", (random_term(rng, vars_in_scope, depth - 1, unary_only),))


def random_formula(rng: random.Random, vars_in_scope=(), depth=3,
                   allow_eq=True, unary_only=False) -> object:
    """Random formula over p/1, q/2, c, d, f/1 (or p/1, q/1, c, f/1)."""
    vars_in_scope = list(vars_in_scope)
    if depth <= 0 or (rng.random() < 0.25 and depth < 3):
        kind = rng.choice(["p", "q", "eq"] if allow_eq else ["p", "q"])
        if kind == "p":
            return Atom("p", (random_term(rng, vars_in_scope, 1, unary_only),))
        if kind == "q":
            if unary_only:
                return Atom("q", (random_term(rng, vars_in_scope, 1, unary_only),))
            return Atom("q", (random_term(rng, vars_in_scope, 1),
                              random_term(rng, vars_in_scope, 1)))
        return Eq(random_term(rng, vars_in_scope, 1, unary_only),
                  random_term(rng, vars_in_scope, 1, unary_only))
    kind = rng.choice(["not", "and", "or", "implies", "iff", "forall", "exists"])
    if kind == "not":
        return Not(random_formula(rng, vars_in_scope, depth - 1, allow_eq, unary_only))
    if kind in ("and", "or", "implies", "iff"):
        cls = {"and": And, "or": Or, "implies": Implies, "iff": Iff}[kind]
        return cls(random_formula(rng, vars_in_scope, depth - 1, allow_eq, unary_only),
                   random_formula(rng, vars_in_scope, depth - 1, allow_eq, unary_only))
    var = rng.choice(["X", "Y", "Z", "W"])
    cls = Forall if kind == "forall" else Exists
    return cls(var, random_formula(rng, vars_in_scope + [var], depth - 1,
                                   allow_eq, unary_only))


def random_closed_formula(rng: random.Random, depth=3, allow_eq=True,
                          unary_only=False):
    from proofbench.fol import universal_closure
    f = random_formula(rng, (), depth, allow_eq, unary_only)
    closed, _ = universal_closure(f)
    return closed


def rename_bound_vars(f, suffix="R"):
    """Systematic alpha-variant: every binder gets a fresh decorated name."""
    counter = [0]

    def walk(g, env):
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(walk_t(a, env) for a in g.args))
        if isinstance(g, Eq):
            return Eq(walk_t(g.lhs, env), walk_t(g.rhs, env))
        if isinstance(g, Not):
            return Not(walk(g.sub, env))
        if isinstance(g, (And, Or, Implies, Iff)):
            return type(g)(walk(g.lhs, env), walk(g.rhs, env))
        if isinstance(g, (Forall, Exists)):
            counter[0] += 1
            new = f"{suffix}{counter[0]}"
            return type(g)(new, walk(g.body, {**env, g.var: new}))
        return g

    def walk_t(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        return App(t.symbol, tuple(walk_t(a, env) for a in t.args))

    return walk(f, {})
