"""Sparse formula characterizations over three namespaces.

SYM counts symbol occurrences, STR counts directed parent->child symbol
chains in the term tree (variables abstracted to VAR), MOD records truth
values in stored models.  All three are invariant under bound-variable
renaming, which is what lets canonically-skolemized alpha-variants share
every feature.
"""
from __future__ import annotations

from .fol import (
    And, Atom, BINARY, Clause, Eq, Formula, Literal, Not, Or, QUANT, Var,
    symbols_of,
)
from .models import UNDEFINED, ModelStore, evaluate

STR_DEPTH_DEFAULT = 2

FeatureVector = dict   # feature id -> positive weight


def symbol_features(f) -> FeatureVector:
    """One SYM feature per distinct symbol; weight = occurrence count."""
    out: FeatureVector = {}
    for (name, _kind, _arity), n in symbols_of(_as_formula(f)).items():
        out[f"SYM:{name}"] = out.get(f"SYM:{name}", 0.0) + float(n)
    return out


def structural_features(f, depth: int = STR_DEPTH_DEFAULT) -> FeatureVector:
    """Directed symbol chains of 2..depth nodes in the term tree."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    out: FeatureVector = {}

    def token(t):
        return "VAR" if isinstance(t, Var) else t.symbol

    def chains(t):
        # emit chains rooted at t's symbol, then at every deeper symbol
        if isinstance(t, Var) or not t.args:
            return
        for a in t.args:
            _extend([token(t)], a)
        for a in t.args:
            chains(a)

    def _extend(prefix, t):
        chain = prefix + [token(t)]
        if len(chain) <= depth:
            fid = "STR:" + ">".join(chain)
            out[fid] = out.get(fid, 0.0) + 1.0
            if not isinstance(t, Var):
                for a in t.args:
                    _extend(chain, a)

    def walk(g):
        if isinstance(g, Atom):
            for a in g.args:
                _extend([g.pred], a)
            for a in g.args:
                chains(a)
        elif isinstance(g, Eq):
            for a in (g.lhs, g.rhs):
                _extend(["="], a)
            for a in (g.lhs, g.rhs):
                chains(a)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, BINARY):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, QUANT):
            walk(g.body)

    walk(_as_formula(f))
    return out


def semantic_features(f, store: ModelStore) -> FeatureVector:
    """MOD:i:T / MOD:i:F per stored model; Undefined contributes nothing."""
    out: FeatureVector = {}
    for i, m in enumerate(store):
        v = evaluate(f, m)
        if v is UNDEFINED:
            continue
        out[f"MOD:{i}:{'T' if v else 'F'}"] = 1.0
    return out


def combine(*vectors: FeatureVector) -> FeatureVector:
    out: FeatureVector = {}
    for v in vectors:
        for fid, w in v.items():
            nw = out.get(fid, 0.0) + w
            if nw == 0.0:
                out.pop(fid, None)
            else:
                out[fid] = nw
    return out


def _as_formula(f):
    if isinstance(f, Clause):
        from .fol import clause_as_formula
        return clause_as_formula(f)
    if isinstance(f, Literal):
        from .fol import literal_as_formula
        return literal_as_formula(f)
    return f


def branch_features(literals) -> FeatureVector:
    """SYM features of all literals on a branch (the advisor's query view)."""
    out: FeatureVector = {}
    for lit in literals:
        out = combine(out, symbol_features(lit))
    return out


# ---------------------------------------------------------------------------
# Feature cache file: one record per formula name


def write_feature_cache(path: str, vectors: dict) -> None:
    """`name<TAB>fid:weight ...`; names must be whitespace-free."""
    with open(path, "w", encoding="utf-8") as fh:
        for name in sorted(vectors):
            if any(ch.isspace() for ch in name):
                raise ValueError(f"cache format cannot hold name {name!r}")
            pairs = " ".join(f"{fid}:{w!r}" for fid, w in sorted(vectors[name].items()))
            fh.write(f"{name}\t{pairs}\n")


def read_feature_cache(path: str) -> dict:
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            name, _, rest = line.partition("\t")
            vec: FeatureVector = {}
            for pair in rest.split():
                fid, _, w = pair.rpartition(":")
                vec[fid] = float(w)
            out[name] = vec
    return out
