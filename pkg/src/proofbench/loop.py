"""The closed inductive-deductive loop over an ordered corpus.

Each iteration retrains the premise learner on every stored proof,
refreshes semantic features against the current model store, then walks
the axiom-count ladder breadth-first: every unsolved theorem is tried at
the smallest rung before anything escalates, which is how a shared
budget is spread in a batch setting.  Proved attempts must pass the
independent checker before they are stored; counter-satisfiable pruned
attempts contribute their countermodel as a new semantic feature column
(a pruned problem being satisfiable says nothing about the theorem, so
the item stays unsolved).

Iterations stop at the first one that solves nothing new, at the
iteration cap, or when the shared inference budget runs out.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from . import models as models_mod
from .checker import check_proof
from .clausify import ClauseSet, cnf, equality_axioms, uses_equality
from .corpus import Corpus
from .features import combine, semantic_features, structural_features, symbol_features
from .fol import AnnotatedFormula, Atom, Var
from .guidance import Advisor, GuidanceConfig
from .learner import BayesModel, rank_premises, select_top, train_incremental
from .models import ModelStore
from .prover import COUNTER_SATISFIABLE, Limits, PROVED, prove


class LoopInvariantError(Exception):
    """A stored artifact failed an internal soundness gate."""


@dataclass(frozen=True)
class LoopConfig:
    axiom_ladder: tuple = (4, 8, 16, 32, 64, 128)
    attempt_budgets: tuple = (2000,)      # per-rung; last entry repeats
    max_depth: int = 10
    total_inference_budget: int | None = None
    time_budget: float | None = None      # wall-clock mode, benchmarking only
    max_iterations: int = 10
    model_max_domain: int = 3
    semantic: bool = True
    guidance: bool = False
    learning: bool = True                 # False: chronological-recency baseline
    definitional_threshold: int = 64
    sigma: float = 0.05
    str_depth: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("axiom_ladder", "attempt_budgets"):
            ladder = getattr(self, name)
            if not ladder:
                raise ValueError(f"{name} must be non-empty")
            if list(ladder) != sorted(set(ladder)):
                raise ValueError(f"{name} must be strictly increasing")


@dataclass
class SolvedItem:
    name: str
    proof: object
    premises_given: tuple
    premises_used: tuple      # corpus names only, conjecture excluded
    iteration: int
    rung: int
    inferences: int


@dataclass
class Attempt:
    iteration: int
    item: str
    rung: int
    budget: int
    status: str
    inferences: int
    premises_given: tuple
    premises_used: tuple = ()
    model_index: int | None = None


@dataclass
class LoopState:
    solved: dict = field(default_factory=dict)    # name -> SolvedItem
    store: ModelStore = field(default_factory=ModelStore)
    model: BayesModel = field(default_factory=BayesModel)
    guide_model: BayesModel = field(default_factory=BayesModel)
    attempts: list = field(default_factory=list)
    iterations_run: int = 0
    inferences_used: int = 0
    stopped_because: str = ""


def item_features(item, config: LoopConfig, store: ModelStore) -> dict:
    vec = combine(symbol_features(item.formula),
                  structural_features(item.formula, config.str_depth))
    if config.semantic and len(store):
        vec = combine(vec, semantic_features(item.formula, store))
    return vec


def jaccard_overlap(a: dict, b: dict) -> float:
    sa = {f for f in a if f.startswith("SYM:")}
    sb = {f for f in b if f.startswith("SYM:")}
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def rank_eligible(item, eligible, state: LoopState, config: LoopConfig,
                  feature_cache: dict) -> list:
    """Premise names for `item`, most relevant first."""
    names = [p.name for p in eligible]
    if not config.learning:
        return list(reversed(names))      # chronological recency
    if state.model.total_examples == 0:
        # cold start: symbol-overlap ranking, ties by recency
        query = feature_cache[item.name]
        scored = [(jaccard_overlap(query, feature_cache[n]), i)
                  for i, n in enumerate(names)]
        order = sorted(range(len(names)),
                       key=lambda i: (-scored[i][0], -scored[i][1]))
        return [names[i] for i in order]
    ranking = rank_premises(state.model, feature_cache[item.name], names)
    return [n for n, _s in ranking]


class ClausalCache:
    """Per-run cache of clausal forms; canonical naming keeps reuse exact."""

    def __init__(self, threshold: int):
        self.threshold = threshold
        self.as_axiom: dict = {}
        self.as_negated: dict = {}
        self.uses_eq: dict = {}

    def axiom_form(self, item):
        if item.name not in self.as_axiom:
            self.as_axiom[item.name] = cnf(item.formula, name=item.name,
                                           threshold=self.threshold)
            self.uses_eq[item.name] = uses_equality(item.formula)
        return self.as_axiom[item.name]

    def negated_form(self, item):
        if item.name not in self.as_negated:
            self.as_negated[item.name] = cnf(item.formula, name=item.name,
                                             threshold=self.threshold, negate=True)
            self.uses_eq[item.name] = uses_equality(item.formula)
        return self.as_negated[item.name]


def assemble_problem(item, premise_items, clausifier: ClausalCache) -> ClauseSet:
    clauses = []
    forms = {}
    any_eq = False
    for p in premise_items:
        form = clausifier.axiom_form(p)
        forms[p.name] = form
        clauses.extend(form.clauses)
        any_eq = any_eq or clausifier.uses_eq[p.name]
    neg = clausifier.negated_form(item)
    forms[item.name] = neg
    clauses.extend(neg.clauses)
    any_eq = any_eq or clausifier.uses_eq[item.name]
    if any_eq:
        sig = set()
        for c in clauses:
            for lit in c.literals:
                if isinstance(lit.atom, Atom):
                    sig.add((lit.atom.pred, "predicate", len(lit.atom.args)))
                for t in lit.args:
                    sig.update(_term_sig(t))
        clauses.extend(equality_axioms(sig))
    start = frozenset(c.clause_id for c in neg.clauses)
    return ClauseSet(tuple(clauses), start, forms)


def _term_sig(t):
    if isinstance(t, Var):
        return set()
    out = {(t.symbol, "function", len(t.args))}
    for a in t.args:
        out |= _term_sig(a)
    return out


def corpus_premises_used(proof, item_name, corpus_names) -> tuple:
    used = set(proof.used_premises) & corpus_names
    used.discard(item_name)
    return tuple(sorted(used))


def run_loop(corpus: Corpus, config: LoopConfig,
             on_attempt=None) -> LoopState:
    state = LoopState(model=BayesModel(sigma=config.sigma),
                      guide_model=BayesModel(sigma=config.sigma))
    clausifier = ClausalCache(config.definitional_threshold)
    corpus_names = {item.name for item in corpus.items}
    theorems = corpus.theorems()

    while state.iterations_run < config.max_iterations:
        iteration = state.iterations_run + 1

        # (1) retrain the relevance learner on all stored proofs
        model = BayesModel(sigma=config.sigma)
        feature_cache = {item.name: item_features(item, config, state.store)
                         for item in corpus.items}
        for _i, item in theorems:
            if item.name in state.solved:
                train_incremental(model, feature_cache[item.name],
                                  state.solved[item.name].premises_used)
        state.model = model

        new_this_iteration = 0
        budget_out = False
        for rung_idx, k in enumerate(config.axiom_ladder):
            budget = config.attempt_budgets[min(rung_idx,
                                                len(config.attempt_budgets) - 1)]
            for i, item in theorems:
                if item.name in state.solved:
                    continue
                remaining = None
                if config.total_inference_budget is not None:
                    remaining = config.total_inference_budget - state.inferences_used
                    if remaining <= 0:
                        budget_out = True
                        break
                eligible = corpus.eligible(i)
                ranked = rank_eligible(item, eligible, state, config, feature_cache)
                chosen = ranked[:k]
                premise_items = [p for p in eligible if p.name in set(chosen)]
                cs = assemble_problem(item, premise_items, clausifier)
                attempt_budget = budget if remaining is None else min(budget, remaining)
                limits = Limits(time_budget=config.time_budget,
                                inference_budget=attempt_budget,
                                max_depth=config.max_depth)
                advisor = None
                if config.guidance:
                    advisor = Advisor(state.guide_model)
                    advisor.register_clauses(cs.clauses)
                res = prove(cs, limits, advisor=advisor,
                            model_max_domain=config.model_max_domain,
                            problem_id=item.name)
                state.inferences_used += res.stats.inferences
                attempt = Attempt(iteration, item.name, k, attempt_budget,
                                  res.status, res.stats.inferences,
                                  tuple(chosen))
                if res.status == PROVED:
                    if not check_proof(res.proof, cs):
                        raise LoopInvariantError(
                            f"proof for {item.name} failed independent checking")
                    used = corpus_premises_used(res.proof, item.name, corpus_names)
                    eligible_names = {p.name for p in eligible}
                    if not set(used) <= eligible_names:
                        raise LoopInvariantError(
                            f"proof for {item.name} uses ineligible premises")
                    state.solved[item.name] = SolvedItem(
                        item.name, res.proof, tuple(chosen), used,
                        iteration, k, res.stats.inferences)
                    attempt = replace_attempt(attempt, premises_used=used)
                    new_this_iteration += 1
                elif res.status == COUNTER_SATISFIABLE and res.model is not None:
                    res.model.provenance = f"{item.name}@it{iteration}k{k}"
                    idx = state.store.add(res.model)
                    attempt = replace_attempt(attempt, model_index=idx)
                if advisor is not None:
                    advisor.flush_to(state.guide_model)
                state.attempts.append(attempt)
                if on_attempt:
                    on_attempt(attempt, res)
            if budget_out:
                break
        state.iterations_run = iteration
        if budget_out:
            state.stopped_because = "budget exhausted"
            break
        if new_this_iteration == 0:
            state.stopped_because = "fixpoint: no new solutions"
            break
    else:
        state.stopped_because = "iteration cap"
    if config.total_inference_budget is not None:
        assert state.inferences_used <= config.total_inference_budget, \
            "budget accounting overflow"
    return state


def replace_attempt(a: Attempt, **kw) -> Attempt:
    return replace(a, **kw)


# ---------------------------------------------------------------------------
# Reporting


def fixpoint_report(state: LoopState, corpus: Corpus) -> dict:
    """Per-iteration and cumulative four-column counts plus shortening."""
    theorems = [item for _i, item in corpus.theorems()]
    total = len(theorems)
    iterations = []
    for it in range(1, state.iterations_run + 1):
        by_item: dict = {}
        for a in state.attempts:
            if a.iteration != it:
                continue
            prev = by_item.get(a.item)
            rank = {"proved": 2, "counter_satisfiable": 1}.get(a.status, 0)
            prev_rank = {"proved": 2, "counter_satisfiable": 1}.get(prev, 0) \
                if prev else -1
            if rank > prev_rank:
                by_item[a.item] = a.status
        proved = sum(1 for s in by_item.values() if s == "proved")
        countersat = sum(1 for s in by_item.values() if s == "counter_satisfiable")
        gaveup = sum(1 for s in by_item.values()
                     if s not in ("proved", "counter_satisfiable"))
        iterations.append({
            "iteration": it,
            "proved": proved,
            "counter_satisfiable": countersat,
            "timeout_or_inference_out": gaveup,
            "total": len(by_item),
        })
    # cumulative: best status per item across the whole run
    best: dict = {}
    rank = {"proved": 2, "counter_satisfiable": 1}
    for a in state.attempts:
        if rank.get(a.status, 0) > rank.get(best.get(a.item), -1):
            best[a.item] = a.status
    proved_all = sum(1 for s in best.values() if s == "proved")
    countersat_all = sum(1 for s in best.values() if s == "counter_satisfiable")
    shortening = []
    for item in theorems:
        solved = state.solved.get(item.name)
        if solved is None or not item.reference_premises:
            continue
        if len(solved.premises_used) < len(item.reference_premises):
            shortening.append({
                "item": item.name,
                "reference": sorted(item.reference_premises),
                "used": sorted(solved.premises_used),
            })
    return {
        "iterations": iterations,
        "cumulative": {
            "proved": proved_all,
            "counter_satisfiable": countersat_all,
            "timeout_or_inference_out": total - proved_all - countersat_all,
            "total": total,
        },
        "shortening": shortening,
        "models_stored": len(state.store),
        "inferences_used": state.inferences_used,
        "stopped_because": state.stopped_because,
    }


# ---------------------------------------------------------------------------
# Run directory persistence


def write_run_dir(run_dir: str, state: LoopState, corpus: Corpus,
                  config: LoopConfig) -> None:
    """Everything needed to audit or re-verify a run."""
    import json

    from .learner import save_model
    from .models import model_to_text
    from .prover import proof_to_text

    os.makedirs(os.path.join(run_dir, "proofs"), exist_ok=True)
    os.makedirs(os.path.join(run_dir, "models"), exist_ok=True)
    os.makedirs(os.path.join(run_dir, "learner"), exist_ok=True)
    with open(os.path.join(run_dir, "config.json"), "w", encoding="utf-8") as fh:
        blob = {k: (list(getattr(config, k)) if isinstance(getattr(config, k), tuple)
                    else getattr(config, k))
                for k in config.__dataclass_fields__}
        json.dump({"corpus": corpus.root, "config": blob}, fh,
                  sort_keys=True, indent=1)
    with open(os.path.join(run_dir, "results.jsonl"), "w", encoding="utf-8") as fh:
        for a in state.attempts:
            fh.write(json.dumps({
                "iteration": a.iteration, "item": a.item, "rung": a.rung,
                "budget": a.budget, "status": a.status,
                "inferences": a.inferences,
                "premises_given": list(a.premises_given),
                "premises_used": list(a.premises_used),
                "model_index": a.model_index,
            }, sort_keys=True) + "\n")
    for name, solved in sorted(state.solved.items()):
        with open(os.path.join(run_dir, "proofs", f"{name}.proof"), "w",
                  encoding="utf-8") as fh:
            fh.write(f"% item {name}\n% premises_given "
                     f"{' '.join(solved.premises_given)}\n")
            fh.write(proof_to_text(solved.proof))
    for idx, m in enumerate(state.store):
        with open(os.path.join(run_dir, "models", f"{idx}.model"), "w",
                  encoding="utf-8") as fh:
            fh.write(model_to_text(m))
    save_model(state.model, os.path.join(run_dir, "learner", "final.json"))
    # feature cache against the final model store (regenerate when it grows)
    from .features import write_feature_cache
    vectors = {item.name: item_features(item, config, state.store)
               for item in corpus.items}
    write_feature_cache(os.path.join(run_dir, "features.cache"), vectors)
