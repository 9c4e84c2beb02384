"""Batch evaluation modes and result tables.

Four experiment shapes over generated corpora:

  reprove    one prover call per theorem from exactly its reference
             premises (the re-proving protocol).
  library    the full selection loop, learning against a
             chronological-recency baseline at equal budget, with a
             proof-shortening section.
  challenge  a batch of standalone problems under one shared budget;
             axioms are ranked per problem and proofs found early train
             the learner for later problems in the same batch.
  traintest  learner trained on a declared train split only, test split
             evaluated with no further training.

Results are append-only JSON lines; `verify` replays every stored proof
through the independent checker.  Deterministic mode (the default) uses
inference budgets only, so identical spec and seed give byte-identical
structured output.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

from .checker import check_proof
from .clausify import clausal_problem
from .corpus import Corpus, CorpusError, load_corpus, load_split
from .features import combine, semantic_features, structural_features, symbol_features
from .fol import make_problem
from .learner import BayesModel, rank_premises, train_incremental
from .loop import (
    LoopConfig, LoopState, ClausalCache, assemble_problem, corpus_premises_used,
    fixpoint_report, item_features, run_loop, write_run_dir,
)
from .models import ModelStore, model_to_text
from .parser import parse_problem_file
from .prover import (
    COUNTER_SATISFIABLE, Limits, PROVED, proof_from_text, proof_to_text, prove,
)

MODES = ("reprove", "library", "challenge", "traintest")


class HarnessError(Exception):
    pass


@dataclass
class ExperimentSpec:
    mode: str
    corpus: str = ""
    problems: str = ""
    out_dir: str = ""
    split: str = ""
    seed: int = 0
    deterministic: bool = True
    workers: int = 1
    per_problem_budget: int = 20000
    time_budget: float | None = None    # wall-clock mode only
    max_depth: int = 10
    model_max_domain: int = 3
    loop: LoopConfig = field(default_factory=LoopConfig)
    baseline: bool = True          # library mode: also run the recency baseline

    def __post_init__(self):
        if self.mode not in MODES:
            raise HarnessError(f"unknown mode {self.mode!r}")
        if self.mode in ("reprove", "library", "traintest") and not self.corpus:
            raise HarnessError(f"mode {self.mode!r} requires a corpus")
        if self.mode == "challenge" and not (self.problems or self.corpus):
            raise HarnessError("challenge mode requires a problem directory")
        if self.mode == "traintest" and not self.split:
            raise HarnessError("traintest mode requires a split file")


@dataclass
class ResultRecord:
    item: str
    mode: str
    status: str
    inferences: int
    premises_given: tuple
    premises_used: tuple = ()
    proof_file: str = ""
    model_file: str = ""
    config: str = ""

    def to_json(self) -> str:
        d = asdict(self)
        d["premises_given"] = list(d["premises_given"])
        d["premises_used"] = list(d["premises_used"])
        return json.dumps(d, sort_keys=True)


def _ensure_out(spec: ExperimentSpec) -> str:
    out = spec.out_dir
    if not out:
        raise HarnessError("no output directory given")
    root = os.environ.get("PROOFBENCH_OUTPUT_ROOT", "")
    if root and not os.path.isabs(out):
        out = os.path.join(root, out)
    os.makedirs(out, exist_ok=True)
    os.makedirs(os.path.join(out, "proofs"), exist_ok=True)
    os.makedirs(os.path.join(out, "models"), exist_ok=True)
    return out


def _write_spec(out: str, spec: ExperimentSpec) -> None:
    blob = asdict(spec)
    blob["loop"] = {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in blob["loop"].items()}
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True, indent=1)


class _RecordWriter:
    """Append-and-flush per record so interrupted runs stay auditable."""

    def __init__(self, out: str):
        self.fh = open(os.path.join(out, "results.jsonl"), "w", encoding="utf-8")

    def write(self, record: ResultRecord) -> None:
        self.fh.write(record.to_json() + "\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()


def _store_proof(out: str, item: str, proof, premises_given) -> str:
    rel = os.path.join("proofs", f"{item}.proof")
    with open(os.path.join(out, rel), "w", encoding="utf-8") as fh:
        fh.write(f"% item {item}\n% premises_given {' '.join(premises_given)}\n")
        fh.write(proof_to_text(proof))
    return rel


def _store_model(out: str, idx: int, model) -> str:
    rel = os.path.join("models", f"{idx}.model")
    with open(os.path.join(out, rel), "w", encoding="utf-8") as fh:
        fh.write(model_to_text(model))
    return rel


# ---------------------------------------------------------------------------
# reprove


def _reprove_one(args):
    item_name, premises, conjecture, budget, depth, domain, time_budget = args
    problem = make_problem(premises + [conjecture])
    cs = clausal_problem(problem)
    res = prove(cs, Limits(inference_budget=budget, max_depth=depth,
                           time_budget=time_budget),
                model_max_domain=domain, problem_id=item_name)
    ok = res.status != PROVED or check_proof(res.proof, cs)
    return res, ok


def run_reprove(spec: ExperimentSpec) -> dict:
    """One prover call per theorem with exactly its reference premises."""
    out = _ensure_out(spec)
    _write_spec(out, spec)
    corpus = load_corpus(spec.corpus)
    by_name = {item.name: item for item in corpus.items}
    corpus_names = set(by_name)
    jobs = []
    for _i, item in corpus.theorems():
        premises = [by_name[r].as_axiom() for r in item.reference_premises]
        jobs.append((item.name, premises, item.as_conjecture(),
                     spec.per_problem_budget, spec.max_depth,
                     spec.model_max_domain, spec.time_budget))
    if spec.workers > 1:
        pool = ProcessPoolExecutor(max_workers=spec.workers)
        outcomes = pool.map(_reprove_one, jobs)
    else:
        pool = None
        outcomes = map(_reprove_one, jobs)

    records = []
    writer = _RecordWriter(out)
    model_idx = 0
    solved = set()
    for (item_name, premises, *_rest), (res, check_ok) in zip(jobs, outcomes):
        if not check_ok:
            raise HarnessError(f"proof for {item_name} failed independent checking")
        proof_file = model_file = ""
        used = ()
        if res.status == PROVED:
            solved.add(item_name)
            used = corpus_premises_used(res.proof, item_name, corpus_names)
            proof_file = _store_proof(out, item_name, res.proof,
                                      [p.name for p in premises])
        elif res.status == COUNTER_SATISFIABLE and res.model is not None:
            model_file = _store_model(out, model_idx, res.model)
            model_idx += 1
        record = ResultRecord(
            item_name, "reprove", res.status, res.stats.inferences,
            tuple(p.name for p in premises), used, proof_file, model_file,
            config="reprove")
        records.append(record)
        writer.write(record)
    writer.close()
    if pool is not None:
        pool.shutdown()
    results = {
        "mode": "reprove",
        "configs": [_tally("reprove", records)],
        "solved": {"reprove": sorted(solved)},
    }
    _finish(out, results)
    return results


# ---------------------------------------------------------------------------
# library


def run_library(spec: ExperimentSpec) -> dict:
    """Full loop with learning, plus the recency baseline for comparison."""
    out = _ensure_out(spec)
    _write_spec(out, spec)
    corpus = load_corpus(spec.corpus)
    corpus_names = {item.name for item in corpus.items}

    configs = [("learning", spec.loop)]
    if spec.baseline:
        base_cfg = LoopConfig(**{**_cfg_dict(spec.loop), "learning": False,
                                 "semantic": False})
        configs.append(("recency", base_cfg))

    writer = _RecordWriter(out)
    results = {"mode": "library", "configs": [], "solved": {}, "reports": {}}
    for config_name, cfg in configs:
        sub = os.path.join(out, config_name)
        os.makedirs(sub, exist_ok=True)
        config_records = []

        def stream(attempt, _res, _name=config_name, _sink=config_records):
            proof_file = model_file = ""
            if attempt.status == PROVED:
                proof_file = os.path.join(_name, "proofs", f"{attempt.item}.proof")
            if attempt.model_index is not None:
                model_file = os.path.join(_name, "models",
                                          f"{attempt.model_index}.model")
            record = ResultRecord(
                attempt.item, "library", attempt.status, attempt.inferences,
                attempt.premises_given, attempt.premises_used,
                proof_file, model_file, config=_name)
            _sink.append(record)
            writer.write(record)

        state = run_loop(corpus, cfg, on_attempt=stream)
        write_run_dir(sub, state, corpus, cfg)
        results["reports"][config_name] = fixpoint_report(state, corpus)
        results["configs"].append(_tally(config_name, config_records,
                                         solved=set(state.solved)))
        results["solved"][config_name] = sorted(state.solved)
    writer.close()
    _finish(out, results)
    return results


def _cfg_dict(cfg: LoopConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


# ---------------------------------------------------------------------------
# challenge


def run_challenge(spec: ExperimentSpec) -> dict:
    """Shared-budget batch; early solutions train selection for later ones.

    Problems are standalone files; the learner ranks each problem's own
    axioms by the conjecture's features, labels being axiom names, which
    near-duplicate batches share.
    """
    out = _ensure_out(spec)
    _write_spec(out, spec)
    problem_dir = spec.problems or spec.corpus
    paths = sorted(fn for fn in os.listdir(problem_dir) if fn.endswith(".p"))
    problems = []
    for fn in paths:
        problem = parse_problem_file(os.path.join(problem_dir, fn))
        if problem.conjecture is None:
            raise HarnessError(f"{fn}: challenge problems need a conjecture")
        problems.append((fn[:-2], problem))

    cfg = spec.loop
    learning = cfg.learning
    model = BayesModel(sigma=cfg.sigma)
    budget_left = cfg.total_inference_budget
    solved: dict = {}
    records = []
    writer = _RecordWriter(out)
    model_idx = 0

    for rung_idx, k in enumerate(cfg.axiom_ladder):
        per_budget = cfg.attempt_budgets[min(rung_idx, len(cfg.attempt_budgets) - 1)]
        for pid, problem in problems:
            if pid in solved:
                continue
            if budget_left is not None and budget_left <= 0:
                break
            conj = problem.conjecture
            axioms = [af for af in problem.formulas if af.role != "conjecture"]
            feats = combine(symbol_features(conj.formula),
                            structural_features(conj.formula, cfg.str_depth))
            names = [af.name for af in axioms]
            if learning and model.total_examples > 0:
                ranked = [n for n, _s in rank_premises(model, feats, names)]
            else:
                ranked = names
            chosen = set(ranked[:k])
            pruned = [af for af in axioms if af.name in chosen] + [conj]
            cs = clausal_problem(make_problem(pruned))
            budget = per_budget if budget_left is None else min(per_budget, budget_left)
            res = prove(cs, Limits(inference_budget=budget,
                                   max_depth=spec.max_depth,
                                   time_budget=spec.time_budget),
                        model_max_domain=spec.model_max_domain, problem_id=pid)
            if budget_left is not None:
                budget_left -= res.stats.inferences
            proof_file = model_file = ""
            used = ()
            if res.status == PROVED:
                if not check_proof(res.proof, cs):
                    raise HarnessError(f"proof for {pid} failed checking")
                used = tuple(sorted(set(res.proof.used_premises) & set(names)))
                solved[pid] = res
                proof_file = _store_proof(out, pid, res.proof, sorted(chosen))
                if learning:
                    train_incremental(model, feats, used)
            elif res.status == COUNTER_SATISFIABLE and res.model is not None:
                model_file = _store_model(out, model_idx, res.model)
                model_idx += 1
            record = ResultRecord(
                pid, "challenge", res.status, res.stats.inferences,
                tuple(sorted(chosen)), used, proof_file, model_file,
                config="learning" if learning else "fixed-order")
            records.append(record)
            writer.write(record)
    writer.close()
    name = "learning" if learning else "fixed-order"
    results = {
        "mode": "challenge",
        "configs": [_tally(name, records, solved=set(solved))],
        "solved": {name: sorted(solved)},
        "budget_left": budget_left,
    }
    _finish(out, results)
    return results


# ---------------------------------------------------------------------------
# traintest


def run_traintest(spec: ExperimentSpec) -> dict:
    """Train on the declared train split only, then evaluate the test split."""
    out = _ensure_out(spec)
    _write_spec(out, spec)
    corpus = load_corpus(spec.corpus)
    train_names, test_names = load_split(spec.split, corpus)
    train_set, test_set = set(train_names), set(test_names)
    corpus_names = {item.name for item in corpus.items}
    cfg = spec.loop

    store = ModelStore()
    model = BayesModel(sigma=cfg.sigma)
    feature_cache = {item.name: item_features(item, cfg, store)
                     for item in corpus.items}

    # training phase: declared reference proofs of the train split
    for _i, item in corpus.theorems():
        if item.name in train_set:
            train_incremental(model, feature_cache[item.name],
                              item.reference_premises)
    trained_examples = model.total_examples

    clausifier = ClausalCache(cfg.definitional_threshold)
    records = []
    writer = _RecordWriter(out)
    solved = set()
    for i, item in corpus.theorems():
        if item.name not in test_set:
            continue
        assert model.total_examples == trained_examples, \
            "test evaluation must not train"
        eligible = [p for p in corpus.eligible(i) if p.name not in test_set]
        names = [p.name for p in eligible]
        if model.total_examples > 0:
            ranked = [n for n, _s in rank_premises(
                model, feature_cache[item.name], names)]
        else:
            ranked = list(reversed(names))
        solved_here = False
        for rung_idx, k in enumerate(cfg.axiom_ladder):
            budget = cfg.attempt_budgets[min(rung_idx, len(cfg.attempt_budgets) - 1)]
            chosen = ranked[:k]
            premise_items = [p for p in eligible if p.name in set(chosen)]
            cs = assemble_problem(item, premise_items, clausifier)
            res = prove(cs, Limits(inference_budget=budget,
                                   max_depth=cfg.max_depth,
                                   time_budget=spec.time_budget),
                        model_max_domain=cfg.model_max_domain,
                        problem_id=item.name)
            proof_file = ""
            used = ()
            if res.status == PROVED:
                if not check_proof(res.proof, cs):
                    raise HarnessError(f"proof for {item.name} failed checking")
                used = corpus_premises_used(res.proof, item.name, corpus_names)
                proof_file = _store_proof(out, item.name, res.proof, chosen)
                solved_here = True
            record = ResultRecord(
                item.name, "traintest", res.status, res.stats.inferences,
                tuple(chosen), used, proof_file, config="traintest")
            records.append(record)
            writer.write(record)
            if solved_here:
                solved.add(item.name)
                break
    writer.close()
    results = {
        "mode": "traintest",
        "configs": [_tally("traintest", records, solved=solved)],
        "solved": {"traintest": sorted(solved)},
        "train_size": len(train_names),
        "test_size": len(test_names),
    }
    _finish(out, results)
    return results


# ---------------------------------------------------------------------------
# verification of stored runs


def verify_run(run_dir: str) -> dict:
    """Re-check every stored proof in a run directory, independently."""
    cfg_path = os.path.join(run_dir, "config.json")
    checked = failed = 0
    failures = []
    for dirpath, _dirs, files in os.walk(run_dir):
        for fn in files:
            if not fn.endswith(".proof"):
                continue
            path = os.path.join(dirpath, fn)
            item, premises, proof = _read_proof_file(path)
            corpus_root = _corpus_of(cfg_path)
            if corpus_root is None:
                failures.append((path, "no corpus recorded in config.json"))
                failed += 1
                continue
            try:
                cs = _rebuild_problem(corpus_root, item, premises)
                ok = check_proof(proof, cs)
            except Exception as exc:
                ok = False
                failures.append((path, f"rebuild failed: {exc}"))
            checked += 1
            if not ok:
                failed += 1
                if not failures or failures[-1][0] != path:
                    failures.append((path, "checker rejected proof"))
    return {"checked": checked, "failed": failed, "failures": failures}


def _read_proof_file(path: str):
    item = ""
    premises: list = []
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("% item "):
                item = line.split(" ", 2)[2].strip()
            elif line.startswith("% premises_given"):
                premises = line.split()[2:]
            else:
                body.append(line)
    return item, premises, proof_from_text("".join(body))


_corpus_cache: dict = {}


def _corpus_of(cfg_path: str):
    if not os.path.exists(cfg_path):
        # library sub-runs keep config one level up
        up = os.path.join(os.path.dirname(os.path.dirname(cfg_path)), "config.json")
        if os.path.exists(up):
            cfg_path = up
        else:
            return None
    with open(cfg_path, encoding="utf-8") as fh:
        blob = json.load(fh)
    root = blob.get("corpus") or blob.get("problems")
    return root or None


def _rebuild_problem(corpus_root: str, item: str, premises):
    if os.path.exists(os.path.join(corpus_root, "manifest.txt")):
        key = ("corpus", corpus_root)
        if key not in _corpus_cache:
            _corpus_cache[key] = load_corpus(corpus_root)
        corpus = _corpus_cache[key]
        by_name = {it.name: it for it in corpus.items}
        formulas = [by_name[p].as_axiom() for p in premises]
        formulas.append(by_name[item].as_conjecture())
        return clausal_problem(make_problem(formulas))
    # challenge problems: item maps to a file, premises prune its axioms
    problem = parse_problem_file(os.path.join(corpus_root, f"{item}.p"))
    keep = set(premises)
    pruned = [af for af in problem.formulas
              if af.role == "conjecture" or af.name in keep]
    return clausal_problem(make_problem(pruned))


# ---------------------------------------------------------------------------
# report tables


def _tally(name: str, records, solved=None) -> dict:
    if solved is None:
        solved = {r.item for r in records if r.status == PROVED}
    items = {r.item for r in records}
    by_item: dict = {}
    rank = {"proved": 2, "counter_satisfiable": 1}
    for r in records:
        if rank.get(r.status, 0) > rank.get(by_item.get(r.item), -1):
            by_item[r.item] = r.status
    return {
        "name": name,
        "proved": sum(1 for s in by_item.values() if s == "proved"),
        "counter_satisfiable": sum(1 for s in by_item.values()
                                   if s == "counter_satisfiable"),
        "timeout_or_inference_out": sum(
            1 for s in by_item.values()
            if s not in ("proved", "counter_satisfiable")),
        "total": len(items),
        "solved_items": sorted(solved),
    }


def report(results: dict) -> str:
    """Four-column table per configuration plus the union ("together") row."""
    configs = results.get("configs", [])
    header = ["description", "proved", "counter-satisfiable",
              "timeout or inference out", "total"]
    rows = [[c["name"], c["proved"], c["counter_satisfiable"],
             c["timeout_or_inference_out"], c["total"]] for c in configs]
    if len(configs) > 1:
        union: set = set()
        total = max((c["total"] for c in configs), default=0)
        for c in configs:
            union |= set(c["solved_items"])
        rows.append(["together", len(union), "-", "-", total])
    widths = [max(len(str(x)) for x in [header[i]] + [r[i] for r in rows])
              for i in range(len(header))]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(str(x).ljust(w) for x, w in zip(r, widths)))
    out = "\n".join(lines)

    shortening = []
    for config_name, rep in sorted(results.get("reports", {}).items()):
        for s in rep.get("shortening", []):
            shortening.append((config_name, s))
    if shortening:
        out += "\n\nproofs shorter than their reference premise sets:\n"
        for config_name, s in shortening:
            out += (f"  [{config_name}] {s['item']}: used {len(s['used'])} "
                    f"{s['used']} vs reference {len(s['reference'])} "
                    f"{s['reference']}\n")
    return out


def together_count(configs) -> int:
    union: set = set()
    for c in configs:
        union |= set(c["solved_items"])
    return len(union)


def _finish(out: str, results: dict) -> None:
    text = report(results)
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(results, fh, sort_keys=True, indent=1)
