"""Naive-Bayes premise relevance: counters in, log-odds ranking out.

Each premise is an independent binary label (one-vs-rest).  Training on a
proof adds the conjecture's feature weights to the counters of every
premise the proof used.  Ranking scores a candidate c for query features
w as

    log((label[c]+s)/(total+s)) + sum_f w_f * log((cooc[c,f]+s)/(label[c]+2s))

with additive smoothing s (default 0.05), summing only over query
features seen in training; candidates never seen in training keep just
the prior term.  Ties break by candidate input order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SIGMA_DEFAULT = 0.05


@dataclass
class BayesModel:
    label_count: dict = field(default_factory=dict)       # name -> weight
    cooccurrence: dict = field(default_factory=dict)      # (name, fid) -> weight
    feature_totals: dict = field(default_factory=dict)    # fid -> weight
    total_examples: float = 0.0
    sigma: float = SIGMA_DEFAULT
    binarize: bool = False

    def snapshot_id(self) -> tuple:
        return (int(self.total_examples * 1000), len(self.label_count),
                len(self.cooccurrence))


def train_incremental(model: BayesModel, features: dict, used_premises) -> BayesModel:
    """Add one (conjecture features, premises used) example; returns model."""
    if model.binarize:
        features = {fid: 1.0 for fid in features}
    model.total_examples += 1.0
    for fid, w in features.items():
        model.feature_totals[fid] = model.feature_totals.get(fid, 0.0) + w
    for name in used_premises:
        model.label_count[name] = model.label_count.get(name, 0.0) + 1.0
        for fid, w in features.items():
            key = (name, fid)
            model.cooccurrence[key] = model.cooccurrence.get(key, 0.0) + w
    return model


def train_batch(examples, sigma: float = SIGMA_DEFAULT,
                binarize: bool = False) -> BayesModel:
    model = BayesModel(sigma=sigma, binarize=binarize)
    for features, used in examples:
        train_incremental(model, features, used)
    return model


def score(model: BayesModel, features: dict, candidate: str) -> float:
    s = model.sigma
    label = model.label_count.get(candidate, 0.0)
    prior = math.log((label + s) / (model.total_examples + s))
    if label == 0.0:
        return prior
    if model.binarize:
        features = {fid: 1.0 for fid in features}
    total = prior
    for fid, w in features.items():
        if fid not in model.feature_totals:
            continue
        co = model.cooccurrence.get((candidate, fid), 0.0)
        total += w * math.log((co + s) / (label + 2.0 * s))
    return total


def rank_premises(model: BayesModel, features: dict, candidates) -> list:
    """(name, score) pairs, best first; input order breaks ties."""
    scored = [(name, score(model, features, name)) for name in candidates]
    order = sorted(range(len(scored)), key=lambda i: (-scored[i][1], i))
    return [scored[i] for i in order]


def select_top(ranking, k: int) -> list:
    if k < 1:
        raise ValueError("k must be >= 1")
    return [name for name, _s in ranking[:k]]


def evaluate_selection(corpus, k_values, feature_fn,
                       sigma: float = SIGMA_DEFAULT) -> dict:
    """Chronological leave-one-out recall of reference premises.

    For item i the model has been trained only on items before i; the
    item's own reference premises then update the model.  Returns per k:
    full-recall fraction and mean coverage over items that have premises.
    """
    model = BayesModel(sigma=sigma)
    hits = {k: 0 for k in k_values}
    coverage = {k: 0.0 for k in k_values}
    counted = 0
    for i, item in enumerate(corpus.items):
        if item.role != "conjecture":
            continue
        refs = set(item.reference_premises)
        feats = feature_fn(item.formula)
        if refs:
            assert model.total_examples <= i, "trained on an unseen item"
            candidates = [p.name for p in corpus.items[:i]]
            ranking = rank_premises(model, feats, candidates)
            counted += 1
            for k in k_values:
                top = set(select_top(ranking, k))
                got = len(refs & top)
                coverage[k] += got / len(refs)
                if got == len(refs):
                    hits[k] += 1
        train_incremental(model, feats, item.reference_premises)
    out = {}
    for k in k_values:
        out[k] = {
            "full_recall": hits[k] / counted if counted else 1.0,
            "coverage": coverage[k] / counted if counted else 1.0,
        }
    return out


# ---------------------------------------------------------------------------
# Checkpointing: reload reproduces identical rankings


def save_model(model: BayesModel, path: str) -> None:
    cooc: dict = {}
    for (name, fid), w in model.cooccurrence.items():
        cooc.setdefault(name, {})[fid] = w
    blob = {
        "version": 1,
        "sigma": model.sigma,
        "binarize": model.binarize,
        "total_examples": model.total_examples,
        "label_count": model.label_count,
        "feature_totals": model.feature_totals,
        "cooccurrence": cooc,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True, indent=0)


def load_model(path: str) -> BayesModel:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("version") != 1:
        raise ValueError(f"unsupported checkpoint version {blob.get('version')!r}")
    model = BayesModel(sigma=blob["sigma"], binarize=blob["binarize"],
                       total_examples=blob["total_examples"],
                       label_count=dict(blob["label_count"]),
                       feature_totals=dict(blob["feature_totals"]))
    for name, row in blob["cooccurrence"].items():
        for fid, w in row.items():
            model.cooccurrence[(name, fid)] = w
    return model
