import math

import pytest

from proofbench.features import write_feature_cache
from proofbench.guidance import Advisor, GuidanceConfig
from proofbench.learner import BayesModel, score, train_incremental
from proofbench.prover import Limits


def test_limits_validation():
    with pytest.raises(ValueError):
        Limits(inference_budget=0)
    with pytest.raises(ValueError):
        Limits(time_budget=-1.0)
    with pytest.raises(ValueError):
        Limits(max_depth=0)
    Limits()   # all-default is fine


def test_binarize_toggle_flattens_weights():
    weighted = BayesModel()
    binary = BayesModel(binarize=True)
    feats = {"SYM:p": 5.0, "SYM:q": 2.0}
    train_incremental(weighted, feats, {"ax"})
    train_incremental(binary, feats, {"ax"})
    assert weighted.cooccurrence[("ax", "SYM:p")] == 5.0
    assert binary.cooccurrence[("ax", "SYM:p")] == 1.0
    # binarized scoring also flattens the query weights
    s = binary.sigma
    expected = math.log((1 + s) / (1 + s)) + \
        2 * math.log((1 + s) / (1 + 2 * s))
    assert abs(score(binary, feats, "ax") - expected) < 1e-9


def test_advisor_refresh_snapshot_clears_cache():
    model = BayesModel()
    advisor = Advisor(model, config=GuidanceConfig(min_candidates=1,
                                                   consult_max_depth=5))
    order1, tok1 = advisor.consult([], _lit(), 0, ["c1", "c2"], "p")
    assert order1 == ["c1", "c2"]
    train_incremental(model, {"SYM:p": 1.0}, {"ax2"})
    # stale snapshot is an error the prover would degrade on
    with pytest.raises(AssertionError):
        advisor.consult([], _lit(), 0, ["c1", "c2"], "p")
    advisor.refresh_snapshot()
    advisor.origins = {"c2": "ax2"}
    order2, _tok = advisor.consult([_lit("p")], _lit("p"), 1, ["c1", "c2"], "p")
    assert order2[0] == "c2"


def _lit(pred="g"):
    from proofbench.fol import Literal, atom, const
    return Literal(False, atom(pred, const("c")))


def test_feature_cache_rejects_whitespace_names(tmp_path):
    with pytest.raises(ValueError):
        write_feature_cache(str(tmp_path / "x"), {"bad name": {"SYM:p": 1.0}})
