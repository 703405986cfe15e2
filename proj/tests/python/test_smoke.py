import math
import os
import pathlib

import pytest

import conformal_mcqa as cm

FIXTURES = pathlib.Path(
    os.environ.get("CMCQA_FIXTURES", pathlib.Path(__file__).resolve().parents[1] / "fixtures")
)


def test_frequencies_and_entropy():
    dist = cm.estimate_frequencies(list("BBACBABDBB"), 4)
    assert dist.probs == [0.2, 0.6, 0.1, 0.1]
    assert dist.valid_sample_count == 10
    assert dist.modal_answer() == "B"
    h = -sum(p * math.log(p) for p in dist.probs)
    assert cm.predictive_entropy(dist.probs) == pytest.approx(h, abs=1e-12)
    assert cm.predictive_entropy([0.5, 0.5], base="2") == pytest.approx(1.0)


def test_off_space_samples_are_dropped():
    dist = cm.estimate_frequencies(["A", "E", "B", "?!"], 4)
    assert dist.probs == [0.5, 0.5, 0.0, 0.0]
    assert dist.dropped_sample_count == 2
    with pytest.raises(cm.CmcqaError):
        cm.estimate_frequencies(["E"], 4)


def test_softmax():
    p = cm.softmax([math.log(2.0), 0.0])
    assert p[0] == pytest.approx(2 / 3, abs=1e-12)


def test_conformal_quantile_and_sets():
    scores = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert cm.conformal_quantile(scores, 0.5) == 0.5
    assert cm.conformal_quantile(scores, 0.05) is None
    assert cm.quantile_rank(9, 0.05) == 10
    assert cm.prediction_set([0.2, 0.6, 0.1, 0.1], 0.85) == ["A", "B"]
    assert cm.prediction_set([0.2, 0.6, 0.1, 0.1], None) == ["A", "B", "C", "D"]


def test_auroc():
    assert cm.auroc([0.1, 0.5, 0.4, 0.9], [False, False, True, True]) == 0.75
    assert cm.auroc([0.1, 0.2], [False, False]) is None


def test_records_round_trip():
    records = cm.load_jsonl(str(FIXTURES / "hand_count.jsonl"))
    assert [r.question_id for r in records][:2] == ["hand-1", "hand-2"]
    assert records[0].options == ["A", "B", "C", "D"]
    back = cm.QuestionRecord.from_json(records[0].to_json())
    assert back == records[0]
    with pytest.raises(cm.CmcqaError):
        cm.QuestionRecord.from_json('{"question_id": "q"}')


def test_experiment_and_comparison():
    records = cm.generate_dataset(num_questions=200, samples=20, seed=3, categories=["a", "b"])
    config = cm.ExperimentConfig()
    config.trials = 5
    config.alpha_grid = [0.1, 0.2]
    reports = cm.run_experiment(records, config)
    assert len(reports) == 1
    agg = reports[0]["per_alpha_aggregate"]
    assert [a["alpha"] for a in agg] == [0.1, 0.2]
    assert agg[0]["apss_mean"] >= agg[1]["apss_mean"]
    assert reports == cm.run_experiment(records, config)

    config.group_by_category = True
    table = cm.compare_sources(records, config)
    assert [r["group"] for r in table["rows"]] == ["a", "b"]
    assert table["partitions_match"]
    assert table["average"]["group"] == "Average"


def test_cli_in_process():
    code, out, _ = cm.run_cli(["score", str(FIXTURES / "hand_count.jsonl")])
    assert code == 0
    assert out.splitlines()[1] == "hand-1,fixture,B,true,1.08890,,0"
    assert cm.run_cli(["bogus"])[0] == 64
