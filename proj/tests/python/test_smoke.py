import math
from pathlib import Path

import pytest

import conceptag

ROOT = Path(__file__).resolve().parents[2]
TOY = ROOT / "data" / "toy"
COLUMNS = "token,pos,lemma,tag"


@pytest.fixture(scope="module")
def toy():
    train = conceptag.load_conll(str(TOY / "train.txt"), COLUMNS)
    test = conceptag.load_conll(str(TOY / "test.txt"), COLUMNS)
    return train, test


def test_corpus_loading(toy):
    train, test = toy
    assert len(train) == 50 and len(test) == 20
    assert train[0].tokens[0].pos is not None
    assert conceptag.normalize_numbers("1,000") == "<number>"
    assert conceptag.lookup_key("Boston") == "boston"


def test_scoring_matches_hand_counts():
    gold = [["B-x", "I-x", "O", "B-y"]]
    report = conceptag.score(gold, [["B-x", "I-x", "O", "O"]])
    assert report["precision"] == 1.0
    assert report["recall"] == 0.5
    assert math.isclose(report["f1"], 2.0 / 3.0)
    assert "FB1" in report["report"]
    assert conceptag.extract_chunks(["I-x", "I-x", "O", "B-y"]) == [("x", 0, 1), ("y", 3, 3)]
    with pytest.raises(ValueError):
        conceptag.score(gold, [])


def test_aggregate_runs():
    stats = conceptag.aggregate_runs([82.0, 83.0, 84.0])
    assert (stats.min_f1, stats.avg_f1, stats.best_f1) == (82.0, 83.0, 84.0)
    with pytest.raises(conceptag.Error):
        conceptag.aggregate_runs([])


def test_wfst_and_crf_round_trip(toy):
    train, test = toy
    wfst = conceptag.WfstTagger.train(train, order=3)
    again = conceptag.WfstTagger.loads(wfst.dumps())
    assert [again.decode(s) for s in test] == [wfst.decode(s) for s in test]

    crf = conceptag.train_crf(train, "token:-2..2;suffix:0..0", l2=1.0, max_iterations=30)
    pred = [crf.decode(s) for s in test]
    assert conceptag.score([s.tags for s in test], pred)["f1"] > 0.8
    assert conceptag.CrfModel.loads(crf.dumps()).dumps() == crf.dumps()


def test_neural_training_is_seeded(toy):
    train, test = toy
    assert "LSTM-CRF" in conceptag.architectures()
    kwargs = dict(hidden=8, epochs=2, batch_size=5, lr=0.01, embedding_dim=6, seed=4)
    a, trace_a = conceptag.train_neural("LSTM-CRF", train, test, **kwargs)
    b, trace_b = conceptag.train_neural("LSTM-CRF", train, test, **kwargs)
    assert trace_a == trace_b and len(trace_a) == 2
    assert a.dumps() == b.dumps()
    restored = conceptag.NeuralTagger.loads(a.dumps())
    assert restored.predict_all(test) == a.predict_all(test)


def test_recipes(tmp_path):
    recipes = conceptag.load_recipes(str(ROOT / "recipes" / "toy.ini"))
    assert {r.name for r in recipes} >= {"toy-wfst", "toy-crf", "toy-lstm-crf"}
    bad = tmp_path / "bad.ini"
    bad.write_text("[x]\nmodel = svm\ntrain = a\ntest = b\n")
    with pytest.raises(ValueError, match="out of scope"):
        conceptag.load_recipes(str(bad))
