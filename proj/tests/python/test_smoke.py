import json
import math

import numpy as np
import pytest

import adscreen

LIGHT = {
    "seed": 7,
    "forest": {"ntree": 40, "mtry_grid": [1, 2, 3]},
    "impute": {"ntree": 15, "max_iter": 2},
    "importance": {"n_permutations": 3},
    "boruta": {"ntree": 40, "max_rounds": 6},
    "pca": {"ks": [1, 3]},
}


def test_version_and_defaults():
    assert adscreen.__version__ == "0.1.0"
    cfg = adscreen.default_config()
    assert cfg["seed"] == 42
    assert adscreen.stage_order()[0] == "generate"
    order = adscreen.stage_order({"impute": {"split_first": True}})
    assert order.index("split") < order.index("impute")


def test_bad_config_raises_config_error():
    with pytest.raises(adscreen.AdscreenError) as info:
        adscreen.stage_order({"bogus": 1})
    assert info.value.code == "ConfigError"


def test_metrics():
    cm = adscreen.confusion_matrix([True, True, False, True, False], [True, False, True, True, False])
    assert cm == {"tp": 2, "fp": 1, "fn": 1, "tn": 1}
    s = adscreen.scores(9, 1, 2, 8)
    assert s["accuracy"] == pytest.approx(85.0)
    assert s["precision"] == pytest.approx(90.0)
    assert s["recall"] == pytest.approx(81.8181818)
    assert adscreen.scores(0, 0, 0, 3)["precision"] is None
    roc, auc = adscreen.roc_auc([0.9, 0.8, 0.7, 0.6], [True, False, True, False])
    assert len(roc) == 5 and math.isinf(roc[0][0])
    assert auc == pytest.approx(0.75)
    assert adscreen.gini_impurity([1, 1]) == pytest.approx(0.5)


def test_forest_fit_predict_and_json():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 4))
    y = ["NonHC" if a + b > 0 else "HC" for a, b in x[:, :2]]
    forest = adscreen.RandomForest.fit(x, y, ntree=60, seed=3)
    assert forest.classes == ["HC", "NonHC"]
    assert forest.ntree == 60
    labels, proba = forest.predict(x)
    assert proba.shape == (300, 2)
    assert np.allclose(proba.sum(axis=1), 1.0)
    assert np.mean([a == b for a, b in zip(labels, y)]) > 0.95
    assert 0.0 <= forest.oob_error(x, y) < 0.25
    again = adscreen.RandomForest.from_json(forest.to_json())
    assert np.array_equal(again.predict(x)[1], proba)


def test_generate_cohort():
    csv, schema, truth = adscreen.generate_cohort(n_subjects=50, seed=2)
    assert csv.splitlines()[0].startswith("age,sex")
    assert len(csv.splitlines()) == 51
    assert json.loads(schema)["columns"][-1]["name"] == "diagnosis"
    assert truth.startswith("subject,linear_predictor")


def test_light_pipeline(tmp_path):
    out = adscreen.run_pipeline(tmp_path / "run", LIGHT)
    rows = (tmp_path / "run" / "table3_analog.csv").read_text().splitlines()
    assert rows[0] == "group,accuracy,precision,recall"
    assert [r.split(",")[0] for r in rows[1:]] == [
        "Medical history",
        "Neuropsychology assessments",
        "Blood analyses & ApoE genotypes",
    ]
    assert out.endswith("run")


def test_missing_stage(tmp_path):
    with pytest.raises(adscreen.AdscreenError) as info:
        adscreen.run_stage("train", tmp_path, LIGHT)
    assert info.value.code == "MissingStage"
    assert (tmp_path / "FAILED").exists()
