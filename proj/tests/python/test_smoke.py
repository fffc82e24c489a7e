import json
import math

import numpy as np
import pytest

import keypoint_ad as kad


def test_constant_image_has_no_keypoints():
    for detector in ("dog", "fast_hessian"):
        assert kad.detect(np.full((64, 64), 0.5), detector) == []


def test_detect_finds_the_defect_in_a_spotted_biscuit():
    img = kad.synthetic_biscuit(3, "spots")
    assert img.shape == (97, 97)
    kps = kad.detect(img, "fast_hessian")
    assert kps
    responses = [k.response for k in kps]
    assert responses == sorted(responses, reverse=True)
    assert kps[0].detector == "fast_hessian"


def test_detector_options_are_forwarded():
    img = kad.synthetic_texture(1)
    loose = kad.detect(img, "dog", contrast_threshold=0.01)
    strict = kad.detect(img, "dog", contrast_threshold=0.05)
    assert len(strict) <= len(loose)
    with pytest.raises(kad.Error):
        kad.detect(img, "dog", octaves=0)


def test_build_vector_and_describe_agree():
    img = kad.synthetic_texture(2)
    kps = kad.detect(img, "dog")
    vec = kad.build_vector(kps, 5)
    assert len(vec) == 10
    assert vec == kad.describe(img, "dog", 5)
    assert vec[0] == kps[0].scale and vec[1] == kps[0].response
    assert kad.build_vector([], 3) == [0.0] * 6


def test_train_score_and_json_round_trip():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 1, (40, 4)), rng.normal(4, 1, (10, 4))])
    labels = [0] * 40 + [1] * 10
    for kind in ("ocsvm", "svdd", "svm", "gnb", "logreg", "tree"):
        model = kad.train(x, labels, kind)
        assert model.kind == kind
        assert model.feature_dim == 4
        scores = model.score(x)
        assert len(scores) == 50
        assert np.mean(scores[40:]) > np.mean(scores[:40])
        back = kad.Model.from_json(model.to_json())
        assert back.score(x) == scores
    tuned = kad.train(x, labels, "ocsvm", nu=0.2, gamma=0.5)
    assert json.loads(tuned.to_json())["hyperparameters"]["nu"] == 0.2
    with pytest.raises(kad.Error):
        kad.train(x, labels, "ocsvm", bogus=1)


def test_auc_and_threshold():
    fpr, tpr, thresholds, auc = kad.roc_auc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
    assert auc == 1.0
    assert fpr[0] == 0.0 and tpr[-1] == 1.0 and math.isinf(thresholds[0])
    assert kad.roc_auc([0.5] * 4, [1, 0, 1, 0])[3] == 0.5
    assert kad.select_threshold([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == pytest.approx(0.5)
    with pytest.raises(kad.Error) as err:
        kad.roc_auc([0.1, 0.2], [0, 0])
    assert err.value.args[1] == 2


def test_cli_entry_point(tmp_path):
    assert kad.run_cli(["--help"]) == 0
    assert kad.run_cli(["extract", "--images", str(tmp_path / "missing"), "--out", str(tmp_path / "f.csv")]) == 1
