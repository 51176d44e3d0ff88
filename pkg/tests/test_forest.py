import json

import numpy as np
import pytest

from ecgtriage.errors import ModelFormatError
from ecgtriage.forest import (MODEL_FORMAT, ForestConfig, ForestModel, Tree,
                              _grow, load_model, predict_proba, save_model,
                              train)


def separable_set(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 4))
    labels = x[:, 2] > 0.0
    x[:, 2] += np.where(labels, 2.0, -2.0)
    return x, labels


def hand_tree(x, labels, config):
    """Grow one tree on all rows with no bootstrap, full feature set."""
    tree = Tree()
    _grow(tree, np.asarray(x, dtype=np.float64), np.asarray(labels,
          dtype=np.float64), np.arange(len(labels)), 0, config,
          np.random.default_rng(0))
    return tree


def test_single_split_matches_hand_gini():
    # one feature; best threshold separates the classes perfectly at the
    # midpoint between 2.0 and 3.0
    x = np.array([[1.0], [2.0], [3.0], [4.0]])
    labels = np.array([False, False, True, True])
    config = ForestConfig(n_trees=1, max_depth=3, min_leaf=1,
                          features_per_split=1)
    tree = hand_tree(x, labels, config)
    assert tree.feature[0] == 0
    assert tree.threshold[0] == pytest.approx(2.5)
    model = ForestModel(trees=[tree], config=config, seed=0,
                        fingerprint="t", age_default=50.0,
                        feature_names=("f0",))
    probs = predict_proba(model, x)
    np.testing.assert_allclose(probs, [0.0, 0.0, 1.0, 1.0])


def test_tie_on_gain_prefers_lowest_feature():
    # duplicated feature column: identical gains, index 0 must win
    x = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    labels = np.array([False, False, True, True])
    config = ForestConfig(n_trees=1, max_depth=2, min_leaf=1,
                          features_per_split=2)
    tree = hand_tree(x, labels, config)
    assert tree.feature[0] == 0


def test_pure_node_stops_growing():
    x = np.array([[1.0], [2.0], [3.0]])
    labels = np.array([True, True, True])
    config = ForestConfig(n_trees=1, max_depth=5, min_leaf=1,
                          features_per_split=1)
    tree = hand_tree(x, labels, config)
    assert len(tree.value) == 1
    assert tree.value[0] == 1.0


def test_train_is_deterministic(tmp_path):
    x, labels = separable_set()
    config = ForestConfig(n_trees=10, max_depth=6, min_leaf=2,
                          features_per_split=2)
    one = train(x, labels, config, seed=5, age_default=50.0,
                feature_names=("a", "b", "c", "d"))
    two = train(x, labels, config, seed=5, age_default=50.0,
                feature_names=("a", "b", "c", "d"))
    save_model(one, tmp_path / "one.json")
    save_model(two, tmp_path / "two.json")
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
    other = train(x, labels, config, seed=6, age_default=50.0,
                  feature_names=("a", "b", "c", "d"))
    assert not np.array_equal(predict_proba(one, x), predict_proba(other, x))


def test_bootstrap_forest_separates_clean_data():
    x, labels = separable_set()
    config = ForestConfig(n_trees=40, max_depth=8, min_leaf=2,
                          features_per_split=2)
    model = train(x, labels, config, seed=1, age_default=50.0,
                  feature_names=("a", "b", "c", "d"))
    probs = predict_proba(model, x)
    assert np.mean(probs[labels]) > 0.8
    assert np.mean(probs[~labels]) < 0.2


def test_model_round_trip(tmp_path):
    x, labels = separable_set(40)
    model = train(x, labels, ForestConfig(n_trees=5, max_depth=4, min_leaf=2,
                                          features_per_split=2),
                  seed=2, age_default=44.0, feature_names=("a", "b", "c", "d"))
    path = save_model(model, tmp_path / "model.json")
    back = load_model(path)
    assert back.config == model.config
    assert back.seed == model.seed
    assert back.fingerprint == model.fingerprint
    assert back.age_default == model.age_default
    np.testing.assert_array_equal(predict_proba(back, x), predict_proba(model, x))


def test_model_file_is_versioned(tmp_path):
    x, labels = separable_set(30)
    model = train(x, labels, ForestConfig(2, 3, 2, 2), seed=0,
                  age_default=50.0, feature_names=("a", "b", "c", "d"))
    path = save_model(model, tmp_path / "model.json")
    payload = json.loads(path.read_text(encoding="ascii"))
    assert payload["format"] == MODEL_FORMAT
    payload["format"] = "something-else"
    path.write_text(json.dumps(payload), encoding="ascii")
    with pytest.raises(ModelFormatError, match="format"):
        load_model(path)


def test_load_rejects_inconsistent_fingerprint(tmp_path):
    x, labels = separable_set(30)
    model = train(x, labels, ForestConfig(2, 3, 2, 2), seed=0,
                  age_default=50.0, feature_names=("a", "b", "c", "d"))
    path = save_model(model, tmp_path / "model.json")
    payload = json.loads(path.read_text(encoding="ascii"))
    payload["fingerprint"] = "0" * 16
    path.write_text(json.dumps(payload), encoding="ascii")
    with pytest.raises(ModelFormatError, match="fingerprint"):
        load_model(path)


def test_predict_fingerprint_guard():
    x, labels = separable_set(30)
    model = train(x, labels, ForestConfig(2, 3, 2, 2), seed=0,
                  age_default=50.0, feature_names=("a", "b", "c", "d"))
    with pytest.raises(ModelFormatError, match="fingerprint"):
        predict_proba(model, x, fingerprint="deadbeefdeadbeef")


def test_predict_width_checked():
    x, labels = separable_set(30)
    model = train(x, labels, ForestConfig(2, 3, 2, 2), seed=0,
                  age_default=50.0, feature_names=("a", "b", "c", "d"))
    with pytest.raises(ModelFormatError):
        predict_proba(model, x[:, :3])


def test_train_input_validation():
    x, labels = separable_set(20)
    with pytest.raises(ValueError, match="labels"):
        train(x, labels[:10], age_default=50.0,
              feature_names=("a", "b", "c", "d"))
    with pytest.raises(ValueError, match="both classes"):
        train(x, np.zeros(20, dtype=bool), age_default=50.0,
              feature_names=("a", "b", "c", "d"))
    with pytest.raises(ValueError, match="hyperparameters"):
        train(x, labels, ForestConfig(n_trees=0, max_depth=1, min_leaf=1,
                                      features_per_split=1),
              age_default=50.0, feature_names=("a", "b", "c", "d"))


def test_predict_accepts_single_vector():
    x, labels = separable_set(30)
    model = train(x, labels, ForestConfig(3, 3, 2, 2), seed=0,
                  age_default=50.0, feature_names=("a", "b", "c", "d"))
    single = predict_proba(model, x[0])
    batch = predict_proba(model, x[:1])
    assert float(single) == float(batch[0])
