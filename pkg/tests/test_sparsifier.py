import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from tsp_sparsify.exact import held_karp
from tsp_sparsify.features import FeatureMatrix
from tsp_sparsify.graph import double_tree_tours
from tsp_sparsify.sparsifier import (Model, SchemaError, TrainConfig, TrainingError, contains_tour,
                                     insert_tour_edges, load_model, mst_only_sparsify, predict_mask,
                                     prune_instance, save_model, tour_mask, train_model)
from tsp_sparsify.tsplib import generate_random_instance


def toy_matrix(rng, rows=200, name="toy", names=("a", "b")):
    x = rng.normal(size=(rows, len(names)))
    x[:, 0] += np.sign(x[:, 0] - 0.3) * 0.5     # margin around the boundary
    y = (x[:, 0] > 0.3).astype(np.int64)
    u = np.arange(rows)
    return FeatureMatrix(u, u + 1, x, tuple(names), y, rng.uniform(0.1, 1.0, rows), name=name)


def test_separable_data_is_learned():
    rng = np.random.default_rng(0)
    data = [toy_matrix(rng, name=f"m{i}") for i in range(3)]
    model = train_model(data, TrainConfig(class_weights=(0.5, 0.5)))
    for fm in data:
        keep, _ = predict_mask(model, fm)
        assert np.array_equal(keep, fm.labels.astype(bool))
    c = model.metadata["confusion"]
    assert c["fp"] == c["fn"] == 0


def test_training_is_deterministic_for_a_seed():
    rng = np.random.default_rng(1)
    data = [toy_matrix(rng)]
    a = train_model(data, TrainConfig(seed=4)).to_json()
    assert a == train_model(data, TrainConfig(seed=4)).to_json()


def test_gradient_descent_reaches_the_weighted_optimum():
    rng = np.random.default_rng(2)
    fm = toy_matrix(rng, rows=120)
    noisy = fm.labels.copy()
    noisy[rng.choice(120, 15, replace=False)] ^= 1
    fm.labels = noisy
    cfg = TrainConfig(class_weights=(0.3, 0.7), undersample=False, epochs=20_000)
    model = train_model([fm], cfg)

    z = (fm.values - fm.values.mean(0)) / fm.values.std(0)
    s = np.where(noisy == 1, 0.7, 0.3) * fm.sample_weight
    s = s / s.sum()

    def objective(theta):
        w, b = theta[:-1], theta[-1]
        t = z @ w + b
        return float((s * (np.logaddexp(0, t) - noisy * t)).sum() + 0.5 * cfg.l2 * w @ w)

    ref = minimize(objective, np.zeros(3), method="BFGS", options={"gtol": 1e-10})
    assert objective(np.append(model.weights, model.bias)) == pytest.approx(ref.fun, abs=1e-6)
    assert np.allclose(model.weights, ref.x[:-1], atol=1e-2)


def test_single_class_is_rejected():
    rng = np.random.default_rng(3)
    fm = toy_matrix(rng)
    fm.labels = np.zeros_like(fm.labels)
    with pytest.raises(TrainingError):
        train_model([fm])


def test_missing_labels_and_mismatched_columns_are_rejected():
    rng = np.random.default_rng(3)
    fm = toy_matrix(rng)
    bare = FeatureMatrix(fm.u, fm.v, fm.values, fm.names)
    with pytest.raises(TrainingError):
        train_model([bare])
    with pytest.raises(SchemaError):
        train_model([fm, toy_matrix(rng, names=("a", "c"))])


def test_class_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        TrainConfig(class_weights=(0.5, 0.6))


def test_extreme_thresholds():
    rng = np.random.default_rng(5)
    fm = toy_matrix(rng)
    model = train_model([fm])
    assert predict_mask(model, fm, 0.0)[0].all()
    with pytest.raises(ValueError):
        Model(model.feature_names, model.means, model.stds, model.weights, model.bias, 1.01)
    assert not predict_mask(model, fm, 1.0)[0].any()


def test_prediction_checks_columns():
    rng = np.random.default_rng(6)
    model = train_model([toy_matrix(rng)])
    with pytest.raises(SchemaError):
        predict_mask(model, toy_matrix(rng, names=("a", "z")))


def test_model_json_reload_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    fm = toy_matrix(rng)
    model = train_model([fm])
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.weights, model.weights) and back.bias == model.bias
    assert np.array_equal(predict_mask(back, fm)[1], predict_mask(model, fm)[1])


def test_model_json_version_and_shape_are_checked():
    rng = np.random.default_rng(8)
    text = train_model([toy_matrix(rng)]).to_json()
    with pytest.raises(SchemaError):
        Model.from_json(text.replace('"version": 1', '"version": 2'))
    with pytest.raises(SchemaError):
        Model.from_json(text.replace('"a",', '"a", "extra",'))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 9), rows=st.integers(1, 60),
       t1=st.floats(0, 1), t2=st.floats(0, 1))
def test_retained_sets_nest_as_threshold_rises(seed, d, rows, t1, t2):
    rng = np.random.default_rng(seed)
    names = tuple(f"f{i}" for i in range(d))
    model = Model(names, rng.normal(size=d), rng.uniform(0.1, 3, d), rng.normal(scale=3, size=d),
                  float(rng.normal()))
    fm = FeatureMatrix(np.arange(rows), np.arange(rows) + 1, rng.normal(size=(rows, d)), names)
    lo, hi = sorted((t1, t2))
    assert np.all(predict_mask(model, fm, hi)[0] <= predict_mask(model, fm, lo)[0])


def test_mst_only_counts():
    inst = generate_random_instance(100, 0)
    s = mst_only_sparsify(inst, 7)
    assert s.m_hat == 693
    assert s.pruning_rate == pytest.approx(1 - 693 / 4950)
    assert round(s.pruning_rate, 2) == 0.86


def test_mst_only_on_k4_keeps_everything(k4_graded):
    assert mst_only_sparsify(k4_graded, 2).m_hat == 6


def test_insertion_makes_a_tour_available():
    inst = generate_random_instance(12, 4)
    empty = prune_instance(inst, np.zeros(inst.m, dtype=bool))
    tour = held_karp(inst)
    s = insert_tour_edges(empty, [tour])
    assert s.m_hat == 12 and s.inserted.sum() == 12
    assert contains_tour(s, tour)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(5, 40), seed=st.integers(0, 10_000), p=st.floats(0, 1))
def test_insertion_is_bounded_and_idempotent(n, seed, p):
    inst = generate_random_instance(n, seed)
    rng = np.random.default_rng(seed)
    s = prune_instance(inst, rng.random(inst.m) < p)
    tours = double_tree_tours(inst)
    once = insert_tour_edges(s, tours[:1])
    assert s.m_hat <= once.m_hat <= s.m_hat + n
    assert np.array_equal(insert_tour_edges(once, tours[:1]).retained, once.retained)
    both = insert_tour_edges(s, tours)
    assert all(contains_tour(both, t) for t in tours)
    assert not np.any(both.inserted & s.retained)


def test_tour_mask_has_n_edges(rectangle):
    assert tour_mask(double_tree_tours(rectangle)[0], 4).sum() == 4


def test_prune_mask_shape_is_checked(k4_graded):
    with pytest.raises(ValueError):
        prune_instance(k4_graded, np.ones(5, dtype=bool))
