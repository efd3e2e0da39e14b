"""Sequential trainer: update rule, traces, reproducibility, serialization."""

import numpy as np
import pytest

from skg.errors import ArgumentError, NumericError
from skg.graph_data import TrainingSet
from skg.model import SkgModel, load_model, save_model, write_training_trace_csv
from skg.rff import feature_matrix, sample_bank


def make_model(eta=0.1, n_features=32, input_dim=4, seed=0, sigma_sq=2.0):
    return SkgModel(bank=sample_bank(sigma_sq, n_features, input_dim, seed), eta=eta)


class TestPredict:
    def test_zero_coefficients_predict_zero(self):
        model = make_model()
        assert model.predict(np.ones(4)) == 0.0
        assert np.all(model.predict_batch(np.random.default_rng(0).random((5, 4))) == 0.0)

    def test_state_after_one_step_recovers_scaled_value(self):
        # after one step from zero, predicting the same vector gives 2*eta*y
        model = make_model(eta=0.1)
        a, y = np.array([0.5, 1.0, -2.0, 0.0]), 3.0
        error = model.train_step(a, y)
        assert error == y
        assert model.predict(a) == pytest.approx(2 * 0.1 * y, rel=1e-12)


class TestTrainStep:
    def test_matched_value_is_a_no_op(self):
        model = make_model()
        a = np.array([1.0, 2.0, 3.0, 4.0])
        model.train_step(a, 1.0)
        before = model.theta.copy()
        error = model.train_step(a, model.predict(a))
        assert error == 0.0
        assert np.array_equal(model.theta, before)

    def test_two_steps_on_same_pair(self):
        # hand recursion with unit-norm features: predictions 0 then 2*eta*1
        model = make_model(eta=0.1)
        a = np.array([0.3, -0.7, 0.2, 1.1])
        assert model.predict(a) == 0.0
        model.train_step(a, 1.0)
        assert model.predict(a) == pytest.approx(0.2, rel=1e-12)

    def test_non_finite_rejected(self):
        model = make_model()
        with pytest.raises(NumericError):
            model.train_step(np.ones(4), float("nan"))


class TestTrain:
    def test_duration_is_epochs_times_n(self):
        rng = np.random.default_rng(5)
        ts = TrainingSet(rng.random((33, 4)), rng.standard_normal(33))
        trace = make_model().train(ts, epochs=3, seed=1)
        assert trace.duration == 99

    def test_single_pair_single_epoch(self):
        ts = TrainingSet(np.ones((1, 4)), np.array([2.5]))
        trace = make_model().train(ts, epochs=1, seed=0)
        assert trace.duration == 1
        assert trace.errors[0] == 2.5 and trace.predictions[0] == 0.0

    def test_same_seed_same_trace(self):
        rng = np.random.default_rng(2)
        ts = TrainingSet(rng.random((6, 4)), rng.standard_normal(6))
        t1 = make_model().train(ts, epochs=2, seed=9)
        t2 = make_model().train(ts, epochs=2, seed=9)
        assert np.array_equal(t1.order, t2.order)
        assert np.array_equal(t1.predictions, t2.predictions)
        assert np.array_equal(t1.errors, t2.errors)

    def test_order_stream_independent_of_bank_size(self):
        # node order must not move when only the bank size changes
        rng = np.random.default_rng(2)
        ts = TrainingSet(rng.random((6, 4)), rng.standard_normal(6))
        small = make_model(n_features=8).train(ts, epochs=2, seed=9)
        large = make_model(n_features=64).train(ts, epochs=2, seed=9)
        assert np.array_equal(small.order, large.order)

    def test_each_epoch_visits_every_node_once(self):
        rng = np.random.default_rng(3)
        ts = TrainingSet(rng.random((5, 4)), rng.standard_normal(5))
        trace = make_model().train(ts, epochs=4, seed=11)
        for e in range(4):
            assert sorted(trace.order[e * 5:(e + 1) * 5]) == list(range(5))

    def test_shuffle_marginals_are_uniform(self):
        # every node should occupy every slot about a quarter of the time
        ts = TrainingSet(np.eye(4), np.zeros(4))
        bank = sample_bank(1.0, 4, 4, seed=0)
        counts = np.zeros((4, 4))
        for seed in range(2000):
            trace = SkgModel(bank=bank, eta=0.1).train(ts, epochs=1, seed=seed)
            for position, idx in enumerate(trace.order):
                counts[idx, position] += 1
        assert np.all(np.abs(counts / 2000 - 0.25) <= 0.03)

    def test_coefficients_reconstruct_from_errors(self):
        # theta after T steps equals 2*eta * sum of error-weighted features
        rng = np.random.default_rng(4)
        ts = TrainingSet(rng.random((8, 4)), rng.standard_normal(8))
        model = make_model(eta=0.05)
        trace = model.train(ts, epochs=3, seed=13)
        ordered = feature_matrix(model.bank, ts.vectors)[trace.order]
        rebuilt = 2 * 0.05 * (trace.errors @ ordered)
        rel = np.abs(rebuilt - model.theta).max() / np.abs(model.theta).max()
        assert rel < 1e-10

    def test_epoch_and_dimension_validation(self):
        ts = TrainingSet(np.ones((2, 4)), np.ones(2))
        with pytest.raises(ArgumentError):
            make_model().train(ts, epochs=0, seed=0)
        with pytest.raises(ArgumentError):
            make_model(input_dim=5).train(ts, epochs=1, seed=0)


class TestSerialization:
    def test_round_trip_preserves_predictions_bitwise(self, tmp_path):
        rng = np.random.default_rng(6)
        ts = TrainingSet(rng.random((6, 4)), rng.standard_normal(6))
        model = make_model(eta=0.1, seed=21)
        model.train(ts, epochs=2, seed=3)
        path = tmp_path / "model.json"
        save_model(path, model, referencing=["a", "b", "c", "d"], value_scale=2.0)
        loaded, meta = load_model(path)
        assert meta["referencing"] == ["a", "b", "c", "d"]
        assert meta["value_scale"] == 2.0
        probe = rng.random((3, 4))
        assert np.array_equal(loaded.predict_batch(probe), model.predict_batch(probe))

    def test_trace_csv_layout(self, tmp_path):
        ts = TrainingSet(np.ones((2, 4)), np.array([1.0, -1.0]))
        model = make_model()
        trace = model.train(ts, epochs=2, seed=0)
        path = tmp_path / "trace.csv"
        write_training_trace_csv(path, trace)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,node_index,prediction,error"
        assert len(lines) == 1 + trace.duration
        assert lines[1].startswith("1,")
