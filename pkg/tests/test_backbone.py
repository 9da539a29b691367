"""Tests for the bag-of-words backbone and the predictions.csv wire format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionet.backbone import (
    BowConfig,
    PredictionFileError,
    PredictionMatrix,
    bow_loss,
    load_bow,
    predict_bow,
    read_predictions,
    save_bow,
    train_bow,
    write_predictions,
)
from fusionet.corpus import Dataset, LabeledItem


def separable_dataset():
    items = (
        LabeledItem(id="r1", text="vaccine update from ministry", label="real"),
        LabeledItem(id="r2", text="ministry confirms vaccine rollout", label="real"),
        LabeledItem(id="f1", text="miracle cure hoax spreads", label="fake"),
        LabeledItem(id="f2", text="hoax about miracle drink", label="fake"),
    )
    return Dataset(items=items)


def quantized(p):
    """Snap a float to its 9-significant-digit decimal representation."""
    return float(f"{p:.9g}")


class TestTrainBow:
    def test_separable_toy_set_fits_perfectly(self):
        data = separable_dataset()
        model = train_bow(data)
        result = predict_bow(model, data)
        predicted = ["real" if p[0] >= p[1] else "fake" for p in result.probs[:, 0]]
        assert predicted == ["real", "real", "fake", "fake"]

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train_bow(Dataset(items=()))

    def test_single_class_rejected(self):
        items = tuple(LabeledItem(id=f"i{k}", text="words", label="real") for k in range(4))
        with pytest.raises(ValueError):
            train_bow(Dataset(items=items))

    def test_same_seed_identical_weights(self):
        data = separable_dataset()
        a = train_bow(data, BowConfig(seed=11))
        b = train_bow(data, BowConfig(seed=11))
        assert np.array_equal(a.weights, b.weights) and a.bias == b.bias

    def test_distinct_seeds_differ(self):
        data = separable_dataset()
        a = train_bow(data, BowConfig(seed=1))
        b = train_bow(data, BowConfig(seed=2))
        assert not np.array_equal(a.weights, b.weights)

    def test_loss_non_increasing_at_default_lr(self):
        data = separable_dataset()
        cfg = BowConfig()
        losses = [
            bow_loss(train_bow(data, BowConfig(epochs=e, seed=cfg.seed)), data, cfg.l2)
            for e in range(0, 60, 3)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestPredictBow:
    def test_all_oov_text_gives_bias_probability(self):
        model = train_bow(separable_dataset())
        oov = Dataset(items=(LabeledItem(id="x", text="zzz qqq www", label=None),))
        pair = predict_bow(model, oov).probs[0, 0]
        expected_fake = 1.0 / (1.0 + math.exp(-model.bias))
        assert pair[1] == pytest.approx(expected_fake, abs=1e-12)

    def test_identical_texts_identical_pairs(self):
        model = train_bow(separable_dataset())
        twins = Dataset(
            items=(
                LabeledItem(id="a", text="vaccine hoax mix", label=None),
                LabeledItem(id="b", text="vaccine hoax mix", label=None),
            )
        )
        probs = predict_bow(model, twins).probs
        assert np.array_equal(probs[0], probs[1])

    def test_pairs_sum_to_one(self):
        model = train_bow(separable_dataset())
        result = predict_bow(model, separable_dataset())
        np.testing.assert_allclose(result.probs.sum(axis=2), 1.0, atol=1e-6)


class TestPredictionFiles:
    def make_matrix(self):
        probs = np.array(
            [
                [[0.7, 0.3], [quantized(1 / 3), quantized(2 / 3)]],
                [[0.123456789, 0.876543211], [1.0, 0.0]],
                [[0.5, 0.5], [0.25, 0.75]],
            ]
        )
        return PredictionMatrix(
            model_names=("modelA", "modelB"),
            item_ids=("x1", "x2", "x3"),
            probs=probs,
        )

    def test_round_trip_bit_exact(self, tmp_path):
        matrix = self.make_matrix()
        path = tmp_path / "pred.csv"
        write_predictions(matrix, path)
        loaded = read_predictions(path)
        assert loaded.model_names == matrix.model_names
        assert loaded.item_ids == matrix.item_ids
        assert np.array_equal(loaded.probs, matrix.probs)

    def test_bad_row_sum_names_row(self, tmp_path):
        path = tmp_path / "pred.csv"
        path.write_text("item_id,model_name,p_real,p_fake\nx,modelA,0.7,0.2\n")
        with pytest.raises(PredictionFileError, match="x,modelA"):
            read_predictions(path)

    def test_missing_model_column_rejected(self, tmp_path):
        path = tmp_path / "pred.csv"
        path.write_text(
            "item_id,model_name,p_real,p_fake\n"
            "x1,modelA,0.6,0.4\nx1,modelB,0.2,0.8\nx2,modelA,0.5,0.5\n"
        )
        with pytest.raises(PredictionFileError, match="modelB"):
            read_predictions(path)

    def test_five_model_file(self, tmp_path):
        lines = ["item_id,model_name,p_real,p_fake"]
        for item in ("a", "b"):
            for j in range(5):
                lines.append(f"{item},m{j},0.6,0.4")
        path = tmp_path / "pred.csv"
        path.write_text("\n".join(lines) + "\n")
        assert read_predictions(path).n_models == 5

    def test_probability_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "pred.csv"
        path.write_text("item_id,model_name,p_real,p_fake\nx,m,1.2,-0.2\n")
        with pytest.raises(PredictionFileError, match="outside"):
            read_predictions(path)

    def test_near_miss_rows_renormalized(self, tmp_path):
        # 5e-5 off: inside the 1e-4 file tolerance, outside the 1e-6 pair tolerance
        path = tmp_path / "pred.csv"
        path.write_text("item_id,model_name,p_real,p_fake\nx,m,0.70005,0.3\n")
        probs = read_predictions(path).probs[0, 0]
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_empty_model_set_rejected(self):
        with pytest.raises(ValueError, match="at least one model"):
            PredictionMatrix(model_names=(), item_ids=("a",), probs=np.zeros((1, 0, 2)))

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8))
    @settings(max_examples=60)
    def test_written_rows_always_read_back(self, p_reals):
        import tempfile
        from pathlib import Path

        probs = np.array([[[quantized(p), quantized(1 - p)] for p in p_reals]])
        matrix = PredictionMatrix(
            model_names=tuple(f"m{i}" for i in range(len(p_reals))),
            item_ids=("only",),
            probs=probs,
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "p.csv"
            write_predictions(matrix, path)
            assert np.array_equal(read_predictions(path).probs, probs)


class TestBowModelFile:
    def test_round_trip(self, tmp_path):
        model = train_bow(separable_dataset())
        path = tmp_path / "bow.json"
        save_bow(model, path)
        loaded = load_bow(path)
        assert loaded.vocabulary == model.vocabulary
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias
