"""Native classifiers, the planted-bias oracle, persistence, and the
external-model client."""

import itertools
import os
import sys

import numpy as np
import pytest

from fairprobe import (
    DiscriminationConfig,
    DomainError,
    LabeledDataset,
    LogisticModel,
    ParseError,
    PlantedBiasSpec,
    ProtocolError,
    TrainingError,
    TransportError,
    check_discriminatory,
    connect_external,
    load_model,
    make_planted,
    sample_uniform,
    save_model,
    train_logistic,
    train_tree,
)
from fairprobe.models import format_model, logistic_loss_grad, parse_model
from conftest import make_domain

STUB = os.path.join(os.path.dirname(__file__), "stub_adapter.py")


def stub_command(*extra):
    return " ".join([sys.executable, STUB, *extra])


@pytest.fixture
def digits_domain():
    return make_domain([("a", 0, 9, False), ("b", 0, 9, False), ("g", 0, 1, True)])


def dataset(domain, rows):
    return LabeledDataset(domain, tuple(rows), source="inline")


class TestPlanted:
    def test_outside_region_same_label_for_both_protected(self, digits_domain):
        model = make_planted(
            digits_domain, PlantedBiasSpec(region={0: (0, 2)}, biased_protected_value=1)
        )
        assert model.predict((5, 5, 0)) == model.predict((5, 5, 1)) == 1

    def test_inside_region_biased_value_flips(self, digits_domain):
        model = make_planted(
            digits_domain, PlantedBiasSpec(region={0: (0, 2)}, biased_protected_value=1)
        )
        assert model.predict((1, 5, 1)) == -1
        assert model.predict((1, 5, 0)) == 1

    def test_full_region_rho_one(self, digits_domain):
        model = make_planted(
            digits_domain, PlantedBiasSpec(region={}, biased_protected_value=0)
        )
        assert model.rho == 1.0

    def test_empty_region_rho_zero(self, digits_domain):
        model = make_planted(
            digits_domain, PlantedBiasSpec(region=None, biased_protected_value=0)
        )
        assert model.rho == 0.0

    def test_out_of_bounds_region_rejected(self, digits_domain):
        with pytest.raises(DomainError):
            make_planted(
                digits_domain,
                PlantedBiasSpec(region={0: (5, 12)}, biased_protected_value=1),
            )
        with pytest.raises(DomainError):
            make_planted(
                digits_domain,
                PlantedBiasSpec(region={2: (0, 1)}, biased_protected_value=1),
            )

    def _brute_force_fraction(self, model, domain):
        cfg = DiscriminationConfig(0.0)
        ranges = [range(p.min_value, p.max_value + 1) for p in domain.params]
        total = hits = 0
        for values in itertools.product(*ranges):
            total += 1
            if check_discriminatory(model, values, domain, cfg) is not None:
                hits += 1
        return hits / total

    def test_ten_percent_subrange_rho(self, digits_domain):
        # 10% sub-range of `a`, full range of `b`: closed form says 0.10;
        # the brute-force enumeration over all 200 points is the oracle.
        model = make_planted(
            digits_domain, PlantedBiasSpec(region={0: (0, 0)}, biased_protected_value=1)
        )
        assert model.rho == pytest.approx(0.10)
        assert self._brute_force_fraction(model, digits_domain) == pytest.approx(model.rho)

    def test_rho_matches_brute_force_on_random_specs(self):
        meta = np.random.default_rng(77)
        domain = make_domain(
            [("a", 0, 11, False), ("b", 0, 7, False), ("g", 0, 2, True)]
        )
        for _ in range(10):
            lo_a = int(meta.integers(0, 12))
            hi_a = int(meta.integers(lo_a, 12))
            lo_b = int(meta.integers(0, 8))
            hi_b = int(meta.integers(lo_b, 8))
            region = {0: (lo_a, hi_a), 1: (lo_b, hi_b)}
            model = make_planted(
                domain,
                PlantedBiasSpec(region=region, biased_protected_value=int(meta.integers(0, 3))),
            )
            assert self._brute_force_fraction(model, domain) == pytest.approx(model.rho)


class TestLogistic:
    def test_zero_weights_positive_bias_always_plus_one(self, digits_domain):
        model = LogisticModel(
            weights=np.zeros(3), bias=0.3, lo=np.zeros(3), span=np.ones(3)
        )
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert model.predict(sample_uniform(digits_domain, rng)) == 1

    def test_separable_toy_set_reaches_full_accuracy(self, digits_domain):
        rows = []
        for i in range(20):
            a = i % 10
            b = (3 * i) % 10
            rows.append(((a, b, i % 2), 1 if a >= 5 else -1))
        ds = dataset(digits_domain, rows)
        model = train_logistic(ds, epochs=3000, learning_rate=5.0, seed=1)
        assert all(model.predict(v) == y for v, y in ds.rows)

    def test_single_class_predicts_it_everywhere(self, digits_domain):
        ds = dataset(digits_domain, [((i, i % 10, 0), -1) for i in range(10)])
        model = train_logistic(ds, epochs=500, learning_rate=5.0, seed=0)
        rng = np.random.default_rng(4)
        for _ in range(50):
            assert model.predict(sample_uniform(digits_domain, rng)) == -1

    def test_same_data_and_seed_bitwise_identical(self, digits_domain):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 7) % 10, i % 2), 1 if (i * 3) % 4 < 2 else -1) for i in range(30)],
        )
        m1 = train_logistic(ds, epochs=200, learning_rate=2.0, seed=9)
        m2 = train_logistic(ds, epochs=200, learning_rate=2.0, seed=9)
        assert m1.weights.tobytes() == m2.weights.tobytes()
        assert m1.bias == m2.bias

    def test_empty_dataset_rejected(self, digits_domain):
        with pytest.raises(TrainingError):
            train_logistic(dataset(digits_domain, []))

    def test_non_binary_labels_rejected(self, digits_domain):
        with pytest.raises(TrainingError):
            train_logistic(dataset(digits_domain, [((0, 0, 0), 3)]))

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            n, d = 12, 4
            x = rng.random((n, d))
            y01 = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(size=d)
            b = float(rng.normal())
            _, grad_w, grad_b = logistic_loss_grad(w, b, x, y01)
            h = 1e-6
            for j in range(d):
                e = np.zeros(d)
                e[j] = h
                hi, _, _ = logistic_loss_grad(w + e, b, x, y01)
                lo, _, _ = logistic_loss_grad(w - e, b, x, y01)
                numeric = (hi - lo) / (2 * h)
                assert abs(numeric - grad_w[j]) <= 1e-4 * max(1.0, abs(grad_w[j]))
            hi, _, _ = logistic_loss_grad(w, b + h, x, y01)
            lo, _, _ = logistic_loss_grad(w, b - h, x, y01)
            numeric = (hi - lo) / (2 * h)
            assert abs(numeric - grad_b) <= 1e-4 * max(1.0, abs(grad_b))


def leaf_row_counts(model, rows):
    """Route rows through the tree; returns (leaf depth, row count) pairs."""
    counts = []

    def walk(node, subset, depth):
        if node.is_leaf:
            counts.append((depth, len(subset)))
            return
        left = [r for r in subset if r[node.param] <= node.threshold]
        right = [r for r in subset if r[node.param] > node.threshold]
        walk(node.left, left, depth + 1)
        walk(node.right, right, depth + 1)

    walk(model.root, rows, 0)
    return counts


class TestTree:
    def test_perfect_split_gives_depth_one_tree(self, digits_domain):
        rows = [((a, (a * 3) % 10, a % 2), -1 if a <= 5 else 1) for a in range(10)]
        model = train_tree(dataset(digits_domain, rows), max_depth=4, min_leaf=1)
        root = model.root
        assert not root.is_leaf
        assert root.param == 0
        assert root.threshold == 5
        assert root.left.is_leaf and root.left.label == -1
        assert root.right.is_leaf and root.right.label == 1

    def test_depth_zero_is_majority_stump(self, digits_domain):
        rows = [((i, 0, 0), 1) for i in range(6)] + [((i, 1, 0), -1) for i in range(4)]
        model = train_tree(dataset(digits_domain, rows), max_depth=0, min_leaf=1)
        assert model.root.is_leaf
        assert model.root.label == 1

    def test_equal_gain_ties_break_to_lower_param_index(self, digits_domain):
        # b mirrors a exactly, so both parameters offer identical pure splits.
        rows = [((a, a, 0), 1 if a <= 3 else -1) for a in range(8)]
        model = train_tree(dataset(digits_domain, rows), max_depth=1, min_leaf=1)
        assert model.root.param == 0
        assert model.root.threshold == 3

    def test_equal_gain_ties_break_to_lower_threshold(self, digits_domain):
        # Labels +,-,+,- over a=0..3: thresholds 0 and 2 tie; 0 must win.
        rows = [((a, 0, 0), 1 if a % 2 == 0 else -1) for a in range(4)]
        model = train_tree(dataset(digits_domain, rows), max_depth=1, min_leaf=1)
        assert model.root.param == 0
        assert model.root.threshold == 0

    def test_empty_dataset_rejected(self, digits_domain):
        with pytest.raises(TrainingError):
            train_tree(dataset(digits_domain, []))

    def test_respects_max_depth_and_min_leaf(self, digits_domain):
        meta = np.random.default_rng(31)
        for trial in range(8):
            rows = []
            for _ in range(60):
                v = (
                    int(meta.integers(0, 10)),
                    int(meta.integers(0, 10)),
                    int(meta.integers(0, 2)),
                )
                rows.append((v, int(meta.choice([-1, 1]))))
            max_depth = int(meta.integers(1, 5))
            min_leaf = int(meta.integers(1, 6))
            model = train_tree(
                dataset(digits_domain, rows), max_depth=max_depth, min_leaf=min_leaf
            )
            for depth, count in leaf_row_counts(model, [r[0] for r in rows]):
                assert depth <= max_depth
                assert count >= min_leaf


class TestBatchSemantics:
    def test_batch_equals_mapped_predict(self, digits_domain):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 7) % 10, i % 2), 1 if i % 3 else -1) for i in range(30)],
        )
        models = [
            train_logistic(ds, epochs=100, learning_rate=1.0, seed=0),
            train_tree(ds, max_depth=3, min_leaf=1),
            make_planted(
                digits_domain,
                PlantedBiasSpec(region={0: (2, 6)}, biased_protected_value=1),
            ),
        ]
        rng = np.random.default_rng(12)
        rows = [sample_uniform(digits_domain, rng) for _ in range(100)]
        for model in models:
            assert model.predict_batch(rows) == [model.predict(r) for r in rows]


class TestPurity:
    def test_repeated_predict_returns_one_label(self, digits_domain):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 7) % 10, i % 2), 1 if i % 3 else -1) for i in range(30)],
        )
        models = [
            train_logistic(ds, epochs=100, learning_rate=1.0, seed=0),
            train_tree(ds, max_depth=3, min_leaf=1),
            make_planted(
                digits_domain,
                PlantedBiasSpec(region={0: (2, 6)}, biased_protected_value=1),
            ),
        ]
        rng = np.random.default_rng(8)
        for model in models:
            values = sample_uniform(digits_domain, rng)
            labels = {model.predict(values) for _ in range(100)}
            assert len(labels) == 1


class TestPersistence:
    def _samples(self, domain, count=200):
        rng = np.random.default_rng(55)
        return [sample_uniform(domain, rng) for _ in range(count)]

    def test_logistic_round_trip(self, digits_domain, tmp_path):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 3) % 10, i % 2), 1 if i % 2 else -1) for i in range(40)],
        )
        model = train_logistic(ds, epochs=300, learning_rate=2.0, seed=3)
        path = tmp_path / "m.txt"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert format_model(loaded) == format_model(model)
        samples = self._samples(digits_domain)
        assert loaded.predict_batch(samples) == model.predict_batch(samples)

    def test_tree_round_trip(self, digits_domain, tmp_path):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 7) % 10, i % 2), 1 if (i * 5) % 3 else -1) for i in range(50)],
        )
        model = train_tree(ds, max_depth=4, min_leaf=2)
        path = tmp_path / "m.txt"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert format_model(loaded) == format_model(model)
        samples = self._samples(digits_domain)
        assert loaded.predict_batch(samples) == model.predict_batch(samples)

    def test_planted_round_trip(self, digits_domain, tmp_path):
        model = make_planted(
            digits_domain, PlantedBiasSpec(region={0: (1, 4)}, biased_protected_value=1)
        )
        path = tmp_path / "m.txt"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert loaded.rho == model.rho
        assert format_model(loaded) == format_model(model)
        samples = self._samples(digits_domain)
        assert loaded.predict_batch(samples) == model.predict_batch(samples)

    def test_bad_tag_rejected(self):
        with pytest.raises(ParseError):
            parse_model("some-other-format\nkind: logistic\n")


class TestExternal:
    def test_constant_adapter(self, digits_domain):
        with connect_external(
            stub_command("--mode", "const", "--label", "1", "--params", "3"),
            digits_domain,
        ) as model:
            assert model.alphabet == (-1, 1)
            rng = np.random.default_rng(2)
            for _ in range(20):
                assert model.predict(sample_uniform(digits_domain, rng)) == 1

    def test_linear_adapter_matches_native_logistic(self, digits_domain, tmp_path):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 3 + 1) % 10, i % 2), 1 if (i * 7) % 5 < 3 else -1) for i in range(60)],
        )
        native = train_logistic(ds, epochs=500, learning_rate=2.0, seed=6)
        path = tmp_path / "weights.txt"
        save_model(native, str(path))
        rng = np.random.default_rng(90)
        samples = [sample_uniform(digits_domain, rng) for _ in range(1000)]
        with connect_external(
            stub_command("--mode", "linear", "--model-file", str(path)),
            digits_domain,
        ) as model:
            assert model.predict_batch(samples) == native.predict_batch(samples)

    def test_batch_equals_mapped_predict_over_the_wire(self, digits_domain, tmp_path):
        ds = dataset(
            digits_domain,
            [((i % 10, (i * 3 + 1) % 10, i % 2), 1 if (i * 7) % 5 < 3 else -1) for i in range(60)],
        )
        native = train_logistic(ds, epochs=300, learning_rate=2.0, seed=6)
        path = tmp_path / "weights.txt"
        save_model(native, str(path))
        rng = np.random.default_rng(14)
        rows = [sample_uniform(digits_domain, rng) for _ in range(30)]
        with connect_external(
            stub_command("--mode", "linear", "--model-file", str(path)),
            digits_domain,
        ) as model:
            assert model.predict_batch(rows) == [model.predict(r) for r in rows]

    def test_param_count_mismatch_is_protocol_error(self, digits_domain):
        with pytest.raises(ProtocolError, match="3"):
            connect_external(
                stub_command("--mode", "const", "--params", "4"), digits_domain
            )

    def test_child_exit_is_transport_error(self, digits_domain):
        with pytest.raises(TransportError):
            connect_external(f"{sys.executable} -c 'import sys; sys.exit(3)'", digits_domain)

    def test_garbage_response_is_protocol_error(self, digits_domain):
        with pytest.raises(ProtocolError):
            connect_external(stub_command("--mode", "garbage"), digits_domain)
