import numpy as np
import pytest

from ctwm.errors import (
    ConfigError,
    MatrixParseError,
    NegativeEntryError,
    NonSquareError,
    ZeroRowError,
)
from ctwm.net import (
    GraphGenConfig,
    GraphModel,
    gen_network,
    load_matrix,
    save_matrix,
    validate_and_normalize,
)

from .conftest import REMARK_ROWS


class TestValidateAndNormalize:
    def test_single_node(self):
        m = validate_and_normalize([[1.0]])
        assert m.n == 1
        assert m.weights[0, 0] == 1.0

    def test_already_stochastic_unchanged(self):
        m = validate_and_normalize(REMARK_ROWS)
        assert np.allclose(m.weights, REMARK_ROWS, atol=1e-15)

    def test_row_normalization(self):
        m = validate_and_normalize([[2.0, 2.0], [1.0, 3.0]])
        assert np.array_equal(m.weights, [[0.5, 0.5], [0.25, 0.75]])

    def test_row_sums_within_tolerance(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 12))
            m = validate_and_normalize(rng.random((n, n)) + 1e-3)
            assert np.abs(m.weights.sum(axis=1) - 1.0).max() <= 1e-12
            assert (m.weights >= 0).all()

    def test_non_square(self):
        with pytest.raises(NonSquareError):
            validate_and_normalize([[1.0, 0.0]])

    def test_negative_entry_location(self):
        with pytest.raises(NegativeEntryError) as err:
            validate_and_normalize([[0.5, 0.5], [-0.1, 1.1]])
        assert (err.value.row, err.value.col) == (1, 0)

    def test_zero_row(self):
        with pytest.raises(ZeroRowError) as err:
            validate_and_normalize([[1.0, 0.0], [0.0, 0.0]])
        assert err.value.row == 1

    def test_matrix_is_immutable(self, remark_matrix):
        with pytest.raises(ValueError):
            remark_matrix.weights[0, 0] = 0.9


class TestGenNetwork:
    def test_er_p_zero_forces_self_loops(self):
        m = gen_network(GraphGenConfig(model="er", n=2, p=0.0, seed=1))
        assert np.array_equal(m.weights, np.eye(2))

    def test_ws_p_zero_exact_out_degree(self):
        cfg = GraphGenConfig(model="ws", n=30, p=0.0, seed=3, mean_out_degree=6)
        m = gen_network(cfg)
        assert ((m.weights > 0).sum(axis=1) == 6).all()
        assert (np.diag(m.weights) == 0).all()

    def test_same_seed_identical(self):
        for model, deg in ((GraphModel.ERDOS_RENYI, None), (GraphModel.WATTS_STROGATZ, 4)):
            cfg = GraphGenConfig(model=model, n=12, p=0.4, seed=7, mean_out_degree=deg)
            a, b = gen_network(cfg), gen_network(cfg)
            assert np.array_equal(a.weights, b.weights)

    def test_different_seeds_differ(self):
        a = gen_network(GraphGenConfig(model="er", n=8, p=0.5, seed=1))
        b = gen_network(GraphGenConfig(model="er", n=8, p=0.5, seed=2))
        assert not np.array_equal(a.weights, b.weights)

    def test_er_p_one_complete(self):
        m = gen_network(GraphGenConfig(model="er", n=5, p=1.0, seed=7))
        off_diag = ~np.eye(5, dtype=bool)
        assert (m.weights[off_diag] > 0).all()
        assert (np.diag(m.weights) == 0).all()

    def test_invariants_over_many_configs(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 14))
            if rng.random() < 0.5:
                cfg = GraphGenConfig(model="er", n=n, p=float(rng.random()),
                                     seed=int(rng.integers(2**63)))
            else:
                k = 2 * int(rng.integers(1, max(2, n // 2)))
                if k >= n:
                    continue
                cfg = GraphGenConfig(model="ws", n=n, p=float(rng.random()),
                                     seed=int(rng.integers(2**63)), mean_out_degree=k)
            m = gen_network(cfg)
            assert np.abs(m.weights.sum(axis=1) - 1.0).max() <= 1e-12
            assert (m.weights >= 0).all()

    def test_ws_rewiring_keeps_out_degree(self, rng):
        cfg = GraphGenConfig(model="ws", n=20, p=1.0, seed=11, mean_out_degree=4)
        m = gen_network(cfg)
        assert ((m.weights > 0).sum(axis=1) == 4).all()

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            GraphGenConfig(model="er", n=5, p=1.5)
        with pytest.raises(ConfigError):
            GraphGenConfig(model="ws", n=6, p=0.5, mean_out_degree=3)
        with pytest.raises(ConfigError):
            GraphGenConfig(model="ws", n=4, p=0.5, mean_out_degree=4)
        with pytest.raises(ConfigError):
            GraphGenConfig(model="er", n=0, p=0.5)
        with pytest.raises(ValueError):
            GraphGenConfig(model="nope", n=5, p=0.5)


class TestMatrixIO:
    def test_csv_round_trip_bit_exact(self, tmp_path, remark_matrix):
        path = tmp_path / "w.csv"
        save_matrix(remark_matrix, path)
        loaded = load_matrix(path)
        assert np.array_equal(loaded.weights, remark_matrix.weights)

    def test_json_round_trip_bit_exact(self, tmp_path, rng):
        m = validate_and_normalize(rng.random((7, 7)))
        path = tmp_path / "w.json"
        save_matrix(m, path, meta={"seed": 42})
        loaded = load_matrix(path)
        assert np.array_equal(loaded.weights, m.weights)

    def test_generated_round_trips(self, tmp_path, rng):
        for i in range(20):
            m = gen_network(GraphGenConfig(model="er", n=int(rng.integers(1, 10)),
                                           p=float(rng.random()), seed=i))
            path = tmp_path / f"m{i}.csv"
            save_matrix(m, path)
            assert np.array_equal(load_matrix(path).weights, m.weights)

    def test_load_normalizes_raw_rows(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("2,2\n1,3\n")
        m = load_matrix(path)
        assert np.array_equal(m.weights, [[0.5, 0.5], [0.25, 0.75]])

    def test_malformed_row_length(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.5,0.5\n1.0\n")
        with pytest.raises(MatrixParseError) as err:
            load_matrix(path)
        assert err.value.row == 1

    def test_non_numeric_field(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.5,0.5\n0.5,x\n")
        with pytest.raises(MatrixParseError) as err:
            load_matrix(path)
        assert (err.value.row, err.value.col) == (1, 1)

    def test_negative_entry_in_file(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("0.5,0.5\n-1,2\n")
        with pytest.raises(NegativeEntryError):
            load_matrix(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_matrix(tmp_path / "absent.csv")

    def test_non_square_file(self, tmp_path):
        path = tmp_path / "rect.csv"
        path.write_text("0.5,0.5\n")
        with pytest.raises(MatrixParseError):
            load_matrix(path)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text("{\"n\": 2}")
        with pytest.raises(MatrixParseError):
            load_matrix(path)
