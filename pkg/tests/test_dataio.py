from dataclasses import replace

import numpy as np
import pytest

from tsfuzzy import dataio
from tsfuzzy.clustering import ClusteringConfig
from tsfuzzy.dataio import (
    Dataset,
    generate_benchmark,
    load_csv,
    load_model,
    mean_center,
    save_model,
)
from tsfuzzy.errors import CorruptModelError, DataFormatError, SchemaVersionError, StateError
from tsfuzzy.pipeline import PipelineConfig, fit


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_two_rows(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n"))
        assert (ds.N, ds.k) == (2, 2)
        np.testing.assert_array_equal(ds.activity, [3, 6])
        assert ds.column_names == ("a", "b") and not ds.centered

    def test_nan_cell_is_named(self, tmp_path):
        with pytest.raises(DataFormatError, match=r"row 3, column 'b'"):
            load_csv(write(tmp_path, "a,b,y\n1,2,3\n4,NaN,6\n"))

    def test_header_only(self, tmp_path):
        with pytest.raises(DataFormatError, match="no rows"):
            load_csv(write(tmp_path, "a,b,y\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_csv(tmp_path / "absent.csv")

    def test_ragged(self, tmp_path):
        with pytest.raises(DataFormatError, match="row 2"):
            load_csv(write(tmp_path, "a,b,y\n1,2\n"))

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(DataFormatError, match="duplicate"):
            load_csv(write(tmp_path, "a,a,y\n1,2,3\n"))

    @pytest.mark.parametrize("cell", ['"1,5"', "inf", "1_000", "0x10", " "])
    def test_rejects_non_decimal(self, tmp_path, cell):
        with pytest.raises(DataFormatError):
            load_csv(write(tmp_path, f"a,y\n{cell},1\n"))

    def test_quoted_and_exponent(self, tmp_path):
        ds = load_csv(write(tmp_path, 'a,"y"\n"1.5e-3",-.25\n'))
        assert ds.descriptors[0, 0] == 1.5e-3 and ds.activity[0] == -0.25

    def test_activity_by_name(self, tmp_path):
        ds = load_csv(write(tmp_path, "pic50,a,b\n1,2,3\n"), activity_column="pic50")
        assert ds.column_names == ("a", "b") and ds.activity[0] == 1.0
        with pytest.raises(DataFormatError):
            load_csv(write(tmp_path, "a,b\n1,2\n"), activity_column="zzz")


class TestMeanCenter:
    def test_simple(self):
        ds = mean_center(Dataset([[1.0], [3.0]], [0.0, 2.0], ("a",)))
        np.testing.assert_array_equal(ds.descriptors[:, 0], [-1, 1])
        assert ds.column_means[0] == 2.0 and ds.activity_mean == 1.0 and ds.centered

    def test_zero_mean_column(self):
        ds = mean_center(Dataset([[-1.0], [1.0]], [1.0, 2.0], ("a",)))
        np.testing.assert_allclose(ds.descriptors[:, 0], [-1, 1], atol=1e-15)
        assert abs(ds.column_means[0]) < 1e-15

    def test_inverse(self, rng):
        X = rng.normal(5, 3, (30, 4))
        ds = mean_center(Dataset(X, rng.normal(size=30), tuple("abcd")))
        np.testing.assert_allclose(ds.descriptors + ds.column_means, X, atol=1e-12)
        np.testing.assert_allclose(ds.raw().descriptors, X, atol=1e-12)

    def test_double_centering(self):
        ds = mean_center(Dataset([[1.0]], [1.0], ("a",)))
        with pytest.raises(StateError):
            mean_center(ds)


@pytest.fixture(scope="module")
def trained():
    ds, _ = generate_benchmark("sigmoid-blend", 80, 0.05, 3)
    return fit(ds, PipelineConfig(ClusteringConfig(3, seed=1))).model


class TestModelFile:
    def test_round_trip(self, tmp_path, trained, rng):
        path = tmp_path / "m.json"
        save_model(trained, path, {"seed": 1})
        back = load_model(path)
        U = rng.normal(size=(100, trained.k)) * 2
        np.testing.assert_array_equal(back.predict_batch(U), trained.predict_batch(U))
        assert back.column_names == trained.column_names
        assert dataio.load_provenance(path) == {"seed": 1}

    def test_round_trip_is_byte_stable(self, tmp_path, trained):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_model(trained, a)
        save_model(load_model(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_zero_weight_rule_survives(self, tmp_path, trained):
        m = trained.with_unit_weights()
        m = replace(m, rules=(replace(m.rules[0], log_weight=-np.inf),) + m.rules[1:])
        save_model(m, tmp_path / "z.json")
        assert load_model(tmp_path / "z.json").rules[0].weight == 0.0

    def test_truncated(self, tmp_path, trained):
        path = tmp_path / "m.json"
        save_model(trained, path)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(CorruptModelError):
            load_model(path)

    def test_missing_field(self, tmp_path):
        path = write(tmp_path, '{"schema_version": 1, "model": {"rules": []}}', "m.json")
        with pytest.raises(CorruptModelError):
            load_model(path)

    def test_future_schema(self, tmp_path, trained):
        text = dataio.dumps_model(trained).replace(
            f'"schema_version": {dataio.SCHEMA_VERSION}', f'"schema_version": {dataio.SCHEMA_VERSION + 1}'
        )
        with pytest.raises(SchemaVersionError):
            load_model(write(tmp_path, text, "m.json"))


class TestBenchmarks:
    def test_two_regime_noiseless(self):
        ds, _ = generate_benchmark("two-regime", 100, 0.0, 11)
        x = ds.descriptors[:, 0]
        np.testing.assert_array_equal(ds.activity, np.where(x < 0, 2 * x + 1, -x + 1))

    @pytest.mark.parametrize("kind", dataio.BENCHMARK_KINDS)
    def test_deterministic(self, kind):
        a, _ = generate_benchmark(kind, 50, 0.1, 5)
        b, _ = generate_benchmark(kind, 50, 0.1, 5)
        np.testing.assert_array_equal(a.descriptors, b.descriptors)
        np.testing.assert_array_equal(a.activity, b.activity)
        assert np.all(np.isfinite(a.descriptors)) and len(set(a.column_names)) == a.k

    def test_irrelevant_column_uncorrelated(self):
        ds, truth = generate_benchmark("irrelevant-descriptor", 500, 0.05, 8)
        j = ds.column_names.index(truth["irrelevant_column"])
        assert abs(np.corrcoef(ds.descriptors[:, j], ds.activity)[0, 1]) < 0.2

    def test_unknown_kind(self):
        with pytest.raises(DataFormatError):
            generate_benchmark("spiral", 10)

    def test_write_then_load(self, tmp_path):
        ds, _ = generate_benchmark("sigmoid-blend", 20, 0.1, 2)
        dataio.write_csv(ds, tmp_path / "b.csv")
        back = load_csv(tmp_path / "b.csv")
        np.testing.assert_array_equal(back.descriptors, ds.descriptors)
        np.testing.assert_array_equal(back.activity, ds.activity)


def test_exports():
    rows = dataio.selection_rows_csv([(1, "logp", 0.51234567, "consequent")])
    assert rows == "role,rank,name,score\nconsequent,1,logp,0.512346\n"
    assert dataio.scatter_csv([1.0], [0.5], "test") == "1,0.5,test\n"
