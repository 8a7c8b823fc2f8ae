import numpy as np
import pytest
from pyafn.data import DomainDataset
from pyafn.data import DomainTag
from pyafn.data import load_csv
from pyafn.data import write_csv
from result import Err
from result import Ok


def _write(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _error(result):
    match result:
        case Err(error):
            return error
        case Ok(value):
            pytest.fail(f"expected an error, got {value!r}")


class TestLoad:
    def test_three_rows(self, tmp_path):
        path = _write(
            tmp_path / "source.csv",
            "f0,f1,label,domain",
            "0.5,-1.25,0,source",
            "1e-3,2,1,source",
            "3,4,0,source",
        )
        ds = load_csv(path).unwrap()

        np.testing.assert_array_equal(ds.features, [[0.5, -1.25], [1e-3, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])
        assert ds.label_space == frozenset({0, 1})
        assert ds.domain_tag is DomainTag.Source

    def test_round_trip_is_exact(self, tmp_path, rng):
        ds = DomainDataset(rng.standard_normal((5, 3)), np.array([0, 2, 1, 1, 0]), frozenset({0, 1, 2}), DomainTag.Source)
        path = write_csv(ds, tmp_path / "source.csv").unwrap()

        loaded = load_csv(path, ds.label_space).unwrap()

        assert loaded.fingerprint() == ds.fingerprint()

    def test_unlabeled_target(self, tmp_path):
        path = _write(tmp_path / "target.csv", "f0,f1,label,domain", "0.5,1,,target", "2,3,,target")
        ds = load_csv(path).unwrap()

        assert ds.labels is None
        assert ds.n == 2

    def test_malformed_header(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "x0,x1,label", "0.5,1,0")
        error = _error(load_csv(path))

        assert error.id == "E008"
        assert error.location == f"{path}:1"

    def test_non_numeric_cell(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "f0,f1,label,domain", "0.5,1,0,source", "0.5,abc,1,source")
        error = _error(load_csv(path))

        assert error.id == "E009"
        assert error.location == f"{path}:3"
        assert "f1" in error.summary

    def test_non_finite_cell(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "f0,label,domain", "nan,0,source")
        assert _error(load_csv(path)).id == "E009"

    def test_label_outside_declared_space(self, tmp_path):
        path = _write(tmp_path / "target.csv", "f0,label,domain", "0.5,3,target")
        error = _error(load_csv(path, frozenset({0, 1, 2})))

        assert error.id == "E010"

    def test_source_rows_need_labels(self, tmp_path):
        path = _write(tmp_path / "source.csv", "f0,label,domain", "0.5,,source")
        assert _error(load_csv(path)).id == "E009"

    def test_mixed_domains(self, tmp_path):
        path = _write(tmp_path / "mixed.csv", "f0,label,domain", "0.5,0,source", "0.5,0,target")
        assert _error(load_csv(path)).id == "E009"

    def test_partially_labeled_target(self, tmp_path):
        path = _write(tmp_path / "target.csv", "f0,label,domain", "0.5,0,target", "0.5,,target")
        assert _error(load_csv(path)).id == "E009"

    def test_no_rows(self, tmp_path):
        path = _write(tmp_path / "empty.csv", "f0,label,domain")
        assert _error(load_csv(path)).id == "E011"

    def test_missing_file(self, tmp_path):
        assert _error(load_csv(tmp_path / "absent.csv")).id == "E011"

    def test_bytes_that_are_not_utf8(self, tmp_path):
        path = tmp_path / "source.csv"
        path.write_bytes(b"f0,f1,label,domain\n0.5,1,0,source\n0.5,\xff\xfe,1,source\n")
        error = _error(load_csv(path))

        assert error.id == "E009"
        assert error.location == f"{path}:3"
        assert "`f1`" in error.summary
        assert "0xff" in error.summary


def test_write_is_byte_identical(tmp_path, small_domains):
    source, _ = small_domains
    first = write_csv(source, tmp_path / "a.csv").unwrap()
    second = write_csv(source, tmp_path / "b.csv").unwrap()

    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().count("\n") == source.n + 1
