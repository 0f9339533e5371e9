import json

import numpy as np
import pytest

from distmirror.core import (
    Dataset,
    SampleSet,
    load_dataset,
    save_dataset,
    validate_equal_sample_size,
)
from distmirror.errors import DatasetError, DuplicateParameters, UnequalSampleSizes


def write_ndjson(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_load_two_labeled_records(tmp_path):
    path = tmp_path / "d.ndjson"
    write_ndjson(
        path,
        [
            {"id": "a", "params": [0.1, 0.5], "samples": [[1, 2, 3, 4]] * 3},
            {"id": "b", "params": [0.2, 0.5], "samples": [[4, 3, 2, 1]] * 3},
        ],
    )
    ds = load_dataset(path, "ndjson")
    assert ds.m == 2
    assert ds.d == 2
    assert ds.q == 4
    assert all(s.n == 3 for s in ds.labeled)
    assert not ds.unlabeled


def test_missing_params_means_unlabeled(tmp_path):
    path = tmp_path / "d.ndjson"
    write_ndjson(path, [{"id": "u", "samples": [[1.0, 2.0]]}])
    ds = load_dataset(path)
    assert ds.m == 0
    assert len(ds.unlabeled) == 1
    assert ds.unlabeled[0].params is None


def test_duplicate_parameters_rejected(tmp_path):
    path = tmp_path / "d.ndjson"
    write_ndjson(
        path,
        [
            {"id": "a", "params": [1, 1], "samples": [[0.0]]},
            {"id": "b", "params": [1, 1], "samples": [[0.0]]},
        ],
    )
    with pytest.raises(DuplicateParameters):
        load_dataset(path)


def test_parse_error_reports_line_number(tmp_path):
    path = tmp_path / "d.ndjson"
    path.write_text('{"id": "a", "samples": [[1]]}\nnot json\n')
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(path)


def test_inconsistent_q_rejected(tmp_path):
    path = tmp_path / "d.ndjson"
    write_ndjson(
        path,
        [
            {"id": "a", "params": [0], "samples": [[1, 2]]},
            {"id": "b", "params": [1], "samples": [[1, 2, 3]]},
        ],
    )
    with pytest.raises(DatasetError, match="dimension"):
        load_dataset(path)


def test_non_finite_rejected(tmp_path):
    path = tmp_path / "d.ndjson"
    path.write_text('{"id": "a", "params": [0], "samples": [[NaN]]}\n')
    with pytest.raises(DatasetError):
        load_dataset(path)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(DatasetError, match="nope.ndjson"):
        load_dataset(tmp_path / "nope.ndjson")


def test_csv_grouped_rows(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(
        "id,p1,p2,s1,s2\n"
        "a,0.1,0.5,1.0,2.0\n"
        "a,0.1,0.5,3.0,4.0\n"
        "u,,,9.0,8.0\n"
    )
    ds = load_dataset(path, "csv")
    assert ds.m == 1
    assert ds.labeled[0].n == 2
    assert len(ds.unlabeled) == 1
    np.testing.assert_array_equal(ds.labeled[0].params, [0.1, 0.5])
    np.testing.assert_array_equal(ds.unlabeled[0].samples, [[9.0, 8.0]])


def test_csv_params_change_mid_file_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("id,p1,s1\na,0.1,1.0\na,0.2,2.0\n")
    with pytest.raises(DatasetError, match="line 3"):
        load_dataset(path, "csv")


@pytest.mark.parametrize("fmt", ["ndjson", "csv"])
def test_round_trip_identity(tmp_path, fmt):
    rng = np.random.default_rng(5)
    labeled = tuple(
        SampleSet(id=f"s{i}", samples=rng.standard_normal((4, 3)), params=np.array([i, 0.5]))
        for i in range(3)
    )
    unlabeled = (SampleSet(id="u0", samples=rng.standard_normal((4, 3))),)
    ds = Dataset(labeled=labeled, unlabeled=unlabeled)
    path = tmp_path / f"d.{fmt}"
    save_dataset(ds, path, fmt)
    back = load_dataset(path, fmt)
    assert [s.id for s in back.all_sets] == [s.id for s in ds.all_sets]
    for a, b in zip(ds.all_sets, back.all_sets):
        np.testing.assert_array_equal(a.samples, b.samples)
        if a.params is None:
            assert b.params is None
        else:
            np.testing.assert_array_equal(a.params, b.params)
    # a second round trip is byte-identical
    path2 = tmp_path / f"d2.{fmt}"
    save_dataset(back, path2, fmt)
    assert path.read_bytes() == path2.read_bytes()


def test_equal_sample_size_ok():
    sets = tuple(
        SampleSet(id=f"s{i}", samples=np.zeros((100, 2)) + i, params=np.array([float(i)]))
        for i in range(2)
    )
    ds = Dataset(labeled=sets)
    assert validate_equal_sample_size(ds) == 100


def test_equal_sample_size_single_observation():
    ds = Dataset(labeled=(SampleSet(id="a", samples=np.ones((1, 1)), params=np.array([0.0])),))
    assert validate_equal_sample_size(ds) == 1


def test_unequal_sample_sizes_lists_ids():
    sets = (
        SampleSet(id="a", samples=np.zeros((100, 1)), params=np.array([0.0])),
        SampleSet(id="b", samples=np.zeros((99, 1)), params=np.array([1.0])),
    )
    ds = Dataset(labeled=sets)
    with pytest.raises(UnequalSampleSizes) as err:
        validate_equal_sample_size(ds)
    assert "b" in str(err.value)


def test_invariants_checked_eagerly():
    with pytest.raises(DatasetError):
        SampleSet(id="bad", samples=np.array([[np.inf]]))
    with pytest.raises(DatasetError):
        SampleSet(id="bad", samples=np.empty((0, 2)))
    with pytest.raises(DatasetError):
        Dataset(labeled=())


def test_sampleset_arrays_immutable():
    s = SampleSet(id="a", samples=np.ones((2, 2)), params=np.array([1.0]))
    with pytest.raises(ValueError):
        s.samples[0, 0] = 5.0
    with pytest.raises(ValueError):
        s.params[0] = 5.0
