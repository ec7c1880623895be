import numpy as np
import pytest

from nonreg import ValidationError
from nonreg.data import (
    ClassDataset,
    DecisionDataset,
    bootstrap_multiplicities,
    bootstrap_resample,
    parse_class_dataset,
    parse_decision_dataset,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_class_dataset_basics():
    d = ClassDataset([[1.0, 2.0], [1.0, -3.0]], [1.0, -1.0])
    assert d.n == 2 and d.p == 2
    assert len(d) == 2
    assert not d.X.flags.writeable
    assert not d.y.flags.writeable


def test_class_dataset_rejects_bad_labels():
    with pytest.raises(ValidationError):
        ClassDataset([[1.0], [1.0]], [1.0, 0.5])


def test_take_selects_rows_with_repeats():
    d = ClassDataset([[1.0, 2.0], [1.0, -3.0], [1.0, 5.0]], [1.0, -1.0, 1.0])
    sub = d.take([2, 0, 2])
    assert np.array_equal(sub.X[:, 1], [5.0, 2.0, 5.0])
    assert np.array_equal(sub.y, [1.0, 1.0, 1.0])


def test_decision_dataset_shapes_and_optional_pi():
    d = DecisionDataset(
        X0=[[1.0, 0.5, 0.2], [1.0, -1.0, 0.3]],
        X1=[[1.0, 0.5], [1.0, -1.0]],
        a=[1.0, -1.0],
        y=[2.0, 0.5],
    )
    assert (d.n, d.p0, d.p1) == (2, 3, 2)
    assert d.pi is None
    with_pi = DecisionDataset(d.X0, d.X1, d.a, d.y, [0.5, 0.5])
    assert np.array_equal(with_pi.pi, [0.5, 0.5])
    with pytest.raises(ValidationError):
        DecisionDataset(d.X0, d.X1, d.a, d.y, [0.5, 1.5])


def test_parse_class_csv_with_comments_and_zero_one_labels(tmp_path):
    path = _write(
        tmp_path / "toy.csv",
        "# schema=1\nx1,x2,y\n0.5,1.0,1\n-0.5,2.0,0\n# trailing comment\n1.5,3.0,-1\n",
    )
    d = parse_class_dataset(path)
    assert d.n == 3
    # intercept prepended, then the two feature columns
    assert np.array_equal(d.X[:, 0], [1.0, 1.0, 1.0])
    assert np.array_equal(d.X[:, 1], [0.5, -0.5, 1.5])
    assert np.array_equal(d.y, [1.0, -1.0, -1.0])


def test_parse_class_csv_existing_intercept_not_duplicated(tmp_path):
    path = _write(tmp_path / "toy.csv", "x1,x2,y\n1,0.5,1\n1,-0.5,0\n")
    d = parse_class_dataset(path)
    assert d.p == 2
    assert np.array_equal(d.X[:, 0], [1.0, 1.0])


def test_parse_class_csv_column_selection(tmp_path):
    path = _write(tmp_path / "toy.csv", "x1,junk,y\n0.5,9,1\n-0.5,9,0\n")
    d = parse_class_dataset(path, feature_columns=["x1"])
    assert d.p == 2
    assert np.array_equal(d.X[:, 1], [0.5, -0.5])


@pytest.mark.parametrize(
    "text",
    [
        "x1,y\n",
        "x1,y\n0.5\n",
        "x1,y\n0.5,2\n",
        "x1,y\nabc,1\n",
        "x1,y\ninf,1\n",
    ],
)
def test_parse_class_csv_rejects_malformed(tmp_path, text):
    path = _write(tmp_path / "bad.csv", text)
    with pytest.raises(ValidationError):
        parse_class_dataset(path)


def test_parse_class_csv_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        parse_class_dataset(tmp_path / "nope.csv")


def test_parse_decision_csv_auto_pi_and_interactions(tmp_path):
    path = _write(
        tmp_path / "dec.csv",
        "x1,x2,a,y,pi\n0.5,1.0,1,2.0,0.5\n-0.5,2.0,0,1.0,0.4\n",
    )
    d = parse_decision_dataset(path)
    assert (d.p0, d.p1) == (3, 3)
    assert np.array_equal(d.a, [1.0, -1.0])
    assert np.array_equal(d.pi, [0.5, 0.4])
    narrow = parse_decision_dataset(path, interaction_columns=["x1"])
    assert narrow.p1 == 2
    assert np.array_equal(narrow.X1[:, 1], [0.5, -0.5])


def test_parse_decision_csv_requires_action_and_outcome(tmp_path):
    path = _write(tmp_path / "dec.csv", "x1,y\n0.5,1\n0.2,0\n")
    with pytest.raises(ValidationError):
        parse_decision_dataset(path)


def test_bootstrap_resample_is_reproducible():
    d = ClassDataset(np.column_stack([np.ones(8), np.arange(8.0)]), np.ones(8))
    a = bootstrap_resample(d, 42)
    b = bootstrap_resample(d, 42)
    assert np.array_equal(a.X, b.X)
    assert a.n == d.n


def test_bootstrap_multiplicities_rows_sum_to_n(rng):
    W = bootstrap_multiplicities(17, 9, rng)
    assert W.shape == (9, 17)
    assert np.array_equal(W.sum(axis=1), np.full(9, 17))
    assert (W >= 0).all()


def test_bootstrap_multiplicities_match_resample_counting():
    gen1 = np.random.default_rng(5)
    W = bootstrap_multiplicities(6, 3, gen1)
    assert W.dtype.kind in "iu"
    with pytest.raises(ValidationError):
        bootstrap_multiplicities(0, 3, 1)
