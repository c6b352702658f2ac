"""Demonstration model: loading, rating matrices, partial order."""

import json
import math

import numpy as np
import pytest

from peglearn.demos import (
    Demonstration,
    PartialOrder,
    RatingError,
    RatingMatrix,
    SpecSet,
    build_rating_matrix,
    demo_partial_order,
    load_rating_matrix_csv,
    load_trajectory,
    save_rating_matrix_csv,
    save_trajectory,
)
from peglearn.stl import Trace, parse_formula


def spec_pair():
    return SpecSet(
        [
            ("stay_positive", parse_formula("G[0,2](x > 0)")),
            ("peak", parse_formula("F[0,2](x >= 2.5)")),
        ]
    )


def demo_x312(demo_id="d0"):
    return Demonstration(demo_id, Trace({"x": [3, 1, 2]}))


# ------------------------------------------------------------ trajectories

def test_load_trajectory_roundtrip(tmp_path):
    path = tmp_path / "demo.json"
    path.write_text(json.dumps({"id": "run-1", "signals": {"x": [3, 1, 2], "y": [0, 0, 1]}}))
    demo = load_trajectory(path)
    assert demo.id == "run-1"
    assert demo.trace.length == 3
    assert demo.trace.signal("y")[2] == 1.0


def test_load_trajectory_id_defaults_to_stem(tmp_path):
    path = tmp_path / "rollout_7.json"
    path.write_text(json.dumps({"signals": {"x": [1.0]}}))
    assert load_trajectory(path).id == "rollout_7"


def test_load_trajectory_rejects_ragged(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"signals": {"x": [1, 2], "y": [1]}}))
    with pytest.raises(ValueError, match="align"):
        load_trajectory(path)


def test_load_trajectory_rejects_non_numeric(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"signals": {"x": [1, "two"]}}))
    with pytest.raises(ValueError, match="numbers"):
        load_trajectory(path)


def test_load_trajectory_rejects_empty(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"signals": {"x": []}}))
    with pytest.raises(ValueError):
        load_trajectory(path)


def test_save_trajectory_is_deterministic(tmp_path):
    demo = Demonstration("d", Trace({"b": [1.5], "a": [2.0]}), {"kind": "good"})
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_trajectory(demo, p1)
    save_trajectory(demo, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = load_trajectory(p1)
    assert back.id == "d"
    assert back.metadata == {"kind": "good"}
    assert back.trace.signal("a")[0] == 2.0


# ---------------------------------------------------------- rating matrix

def test_build_rating_matrix_worked_example():
    matrix = build_rating_matrix([demo_x312()], spec_pair())
    assert matrix.values.tolist() == [[1.0, 0.5]]
    assert matrix.demo_ids == ("d0",)
    assert matrix.spec_names == ("stay_positive", "peak")


def test_build_rating_matrix_tanh_example():
    matrix = build_rating_matrix([demo_x312()], spec_pair(), normalize=1.0)
    assert matrix.values.tolist() == [[math.tanh(1.0), math.tanh(0.5)]]


def test_build_rating_matrix_per_spec_scales():
    matrix = build_rating_matrix(
        [demo_x312()], spec_pair(), normalize={"stay_positive": 1.0, "peak": 0.5}
    )
    assert matrix.values.tolist() == [[math.tanh(1.0), math.tanh(1.0)]]


def test_build_rating_matrix_requires_demos():
    with pytest.raises(RatingError, match="at least one"):
        build_rating_matrix([], spec_pair())


def test_build_rating_matrix_annotates_monitor_errors():
    bad = Demonstration("weird", Trace({"z": [1.0]}))
    with pytest.raises(RatingError, match="demo 'weird', spec 'stay_positive'"):
        build_rating_matrix([bad], spec_pair())


def test_externally_rated_spec_cannot_be_evaluated():
    specs = SpecSet([("expert_score", None)])
    with pytest.raises(RatingError, match="externally rated"):
        build_rating_matrix([demo_x312()], specs)


def test_rating_matrix_validation():
    with pytest.raises(RatingError):
        RatingMatrix(np.zeros((0, 2)), (), ("a", "b"))
    with pytest.raises(RatingError, match="demo ids"):
        RatingMatrix(np.zeros((2, 2)), ("only-one",), ("a", "b"))
    with pytest.raises(RatingError, match="non-finite"):
        RatingMatrix(np.array([[math.inf]]), ("d",), ("a",))


# -------------------------------------------------------------- CSV round

def test_csv_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(23)
    values = rng.normal(size=(5, 3))
    values[0, 0] = 1 / 3  # not representable in decimal shorthand
    matrix = RatingMatrix(values, tuple(f"d{i}" for i in range(5)), ("s1", "s2", "s3"))
    path = tmp_path / "ratings.csv"
    save_rating_matrix_csv(matrix, path, header=("written by test",))
    back = load_rating_matrix_csv(path)
    assert back.demo_ids == matrix.demo_ids
    assert back.spec_names == matrix.spec_names
    assert np.array_equal(back.values, matrix.values)  # bit-exact via repr


def test_csv_values_verbatim_without_directive(tmp_path):
    path = tmp_path / "likert.csv"
    path.write_text("demo_id,a,b,c\nd1,1,3,5\nd2,2,2,4\n")
    matrix = load_rating_matrix_csv(path)
    assert matrix.values.tolist() == [[1, 3, 5], [2, 2, 4]]
    assert matrix.metadata == {}


def test_csv_scale_directive_rescales_to_unit_interval(tmp_path):
    path = tmp_path / "likert.csv"
    path.write_text("#scale,1,5\ndemo_id,a,b,c\nd1,1,3,5\nd2,2,2,4\n")
    matrix = load_rating_matrix_csv(path)
    assert matrix.values.tolist() == [[-1.0, 0.0, 1.0], [-0.5, -0.5, 0.5]]
    assert matrix.metadata["scale_min"] == "1.0"
    assert matrix.metadata["scale_max"] == "5.0"


def test_csv_rejects_duplicate_demo_id(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("demo_id,a\nd1,1\nd1,2\n")
    with pytest.raises(RatingError, match="duplicate demo id 'd1'"):
        load_rating_matrix_csv(path)


def test_csv_rejects_width_mismatch(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("demo_id,a,b\nd1,1\n")
    with pytest.raises(RatingError, match="expected 3 cells"):
        load_rating_matrix_csv(path)


def test_csv_reports_non_numeric_cell_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("demo_id,a,b\nd1,1,x\n")
    with pytest.raises(RatingError, match="'x' in column 'b'"):
        load_rating_matrix_csv(path)


def test_csv_rejects_bad_scale_directive(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("#scale,5,1\ndemo_id,a\nd1,1\n")
    with pytest.raises(RatingError, match="exceed"):
        load_rating_matrix_csv(path)


# ------------------------------------------------------------ spec files

def test_spec_set_parse_file(tmp_path):
    path = tmp_path / "specs.txt"
    path.write_text("# two requirements\nsafe: G[0,end](d > 1)\n\nfast: F[0,8](t <= 8)\n")
    specs = SpecSet.parse_file(path)
    assert specs.names == ("safe", "fast")
    assert specs.formulas[0] == parse_formula("G[0,end](d > 1)")


def test_spec_set_parse_file_rejects_malformed(tmp_path):
    path = tmp_path / "specs.txt"
    path.write_text("just a formula without a name\n")
    with pytest.raises(ValueError, match="name: formula"):
        SpecSet.parse_file(path)


def test_spec_set_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        SpecSet([("a", None), ("a", None)])


def test_spec_set_rejects_empty():
    with pytest.raises(ValueError, match="at least one"):
        SpecSet([])


# ---------------------------------------------------------- partial order

def test_partial_order_cases():
    assert demo_partial_order([0, 0], [1, 1]) is PartialOrder.LEQ
    assert demo_partial_order([1, 1], [0, 0]) is PartialOrder.GEQ
    assert demo_partial_order([1, 1], [1, 1]) is PartialOrder.EQUAL
    assert demo_partial_order([0, 1], [1, 0]) is PartialOrder.INCOMPARABLE
    # ties on some coordinates still compare
    assert demo_partial_order([0, 1], [0, 2]) is PartialOrder.LEQ


def test_partial_order_rejects_mismatched_rows():
    with pytest.raises(ValueError):
        demo_partial_order([1, 2], [1, 2, 3])


def test_normalization_preserves_argmax():
    rng = np.random.default_rng(31)
    for _ in range(200):
        row = rng.normal(scale=4, size=6)
        squashed = np.tanh(row / 1.3)
        assert int(np.argmax(squashed)) == int(np.argmax(row))
        assert (np.argsort(squashed) == np.argsort(row)).all()
