"""Search-space counting: closed forms vs brute-force enumeration."""

import pytest

from peglearn.counting import (
    CountReport,
    count_report,
    dag_count_enumerate,
    digraph_count_formula,
    ordering_count_enumerate,
    ordering_count_formula,
)


def test_ordering_formula_small_values():
    assert ordering_count_formula(1) == 1
    assert ordering_count_formula(2) == 3
    assert ordering_count_formula(3) == 19  # 6 * (4 - 1) + 1


def test_ordering_formula_matches_enumeration():
    for n in range(1, 8):
        assert ordering_count_formula(n) == ordering_count_enumerate(n)


def test_ordering_enumeration_guard():
    with pytest.raises(ValueError):
        ordering_count_enumerate(8)
    with pytest.raises(ValueError):
        ordering_count_enumerate(0)


def test_ordering_formula_validation():
    with pytest.raises(ValueError):
        ordering_count_formula(0)
    with pytest.raises(ValueError):
        ordering_count_formula(3, ops=0)


def test_ordering_formula_big_integers():
    # n = 30 overflows float64; result must stay exact
    value = ordering_count_formula(30)
    assert value == 265252859812191058636308480000000 * (2**29 - 1) + 1


def test_digraph_formula_small_values():
    assert digraph_count_formula(1) == 1
    assert digraph_count_formula(2) == 3  # 3 - 8 + 8
    assert digraph_count_formula(3) == 25  # 27 - 16 + 14
    assert digraph_count_formula(4) == 719  # 729 - 32 + 22


def test_dag_enumeration_small_values():
    assert dag_count_enumerate(1) == 1
    assert dag_count_enumerate(2) == 3
    assert dag_count_enumerate(3) == 25
    assert dag_count_enumerate(4) == 543


def test_dag_enumeration_guard():
    with pytest.raises(ValueError):
        dag_count_enumerate(6)
    with pytest.raises(ValueError):
        dag_count_enumerate(0)


def test_formula_diverges_from_true_dag_count_at_4():
    # the closed form's cycle correction undercounts from n=4 on; the
    # divergence is surfaced, not smoothed over
    report = count_report("dags", 4, enumerate_too=True)
    assert report.formula_value == 719
    assert report.enumerated_value == 543
    assert report.agree is False


def test_count_report_agreement_and_shape():
    report = count_report("dags", 3, enumerate_too=True)
    assert report == CountReport("dags", 3, 25, 25, True)
    assert report.as_dict() == {
        "kind": "dags",
        "n": 3,
        "formula_value": 25,
        "enumerated_value": 25,
        "agree": True,
    }


def test_count_report_without_enumeration():
    report = count_report("orderings", 12)
    assert report.enumerated_value is None
    assert report.agree is None


def test_count_report_rejects_unknown_kind():
    with pytest.raises(ValueError, match="kind"):
        count_report("partitions", 3)
