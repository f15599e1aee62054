import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tuplebn import (
    CapacityError,
    CylinderKey,
    DiscreteDag,
    InvalidDagError,
    JointTable,
    dag_from_dict,
    dag_to_dict,
    factorized_joint,
    load_dag,
    mixed_radix_strides,
    random_dag,
    require_valid,
    save_dag,
    validate_dag,
)


def test_mixed_radix_strides_most_significant_first():
    assert mixed_radix_strides((2, 3, 4)).tolist() == [12, 4, 1]
    assert mixed_radix_strides((5,)).tolist() == [1]
    assert mixed_radix_strides(()).tolist() == []


def test_cylinder_key_requires_sorted_distinct_positions():
    CylinderKey((1, 3), (0, 1))
    with pytest.raises(ValueError):
        CylinderKey((3, 1), (0, 1))
    with pytest.raises(ValueError):
        CylinderKey((2, 2), (0, 1))
    with pytest.raises(ValueError):
        CylinderKey((1, 2), (0,))


def test_validate_dag_accepts_chain(chain_dag):
    report = validate_dag(chain_dag)
    assert report.ok
    assert report.violations == ()
    require_valid(chain_dag)  # should not raise


def test_validate_dag_rejects_forward_edge():
    dag = DiscreteDag(
        2, (2, 2), 1, ((2,), ()),
        [np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([[0.5, 0.5]])],
    )
    report = validate_dag(dag)
    assert not report.ok
    assert any("parent index" in v.rule for v in report.violations)
    with pytest.raises(InvalidDagError):
        require_valid(dag)


def test_validate_dag_rejects_in_degree_above_delta():
    dag = DiscreteDag(
        3, (2, 2, 2), 1, ((), (1,), (1, 2)),
        [
            np.array([[0.5, 0.5]]),
            np.array([[0.5, 0.5], [0.5, 0.5]]),
            np.array([[0.5, 0.5]] * 4),
        ],
    )
    report = validate_dag(dag)
    assert any("in-degree" in v.rule for v in report.violations)


def test_validate_dag_rejects_bad_row_sum():
    dag = DiscreteDag(1, (2,), 0, ((),), [np.array([[0.6, 0.6]])])
    report = validate_dag(dag)
    assert not report.ok
    assert any("sum" in v.rule for v in report.violations)


def test_validate_dag_rejects_wrong_cpt_shape():
    dag = DiscreteDag(
        2, (2, 2), 1, ((), (1,)),
        [np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]])],  # needs 2 rows
    )
    assert not validate_dag(dag).ok


def test_factorized_joint_matches_hand_computation(chain_dag):
    joint = factorized_joint(chain_dag)
    arr = joint.array
    # brute force the product over all 8 configurations
    for x1 in range(2):
        for x2 in range(2):
            for x3 in range(2):
                expected = (
                    chain_dag.cpts[0][0, x1]
                    * chain_dag.cpts[1][x1, x2]
                    * chain_dag.cpts[2][x2, x3]
                )
                assert arr[x1, x2, x3] == pytest.approx(expected, abs=1e-15)
    assert arr.sum() == pytest.approx(1.0, abs=1e-12)


def test_factorized_joint_chain_corner_values(chain_joint):
    arr = chain_joint.array
    assert arr[0, 0, 0] == pytest.approx(0.504, abs=1e-12)  # 0.7*0.8*0.9
    assert arr[1, 1, 1] == pytest.approx(0.162, abs=1e-12)  # 0.3*0.9*0.6


def test_factorized_joint_capacity_guard():
    dag = random_dag(8, 1, (2,) * 8, seed=0)
    with pytest.raises(CapacityError):
        factorized_joint(dag, capacity=100)


def test_joint_table_validates_mass():
    with pytest.raises(ValueError):
        JointTable((2,), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        JointTable((2,), np.array([1.2, -0.2]))


@pytest.mark.parametrize("n,delta,d", [(1, 0, 2), (4, 0, 3), (6, 1, 2), (10, 2, 3), (5, 4, 2)])
def test_random_dag_is_valid_and_floored(n, delta, d):
    dag = random_dag(n, delta, (d,) * n, seed=123, floor=0.05)
    assert validate_dag(dag).ok
    for j in range(1, n + 1):
        assert len(dag.parents[j - 1]) <= min(delta, j - 1)
        assert np.all(dag.cpts[j - 1] >= 0.05 - 1e-12)


def test_random_dag_determinism():
    a = random_dag(6, 2, (2, 3, 2, 3, 2, 2), seed=99)
    b = random_dag(6, 2, (2, 3, 2, 3, 2, 2), seed=99)
    c = random_dag(6, 2, (2, 3, 2, 3, 2, 2), seed=100)
    assert a == b
    assert a != c


def test_random_dag_delta_zero_is_edgeless():
    dag = random_dag(5, 0, (2,) * 5, seed=1)
    assert dag.parents == ((), (), (), (), ())


def test_random_dag_rejects_excessive_floor():
    # floor * cardinality must leave room for a distribution
    with pytest.raises(ValueError):
        random_dag(3, 1, (4,) * 3, seed=0, floor=0.3)


def test_dag_dict_round_trip(chain_dag):
    data = dag_to_dict(chain_dag)
    again = dag_from_dict(data)
    assert again == chain_dag


def test_dag_file_round_trip_bit_exact(tmp_path):
    dag = random_dag(7, 2, (2, 3, 2, 2, 3, 2, 4), seed=17)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_dag(dag, p1)
    again = load_dag(p1)
    assert again == dag
    save_dag(again, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_dag_json_is_plain_data(tmp_path):
    dag = random_dag(3, 1, (2,) * 3, seed=5)
    path = tmp_path / "dag.json"
    save_dag(dag, path)
    data = json.loads(path.read_text())
    assert data["n"] == 3
    assert data["delta"] == 1
    assert len(data["parents"]) == 3
    assert len(data["cpts"]) == 3


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 6),
    delta=st.integers(0, 3),
    seed=st.integers(0, 10_000),
)
def test_random_dag_always_validates(n, delta, seed):
    dag = random_dag(n, delta, (2,) * n, seed=seed)
    assert validate_dag(dag).ok
    joint = factorized_joint(dag)
    assert math.isclose(float(joint.probs.sum()), 1.0, abs_tol=1e-10)
