import math

import numpy as np
import pytest

import coopstab

H1 = np.array([[2, 0, -1], [-1, 1, 0], [-1, 0, 2]], dtype=float)


def test_h_matrix_of_chain():
    a = np.zeros((4, 4), dtype=np.int32)
    a[1, 0] = a[2, 1] = a[3, 2] = 1
    h = coopstab.build_h_matrix(a)
    np.testing.assert_array_equal(h, [[1, 0, 0], [-1, 1, 0], [0, -1, 1]])
    assert all(coopstab.leader_reachable(a))


def test_benchmark_matrix_is_certified():
    check = coopstab.is_m_matrix(H1)
    assert check["is_m_matrix"]
    assert sorted(np.round(check["eigenvalues"].real, 6)) == [1.0, 1.0, 3.0]
    cert = coopstab.diagonal_certificate(H1)
    assert cert["method"] == "identity"
    assert cert["min_eig"] > 1e-9


def test_signal_and_dwell_time():
    times, values = coopstab.periodic_two_phase(6.0, 12.0)
    assert times == [3.0, 6.0, 9.0]
    assert values == [1, 2, 1, 2]
    assert coopstab.validate_adt(6.0, 3.0, 1.0)["valid"]
    assert not coopstab.validate_adt(6.0, 4.0, 1.0)["valid"]
    assert coopstab.min_dwell_time(math.exp(2.0), 1.0) == 2.0


def test_lorenz_and_control():
    r = coopstab.lorenz_rhs([1.0, 0.0], 0.0, 0.0, [3.0, -3.2, 1.6], [0.0, 0.0, 0.0])
    np.testing.assert_allclose(r, [-3.0, 0.0, 1.6])
    u = coopstab.control(12.0, [1.0, 0.0, 1.0], np.array([1.0]))
    assert u[0] == -24.0


def test_benchmark_run_converges():
    cfg = coopstab.benchmark_config()
    report, csv = coopstab.run_experiment(cfg)
    assert report["converged"]
    assert csv.splitlines()[0] == "t,sigma,Z1_1,Z1_2,Z2_1,Z2_2,Z3_1,Z3_2,e1,e2,e3"
    assert report["config_hash"] == coopstab.config_hash(report["effective_config"])


def test_config_error_is_value_error():
    cfg = coopstab.benchmark_config()
    del cfg["controller"]
    with pytest.raises(ValueError, match="controller"):
        coopstab.run_experiment(cfg)


def test_adt_violation_raises():
    cfg = coopstab.benchmark_config()
    cfg["switching"]["tau_d"] = 4.0
    with pytest.raises(coopstab.ValidationError):
        coopstab.run_experiment(cfg)


def test_regulation_demo():
    report, csv = coopstab.run_regulation(coopstab.regulation_demo_config())
    assert report["success"]
    assert report["max_error_after_settle"] < 1e-3
    assert csv.startswith("t,sigma,y1")


def test_shipped_configs_match_schema():
    import json
    import pathlib

    jsonschema = pytest.importorskip("jsonschema")
    root = pathlib.Path(__file__).resolve().parents[2]
    schema = json.loads((root / "docs" / "config_schema.json").read_text())
    for path in sorted((root / "configs").glob("*.json")):
        jsonschema.validate(json.loads(path.read_text()), schema)
    report, _ = coopstab.run_experiment(coopstab.benchmark_config())
    jsonschema.validate(report["effective_config"], schema)
