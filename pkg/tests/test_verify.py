"""Tests for the verification harness: hashing, checks, fault injection,
and the suite runner."""

import numpy as np
import pytest

from qunravel import verify
from qunravel.hilbert import SIGMA_X, SIGMA_Y, SIGMA_Z, dagger
from qunravel.lindblad import GKSForm, LindbladModel
from qunravel.scenario import ScenarioError, complex_to_pairs
from qunravel.sde import IntegrationConfig
from qunravel.unraveling import Unraveling
from qunravel.verify import (check_complete_positivity, check_ensemble_vs_exact,
                             check_generator_identity,
                             check_unraveling_equivalence, config_hash,
                             generator_deviation, random_freedom, random_model,
                             random_state, random_unitary, run_suite,
                             statistical_tolerance, suite_ok)

DEPHASING = LindbladModel(np.zeros((2, 2)), (SIGMA_Z,))
PLUS = np.array([1.0, 1.0]) / np.sqrt(2.0)


def test_config_hash_is_stable_and_key_order_insensitive():
    a = config_hash({"x": 1, "y": [1.0, 2.0]})
    b = config_hash({"y": [1.0, 2.0], "x": 1})
    assert a == b
    assert len(a) == 64
    assert config_hash({"x": 2}) != a
    # numpy and complex payloads are canonicalized, not repr()'d
    assert config_hash({"m": np.eye(2)}) == config_hash({"m": [[1.0, 0.0],
                                                               [0.0, 1.0]]})
    assert config_hash({"z": 1 + 2j}) == config_hash({"z": [1.0, 2.0]})


def test_statistical_tolerance_formula():
    assert statistical_tolerance(10000, 1e-3, 2) == pytest.approx(0.065)
    assert statistical_tolerance(100, 0.0, 3) == pytest.approx(0.9)


def test_random_unitary_is_unitary():
    rng = np.random.default_rng(0)
    for n in (1, 2, 5):
        U = random_unitary(rng, n)
        assert np.max(np.abs(dagger(U) @ U - np.eye(n))) < 1e-12


def test_random_model_and_state_are_well_formed():
    rng = np.random.default_rng(1)
    for _ in range(5):
        model = random_model(rng, 3)
        assert model.dim == 3
        psi = random_state(rng, 3)
        assert abs(np.vdot(psi, psi) - 1.0) < 1e-12
        freedom = random_freedom(rng, model.n_ops)
        Unraveling(model, freedom)   # must not raise


def test_generator_deviation_clean_vs_faulty():
    u = Unraveling(DEPHASING, "diosi-complex")
    rng = np.random.default_rng(2)
    psi = random_state(rng, 2)
    assert generator_deviation(u, psi) < 1e-13
    assert generator_deviation(u, psi, fault="drop_ell2") > 1e-3
    assert generator_deviation(u, psi, fault="zero_ell_in_B") > 1e-3
    with pytest.raises(ValueError, match="unknown fault"):
        generator_deviation(u, psi, fault="nope")


def test_check_generator_identity_report():
    report = check_generator_identity(DEPHASING, "standard", samples=50, seed=1)
    assert report.passed and report.ok
    assert report.measured["max_deviation"] < 1e-12
    assert report.to_dict()["check"] == "generator-identity"
    faulty = check_generator_identity(DEPHASING, "standard", samples=50,
                                      seed=1, fault="drop_ell2")
    assert not faulty.passed
    faulty.expect = "fail"
    assert faulty.ok


def test_check_complete_positivity_both_ways():
    cp = check_complete_positivity(GKSForm(np.zeros((2, 2)), np.eye(3)),
                                   [0.1, 1.0])
    assert cp.passed
    assert cp.measured["cp_expected"]
    non_cp = check_complete_positivity(
        GKSForm(np.zeros((2, 2)), np.diag([1.0, -0.5]).astype(complex),
                basis_ops=(SIGMA_X / np.sqrt(2), SIGMA_Y / np.sqrt(2))),
        [0.05])
    assert non_cp.passed   # "passed" = the negative rate was detected
    assert not non_cp.measured["cp_expected"]
    assert min(non_cp.measured["rates"]) < 0


def test_check_ensemble_vs_exact_small_run():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.5, seed=4, record_stride=100)
    report = check_ensemble_vs_exact(DEPHASING, "standard", PLUS, cfg, 2000,
                                     [0.25, 0.5])
    assert report.passed
    assert report.measured["max_distance"] <= report.tolerance


def test_check_ensemble_vs_exact_rejects_off_grid_checkpoint():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.5, seed=4)
    with pytest.raises(ValueError, match="multiple of dt"):
        check_ensemble_vs_exact(DEPHASING, "standard", PLUS, cfg, 10, [0.2505])


def test_check_unraveling_equivalence_clean():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.3, seed=6)
    report = check_unraveling_equivalence(
        DEPHASING, ["standard", "linear-potential"], PLUS, cfg, 2000, 0.3)
    assert report.passed
    assert set(report.measured["pairwise"]) == {"0-1"}
    with pytest.raises(ValueError, match="two freedoms"):
        check_unraveling_equivalence(DEPHASING, ["standard"], PLUS, cfg,
                                     10, 0.3)


def test_fault_injection_is_detected():
    cfg = IntegrationConfig(dt=1e-3, t_final=1.0, seed=8, renormalize=False)
    report = check_unraveling_equivalence(
        DEPHASING, ["standard", "standard"], PLUS, cfg, 2000, 1.0,
        faults=[None, "drop_ell2"])
    assert not report.passed   # the injected fault must break agreement
    report.expect = "fail"
    assert report.ok


def test_run_suite_dispatch_and_expected_failures():
    H = complex_to_pairs(np.zeros((2, 2)))
    sz = complex_to_pairs(SIGMA_Z)
    suite = {"checks": [
        {"check": "generator-identity", "dim": 2, "hamiltonian": H,
         "lindblad_ops": [sz], "freedom": "diosi-complex", "samples": 20,
         "seed": 0},
        {"check": "generator-identity", "dim": 2, "hamiltonian": H,
         "lindblad_ops": [sz], "freedom": "standard", "samples": 20,
         "seed": 0, "fault": "zero_ell_in_B", "expect": "fail"},
        {"check": "complete-positivity", "dim": 2, "hamiltonian": H,
         "lindblad_ops": [],
         "gks": {"hamiltonian": H,
                 "kossakowski": complex_to_pairs(np.eye(3))},
         "times": [0.1, 1.0]},
    ]}
    reports = run_suite(suite)
    assert [r.name for r in reports] == ["generator-identity",
                                         "generator-identity",
                                         "complete-positivity"]
    assert suite_ok(reports)
    assert [r.expect for r in reports] == ["pass", "fail", "pass"]


def test_run_suite_rejects_unknown_check():
    with pytest.raises(ScenarioError, match="unknown check"):
        run_suite({"checks": [{"check": "nope"}]})


def test_run_suite_requires_gks_for_cp_check():
    H = complex_to_pairs(np.zeros((2, 2)))
    with pytest.raises(ScenarioError, match="gks"):
        run_suite({"checks": [{"check": "complete-positivity", "dim": 2,
                               "hamiltonian": H, "lindblad_ops": []}]})
