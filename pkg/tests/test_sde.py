"""Tests for the integration layer: configs, RNG streams, trajectories,
ensembles, and parallel reproducibility."""

import numpy as np
import pytest

from qunravel import sde
from qunravel.hilbert import SIGMA_Z
from qunravel.lindblad import LindbladModel
from qunravel.sde import (IntegrationConfig, NormBlowupError, simulate_ensemble,
                          simulate_trajectory, step, trajectory_rng,
                          wiener_increments)
from qunravel.unraveling import Unraveling

DEPHASING = Unraveling(LindbladModel(np.zeros((2, 2)), (SIGMA_Z,)), "standard")
PLUS = np.array([1.0, 1.0]) / np.sqrt(2.0)


def test_integration_config_validation():
    with pytest.raises(ValueError):
        IntegrationConfig(dt=0.0, t_final=1.0)
    with pytest.raises(ValueError):
        IntegrationConfig(dt=2.0, t_final=1.0)
    with pytest.raises(ValueError):
        IntegrationConfig(dt=1e-10, t_final=1.0)
    with pytest.raises(ValueError):
        IntegrationConfig(dt=0.1, t_final=1.0, record_stride=0)
    with pytest.raises(ValueError):
        IntegrationConfig(dt=0.1, t_final=1.0, seed=-1)
    cfg = IntegrationConfig(dt=0.1, t_final=1.0)
    assert cfg.n_steps == 10


def test_record_steps_always_include_final():
    cfg = IntegrationConfig(dt=0.1, t_final=1.0, record_stride=3)
    assert cfg.record_steps().tolist() == [3, 6, 9, 10]
    cfg = IntegrationConfig(dt=0.1, t_final=1.0, record_stride=100)
    assert cfg.record_steps().tolist() == [10]
    assert np.allclose(cfg.record_times(), [1.0])


def test_trajectory_rng_is_a_pure_function_of_seed_and_index():
    a = trajectory_rng(42, 7).normal(size=16)
    b = trajectory_rng(42, 7).normal(size=16)
    c = trajectory_rng(42, 8).normal(size=16)
    d = trajectory_rng(43, 7).normal(size=16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_wiener_increment_moments():
    rng = trajectory_rng(0, 0)
    dW = wiener_increments(rng, 200_000, 0.01)
    assert abs(np.mean(dW)) < 3 * 0.1 / np.sqrt(200_000)
    assert np.var(dW) == pytest.approx(0.01, rel=0.02)
    with pytest.raises(ValueError):
        wiener_increments(rng, 10, 0.0)


def test_step_matches_manual_euler_update():
    dt, dw = 1e-3, 0.02
    out = step(DEPHASING, PLUS, dt, [dw])
    # manual update at |+>: ell = 0, K = -I/2
    raw = PLUS - 0.5 * dt * PLUS + dw * (SIGMA_Z @ PLUS)
    assert np.allclose(out, raw / np.linalg.norm(raw), atol=1e-14)
    with pytest.raises(ValueError):
        step(DEPHASING, PLUS, dt, [0.1, 0.2])


def test_simulate_trajectory_records_initial_state():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.1, seed=5, record_stride=20)
    traj = simulate_trajectory(DEPHASING, PLUS, cfg)
    assert traj.times[0] == 0.0
    assert np.allclose(traj.states[0], PLUS)
    assert traj.times[-1] == pytest.approx(0.1)
    norms = np.sum(np.abs(traj.states) ** 2, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-9)
    assert 0.0 < traj.norm_drift_mean <= traj.norm_drift_max


def test_simulate_trajectory_rejects_unnormalized_input():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.01)
    with pytest.raises(ValueError, match="normalized"):
        simulate_trajectory(DEPHASING, np.array([1.0, 1.0]), cfg)
    with pytest.raises(TypeError):
        simulate_trajectory(DEPHASING.model, PLUS, cfg)


def test_ensemble_is_thread_count_invariant():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.2, seed=11, record_stride=50)
    serial = simulate_ensemble(DEPHASING, PLUS, cfg, 600, threads=1,
                               chunk_size=128)
    parallel = simulate_ensemble(DEPHASING, PLUS, cfg, 600, threads=4,
                                 chunk_size=128)
    assert np.array_equal(serial.rho_hat, parallel.rho_hat)
    assert np.array_equal(serial.final_states, parallel.final_states)
    assert np.array_equal(serial.norm_drift, parallel.norm_drift)


def test_ensemble_trajectory_streams_do_not_depend_on_chunking():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.1, seed=3, record_stride=100)
    a = simulate_ensemble(DEPHASING, PLUS, cfg, 100, chunk_size=7)
    b = simulate_ensemble(DEPHASING, PLUS, cfg, 100, chunk_size=64)
    assert np.array_equal(a.final_states, b.final_states)


def test_ensemble_mean_is_a_density_matrix():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.5, seed=1, record_stride=250)
    est = simulate_ensemble(DEPHASING, PLUS, cfg, 500)
    for rho in est.rho_hat:
        assert abs(np.trace(rho) - 1.0) < 1e-9
        assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] > -1e-12
    assert est.std_error.shape == est.times.shape
    assert np.all(est.std_error >= 0.0)
    assert np.all(est.std_error <= 1.0 / np.sqrt(500))


def test_ensemble_keep_states_shape():
    cfg = IntegrationConfig(dt=1e-2, t_final=0.1, seed=0, record_stride=5)
    est = simulate_ensemble(DEPHASING, PLUS, cfg, 10, keep_states=True)
    assert est.states.shape == (10, 2, 2)
    assert np.array_equal(est.states[:, -1, :], est.final_states)


def test_blowup_raises_with_trajectory_index():
    # at |+> the dephasing drift is -psi/2, so a dt = 2 step with zero noise
    # lands exactly on the zero vector
    cfg = IntegrationConfig(dt=2.0, t_final=2.0, seed=2, renormalize=False)
    zero_noise = [np.zeros((3, 1, 1))]
    with pytest.raises(NormBlowupError) as err:
        simulate_ensemble(DEPHASING, PLUS, cfg, 3, chunk_size=3,
                          dW_chunks=zero_noise)
    assert err.value.trajectory_index == 0


def test_record_steps_override():
    cfg = IntegrationConfig(dt=1e-2, t_final=1.0, seed=9)
    est = simulate_ensemble(DEPHASING, PLUS, cfg, 20,
                            record_steps=[50, 100])
    assert np.allclose(est.times, [0.5, 1.0])
    assert est.rho_hat.shape == (2, 2, 2)


def test_dw_chunks_reproduce_default_streams():
    cfg = IntegrationConfig(dt=1e-3, t_final=0.05, seed=13)
    n, chunk = 30, 16
    chunks = []
    lo = 0
    while lo < n:
        count = min(chunk, n - lo)
        dW = np.empty((count, cfg.n_steps, 1))
        for i in range(count):
            rng = trajectory_rng(cfg.seed, lo + i)
            dW[i] = rng.normal(0.0, np.sqrt(cfg.dt), size=(cfg.n_steps, 1))
        chunks.append(dW)
        lo += count
    explicit = simulate_ensemble(DEPHASING, PLUS, cfg, n, chunk_size=chunk,
                                 dW_chunks=chunks)
    default = simulate_ensemble(DEPHASING, PLUS, cfg, n, chunk_size=chunk)
    assert np.array_equal(explicit.final_states, default.final_states)
    with pytest.raises(ValueError, match="chunk layout"):
        simulate_ensemble(DEPHASING, PLUS, cfg, n, chunk_size=chunk,
                          dW_chunks=chunks[:1])
