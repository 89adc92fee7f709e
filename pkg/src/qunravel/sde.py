"""Seeded Ito integration of d psi = A dt + sum_k B_k dW_k and ensemble
generation with deterministic, parallelism-independent reproducibility.

Each trajectory i draws its Wiener increments from a counter-based Philox
stream keyed by (seed, i), so the stream is a pure function of the pair and
trajectories can be executed in any order or on any number of threads
without changing a single bit of the result.  Ensemble averages are reduced
in trajectory-index order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hilbert, kernels
from .tolerances import TOL
from .unraveling import Unraveling

_DEFAULT_CHUNK = 256


class NormBlowupError(RuntimeError):
    """Raised when a pre-renormalization norm falls below the blow-up floor."""

    def __init__(self, trajectory_index):
        self.trajectory_index = trajectory_index
        super().__init__(
            f"state norm collapsed below {TOL.blowup_norm} in trajectory "
            f"{trajectory_index}; the step size is too large")


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float
    t_final: float
    seed: int = 0
    renormalize: bool = True
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final:
            raise ValueError("dt must not exceed t_final")
        if self.t_final / self.dt > 1e8:
            raise ValueError("more than 1e8 steps requested")
        if self.record_stride < 1:
            raise ValueError("record_stride must be positive")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    def record_steps(self):
        """1-based step counts at which states are stored (final step always)."""
        steps = list(range(self.record_stride, self.n_steps + 1,
                           self.record_stride))
        if not steps or steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.asarray(steps, dtype=np.int64)

    def record_times(self):
        return self.record_steps() * self.dt


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # (len(times), d), unit norm when renormalizing
    norm_drift_max: float       # max |  ||psi'||^2 - 1 | before renormalization
    norm_drift_mean: float      # mean per-step deviation (scales as O(dt))
    seed: int


@dataclass
class EnsembleEstimate:
    times: np.ndarray
    rho_hat: np.ndarray         # (len(times), d, d)
    n_trajectories: int
    std_error: np.ndarray       # per-time 1/sqrt(M)-scale error estimate
    seed: int
    norm_drift_max: float
    norm_drift: np.ndarray = None      # (M,) per-trajectory max deviation
    norm_drift_mean: np.ndarray = None # (M,) per-trajectory mean deviation
    final_states: np.ndarray = None    # (M, d) at the last recorded time
    states: np.ndarray = None          # (M, len(times), d) when kept


def trajectory_rng(seed, index):
    """Philox stream for trajectory `index`: a pure function of (seed, index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wiener_increments(rng, n, dt):
    """n independent Gaussian increments with mean 0 and variance dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return rng.normal(0.0, math.sqrt(dt), size=n)


def _constant_drift_matrix(u):
    return -1j * u.model.hamiltonian - 0.5 * u.ldag_l_sum


def step(u, psi, dt, dW, renormalize=True):
    """One Euler-Maruyama step (weak order 1)."""
    psi = hilbert.as_state(psi, dim=u.dim)
    dW = np.asarray(dW, dtype=float).reshape(1, 1, -1)
    if dW.shape[-1] != u.noise_count:
        raise ValueError(f"expected {u.noise_count} increments, got {dW.shape[-1]}")
    rotated = np.array(u.rotated)
    states, _, _, status = kernels.simulate_chunk(
        psi, _constant_drift_matrix(u), rotated, dt, dW, renormalize,
        np.array([1], dtype=np.int64))
    if status[0]:
        raise NormBlowupError(0)
    return states[0, 0]


def _run_chunk(u, psi0, cfg, start, count, record_steps, dW_override=None,
               backend=None):
    """Simulate trajectories [start, start+count) and return their states."""
    if dW_override is not None:
        dW = dW_override
    else:
        steps = cfg.n_steps
        dW = np.empty((count, steps, u.noise_count))
        for i in range(count):
            rng = trajectory_rng(cfg.seed, start + i)
            dW[i] = rng.normal(0.0, math.sqrt(cfg.dt),
                               size=(steps, u.noise_count))
    rotated = np.array(u.rotated) if u.noise_count else \
        np.zeros((0, u.dim, u.dim), dtype=complex)
    if rotated.size == 0:
        rotated = rotated.reshape(u.noise_count, u.dim, u.dim)
    states, drift_max, drift_mean, status = kernels.simulate_chunk(
        psi0, _constant_drift_matrix(u), rotated, cfg.dt, dW,
        cfg.renormalize, record_steps, backend=backend)
    bad = np.nonzero(status)[0]
    if bad.size:
        raise NormBlowupError(start + int(bad[0]))
    return states, drift_max, drift_mean


def simulate_trajectory(u, psi0, cfg, trajectory_index=0):
    """Integrate one trajectory; records every record_stride-th step plus t=0."""
    if not isinstance(u, Unraveling):
        raise TypeError("u must be an Unraveling")
    psi0 = hilbert.as_state(psi0, dim=u.dim)
    if not hilbert.is_normalized(psi0):
        raise ValueError("psi0 must be normalized")
    record_steps = cfg.record_steps()
    states, drift_max, drift_mean = _run_chunk(u, psi0, cfg, trajectory_index,
                                               1, record_steps)
    times = np.concatenate(([0.0], record_steps * cfg.dt))
    all_states = np.vstack(([psi0], states[0]))
    return Trajectory(times=times, states=all_states,
                      norm_drift_max=float(drift_max[0]),
                      norm_drift_mean=float(drift_mean[0]), seed=cfg.seed)


def simulate_ensemble(u, psi0, cfg, n_trajectories, threads=1,
                      keep_states=False, chunk_size=_DEFAULT_CHUNK,
                      dW_chunks=None, backend=None, record_steps=None):
    """Monte Carlo estimate of rho_t = E|psi_t><psi_t| over the record grid.

    The result is bitwise independent of `threads`: trajectory i always uses
    the Philox stream keyed by (seed, i), chunk boundaries depend only on
    `chunk_size`, and per-chunk projector sums are reduced in chunk order.

    dW_chunks optionally supplies pregenerated increments per chunk (used by
    the step-size consistency checks to couple runs across dt levels);
    record_steps overrides the stride grid from cfg.
    """
    if n_trajectories < 1:
        raise ValueError("need at least one trajectory")
    psi0 = hilbert.as_state(psi0, dim=u.dim)
    if not hilbert.is_normalized(psi0):
        raise ValueError("psi0 must be normalized")
    if record_steps is None:
        record_steps = cfg.record_steps()
    else:
        record_steps = np.asarray(record_steps, dtype=np.int64)
    R = record_steps.size
    d = u.dim

    chunks = []
    start = 0
    while start < n_trajectories:
        count = min(chunk_size, n_trajectories - start)
        chunks.append((start, count))
        start += count
    if dW_chunks is not None and len(dW_chunks) != len(chunks):
        raise ValueError("dW_chunks must match the chunk layout")

    def work(item):
        idx, (lo, count) = item
        dW = None if dW_chunks is None else dW_chunks[idx]
        return _run_chunk(u, psi0, cfg, lo, count, record_steps,
                          dW_override=dW, backend=backend)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, enumerate(chunks)))
    else:
        results = [work(item) for item in enumerate(chunks)]

    rho_sum = np.zeros((R, d, d), dtype=complex)
    drifts = np.zeros(n_trajectories)
    drift_means = np.zeros(n_trajectories)
    finals = np.empty((n_trajectories, d), dtype=complex)
    kept = np.empty((n_trajectories, R, d), dtype=complex) if keep_states else None
    for (lo, count), (states, dmax, dmean) in zip(chunks, results):
        for i in range(count):
            for r in range(R):
                s = states[i, r]
                rho_sum[r] += np.outer(s, np.conj(s))
        finals[lo:lo + count] = states[:, -1, :]
        if keep_states:
            kept[lo:lo + count] = states
        drifts[lo:lo + count] = dmax
        drift_means[lo:lo + count] = dmean

    rho_hat = rho_sum / n_trajectories
    # For unit-norm projectors E||P||_F^2 = 1, so the Frobenius-scale Monte
    # Carlo error is sqrt((1 - ||rho||_F^2) / M).
    frob2 = np.array([np.sum(np.abs(r) ** 2).real for r in rho_hat])
    std_error = np.sqrt(np.maximum(0.0, 1.0 - frob2) / n_trajectories)
    return EnsembleEstimate(times=record_steps * cfg.dt, rho_hat=rho_hat,
                            n_trajectories=n_trajectories,
                            std_error=std_error, seed=cfg.seed,
                            norm_drift_max=float(np.max(drifts)),
                            norm_drift=drifts, norm_drift_mean=drift_means,
                            final_states=finals, states=kept)
