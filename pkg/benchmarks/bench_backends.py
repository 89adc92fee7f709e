#!/usr/bin/env python3
"""Compare the numba and numpy stepping backends on a standard collapse run.

Usage: python3 benchmarks/bench_backends.py [--trajectories 4000] [--steps 2000]
"""

import argparse
import time

import numpy as np

import qunravel as q
from qunravel import hilbert, kernels


def run(backend, u, psi0, cfg, n_traj):
    t0 = time.perf_counter()
    est = q.simulate_ensemble(u, psi0, cfg, n_traj, backend=backend)
    return time.perf_counter() - t0, est


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trajectories", type=int, default=4000)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=2)
    args = parser.parse_args()

    if args.dim == 2:
        model = q.LindbladModel(np.zeros((2, 2)), (hilbert.SIGMA_Z,))
        psi0 = np.array([1, 1]) / np.sqrt(2)
    else:
        rng = np.random.default_rng(0)
        d = args.dim
        M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        L = 0.5 * (M + M.conj().T)
        model = q.LindbladModel(np.zeros((d, d)), (L,))
        psi0 = np.ones(d) / np.sqrt(d)
    u = q.Unraveling(model, "standard")
    dt = 1e-3
    cfg = q.IntegrationConfig(dt=dt, t_final=args.steps * dt, seed=1,
                              record_stride=10 ** 9)

    total_steps = args.trajectories * args.steps
    backends = ["numpy"]
    if kernels.HAVE_NUMBA:
        # warm the JIT cache outside the timed region
        q.simulate_ensemble(u, psi0, q.IntegrationConfig(
            dt=dt, t_final=10 * dt, seed=1), 8, backend="numba")
        backends.append("numba")

    results = {}
    for backend in backends:
        seconds, est = run(backend, u, psi0, cfg, args.trajectories)
        results[backend] = (seconds, est)
        print(f"{backend:>6}: {seconds:8.3f} s "
              f"({total_steps / seconds / 1e6:7.2f} Msteps/s)")

    if len(results) == 2:
        diff = np.max(np.abs(results["numba"][1].rho_hat
                             - results["numpy"][1].rho_hat))
        print(f"max |rho_numba - rho_numpy| = {diff:.3e}")


if __name__ == "__main__":
    main()
