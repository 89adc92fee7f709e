"""Executable checks for the claims the package is built around: the
unraveling generator identity, ensemble-vs-exact agreement, equivalence of
different unravelings, and complete-positivity detection, plus a suite
runner with first-class expected-failure (fault-injection) entries.

The fault injectors deliberately break the drift or diffusion construction;
a harness in which they still pass is itself broken.
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import hilbert, lindblad, sde
from .lindblad import GKSForm, LindbladModel
from .scenario import ScenarioError, complex_to_pairs, scenario_from_dict
from .unraveling import Unraveling, UnitaryFreedom, generator_term


@dataclass
class VerificationReport:
    name: str
    passed: bool
    measured: dict
    tolerance: float
    seconds: float
    config_hash: str
    expect: str = "pass"

    @property
    def ok(self):
        """True when the outcome matches the expectation (pass, or an
        injected fault that was correctly detected)."""
        return self.passed == (self.expect == "pass")

    def to_dict(self):
        return {
            "check": self.name,
            "pass": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "seconds": round(self.seconds, 4),
            "config_hash": self.config_hash,
            "expect": self.expect,
            "ok": self.ok,
        }


def _canonical(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return complex_to_pairs(obj)
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def config_hash(config):
    """SHA-256 of the canonical JSON form of a configuration mapping."""
    payload = json.dumps(_canonical(config), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _freedom_config(freedom):
    if isinstance(freedom, str):
        return freedom
    if freedom.matrix is not None:
        return {"matrix": complex_to_pairs(freedom.matrix)}
    return {"phase": freedom.phase}


def _model_config(model):
    return {
        "hamiltonian": complex_to_pairs(model.hamiltonian),
        "lindblad_ops": [complex_to_pairs(L) for L in model.lindblad_ops],
    }


def _cfg_config(cfg):
    return {"dt": cfg.dt, "t_final": cfg.t_final, "seed": cfg.seed,
            "renormalize": cfg.renormalize,
            "record_stride": cfg.record_stride}


def statistical_tolerance(n_trajectories, dt, dim):
    """Union bound of Monte Carlo error and weak order-1 bias:
    3 d / sqrt(M) + 5 dt."""
    return 3.0 * dim / math.sqrt(n_trajectories) + 5.0 * dt


# ---------------------------------------------------------------------------
# random inputs for the deterministic identity checks

def random_state(rng, d):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return hilbert.normalize(psi)


def random_hermitian(rng, d, scale=1.0):
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (M + hilbert.dagger(M))


def random_unitary(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(M)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_model(rng, d, n_ops=None):
    if n_ops is None:
        n_ops = int(rng.integers(1, 3))
    while True:
        H = random_hermitian(rng, d)
        ops = tuple(
            rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            for _ in range(n_ops))
        if hilbert.check_linear_independence(ops, include_identity=True):
            return LindbladModel(H, ops)


def random_freedom(rng, n_ops):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return UnitaryFreedom(matrix=np.eye(n_ops, dtype=complex))
    if kind == 1 and n_ops == 1:
        return UnitaryFreedom(phase=float(rng.uniform(0, 2 * np.pi)))
    N = n_ops + int(rng.integers(0, 3))
    return UnitaryFreedom(matrix=random_unitary(rng, N))


# ---------------------------------------------------------------------------
# deterministic checks

def generator_deviation(u, psi, fault=None):
    """Max-entry deviation of the one-step generator from the Lindblad RHS.

    fault: None, "drop_ell2" (omit the -|ell|^2/2 drift term) or
    "zero_ell_in_B" (noise vectors L psi instead of L psi - ell psi).
    """
    rho = hilbert.outer(psi, psi)
    rhs = lindblad.lindblad_rhs(u.model, rho)
    gen = generator_term(u, psi)
    if fault == "drop_ell2":
        extra = 0.0
        for Lk in u.rotated:
            lk = float(np.real(np.vdot(psi, Lk @ psi)))
            extra += 0.5 * lk * lk
        gen = gen + 2.0 * extra * rho
    elif fault == "zero_ell_in_B":
        for Lk in u.rotated:
            Lpsi = Lk @ psi
            lk = float(np.real(np.vdot(psi, Lpsi)))
            B = Lpsi - lk * psi
            gen = gen - hilbert.outer(B, B) + hilbert.outer(Lpsi, Lpsi)
    elif fault is not None:
        raise ValueError(f"unknown fault {fault!r}")
    return float(np.max(np.abs(gen - rhs)))


def check_generator_identity(model, freedom, samples=100, seed=0, fault=None,
                             tolerance=1e-10):
    """Non-statistical check of the generator identity at random unit states."""
    t0 = time.perf_counter()
    u = Unraveling(model, freedom)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        worst = max(worst, generator_deviation(u, random_state(rng, u.dim),
                                               fault=fault))
    return VerificationReport(
        name="generator-identity",
        passed=worst <= tolerance,
        measured={"max_deviation": worst, "samples": samples,
                  "fault": fault},
        tolerance=tolerance,
        seconds=time.perf_counter() - t0,
        config_hash=config_hash({
            "check": "generator-identity", "model": _model_config(model),
            "freedom": _freedom_config(u.freedom), "samples": samples,
            "seed": seed, "fault": fault}),
    )


def check_complete_positivity(gks, times, tolerance=1e-10):
    """Diagonalize the Kossakowski matrix; CP generators must give PSD Choi
    matrices at all times, while any negative rate must show up as a
    negative Choi eigenvalue at the smallest time."""
    t0 = time.perf_counter()
    rates, _ops = lindblad.gks_to_lindblad(gks)
    min_rate = min(rates)
    eigs = {}
    for t in times:
        choi = lindblad.gks_choi_matrix(gks, t)
        eigs[t] = float(np.linalg.eigvalsh(choi)[0])
    if min_rate >= -1e-10:
        passed = all(v >= -tolerance for v in eigs.values())
    else:
        passed = eigs[min(times)] < -1e-6
    return VerificationReport(
        name="complete-positivity",
        passed=passed,
        measured={"rates": rates, "min_rate": min_rate,
                  "choi_min_eig": {f"{t:g}": v for t, v in eigs.items()},
                  "cp_expected": bool(min_rate >= -1e-10)},
        tolerance=tolerance,
        seconds=time.perf_counter() - t0,
        config_hash=config_hash({
            "check": "complete-positivity",
            "gks": {"hamiltonian": complex_to_pairs(gks.hamiltonian),
                    "kossakowski": complex_to_pairs(gks.kossakowski)},
            "times": list(times)}),
    )


# ---------------------------------------------------------------------------
# statistical checks

def _checkpoint_steps(checkpoints, dt):
    steps = []
    for t in checkpoints:
        k = int(round(t / dt))
        if abs(k * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"checkpoint {t} is not a multiple of dt={dt}")
        if k > 0:
            steps.append(k)
    return np.asarray(sorted(set(steps)), dtype=np.int64)


def _faulty_rho(u, psi0, cfg, n_trajectories, steps_wanted, fault,
                chunk_size=256):
    """Ensemble density matrix under an injected drift/diffusion fault.

    Runs without renormalization (a parallel-drift fault would otherwise be
    projected away) and averages the raw projectors.
    """
    K = -1j * u.model.hamiltonian - 0.5 * u.ldag_l_sum
    rotated = [np.ascontiguousarray(L) for L in u.rotated]
    n_steps = cfg.n_steps
    d = u.dim
    R = len(steps_wanted)
    rho_sum = np.zeros((R, d, d), dtype=complex)
    start = 0
    while start < n_trajectories:
        count = min(chunk_size, n_trajectories - start)
        dW = np.empty((count, n_steps, u.noise_count))
        for i in range(count):
            rng = sde.trajectory_rng(cfg.seed, start + i)
            dW[i] = rng.normal(0.0, math.sqrt(cfg.dt),
                               size=(n_steps, u.noise_count))
        psi = np.broadcast_to(psi0, (count, d)).copy()
        rec = 0
        for s in range(n_steps):
            new = psi + cfg.dt * (psi @ K.T)
            # functionals on the normalized state: keeps the faulty (trace
            # non-preserving) dynamics integrable instead of blowing up
            nrm2 = np.sum(np.abs(psi) ** 2, axis=1)
            psih = psi / np.sqrt(nrm2)[:, None]
            for k, Lk in enumerate(rotated):
                Lpsi = psi @ Lk.T
                lk = np.sum(np.conj(psih) * (psih @ Lk.T), axis=1).real
                drift = lk[:, None] * Lpsi
                if fault != "drop_ell2":
                    drift = drift - 0.5 * (lk * lk)[:, None] * psi
                new += cfg.dt * drift
                if fault == "zero_ell_in_B":
                    noise = Lpsi
                else:
                    noise = Lpsi - lk[:, None] * psi
                new += dW[:, s, k][:, None] * noise
            psi = new
            if rec < R and s + 1 == steps_wanted[rec]:
                for i in range(count):
                    rho_sum[rec] += np.outer(psi[i], np.conj(psi[i]))
                rec += 1
        start += count
    return rho_sum / n_trajectories


def check_ensemble_vs_exact(model, freedom, psi0, cfg, n_trajectories,
                            checkpoints, threads=1):
    """Trace distance between the Monte Carlo ensemble and the matrix
    exponential of the Liouvillian at every checkpoint."""
    t0 = time.perf_counter()
    u = Unraveling(model, freedom)
    steps = _checkpoint_steps(checkpoints, cfg.dt)
    est = sde.simulate_ensemble(u, psi0, cfg, n_trajectories, threads=threads,
                                record_steps=steps)
    rho0 = hilbert.outer(psi0, psi0)
    tol = statistical_tolerance(n_trajectories, cfg.dt, u.dim)
    distances = {}
    for r, k in enumerate(steps):
        t = k * cfg.dt
        exact = lindblad.propagate_exact(model, rho0, t)
        distances[f"{t:g}"] = hilbert.trace_distance(est.rho_hat[r], exact)
    passed = all(v <= tol for v in distances.values())
    return VerificationReport(
        name="ensemble-vs-exact",
        passed=passed,
        measured={"trace_distances": distances,
                  "max_distance": max(distances.values()),
                  "n_trajectories": n_trajectories},
        tolerance=tol,
        seconds=time.perf_counter() - t0,
        config_hash=config_hash({
            "check": "ensemble-vs-exact", "model": _model_config(model),
            "freedom": _freedom_config(u.freedom),
            "psi0": complex_to_pairs(psi0), "integration": _cfg_config(cfg),
            "n_trajectories": n_trajectories,
            "checkpoints": list(checkpoints)}),
    )


def check_unraveling_equivalence(model, freedoms, psi0, cfg, n_trajectories,
                                 t, faults=None, threads=1):
    """Pairwise agreement of ensemble density matrices across unravelings of
    one model, each also checked against the exact propagator.

    faults, when given, is a per-freedom list of injector names (or None);
    fault runs skip renormalization so that drift faults stay visible.
    """
    t0 = time.perf_counter()
    if len(freedoms) < 2 and faults is None:
        raise ValueError("need at least two freedoms to compare")
    if faults is None:
        faults = [None] * len(freedoms)
    steps = _checkpoint_steps([t], cfg.dt)
    rhos = []
    for i, freedom in enumerate(freedoms):
        u = Unraveling(model, freedom)
        # distinct sub-seed per entry so ensembles are independent draws
        cfg_i = sde.IntegrationConfig(
            dt=cfg.dt, t_final=cfg.t_final,
            seed=(cfg.seed + 7919 * i) % 2 ** 64,
            renormalize=cfg.renormalize, record_stride=cfg.record_stride)
        if faults[i] is None:
            est = sde.simulate_ensemble(u, psi0, cfg_i, n_trajectories,
                                        threads=threads, record_steps=steps)
            rhos.append(est.rho_hat[-1])
        else:
            rhos.append(_faulty_rho(u, psi0, cfg_i, n_trajectories, steps,
                                    faults[i])[-1])
    tol = statistical_tolerance(n_trajectories, cfg.dt, model.dim)
    exact = lindblad.propagate_exact(model, hilbert.outer(psi0, psi0), t)
    pairwise = {}
    for i in range(len(rhos)):
        for j in range(i + 1, len(rhos)):
            pairwise[f"{i}-{j}"] = hilbert.trace_distance(rhos[i], rhos[j])
    vs_exact = {str(i): hilbert.trace_distance(r, exact)
                for i, r in enumerate(rhos)}
    passed = (all(v <= 2 * tol for v in pairwise.values())
              and all(v <= tol for v in vs_exact.values()))
    return VerificationReport(
        name="unraveling-equivalence",
        passed=passed,
        measured={"pairwise": pairwise, "vs_exact": vs_exact,
                  "faults": faults, "t": t},
        tolerance=tol,
        seconds=time.perf_counter() - t0,
        config_hash=config_hash({
            "check": "unraveling-equivalence", "model": _model_config(model),
            "freedoms": [_freedom_config(Unraveling(model, f).freedom)
                         for f in freedoms],
            "faults": faults, "psi0": complex_to_pairs(psi0),
            "integration": _cfg_config(cfg),
            "n_trajectories": n_trajectories, "t": t}),
    )


# ---------------------------------------------------------------------------
# suite runner

def _entry_scenario(entry):
    try:
        return scenario_from_dict(entry)
    except ScenarioError as exc:
        raise ScenarioError(f"check {entry.get('check', '?')!r}: {exc}") from None


def run_suite(config, threads=1):
    """Execute the named checks of a suite configuration in declared order.

    config is a dict (or a path to a JSON file) with a "checks" list; each
    entry combines scenario fields with "check" and optional "expect"
    ("pass" by default, "fail" for fault-injection entries).
    """
    if isinstance(config, (str, bytes)) or hasattr(config, "__fspath__"):
        with open(config) as fh:
            try:
                config = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(
                    f"suite: invalid JSON at line {exc.lineno}: {exc.msg}"
                ) from None
    reports = []
    for entry in config.get("checks", []):
        kind = entry.get("check")
        expect = entry.get("expect", "pass")
        if kind == "generator-identity":
            sc = _entry_scenario(entry)
            report = check_generator_identity(
                sc.model(), sc.freedom_spec,
                samples=int(entry.get("samples", 100)),
                seed=int(entry.get("seed", 0)),
                fault=entry.get("fault"))
        elif kind == "ensemble-vs-exact":
            sc = _entry_scenario(entry)
            report = check_ensemble_vs_exact(
                sc.model(), sc.freedom_spec, sc.psi0, sc.integration,
                sc.trajectories, sc.checkpoints, threads=threads)
        elif kind == "unraveling-equivalence":
            sc = _entry_scenario(entry)
            freedoms = entry.get("freedoms", [sc.freedom_spec])
            report = check_unraveling_equivalence(
                sc.model(), freedoms, sc.psi0, sc.integration,
                sc.trajectories, float(entry["t"]),
                faults=entry.get("faults"), threads=threads)
        elif kind == "complete-positivity":
            sc = _entry_scenario(entry)
            if sc.gks is None:
                raise ScenarioError("complete-positivity check needs a gks block")
            report = check_complete_positivity(
                sc.gks, [float(t) for t in entry.get("times", [0.1, 1.0])])
        else:
            raise ScenarioError(f"unknown check type {kind!r}")
        report.expect = expect
        reports.append(report)
    return reports


def suite_ok(reports):
    return all(r.ok for r in reports)
