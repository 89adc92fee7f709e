"""Batch front-end: parse scenario files, run simulations or verification
suites, and emit CSV/JSON artifacts for external plotting.

Exit codes: 0 ok, 1 verification failure, 2 usage or parse error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import lindblad, observables, sde, verify
from .scenario import Scenario, ScenarioError, complex_to_pairs, parse_scenario
from .unraveling import Unraveling

_FMT = "%.17g"   # lossless double round-trip


def _fmt(x):
    return _FMT % float(x)


def _write_csv(path, header_fields, columns, rows):
    with open(path, "w") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in header_fields) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _scenario_hash(scenario, seed):
    return verify.config_hash({"scenario": scenario.to_dict(), "seed": seed})


def _load(args):
    scenario = parse_scenario(args.scenario)
    if args.seed is not None:
        if scenario.integration is None:
            raise ScenarioError("scenario has no integration block to seed")
        scenario.integration = sde.IntegrationConfig(
            dt=scenario.integration.dt, t_final=scenario.integration.t_final,
            seed=args.seed, renormalize=scenario.integration.renormalize,
            record_stride=scenario.integration.record_stride)
    if args.no_renormalize and scenario.integration is not None:
        scenario.integration = sde.IntegrationConfig(
            dt=scenario.integration.dt, t_final=scenario.integration.t_final,
            seed=scenario.integration.seed, renormalize=False,
            record_stride=scenario.integration.record_stride)
    return scenario


def cmd_simulate(args):
    scenario = _load(args)
    if scenario.psi0 is None or scenario.integration is None:
        raise ScenarioError("simulate needs psi0 and an integration block")
    u = scenario.unraveling()
    cfg = scenario.integration
    est = sde.simulate_ensemble(u, scenario.psi0, cfg, scenario.trajectories,
                                threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    chash = _scenario_hash(scenario, cfg.seed)
    d = u.dim
    columns = ["time"]
    for i in range(d):
        for j in range(d):
            columns += [f"rho_{i}{j}_re", f"rho_{i}{j}_im"]
    rows = []
    for t, rho in zip(est.times, est.rho_hat):
        row = [t]
        for i in range(d):
            for j in range(d):
                row += [rho[i, j].real, rho[i, j].imag]
        rows.append(row)
    _write_csv(os.path.join(args.out, "rho.csv"),
               [("config_hash", chash), ("seed", cfg.seed)], columns, rows)
    summary = {
        "config_hash": chash,
        "seed": cfg.seed,
        "trajectories": est.n_trajectories,
        "times": est.times.tolist(),
        "std_error": est.std_error.tolist(),
        "norm_drift_max": est.norm_drift_max,
    }
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return 0


def cmd_verify(args):
    reports = verify.run_suite(args.scenario, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    payload = [r.to_dict() for r in reports]
    with open(os.path.join(args.out, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    for r in reports:
        status = "ok" if r.ok else "FAILED"
        print(f"{r.name}: pass={r.passed} expect={r.expect} -> {status}")
    return 0 if verify.suite_ok(reports) else 1


def cmd_diagonalize(args):
    scenario = _load(args)
    if scenario.gks is None:
        raise ScenarioError("diagonalize needs a gks block")
    rates, ops = lindblad.gks_to_lindblad(scenario.gks)
    os.makedirs(args.out, exist_ok=True)
    payload = {
        "config_hash": _scenario_hash(scenario, 0),
        "rates": rates,
        "completely_positive": bool(min(rates) >= -1e-10),
        "lindblad_ops": [complex_to_pairs(L) for L in ops],
    }
    with open(os.path.join(args.out, "diagonal.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return 0


def cmd_choi(args):
    scenario = _load(args)
    os.makedirs(args.out, exist_ok=True)
    if scenario.gks is not None:
        choi = lindblad.gks_choi_matrix(scenario.gks, args.time)
    else:
        choi = lindblad.choi_matrix(scenario.model(), args.time)
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    payload = {
        "config_hash": _scenario_hash(scenario, 0),
        "t": args.time,
        "min_eigenvalue": min_eig,
        "completely_positive": bool(min_eig >= -1e-10),
        "choi": complex_to_pairs(choi),
    }
    with open(os.path.join(args.out, "choi.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return 0


def cmd_variance_scan(args):
    scenario = _load(args)
    if scenario.psi0 is None or scenario.integration is None:
        raise ScenarioError("variance-scan needs psi0 and an integration block")
    model = scenario.model()
    if model.n_ops != 1:
        raise ScenarioError("variance-scan requires exactly one Lindblad op")
    L = model.lindblad_ops[0]
    phases = scenario.variance_phases or [0.0, np.pi / 4, np.pi / 2]
    cfg = scenario.integration
    chash = _scenario_hash(scenario, cfg.seed)
    curves = []
    times = None
    for f in phases:
        u = Unraveling(model, f"phase:{f}")
        est = sde.simulate_ensemble(u, scenario.psi0, cfg,
                                    scenario.trajectories,
                                    threads=args.threads, keep_states=True)
        times = est.times
        mean_v = np.array([
            np.mean([observables.variance(psi, L) for psi in est.states[:, r]])
            for r in range(len(times))])
        curves.append(mean_v)
    os.makedirs(args.out, exist_ok=True)
    columns = ["time"] + [f"mean_V_f={f:g}" for f in phases]
    rows = [[t] + [c[r] for c in curves] for r, t in enumerate(times)]
    _write_csv(os.path.join(args.out, "variance_scan.csv"),
               [("config_hash", chash), ("seed", cfg.seed)], columns, rows)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qunravel",
        description="Diffusive unravelings of Lindblad master equations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario/suite JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--no-renormalize", action="store_true")

    common(sub.add_parser("simulate", help="run a trajectory ensemble"))
    common(sub.add_parser("verify", help="run a verification suite"))
    common(sub.add_parser("diagonalize", help="diagonalize a GKS form"))
    p_choi = sub.add_parser("choi", help="Choi matrix of the propagator")
    common(p_choi)
    p_choi.add_argument("--time", type=float, default=1.0)
    common(sub.add_parser("variance-scan",
                          help="mean collapse variance over a phase grid"))
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "diagonalize": cmd_diagonalize,
    "choi": cmd_choi,
    "variance-scan": cmd_variance_scan,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
