"""Command-line interface.

Subcommands:

* ``fit``         fit a single dumped instance file
* ``simulate``    run a replication grid from a config file
* ``diagnose``    design / noise condition checks
* ``lower-bound`` emit the two-instance indistinguishability pair

Exit codes: 0 success, 1 configuration error, 2 solver failure fraction
above the configured threshold.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import datagen, diagnostics, harness, penalties, solver
from .harness import ConfigError
from .penalties import PenaltyConfig, TAU_INF


def _add_global_flags(p):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--config", type=str, default=None, help="config file path")
    p.add_argument("--out", type=str, default=None, help="output directory or file")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="record output format")


def build_parser():
    ap = argparse.ArgumentParser(prog="pivotal-slope")
    sub = ap.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one instance from a dump file")
    _add_global_flags(p_fit)
    p_fit.add_argument("instance", help="instance file written by --dump-instance")
    p_fit.add_argument("--variant", choices=harness.VARIANTS,
                       default="pivotal_sorted")
    p_fit.add_argument("--c-lambda", type=float, default=2.0)
    p_fit.add_argument("--c-mu", type=float, default=2.0)
    p_fit.add_argument("--delta", type=float, default=0.05)

    p_sim = sub.add_parser("simulate", help="run a replication grid")
    _add_global_flags(p_sim)
    p_sim.add_argument("--dump-instance", type=str, default=None,
                       help="also dump the first generated instance here")

    p_diag = sub.add_parser("diagnose", help="design and noise checks")
    _add_global_flags(p_diag)
    p_diag.add_argument("--n", type=int, default=200)
    p_diag.add_argument("--p", type=int, default=50)
    p_diag.add_argument("--s", type=int, default=5)
    p_diag.add_argument("--probes", type=int, default=1000)
    p_diag.add_argument("--design", choices=("gaussian", "rademacher"),
                        default="gaussian")

    p_lb = sub.add_parser("lower-bound", help="two-instance indistinguishable pair")
    _add_global_flags(p_lb)
    p_lb.add_argument("--n", type=int, default=1000)
    p_lb.add_argument("--o", type=int, default=10)
    p_lb.add_argument("--sigma", type=float, default=1.0)
    p_lb.add_argument("--tau", type=str, default="2")
    return ap


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _cmd_fit(args):
    inst = datagen.load_instance(args.instance)
    n, p = inst.ds.n, inst.ds.p
    tau = inst.truth.noise.tau
    cell = harness.Cell(
        n=n, p=p, s=max(inst.truth.s, 1), o=inst.truth.o, tau=tau,
        variant=args.variant, c_lambda=args.c_lambda, c_mu=args.c_mu,
        delta=args.delta,
    )
    lam, mu = harness.penalty_pair(cell)
    if args.variant == "nonrobust_baseline":
        fr = solver.fit_nonrobust_baseline(inst.ds, lam)
    else:
        fr = solver.fit_pivotal(inst.ds, lam, mu)
    report = {
        "status": fr.status,
        "sigma_hat": fr.sigma_hat,
        "objective": fr.objective_trace[-1],
        "beta_nonzeros": int(np.count_nonzero(fr.beta_hat)),
        "theta_nonzeros": int(np.count_nonzero(fr.theta_hat)),
        "kkt_max_gap": fr.kkt.max_gap() if fr.kkt else None,
        "beta_hat": fr.beta_hat.tolist(),
    }
    _emit_json(report, args.out)
    return 0 if fr.status in ("converged", "degenerate_sigma") else 2


def _cmd_simulate(args):
    if not args.config:
        print("simulate requires --config", file=sys.stderr)
        return 1
    with open(args.config) as f:
        cfg = harness.parse_config(f.read())
    cfg = harness.ExperimentConfig(**{**cfg.__dict__, "master_seed": args.seed}) \
        if args.seed else cfg
    if args.dump_instance:
        cell = cfg.cells()[0]
        inst = harness.make_instance(
            cell, harness.replication_seed(cfg.master_seed, cell, 0))
        datagen.dump_instance(inst, args.dump_instance)
    records, table = harness.run_grid(cfg)
    out_dir = args.out or "."
    paths = harness.emit(records, table, out_dir, args.format)
    frac = harness.failure_fraction(records)
    print(f"wrote {paths['records']} ({len(records)} records, "
          f"failure fraction {frac:.3f})")
    return 2 if frac > cfg.max_failure_fraction else 0


def _cmd_diagnose(args):
    pcfg = PenaltyConfig()
    lam = penalties.build_lambda(args.n, args.p, pcfg)
    mu = penalties.build_mu(args.n, pcfg)
    X = datagen.gen_design(args.n, args.p, None, args.design, args.seed)
    rep = diagnostics.design_report(X, None, lam, args.s, args.probes, args.seed)
    xi = datagen.gen_noise(args.n, datagen.NoiseSpec("gaussian"), args.seed)
    ev = diagnostics.check_event_E(xi, o_prime=max(args.s, 1), mu=mu)
    _emit_json({"design": rep.to_dict(), "noise_event": ev.to_dict()}, args.out)
    return 0


def _cmd_lower_bound(args):
    tau = TAU_INF if args.tau == "inf" else float(args.tau)
    inst_a, inst_b = datagen.lower_bound_pair(
        args.n, args.o, args.sigma, tau, seed=args.seed)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        datagen.dump_instance(inst_a, os.path.join(args.out, "instance_a.npz"))
        datagen.dump_instance(inst_b, os.path.join(args.out, "instance_b.npz"))
    summary = {
        "n": args.n, "o": args.o, "sigma": args.sigma,
        "tau": "inf" if tau == TAU_INF else tau,
        "signal_b": float(inst_a.truth.beta_star[0]),
        "sigma_tilde": inst_b.truth.sigma,
        "outliers_a": int(inst_a.truth.o),
        "response_mean_a": float(inst_a.ds.Y.mean()),
        "response_mean_b": float(inst_b.ds.Y.mean()),
    }
    _emit_json(summary, None)
    if args.out:
        print(f"wrote instance pair under {args.out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "lower-bound":
            return _cmd_lower_bound(args)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
