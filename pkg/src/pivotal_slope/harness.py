"""Experiment orchestration: seeded replication grids, error metrics, and
rate-slope fits.

A grid is a pure function of its configuration.  Per-replication seeds are
derived from the master seed and the cell key through ``SeedSequence``, so
records do not depend on the order cells are visited and the whole run can
be reproduced from the config file alone.
"""

import csv
import json
import math
import time
from dataclasses import dataclass, asdict

import numpy as np

from . import datagen, penalties, solver
from .penalties import PenaltyConfig, TAU_INF

SCHEMA_VERSION = 1

VARIANTS = ("pivotal_sorted", "pivotal_fixed", "nonrobust_baseline")

RECORD_COLUMNS = (
    "n", "p", "s", "o", "tau", "variant", "seed",
    "sigma_norm_error_sq", "pred_error_sq", "theta_error_sq",
    "sigma_hat", "status", "wall_ms",
)


class ConfigError(ValueError):
    """Raised for malformed experiment configurations."""


@dataclass(frozen=True)
class Cell:
    """One grid cell: problem size plus everything needed to replicate it."""

    n: int
    p: int
    s: int
    o: int
    tau: float
    variant: str
    sigma: float = 1.0
    noise_family: str = "gaussian"
    contamination: str = "random_large"
    magnitude: float = 10.0
    c_lambda: float = 2.0
    c_mu: float = 2.0
    delta: float = 0.05
    beta_magnitude: float = 1.0
    design_family: str = "gaussian"
    covariance_kind: str = "identity"
    covariance_rho: float = 0.0
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.s > self.p:
            raise ConfigError(f"cell has s={self.s} > p={self.p}")
        if self.o > self.n:
            raise ConfigError(f"cell has o={self.o} > n={self.n}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class ReplicationRecord:
    n: int
    p: int
    s: int
    o: int
    tau: float
    variant: str
    seed: int
    sigma_norm_error_sq: float
    pred_error_sq: float
    theta_error_sq: float
    sigma_hat: float
    status: str
    wall_ms: float

    def row(self):
        d = asdict(self)
        return [d[c] for c in RECORD_COLUMNS]


@dataclass(frozen=True)
class ExperimentConfig:
    n: tuple
    p: tuple
    s: tuple
    o: tuple  # fractions in (0,1) resolved against each n at expansion time
    variants: tuple = ("pivotal_sorted",)
    tau: float = TAU_INF
    noise_family: str = "gaussian"
    sigma: float = 1.0
    contamination: str = "random_large"
    magnitude: float = 10.0
    c_lambda: float = 2.0
    c_mu: float = 2.0
    delta: float = 0.05
    beta_magnitude: float = 1.0
    design_family: str = "gaussian"
    covariance_kind: str = "identity"
    covariance_rho: float = 0.0
    rel_tol: float = 1e-6
    replications: int = 10
    master_seed: int = 0
    max_failure_fraction: float = 0.1

    def cells(self):
        out = []
        for i, n in enumerate(self.n):
            p = self.p[i]
            for s in self.s:
                for o_raw in self.o:
                    o = int(round(o_raw * n)) if 0 < o_raw < 1 else int(o_raw)
                    for variant in self.variants:
                        out.append(Cell(
                            n=n, p=p, s=s, o=o, tau=self.tau, variant=variant,
                            sigma=self.sigma, noise_family=self.noise_family,
                            contamination=self.contamination,
                            magnitude=self.magnitude,
                            c_lambda=self.c_lambda, c_mu=self.c_mu,
                            delta=self.delta,
                            beta_magnitude=self.beta_magnitude,
                            design_family=self.design_family,
                            covariance_kind=self.covariance_kind,
                            covariance_rho=self.covariance_rho,
                            rel_tol=self.rel_tol,
                        ))
        return out


_REQUIRED_KEYS = ("schema_version", "n", "s", "o")
_OPTIONAL_KEYS = {
    "p": None, "p_ratio": 2.0, "variants": ["pivotal_sorted"],
    "tau": "inf", "noise_family": "gaussian", "sigma": 1.0,
    "contamination": "random_large", "magnitude": 10.0,
    "c_lambda": 2.0, "c_mu": 2.0, "delta": 0.05,
    "beta_magnitude": 1.0, "design_family": "gaussian",
    "covariance_kind": "identity", "covariance_rho": 0.0,
    "rel_tol": 1e-6, "replications": 10, "master_seed": 0,
    "max_failure_fraction": 0.1,
}


def parse_config(text):
    """Parse a JSON experiment config into an ExperimentConfig.

    Unknown keys are rejected by name; all missing required keys are listed
    in one error.  ``o`` entries may be counts (integers) or fractions of n
    (floats in (0, 1)); ``p`` may be given per-n or through ``p_ratio``.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(k for k in _REQUIRED_KEYS if k not in raw)
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {raw['schema_version']!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    vals = dict(_OPTIONAL_KEYS)
    vals.update(raw)

    ns = tuple(int(x) for x in vals["n"])
    if not ns or any(x < 1 for x in ns):
        raise ConfigError("n must be a non-empty list of positive integers")
    if vals["p"] is not None:
        ps = tuple(int(x) for x in vals["p"])
        if len(ps) != len(ns):
            raise ConfigError("p must have one entry per n")
    else:
        ps = tuple(int(round(vals["p_ratio"] * n)) for n in ns)
    ss = tuple(int(x) for x in vals["s"])
    os_ = tuple(float(x) for x in vals["o"])
    for x in os_:
        if x < 0 or (x >= 1 and x != int(x)):
            raise ConfigError(f"o entries must be counts or fractions < 1, got {x}")
    variants = tuple(vals["variants"])
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant {v!r}")
    tau = TAU_INF if vals["tau"] in ("inf", None) else float(vals["tau"])
    if vals["replications"] < 1:
        raise ConfigError("replications must be >= 1")

    cfg = ExperimentConfig(
        n=ns, p=ps, s=ss, o=os_, variants=variants, tau=tau,
        noise_family=vals["noise_family"], sigma=float(vals["sigma"]),
        contamination=vals["contamination"], magnitude=float(vals["magnitude"]),
        c_lambda=float(vals["c_lambda"]), c_mu=float(vals["c_mu"]),
        delta=float(vals["delta"]),
        beta_magnitude=float(vals["beta_magnitude"]),
        design_family=vals["design_family"],
        covariance_kind=vals["covariance_kind"],
        covariance_rho=float(vals["covariance_rho"]),
        rel_tol=float(vals["rel_tol"]),
        replications=int(vals["replications"]),
        master_seed=int(vals["master_seed"]),
        max_failure_fraction=float(vals["max_failure_fraction"]),
    )
    # eagerly validate every cell so bad combinations fail at parse time
    cfg.cells()
    return cfg


def render_config(cfg):
    """Inverse of parse_config up to defaulting (round-trip preserving)."""
    d = asdict(cfg)
    d["tau"] = "inf" if cfg.tau == TAU_INF else cfg.tau
    for k in ("n", "p", "s", "o", "variants"):
        d[k] = list(d[k])
    d["schema_version"] = SCHEMA_VERSION
    return json.dumps(d, indent=2, sort_keys=True)


def _tau_code(tau):
    return 0 if tau == TAU_INF else int(round(tau * 1024))


def replication_seed(master_seed, cell, rep):
    """Stable per-replication seed, independent of grid traversal order."""
    ss = np.random.SeedSequence([
        int(master_seed), cell.n, cell.p, cell.s, cell.o,
        _tau_code(cell.tau), VARIANTS.index(cell.variant), int(rep),
    ])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def _covariance_for(cell):
    if cell.covariance_kind == "identity":
        return None
    return datagen.gen_covariance(cell.p, cell.covariance_kind, cell.covariance_rho)


def _noise_for(cell):
    return datagen.NoiseSpec(cell.noise_family, tau=cell.tau)


def penalty_pair(cell):
    """(lambda, mu) weight sequences for the cell's estimator variant."""
    if cell.variant == "pivotal_fixed":
        regime = "fixed"
        tau = cell.tau if cell.tau != TAU_INF else 2.0
    elif cell.tau == TAU_INF:
        regime, tau = "sorted_subgauss", TAU_INF
    else:
        regime, tau = "sorted_heavy", cell.tau
    pcfg = PenaltyConfig(
        c_lambda=cell.c_lambda, c_mu=cell.c_mu, tau=tau,
        delta=cell.delta, regime=regime,
    )
    lam = penalties.build_lambda(cell.n, cell.p, pcfg)
    mu = penalties.build_mu(cell.n, pcfg) if cell.variant != "nonrobust_baseline" else None
    return lam, mu


def make_instance(cell, seed):
    inst = datagen.build_instance(
        cell.n, cell.p, cell.s, sigma=cell.sigma, noise=_noise_for(cell),
        design_family=cell.design_family, covariance=_covariance_for(cell),
        beta_magnitude=cell.beta_magnitude, seed=seed,
    )
    if cell.o > 0:
        inst = datagen.contaminate(inst, cell.contamination, cell.o, cell.magnitude)
    return inst


def run_replication(cell, rep, master_seed=0):
    """Generate, fit, and score one replication; deterministic per (cell, rep)."""
    seed = replication_seed(master_seed, cell, rep)
    inst = make_instance(cell, seed)
    lam, mu = penalty_pair(cell)
    fcfg = solver.FitConfig(rel_tol=cell.rel_tol)

    t0 = time.perf_counter()
    if cell.variant == "nonrobust_baseline":
        fr = solver.fit_nonrobust_baseline(inst.ds, lam, fcfg)
    else:
        fr = solver.fit_pivotal(inst.ds, lam, mu, fcfg)
    wall_ms = (time.perf_counter() - t0) * 1e3

    truth = inst.truth
    db = fr.beta_hat - truth.beta_star
    if truth.Sigma is None:
        sig_err = float(db @ db)
    else:
        sig_err = float(db @ (truth.Sigma @ db))
    xd = inst.ds.X @ db
    pred_err = float(xd @ xd) / cell.n
    dth = fr.theta_hat - truth.theta_star
    return ReplicationRecord(
        cell.n, cell.p, cell.s, cell.o, cell.tau, cell.variant, seed,
        sig_err, pred_err, float(dth @ dth), fr.sigma_hat, fr.status, wall_ms,
    )


_METRICS = ("sigma_norm_error_sq", "pred_error_sq", "theta_error_sq")


def _cell_key(rec):
    return (rec.n, rec.p, rec.s, rec.o, rec.tau, rec.variant)


@dataclass(frozen=True)
class RateTable:
    cells: tuple  # per-cell dicts: key fields, count, metric quantiles
    slopes: tuple  # per-axis log-log fits on cell medians

    def to_dict(self):
        return {"schema_version": SCHEMA_VERSION,
                "cells": list(self.cells), "slopes": list(self.slopes)}


def fit_loglog_slope(xs, ys):
    """OLS slope and standard error of log(y) on log(x)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.shape[0] < 3:
        raise ValueError("need at least 3 paired points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires strictly positive inputs")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    sxx = float(lx_c @ lx_c)
    if sxx == 0.0:
        raise ValueError("all x values identical")
    slope = float(lx_c @ ly) / sxx
    resid = ly - ly.mean() - slope * lx_c
    dof = xs.shape[0] - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def summarize_deviation(records, delta):
    """Empirical (1 - delta)-quantile of sigma_norm_error_sq over records."""
    if not records:
        raise ValueError("no records to summarize")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    vals = np.array([r.sigma_norm_error_sq for r in records])
    return float(np.quantile(vals, 1.0 - delta))


def _slope_rows(cell_stats):
    """Log-log slope of median error against each varying axis."""
    rows = []
    for axis in ("n", "o"):
        groups = {}
        for c in cell_stats:
            key = tuple((k, v) for k, v in c.items()
                        if k in ("s", "tau", "variant") or
                        (axis == "n" and k == "o") or
                        (axis == "o" and k in ("n", "p")))
            groups.setdefault(key, []).append(c)
        for key, cs in groups.items():
            xs = [c[axis] for c in cs]
            ys = [c["sigma_norm_error_sq"]["median"] for c in cs]
            pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
            if len(pts) < 3 or len({x for x, _ in pts}) < 3:
                continue
            slope, stderr = fit_loglog_slope([x for x, _ in pts], [y for _, y in pts])
            rows.append({
                "axis": axis, "group": dict(key),
                "slope": slope, "stderr": stderr, "points": len(pts),
            })
    return rows


def aggregate(records):
    """RateTable of per-cell quantiles and rate slopes from a record list."""
    by_cell = {}
    for r in records:
        by_cell.setdefault(_cell_key(r), []).append(r)
    cell_stats = []
    for key in sorted(by_cell, key=str):
        recs = by_cell[key]
        entry = dict(zip(("n", "p", "s", "o", "tau", "variant"), key))
        entry["count"] = len(recs)
        entry["failures"] = sum(r.status not in ("converged", "degenerate_sigma")
                                for r in recs)
        for m in _METRICS:
            vals = np.array([getattr(r, m) for r in recs])
            entry[m] = {
                "median": float(np.quantile(vals, 0.5)),
                "q90": float(np.quantile(vals, 0.9)),
                "q99": float(np.quantile(vals, 0.99)),
            }
        entry["tau"] = "inf" if entry["tau"] == TAU_INF else entry["tau"]
        cell_stats.append(entry)
    return RateTable(tuple(cell_stats), tuple(_slope_rows(cell_stats)))


def run_grid(cfg, progress=None):
    """All replications of all cells, merged deterministically.

    Returns (records, table).  Solver non-convergence is recorded per cell,
    never raised; callers decide whether the failure fraction is acceptable.
    """
    records = []
    for cell in cfg.cells():
        for rep in range(cfg.replications):
            records.append(run_replication(cell, rep, cfg.master_seed))
            if progress is not None:
                progress(len(records))
    records.sort(key=lambda r: (str(_cell_key(r)), r.seed))
    return records, aggregate(records)


def failure_fraction(records):
    if not records:
        return 0.0
    bad = sum(r.status not in ("converged", "degenerate_sigma") for r in records)
    return bad / len(records)


def emit(records, table, out_dir, fmt="csv"):
    """Write records.{csv,json}, table.json, and slopes.csv under out_dir."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if fmt == "csv":
        paths["records"] = os.path.join(out_dir, "records.csv")
        with open(paths["records"], "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(RECORD_COLUMNS)
            for r in records:
                w.writerow(r.row())
    elif fmt == "json":
        paths["records"] = os.path.join(out_dir, "records.json")
        with open(paths["records"], "w") as f:
            json.dump([asdict(r) for r in records], f, indent=1)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    paths["table"] = os.path.join(out_dir, "table.json")
    with open(paths["table"], "w") as f:
        json.dump(table.to_dict(), f, indent=1)

    paths["slopes"] = os.path.join(out_dir, "slopes.csv")
    with open(paths["slopes"], "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["axis", "group", "slope", "stderr", "points"])
        for row in table.slopes:
            w.writerow([row["axis"], json.dumps(row["group"], sort_keys=True),
                        row["slope"], row["stderr"], row["points"]])
    return paths


def records_from_csv(path):
    """Read a records.csv produced by emit back into ReplicationRecord objects."""
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(ReplicationRecord(
                int(row["n"]), int(row["p"]), int(row["s"]), int(row["o"]),
                float(row["tau"]), row["variant"], int(row["seed"]),
                float(row["sigma_norm_error_sq"]), float(row["pred_error_sq"]),
                float(row["theta_error_sq"]), float(row["sigma_hat"]),
                row["status"], float(row["wall_ms"]),
            ))
    return out
