"""Penalty weight builders for the two regression blocks.

The coefficient block always uses ``lambda_i = c_lambda * sqrt(log(e*p/i)/n)``.
The outlier block depends on the noise regime:

* ``sorted_heavy``    mu_i = (c_mu/sqrt(n)) * (n/i)^(1/tau), finite tau >= 2
* ``sorted_subgauss`` mu_i = c_mu * sqrt(log(e*n/i)/n)
* ``fixed``           constant (c_mu/sqrt(n)) * (n/log(1/delta))^(1/tau),
                      which additionally requires the confidence level delta.

The absolute constants are exposed as configuration; defaults are calibrated
so that the desk-scale experiments in the test suite succeed.  Natural
logarithms throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import sorted_l1

TAU_INF = math.inf

REGIMES = ("sorted_heavy", "sorted_subgauss", "fixed")


@dataclass(frozen=True)
class PenaltyConfig:
    c_lambda: float = 2.0
    c_mu: float = 2.0
    tau: float = TAU_INF
    delta: float = 0.05
    regime: str = "sorted_subgauss"

    def __post_init__(self):
        if not self.c_lambda > 0 or not self.c_mu > 0:
            raise ValueError("penalty constants must be positive")
        if not (self.tau == TAU_INF or self.tau >= 2):
            raise ValueError(f"tau must be >= 2 or inf, got {self.tau}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime == "sorted_subgauss" and self.tau != TAU_INF:
            raise ValueError("sorted_subgauss regime requires tau = inf")
        if self.regime == "sorted_heavy" and self.tau == TAU_INF:
            raise ValueError("sorted_heavy regime requires finite tau")
        if self.regime == "fixed" and self.tau == TAU_INF:
            raise ValueError("fixed regime requires finite tau")


def build_lambda(n, p, cfg):
    """Length-p coefficient-block weights c_lambda*sqrt(log(e*p/i)/n)."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    i = np.arange(1, p + 1, dtype=np.float64)
    w = cfg.c_lambda * np.sqrt(np.log(math.e * p / i) / n)
    return sorted_l1.validate(w)


def build_mu(n, cfg):
    """Length-n outlier-block weights for the configured regime."""
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(1, n + 1, dtype=np.float64)
    if cfg.regime == "sorted_heavy":
        w = (cfg.c_mu / math.sqrt(n)) * (n / i) ** (1.0 / cfg.tau)
    elif cfg.regime == "sorted_subgauss":
        w = cfg.c_mu * np.sqrt(np.log(math.e * n / i) / n)
    else:  # fixed
        m = math.log(1.0 / cfg.delta)
        if m > n:
            raise ValueError(
                f"fixed regime needs log(1/delta) <= n, got {m:.3g} > {n}"
            )
        w = np.full(n, (cfg.c_mu / math.sqrt(n)) * (n / m) ** (1.0 / cfg.tau))
    return sorted_l1.validate(w)


def check_lambda_mu_compat(lam, mu):
    """True iff lambda_i <= mu_i elementwise over the shared index range."""
    k = min(len(lam), len(mu))
    return bool(np.all(lam.weights[:k] <= mu.weights[:k]))
