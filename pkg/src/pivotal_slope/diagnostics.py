"""Empirical validation of the conditions behind the error bounds.

These checks are randomized falsification, not certification: the design
properties quantify over all directions, and we report the minimum margin
over structured probes (random sparse, random dense, and adversarial
small-singular-vector candidates).  A non-negative margin is evidence, not
proof.
"""

import math
from dataclasses import dataclass, asdict
from itertools import combinations

import numpy as np

from . import sorted_l1


@dataclass(frozen=True)
class DesignCheckReport:
    property1_margin: float
    property2_margin: float
    property3_margin: float
    kappa_hat: float
    probes: int
    violated: bool

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NoiseEventReport:
    lower_ok: bool
    upper_ok: bool
    quantile_ok: bool
    o_prime: int

    @property
    def holds(self):
        return self.lower_ok and self.upper_ok and self.quantile_ok

    def to_dict(self):
        d = asdict(self)
        d["holds"] = self.holds
        return d


def _sigma_norm_sq(u, Sigma):
    if Sigma is None:
        return float(u @ u)
    return float(u @ (Sigma @ u))


def _theta_side_weights(n_len, lam, n):
    # length-n analog of the coefficient weights at the same constant:
    # c * sqrt(log(e*m/i)/n) with c recovered from lam's last entry c/sqrt(n)
    c = lam.weights[-1] * math.sqrt(n)
    i = np.arange(1, n_len + 1, dtype=np.float64)
    return c * np.sqrt(np.log(math.e * n_len / i) / n)


def _probe_directions(p, probes, rng, X=None):
    """Unit-norm probe directions: sparse, dense, and adversarial."""
    out = []
    n_sparse_levels = min(p, 20)
    per_level = max(1, probes // (n_sparse_levels + 2))
    for s in range(1, n_sparse_levels + 1):
        for _ in range(per_level):
            u = np.zeros(p)
            idx = rng.choice(p, size=s, replace=False)
            u[idx] = rng.standard_normal(s)
            out.append(u / np.linalg.norm(u))
    for _ in range(per_level):
        u = rng.standard_normal(p)
        out.append(u / np.linalg.norm(u))
    if X is not None:
        # right singular vectors with the smallest singular values
        _, _, vt = np.linalg.svd(X, full_matrices=False)
        for row in vt[-min(5, vt.shape[0]):]:
            out.append(row / np.linalg.norm(row))
    return out[: max(probes, len(out))]


def check_property1(X, Sigma, lam, probes=1000, seed=0):
    """Minimum of ||Xu||^2/n - 0.5*||u||_Sigma^2 + 0.25*||u||_lam^2 over probes."""
    n, p = X.shape
    rng = np.random.default_rng(seed)
    margin = math.inf
    for u in _probe_directions(p, probes, rng, X=X):
        xu = X @ u
        m = (xu @ xu) / n - 0.5 * _sigma_norm_sq(u, Sigma) \
            + 0.25 * sorted_l1.norm_eval(u, lam) ** 2
        margin = min(margin, m)
    return float(margin)


def _incoherence_slack(X, Sigma, lam, u, v, vlam_seq, c_prime, delta, with_v_term):
    n = X.shape[0]
    lhs = abs(v @ (X @ u)) / math.sqrt(n)
    u_sig = math.sqrt(max(_sigma_norm_sq(u, Sigma), 0.0))
    v2 = np.linalg.norm(v)
    rhs = sorted_l1.norm_eval(u, lam) * v2 / 10.0 \
        + c_prime * math.sqrt((math.log(1.0 / delta) + 1.0) / n) * u_sig * v2
    if with_v_term:
        rhs += sorted_l1.norm_eval(v, vlam_seq) * u_sig / 10.0
    return rhs - lhs


def check_property2(X, Sigma, lam, probes=1000, seed=0, c_prime=4.0, delta=0.01):
    """Minimum slack of the two-sided incoherence inequality over probe pairs."""
    n, p = X.shape
    rng = np.random.default_rng(seed)
    vlam = sorted_l1.validate(_theta_side_weights(n, lam, n))
    us = _probe_directions(p, max(1, probes // 2), rng)
    vs = _probe_directions(n, max(1, probes // 2), rng)
    slack = math.inf
    for k in range(max(len(us), len(vs))):
        u = us[k % len(us)]
        v = vs[(k * 7 + 3) % len(vs)]
        slack = min(slack, _incoherence_slack(X, Sigma, lam, u, v, vlam, c_prime, delta, True))
    return float(slack)


def check_property3(X, Sigma, lam, v, probes=1000, seed=0, c_prime=4.0, delta=0.01):
    """Minimum slack of the fixed-v incoherence inequality over probe u."""
    n, p = X.shape
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != n:
        raise ValueError("v must have one entry per row of X")
    rng = np.random.default_rng(seed)
    slack = math.inf
    for u in _probe_directions(p, probes, rng):
        slack = min(slack, _incoherence_slack(X, Sigma, lam, u, v, None, c_prime, delta, False))
    return float(slack)


def estimate_kappa(Sigma, lam, s, probes=10000, seed=0):
    """Minimum Rayleigh quotient ||u||_Sigma^2 / ||u||_2^2 over probes in the
    dominance cone C(s, 4); an upper bound on the true restricted eigenvalue
    (lambda_min(Sigma) is always a lower bound)."""
    p = len(lam)
    if not 1 <= s <= p:
        raise ValueError(f"need 1 <= s <= p, got s={s}")
    rng = np.random.default_rng(seed)
    cone_radius = 4.0 * math.sqrt(float(np.sum(lam.weights[:s] ** 2)))

    def in_cone(u):
        return sorted_l1.norm_eval(u, lam) <= cone_radius * np.linalg.norm(u) + 1e-12

    supports = []
    if math.comb(p, s) <= probes:
        supports = [np.array(c) for c in combinations(range(p), s)]
    else:
        supports = [np.sort(rng.choice(p, size=s, replace=False)) for _ in range(probes)]

    best = math.inf
    count = 0
    for idx in supports:
        u = np.zeros(p)
        u[idx] = rng.standard_normal(s)
        u /= np.linalg.norm(u)
        # s-sparse directions always lie in C(s, 4)
        best = min(best, _sigma_norm_sq(u, Sigma))
        count += 1
        if count >= probes:
            break
        # cone-boundary mixture: add a dense component while staying inside
        w = rng.standard_normal(p)
        w /= np.linalg.norm(w)
        for eps in (0.05, 0.2):
            cand = u + eps * w
            if in_cone(cand):
                best = min(best, _sigma_norm_sq(cand, Sigma) / float(cand @ cand))
        count += 1
        if count >= probes:
            break
    return float(best)


def design_report(X, Sigma, lam, s, probes=1000, seed=0, c_prime=4.0, delta=0.01):
    """Bundle of the three property margins plus the RE estimate."""
    rng = np.random.default_rng(seed)
    v_fixed = rng.standard_normal(X.shape[0])
    v_fixed /= np.linalg.norm(v_fixed)
    m1 = check_property1(X, Sigma, lam, probes, seed)
    m2 = check_property2(X, Sigma, lam, probes, seed, c_prime, delta)
    m3 = check_property3(X, Sigma, lam, v_fixed, probes, seed, c_prime, delta)
    kap = estimate_kappa(Sigma, lam, s, probes, seed)
    return DesignCheckReport(
        m1, m2, m3, kap, probes, violated=(min(m1, m2, m3) < 0.0)
    )


def _sorted_sq_desc(xi):
    return np.sort(np.asarray(xi, dtype=np.float64) ** 2)[::-1]


def check_event_E(xi, o_prime, mu, c_prime=100.0):
    """The good event: trimmed noise energy window and order-statistic caps."""
    n = xi.shape[0]
    if not 0 <= o_prime < n:
        raise ValueError(f"need 0 <= o_prime < n, got {o_prime}")
    sq = _sorted_sq_desc(xi)
    start = max(o_prime, 1)  # 1-based rank of the first retained coordinate
    tail = sq[start - 1:]
    total = float(tail.sum())
    lower_ok = total >= n / c_prime
    upper_ok = total <= c_prime * n
    ranks = np.arange(start, n + 1)
    quantile_ok = bool(np.all(sq[start - 1:] <= n * mu.weights[ranks - 1] ** 2))
    return NoiseEventReport(bool(lower_ok), bool(upper_ok), quantile_ok, o_prime)


def check_order_stat_bound(xi, o, mu):
    """True iff max over ranks i >= o of |xi|_(i) / (sqrt(n) mu_i) < 1/20."""
    n = xi.shape[0]
    if not 1 <= o <= n:
        raise ValueError(f"need 1 <= o <= n, got {o}")
    mags = np.sort(np.abs(xi))[::-1]
    ranks = np.arange(o, n + 1)
    ratios = mags[ranks - 1] / (math.sqrt(n) * mu.weights[ranks - 1])
    return bool(np.max(ratios) < 1.0 / 20.0)


def check_variance_window(xi, o):
    """True iff n/100 <= sum over ranks i >= o of xi^2_(i) <= 2n."""
    n = xi.shape[0]
    if not 0 <= o <= n:
        raise ValueError(f"need 0 <= o <= n, got {o}")
    sq = _sorted_sq_desc(xi)
    total = float(sq[max(o, 1) - 1:].sum())
    return bool(n / 100.0 <= total <= 2.0 * n)


def max_ratio_statistic(xi):
    """max over ranks of |xi|_(i) / sqrt(log(e*n/i)) for Gaussian input."""
    n = xi.shape[0]
    mags = np.sort(np.abs(xi))[::-1]
    denom = np.sqrt(np.log(math.e * n / np.arange(1, n + 1)))
    return float(np.max(mags / denom))


def cone_membership(u, v, lam, mu, s, o, delta, kappa, Sigma=None, c0=4.0):
    """Whether (u, v) satisfies the augmented-space dominance cone inequality."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    n = v.shape[0]
    lhs = sorted_l1.norm_eval(u, lam) + sorted_l1.norm_eval(v, mu)
    lam_head = float(np.sum(lam.weights[:s] ** 2))
    mu_head = float(np.sum(mu.weights[:o] ** 2))
    u_sig = math.sqrt(max(_sigma_norm_sq(u, Sigma), 0.0))
    rhs = c0 * (
        math.sqrt(lam_head / kappa + math.log(1.0 / delta) / n) * u_sig
        + math.sqrt(mu_head) * float(np.linalg.norm(v))
    )
    return bool(lhs <= rhs)
