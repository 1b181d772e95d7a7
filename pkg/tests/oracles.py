"""Independent reference implementations used to validate the package.

Nothing here shares code with the package internals: the prox oracle
enumerates block partitions directly, the solver oracle is a projected
subgradient method on the raw objective, and the scalar profiles use
golden-section search.
"""

import math
from itertools import combinations

import numpy as np


def sorted_l1_norm(v, gamma):
    mags = np.sort(np.abs(np.asarray(v, dtype=np.float64)))[::-1]
    return float(mags @ np.asarray(gamma, dtype=np.float64))


def prox_objective(w, v, gamma, t):
    d = w - v
    return 0.5 * float(d @ d) + t * sorted_l1_norm(w, gamma)


def prox_oracle(v, gamma, t):
    """Exact prox of t * sorted-l1 by enumeration over block partitions.

    The minimizer, expressed on decreasingly sorted magnitudes, is piecewise
    constant: consecutive blocks take the block average of (magnitude -
    t*weight), and a trailing set of coordinates is clamped at zero.  For
    d <= ~12 every consecutive partition (2^(d-1) of them) can be tried; the
    best feasible candidate is the answer.  Verified independently against a
    convex-programming formulation in the tests.
    """
    v = np.asarray(v, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    d = v.shape[0]
    order = np.argsort(-np.abs(v), kind="stable")
    z = np.abs(v)[order] - t * gamma

    best_x, best_val = None, math.inf
    for cuts in range(1 << (d - 1)) if d > 1 else [0]:
        bounds = [0]
        for j in range(d - 1):
            if cuts >> j & 1:
                bounds.append(j + 1)
        bounds.append(d)
        x = np.empty(d)
        ok = True
        prev = math.inf
        for a, b in zip(bounds, bounds[1:]):
            val = max(z[a:b].mean(), 0.0)
            if val > prev + 1e-12:
                ok = False
                break
            x[a:b] = val
            prev = val
        if not ok:
            continue
        val = 0.5 * float((x - z) @ (x - z))
        if val < best_val:
            best_val, best_x = val, x

    out = np.empty(d)
    out[order] = best_x
    return np.sign(v) * out


def prox_oracle_cvxpy(v, gamma, t):
    """Prox via a disciplined convex program (sum_largest telescoping)."""
    import cvxpy as cp

    v = np.asarray(v, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    d = v.shape[0]
    w = cp.Variable(d)
    pen = gamma[d - 1] * cp.norm1(w)
    for k in range(d - 1):
        pen += (gamma[k] - gamma[k + 1]) * cp.sum_largest(cp.abs(w), k + 1)
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(w - v) + t * pen))
    prob.solve(solver=cp.CLARABEL)
    return np.asarray(w.value, dtype=np.float64)


def pivotal_objective(X, Y, beta, theta, lam, mu):
    n = X.shape[0]
    r = Y - X @ beta - math.sqrt(n) * theta
    q = float(r @ r) / (2.0 * n)
    val = math.sqrt(q) + sorted_l1_norm(beta, lam)
    if mu is not None:
        val += sorted_l1_norm(theta, mu)
    return val


def _sorted_l1_subgrad(w, gamma):
    # assign weights to coordinates by decreasing magnitude; zero entries get
    # the smallest remaining weights times a zero sign, which is a valid
    # (if not extreme) subgradient choice
    order = np.argsort(-np.abs(w), kind="stable")
    g = np.zeros_like(w)
    g[order] = gamma * np.sign(w[order])
    return g


def subgradient_oracle(X, Y, lam, mu, iters=40000, starts=5, seed=0, step0=None):
    """Best objective found by projected subgradient descent on the raw loss.

    Multi-start, diminishing steps, best-iterate tracking.  Used one-sidedly:
    the package solver must match or beat this value.
    """
    n, p = X.shape
    rn = math.sqrt(n)
    rng = np.random.default_rng(seed)
    scale = max(float(np.abs(Y).max()), 1.0)
    if step0 is None:
        step0 = 0.1 * scale
    best = math.inf
    best_pt = None
    for s in range(starts):
        if s == 0:
            beta = np.zeros(p)
            theta = np.zeros(n)
        else:
            beta = rng.standard_normal(p) * scale * 0.1
            theta = rng.standard_normal(n) * scale * 0.1 / rn
        for k in range(iters):
            r = Y - X @ beta - rn * theta
            q = float(r @ r) / (2.0 * n)
            obj = math.sqrt(q) + sorted_l1_norm(beta, lam)
            if mu is not None:
                obj += sorted_l1_norm(theta, mu)
            if obj < best:
                best = obj
                best_pt = (beta.copy(), theta.copy())
            if q > 0:
                gq = 1.0 / (2.0 * math.sqrt(q))
                gb = -(X.T @ r) / n * gq
                gt = -r / rn * gq
            else:
                gb = np.zeros(p)
                gt = np.zeros(n)
            gb = gb + _sorted_l1_subgrad(beta, lam)
            if mu is not None:
                gt = gt + _sorted_l1_subgrad(theta, mu)
            else:
                gt = np.zeros(n)
            step = step0 / math.sqrt(k + 1.0)
            beta = beta - step * gb
            theta = theta - step * gt
    return best, best_pt


def golden_section(f, lo, hi, tol=1e-12, iters=200):
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def dual_norm_bruteforce(u, gamma, grid=200001):
    """max <u, w> over norm_eval(w, gamma) <= 1, for d = 2 only, by grid."""
    u = np.asarray(u, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    assert u.shape[0] == 2
    ts = np.linspace(0.0, math.pi / 2, grid)
    best = 0.0
    for t in ts:
        w = np.array([math.cos(t), math.sin(t)])
        nv = sorted_l1_norm(w, gamma)
        if nv > 0:
            w = w / nv
            best = max(best, abs(w[0] * u[0]) + abs(w[1] * u[1]))
    return best
