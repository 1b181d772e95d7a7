"""Pivotal square-root SLOPE solver.

Minimizes

    L(beta, theta) = sqrt(Q(beta, theta)) + ||beta||_lam + ||theta||_mu,
    Q(beta, theta) = ||Y - X beta - sqrt(n) theta||^2 / (2n)

by alternating a scale update with an accelerated proximal-gradient solve of
the smoothed subproblem  Q(beta, theta)/sigma + ||beta||_lam + ||theta||_mu.
The coupling sigma = 2*sqrt(Q) makes the alternation a block minimization of

    F(beta, theta, sigma) = Q/sigma + sigma/4 + ||beta||_lam + ||theta||_mu,

whose partial minimum over sigma is exactly L, so the returned minimizer is
that of L with no penalty rescaling (internal normalization constant k = 1:
the reported scale is sigma_hat = sqrt(2 * Q_hat), the natural noise-standard-
deviation estimate).  The augmented design [X, sqrt(n) I] is never
materialized; products are computed blockwise.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sorted_l1
from .sorted_l1 import WeightSequence


class DegenerateFitError(RuntimeError):
    """Raised when a certificate is requested at an interpolating solution."""


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if Y.ndim != 1 or Y.shape[0] != X.shape[0]:
            raise ValueError("Y must be 1-d with one entry per row of X")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("X and Y must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass
class FitConfig:
    rel_tol: float = 1e-9
    max_outer: int = 100
    max_inner: int = 2000
    sigma_floor: float | None = None  # default: 1e-6 * initial residual scale
    step_safety: float = 0.5

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.sigma_floor is not None and not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be positive")
        if not 0.0 < self.step_safety <= 1.0:
            raise ValueError("step_safety must be in (0, 1]")


@dataclass(frozen=True)
class KKTReport:
    beta_dual_gap: float
    theta_dual_gap: float
    alignment_residual: float

    def max_gap(self):
        return max(self.beta_dual_gap, self.theta_dual_gap, self.alignment_residual)


@dataclass
class FitResult:
    beta_hat: np.ndarray
    theta_hat: np.ndarray
    sigma_hat: float
    objective_trace: list = field(default_factory=list)
    status: str = "max_iter"
    kkt: KKTReport | None = None


KKT_GAP_TOL = 1e-4


def _check_fit_dims(ds, lam, mu):
    if len(lam) != ds.p:
        raise ValueError(f"lambda has length {len(lam)}, expected p={ds.p}")
    if mu is not None and len(mu) != ds.n:
        raise ValueError(f"mu has length {len(mu)}, expected n={ds.n}")


def objective_eval(ds, beta, theta, lam, mu):
    """Pivotal objective sqrt(Q) + ||beta||_lam + ||theta||_mu."""
    _check_fit_dims(ds, lam, mu)
    r = ds.Y - ds.X @ beta - math.sqrt(ds.n) * theta
    q = (r @ r) / (2.0 * ds.n)
    return math.sqrt(q) + sorted_l1.norm_eval(beta, lam) + sorted_l1.norm_eval(theta, mu)


def _augmented_smax_sq(X, with_theta, iters=50, tol=1e-6):
    """Squared spectral norm of [X, sqrt(n) I] (or of X alone) by power iteration."""
    n, p = X.shape
    rng = np.random.default_rng(0)
    b = rng.standard_normal(p)
    th = rng.standard_normal(n) if with_theta else None
    rn = math.sqrt(n)
    prev = 0.0
    for _ in range(iters):
        z = X @ b
        if with_theta:
            z = z + rn * th
        b_new = X.T @ z
        if with_theta:
            th_new = rn * z
            nrm = math.sqrt(b_new @ b_new + th_new @ th_new)
        else:
            nrm = math.sqrt(b_new @ b_new)
        if nrm == 0.0:
            return float(n) if with_theta else 0.0
        b = b_new / nrm
        if with_theta:
            th = th_new / nrm
        if prev > 0.0 and abs(nrm - prev) <= tol * prev:
            prev = nrm
            break
        prev = nrm
    # prev approximates ||A^T A|| = smax^2; pad slightly so 1/L is a safe step
    return prev * (1.0 + 1e-3)


def _penalty_value(b, th, lam_w, mu_w):
    val = np.sort(np.abs(b))[::-1] @ lam_w
    if th is not None:
        val += np.sort(np.abs(th))[::-1] @ mu_w
    return float(val)


def _solve_smoothed(X, Y, lam_w, mu_w, sigma, b0, th0, cfg, smax_sq):
    """FISTA with backtracking and restart-on-increase for

        Q(beta, theta)/sigma + ||beta||_lam + ||theta||_mu

    at fixed sigma > 0.  th0 = None solves the theta-free (baseline) problem.
    Returns (beta, theta, residual, objective); objective never exceeds the
    warm-start value (monotone via best-iterate tracking).
    """
    n = X.shape[0]
    rn = math.sqrt(n)
    with_theta = th0 is not None
    lam_seq = WeightSequence(lam_w)
    mu_seq = WeightSequence(mu_w) if with_theta else None

    def residual(b, th):
        r = Y - X @ b
        if with_theta:
            r = r - rn * th
        return r

    def smooth_val(r):
        return (r @ r) / (2.0 * n * sigma)

    b = b0.copy()
    th = th0.copy() if with_theta else None
    r = residual(b, th)
    f = smooth_val(r)
    obj = f + _penalty_value(b, th, lam_w, mu_w)

    best = (obj, b, th, r)
    step = n * sigma / smax_sq
    tk = 1.0
    restarted = False
    yb, yth, ry = b, th, r
    b_prev, th_prev, r_prev = b, th, r
    obj_prev = obj

    for _ in range(cfg.max_inner):
        # gradient of Q/sigma at the extrapolated point y
        gb = -(X.T @ ry) / (n * sigma)
        if with_theta:
            gth = -ry / (rn * sigma)
        fy = smooth_val(ry)
        while True:
            b_new = sorted_l1.prox(yb - step * gb, lam_seq, step)
            if with_theta:
                th_new = sorted_l1.prox(yth - step * gth, mu_seq, step)
            else:
                th_new = None
            r_new = residual(b_new, th_new)
            f_new = smooth_val(r_new)
            db = b_new - yb
            quad = fy + gb @ db + (db @ db) / (2.0 * step)
            if with_theta:
                dth = th_new - yth
                quad += gth @ dth + (dth @ dth) / (2.0 * step)
            if f_new <= quad + 1e-12 * max(1.0, abs(quad)):
                break
            step *= cfg.step_safety

        obj_new = f_new + _penalty_value(b_new, th_new, lam_w, mu_w)
        if obj_new < best[0]:
            best = (obj_new, b_new, th_new, r_new)

        if obj_new > obj_prev:
            if restarted:
                # a plain proximal step from the last iterate cannot increase
                # the objective; a repeat increase is floating-point noise
                break
            # restart: drop momentum and retake the step from the last iterate
            restarted = True
            tk = 1.0
            yb, yth, ry = b_prev, th_prev, r_prev
            continue
        restarted = False

        done = abs(obj_prev - obj_new) <= cfg.rel_tol * max(obj_prev, 1e-300)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        w = (tk - 1.0) / t_next
        yb = b_new + w * (b_new - b_prev)
        ry = r_new + w * (r_new - r_prev)
        if with_theta:
            yth = th_new + w * (th_new - th_prev)
        tk = t_next
        b_prev, th_prev, r_prev = b_new, th_new, r_new
        obj_prev = obj_new
        if done:
            break

    return best[1], best[2], best[3], best[0]


def fit_weighted_slope(ds, lam, mu, sigma, cfg=None, warm=None):
    """Solve the fixed-scale subproblem Q/sigma + ||beta||_lam + ||theta||_mu.

    Returns (beta, theta).  Warm start is an optional (beta0, theta0) pair.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    cfg = cfg or FitConfig()
    _check_fit_dims(ds, lam, mu)
    if warm is None:
        b0, th0 = np.zeros(ds.p), np.zeros(ds.n)
    else:
        b0, th0 = np.asarray(warm[0], dtype=np.float64), np.asarray(warm[1], dtype=np.float64)
    smax_sq = _augmented_smax_sq(ds.X, with_theta=True)
    b, th, _, _ = _solve_smoothed(
        ds.X, ds.Y, lam.weights, mu.weights, sigma, b0, th0, cfg, smax_sq
    )
    return b, th


def _certificate(ds, beta, theta, lam, mu, scale):
    """KKT report with the subgradient candidate read off at the given scale.

    ``scale`` is 2*sqrt(Q_hat) for the pivotal problem; the degenerate branch
    of fit_pivotal substitutes the clamped internal sigma instead, which
    certifies the floored subproblem actually solved.
    """
    n = ds.n
    r = ds.Y - ds.X @ beta - math.sqrt(n) * theta
    g_beta = (ds.X.T @ r) / (n * scale)
    g_theta = r / (math.sqrt(n) * scale)
    beta_gap = sorted_l1.dual_norm_eval(g_beta, lam) - 1.0
    align = abs(g_beta @ beta - sorted_l1.norm_eval(beta, lam))
    theta_gap = sorted_l1.dual_norm_eval(g_theta, mu) - 1.0 if mu is not None else 0.0
    if mu is not None:
        align += abs(g_theta @ theta - sorted_l1.norm_eval(theta, mu))
    return KKTReport(float(beta_gap), float(theta_gap), float(align))


def kkt_residual(ds, fr, lam, mu):
    """First-order optimality certificate at a FitResult.

    Undefined (raises) in the interpolation regime Q_hat = 0.
    """
    _check_fit_dims(ds, lam, mu)
    r = ds.Y - ds.X @ fr.beta_hat - math.sqrt(ds.n) * fr.theta_hat
    q = (r @ r) / (2.0 * ds.n)
    if q == 0.0:
        raise DegenerateFitError("KKT certificate undefined at zero residual")
    return _certificate(ds, fr.beta_hat, fr.theta_hat, lam, mu, 2.0 * math.sqrt(q))


def _fit(ds, lam, mu, cfg):
    """Shared outer loop; mu=None fits the theta-constrained-to-zero baseline."""
    cfg = cfg or FitConfig()
    _check_fit_dims(ds, lam, mu)
    n, p = ds.n, ds.p
    rn = math.sqrt(n)
    with_theta = mu is not None
    mu_w = mu.weights if with_theta else None

    q0 = (ds.Y @ ds.Y) / (2.0 * n)
    scale0 = math.sqrt(2.0 * q0)
    floor = cfg.sigma_floor if cfg.sigma_floor is not None else 1e-6 * scale0

    beta = np.zeros(p)
    theta = np.zeros(n)
    if scale0 == 0.0:
        # Y = 0: the zero solution attains objective 0 exactly
        return FitResult(
            beta, theta, floor if cfg.sigma_floor is not None else 0.0,
            [0.0], "converged", KKTReport(-1.0, -1.0 if with_theta else 0.0, 0.0),
        )

    smax_sq = _augmented_smax_sq(ds.X, with_theta=with_theta)
    th_state = theta if with_theta else None
    sigma_noise = scale0  # sqrt(2*Q) at the current iterate
    trace = [math.sqrt(q0)]
    status = "max_iter"
    kkt = None

    for _ in range(cfg.max_outer):
        sigma_pass = math.sqrt(2.0) * max(sigma_noise, floor)
        beta, th_state, r, _ = _solve_smoothed(
            ds.X, ds.Y, lam.weights, mu_w, sigma_pass, beta, th_state, cfg, smax_sq
        )
        q = (r @ r) / (2.0 * n)
        sigma_new = math.sqrt(2.0 * q)
        obj = math.sqrt(q) + _penalty_value(beta, th_state, lam.weights, mu_w)
        trace.append(obj)
        if sigma_new < floor:
            # interpolation regime: refine the floored subproblem to tight
            # accuracy so its certificate is meaningful, then stop
            status = "degenerate_sigma"
            refine = FitConfig(
                rel_tol=max(cfg.rel_tol * 1e-6, 1e-15),
                max_outer=cfg.max_outer,
                max_inner=cfg.max_inner * 10,
                sigma_floor=cfg.sigma_floor,
                step_safety=cfg.step_safety,
            )
            beta, th_state, r, _ = _solve_smoothed(
                ds.X, ds.Y, lam.weights, mu_w, sigma_pass, beta, th_state,
                refine, smax_sq,
            )
            kkt = _certificate(
                ds, beta, th_state if with_theta else theta, lam, mu, sigma_pass
            )
            if max(kkt.beta_dual_gap, kkt.theta_dual_gap) > KKT_GAP_TOL:
                # warm starts can stall on the flat interpolation manifold; a
                # cold solve of the same subproblem may certify better
                b2, th2, r2, _ = _solve_smoothed(
                    ds.X, ds.Y, lam.weights, mu_w, sigma_pass, np.zeros(p),
                    np.zeros(n) if with_theta else None, refine, smax_sq,
                )
                kkt2 = _certificate(
                    ds, b2, th2 if with_theta else theta, lam, mu, sigma_pass
                )
                if kkt2.max_gap() < kkt.max_gap():
                    beta, th_state, r, kkt = b2, th2, r2, kkt2
            q = (r @ r) / (2.0 * n)
            trace.append(math.sqrt(q) + _penalty_value(beta, th_state, lam.weights, mu_w))
            sigma_noise = max(math.sqrt(2.0 * q), floor)
            break
        sigma_noise = sigma_new
        if abs(trace[-2] - trace[-1]) <= cfg.rel_tol * max(trace[-2], 1e-300):
            kkt = _certificate(
                ds, beta, th_state if with_theta else theta, lam, mu, 2.0 * math.sqrt(q)
            )
            if kkt.beta_dual_gap <= KKT_GAP_TOL and kkt.theta_dual_gap <= KKT_GAP_TOL:
                status = "converged"
                break

    if kkt is None:
        r = ds.Y - ds.X @ beta - (rn * th_state if with_theta else 0.0)
        q = (r @ r) / (2.0 * n)
        scale = 2.0 * math.sqrt(q) if q > 0 else math.sqrt(2.0) * floor
        kkt = _certificate(ds, beta, th_state if with_theta else theta, lam, mu, scale)

    theta_hat = th_state if with_theta else theta
    return FitResult(beta, theta_hat, float(sigma_noise), trace, status, kkt)


def fit_pivotal(ds, lam, mu, cfg=None):
    """Estimator minimizing the pivotal objective over (beta, theta)."""
    from .penalties import check_lambda_mu_compat

    if not check_lambda_mu_compat(lam, mu):
        warnings.warn(
            "lambda does not dominate below mu elementwise; theory assumes "
            "lambda_i <= mu_i", stacklevel=2,
        )
    return _fit(ds, lam, mu, cfg)


def fit_nonrobust_baseline(ds, lam, cfg=None):
    """Square-root SLOPE without the outlier block (theta constrained to 0)."""
    return _fit(ds, lam, None, cfg)


def huber_profile_objective(ds, beta, mu_const):
    """Value of  min_theta  Q(beta, theta) + mu_const * ||theta||_1.

    Equals mu_const^2 * sum_j H(r_j / (mu_const sqrt(n)))  with H the Huber
    function (x^2/2 inside [-1, 1], |x| - 1/2 outside), r = Y - X beta;
    the wiring of constants is pinned by a 1-d numeric-minimization oracle in
    the tests.
    """
    if not mu_const > 0:
        raise ValueError("mu_const must be positive")
    beta = np.asarray(beta, dtype=np.float64)
    r = ds.Y - ds.X @ beta
    x = np.abs(r) / (mu_const * math.sqrt(ds.n))
    h = np.where(x <= 1.0, 0.5 * x * x, x - 0.5)
    return float(mu_const * mu_const * np.sum(h))
