"""Instance generators: sub-Gaussian designs, standardized noise families,
sparse signals, and adversarial response contaminations.

All generation is reproducible: every public generator is a pure function of
its arguments and a 64-bit seed, with per-purpose substreams derived through
``numpy.random.SeedSequence`` so grid runs are order-independent.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import toeplitz

from .solver import Dataset

TAU_INF = math.inf

NOISE_FAMILIES = ("gaussian", "student_t", "symmetric_pareto", "rademacher", "mixture")
CONTAMINATION_STRATEGIES = ("random_large", "residual_aligned", "lower_bound")


@dataclass(frozen=True)
class NoiseSpec:
    """A unit-variance noise family with a declared moment exponent tau.

    Conventions: student_t uses nu = tau + 1 degrees of freedom (guaranteeing
    a finite tau-th moment), symmetric_pareto uses tail index tau + 0.5.  The
    ``mixture`` family is the two-point contamination law used by the
    indistinguishability construction and carries its shape in ``params``.
    """

    family: str
    tau: float = TAU_INF
    params: dict = None

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if not (self.tau == TAU_INF or self.tau >= 2):
            raise ValueError(f"tau must be >= 2 or inf, got {self.tau}")
        if self.params is None:
            object.__setattr__(self, "params", {})
        if self.family == "student_t":
            nu = self.nu
            if nu <= 2:
                raise ValueError(f"student_t needs nu > 2, got {nu}")
            if self.tau != TAU_INF and nu <= self.tau:
                raise ValueError("student_t degrees of freedom must exceed tau")
        if self.family == "symmetric_pareto":
            alpha = self.pareto_index
            if alpha <= 2:
                raise ValueError(f"symmetric_pareto needs tail index > 2, got {alpha}")
            if self.tau != TAU_INF and alpha <= self.tau:
                raise ValueError("pareto tail index must exceed tau")

    @property
    def nu(self):
        default = self.tau + 1.0 if self.tau != TAU_INF else 5.0
        return float(self.params.get("nu", default))

    @property
    def pareto_index(self):
        default = self.tau + 0.5 if self.tau != TAU_INF else 4.5
        return float(self.params.get("alpha", default))


@dataclass(frozen=True)
class GroundTruth:
    beta_star: np.ndarray
    theta_star: np.ndarray
    sigma: float
    Sigma: np.ndarray | None  # None encodes the identity
    noise: NoiseSpec
    support_S: np.ndarray
    support_O: np.ndarray

    @property
    def s(self):
        return int(self.support_S.shape[0])

    @property
    def o(self):
        return int(self.support_O.shape[0])


@dataclass(frozen=True)
class RegressionInstance:
    ds: Dataset
    truth: GroundTruth
    seed: int
    xi: np.ndarray  # realized noise, retained for diagnostics


def _rng(seed, *tags):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *tags]))


def gen_covariance(p, kind="identity", rho=None):
    """Identity or AR(1) Toeplitz covariance with unit diagonal."""
    if kind == "identity":
        return np.eye(p)
    if kind == "ar1":
        if rho is None or not abs(rho) < 1:
            raise ValueError(f"ar1 requires |rho| < 1, got {rho}")
        return toeplitz(float(rho) ** np.arange(p))
    raise ValueError(f"unknown covariance kind {kind!r}")


def _sqrt_spd(Sigma):
    vals, vecs = np.linalg.eigh(Sigma)
    if vals[0] <= 0:
        raise ValueError("covariance is not positive definite")
    return (vecs * np.sqrt(vals)) @ vecs.T


def gen_design(n, p, Sigma, row_family="gaussian", seed=0):
    """Rows are independent Sigma^{1/2} Z with Z isotropic of the family."""
    rng = _rng(seed, 1)
    if row_family == "gaussian":
        Z = rng.standard_normal((n, p))
    elif row_family == "rademacher":
        Z = 2.0 * rng.integers(0, 2, size=(n, p)) - 1.0
    else:
        raise ValueError(f"unknown design family {row_family!r}")
    if Sigma is None or np.array_equal(Sigma, np.eye(p)):
        return Z
    return Z @ _sqrt_spd(np.asarray(Sigma, dtype=np.float64))


def gen_noise(n, spec, seed=0):
    """i.i.d. draws standardized to zero mean, unit variance analytically."""
    rng = _rng(seed, 2)
    if spec.family == "gaussian":
        return rng.standard_normal(n)
    if spec.family == "rademacher":
        return 2.0 * rng.integers(0, 2, size=n) - 1.0
    if spec.family == "student_t":
        nu = spec.nu
        return rng.standard_t(nu, size=n) / math.sqrt(nu / (nu - 2.0))
    if spec.family == "symmetric_pareto":
        alpha = spec.pareto_index
        mag = 1.0 + rng.pareto(alpha, size=n)  # P(M > t) = t^-alpha, t >= 1
        sign = 2.0 * rng.integers(0, 2, size=n) - 1.0
        return sign * mag / math.sqrt(alpha / (alpha - 2.0))
    raise ValueError(f"cannot sample family {spec.family!r} directly")


def gen_beta(p, s, magnitude=1.0, pattern="flat", seed=0):
    """s-sparse signal on a seeded random support."""
    if not 0 <= s <= p:
        raise ValueError(f"need 0 <= s <= p, got s={s}, p={p}")
    rng = _rng(seed, 3)
    beta = np.zeros(p)
    if s == 0:
        return beta
    support = np.sort(rng.choice(p, size=s, replace=False))
    signs = 2.0 * rng.integers(0, 2, size=s) - 1.0
    if pattern == "flat":
        vals = np.full(s, float(magnitude))
    elif pattern == "decaying":
        vals = float(magnitude) / np.arange(1, s + 1)
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    beta[support] = signs * vals
    return beta


def _rebuild_y(X, beta, theta, sigma, xi):
    return X @ beta + math.sqrt(X.shape[0]) * theta + sigma * xi


def build_instance(
    n,
    p,
    s,
    sigma=1.0,
    noise=NoiseSpec("gaussian"),
    design_family="gaussian",
    covariance=None,
    beta_magnitude=1.0,
    beta_pattern="flat",
    seed=0,
):
    """Uncontaminated model instance (theta* = 0); contaminate() adds outliers."""
    X = gen_design(n, p, covariance, design_family, seed)
    xi = gen_noise(n, noise, seed)
    beta = gen_beta(p, s, beta_magnitude, beta_pattern, seed)
    theta = np.zeros(n)
    Y = _rebuild_y(X, beta, theta, sigma, xi)
    truth = GroundTruth(
        beta_star=beta,
        theta_star=theta,
        sigma=float(sigma),
        Sigma=covariance,
        noise=noise,
        support_S=np.flatnonzero(beta),
        support_O=np.flatnonzero(theta),
    )
    return RegressionInstance(Dataset(X, Y), truth, int(seed), xi)


def contaminate(inst, strategy, o, magnitude):
    """New instance with an o-sparse adversarial theta* and Y rebuilt.

    random_large places +-magnitude entries on a random support;
    residual_aligned puts magnitude*sign(sigma xi_i) on the o largest |sigma
    xi_i| (the adversary sees the realized noise); lower_bound uses the
    lower-bound magnitudes sigma*(o/n)^(-1/tau)/sqrt(n) times ``magnitude``
    on a deterministic support with random signs.
    """
    n = inst.ds.n
    if not 0 <= o <= n:
        raise ValueError(f"need 0 <= o <= n, got o={o}")
    if o == 0:
        return inst
    truth = inst.truth
    theta = np.zeros(n)
    rng = _rng(inst.seed, 4, CONTAMINATION_STRATEGIES.index(strategy))
    if strategy == "random_large":
        support = np.sort(rng.choice(n, size=o, replace=False))
        theta[support] = (2.0 * rng.integers(0, 2, size=o) - 1.0) * magnitude
    elif strategy == "residual_aligned":
        support = np.argsort(-np.abs(truth.sigma * inst.xi), kind="stable")[:o]
        theta[support] = magnitude * np.sign(inst.xi[support])
    elif strategy == "lower_bound":
        tau = truth.noise.tau
        if tau == TAU_INF:
            amp = truth.sigma * math.sqrt(math.log(n / o)) if o < n else 0.0
        else:
            amp = truth.sigma * (o / n) ** (-1.0 / tau)
        support = np.arange(o)
        signs = 2.0 * rng.integers(0, 2, size=o) - 1.0
        theta[support] = magnitude * amp / math.sqrt(n) * signs
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    Y = _rebuild_y(inst.ds.X, truth.beta_star, theta, truth.sigma, inst.xi)
    new_truth = replace(truth, theta_star=theta, support_O=np.flatnonzero(theta))
    return RegressionInstance(Dataset(inst.ds.X, Y), new_truth, inst.seed, inst.xi)


def lower_bound_pair(n, o, sigma, tau, seed=0, truncate_support=False):
    """Two instances with identical response distributions.

    Instance A: one-column +-1 design v, signal b*e_1 with b = sigma *
    (o/n)^(1-1/tau), Rademacher noise, and random Bernoulli(o/n)-supported
    outliers of magnitude sigma*(o/n)^(-1/tau) subtracted.  Instance B: no
    signal, no outliers, inflated scale sigma_tilde, two-point mixture noise.
    By construction both responses follow the same law coordinatewise.

    ``truncate_support`` keeps only the o largest outliers of instance A
    (deterministic sparsity for estimator stress tests; breaks the exact
    distributional identity).
    """
    if o < 1 or o > n:
        raise ValueError(f"need 1 <= o <= n, got o={o}")
    rng = _rng(seed, 5)
    q = o / n
    v = 2.0 * rng.integers(0, 2, size=n) - 1.0
    X = v.reshape(n, 1)
    if tau == TAU_INF:
        logratio = math.log(n / o) if o < n else 0.0
        amp = sigma * math.sqrt(logratio)
        var_term = q * logratio * (1.0 - q)
    else:
        if tau < 2:
            raise ValueError("tau must be >= 2 or inf")
        amp = sigma * q ** (-1.0 / tau)
        var_term = q ** (1.0 - 2.0 / tau) * (1.0 - q ** (1.0 - 2.0 / tau))
    b = amp * q  # = sigma (o/n)^{1-1/tau}, so ||X beta||_2/sqrt(n) = b
    sigma_tilde = sigma * math.sqrt(1.0 + var_term)

    alpha = (rng.random(n) < q).astype(np.float64)
    xi_a = 2.0 * rng.integers(0, 2, size=n) - 1.0
    theta_proof = amp * alpha * v
    if truncate_support and int(alpha.sum()) > o:
        keep = np.argsort(-np.abs(theta_proof), kind="stable")[:o]
        mask = np.zeros(n)
        mask[keep] = 1.0
        theta_proof = theta_proof * mask
    theta_a = -theta_proof / math.sqrt(n)
    beta_a = np.array([b])
    Y_a = _rebuild_y(X, beta_a, theta_a, sigma, xi_a)
    spec_a = NoiseSpec("rademacher", tau=tau)
    truth_a = GroundTruth(
        beta_a, theta_a, float(sigma), None, spec_a,
        np.array([0]), np.flatnonzero(theta_a),
    )
    inst_a = RegressionInstance(Dataset(X, Y_a), truth_a, int(seed), xi_a)

    alpha_b = (rng.random(n) < q).astype(np.float64)
    xi_b = 2.0 * rng.integers(0, 2, size=n) - 1.0
    zeta = (amp * (q - alpha_b) * v + sigma * xi_b) / sigma_tilde
    beta_b = np.zeros(1)
    theta_b = np.zeros(n)
    Y_b = _rebuild_y(X, beta_b, theta_b, sigma_tilde, zeta)
    spec_b = NoiseSpec("mixture", tau=tau, params={"q": q, "amp_over_sigma": amp / sigma})
    truth_b = GroundTruth(
        beta_b, theta_b, float(sigma_tilde), None, spec_b,
        np.array([], dtype=np.int64), np.array([], dtype=np.int64),
    )
    inst_b = RegressionInstance(Dataset(X, Y_b), truth_b, int(seed), zeta)
    return inst_a, inst_b


_DUMP_VERSION = 1


def dump_instance(inst, path):
    """Versioned binary dump of (X, Y, truth fields, seed)."""
    t = inst.truth
    np.savez(
        path,
        schema_version=np.array([_DUMP_VERSION]),
        X=inst.ds.X,
        Y=inst.ds.Y,
        beta_star=t.beta_star,
        theta_star=t.theta_star,
        sigma=np.array([t.sigma]),
        Sigma=t.Sigma if t.Sigma is not None else np.array([]),
        noise_family=np.array([t.noise.family]),
        noise_tau=np.array([t.noise.tau]),
        seed=np.array([inst.seed], dtype=np.uint64),
        xi=inst.xi,
    )


def load_instance(path):
    with np.load(path, allow_pickle=False) as z:
        version = int(z["schema_version"][0])
        if version != _DUMP_VERSION:
            raise ValueError(f"unsupported instance dump version {version}")
        Sigma = z["Sigma"] if z["Sigma"].size else None
        noise = NoiseSpec(str(z["noise_family"][0]), tau=float(z["noise_tau"][0]))
        beta = z["beta_star"]
        theta = z["theta_star"]
        truth = GroundTruth(
            beta, theta, float(z["sigma"][0]), Sigma, noise,
            np.flatnonzero(beta), np.flatnonzero(theta),
        )
        return RegressionInstance(
            Dataset(z["X"], z["Y"]), truth, int(z["seed"][0]), z["xi"]
        )
