"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own subprocess (the backend is chosen at import time
via PIVOTAL_SLOPE_BACKEND), timing the sorted-l1 prox on large inputs and a
full pivotal fit. Run from the repository root:

    python3 benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys

WORKLOAD = """
import json
import time

import numpy as np

from pivotal_slope import backend, datagen, penalties, solver, sorted_l1
from pivotal_slope.penalties import PenaltyConfig

rng = np.random.default_rng(0)

# warm-up (includes numba compilation on that backend)
sorted_l1.prox(rng.standard_normal(1000),
               sorted_l1.validate(np.linspace(2.0, 1.0, 1000)))

d = 200_000
v = rng.standard_normal(d)
g = sorted_l1.validate(np.linspace(2.0, 1.0, d))
reps = 30
t0 = time.perf_counter()
for _ in range(reps):
    sorted_l1.prox(v, g)
prox_ms = (time.perf_counter() - t0) / reps * 1e3

inst = datagen.build_instance(1000, 2000, 10, beta_magnitude=10.0, seed=0)
inst = datagen.contaminate(inst, "random_large", 20, 10.0)
lam = penalties.build_lambda(1000, 2000, PenaltyConfig(c_lambda=1.0))
mu = penalties.build_mu(1000, PenaltyConfig())
t0 = time.perf_counter()
fr = solver.fit_pivotal(inst.ds, lam, mu)
fit_s = time.perf_counter() - t0

print(json.dumps({
    "backend": backend.BACKEND,
    "prox_ms_d200k": round(prox_ms, 3),
    "fit_s_n1000_p2000": round(fit_s, 3),
    "fit_status": fr.status,
    "sigma_hat": fr.sigma_hat,
}))
"""


def run(backend_name):
    env = dict(os.environ, PIVOTAL_SLOPE_BACKEND=backend_name)
    res = subprocess.run([sys.executable, "-c", WORKLOAD],
                         capture_output=True, text=True, env=env)
    if res.returncode != 0:
        raise RuntimeError(f"{backend_name} run failed:\n{res.stderr}")
    return json.loads(res.stdout)


def main():
    rows = [run(b) for b in ("numpy", "numba")]
    assert rows[0]["sigma_hat"] == rows[1]["sigma_hat"], \
        "backends disagree on fit results"
    for r in rows:
        print(f"{r['backend']:>6}: prox(d=200k) {r['prox_ms_d200k']:8.3f} ms   "
              f"fit(n=1000,p=2000) {r['fit_s_n1000_p2000']:6.3f} s   "
              f"[{r['fit_status']}]")
    speedup = rows[0]["prox_ms_d200k"] / rows[1]["prox_ms_d200k"]
    print(f"numba prox speedup: {speedup:.1f}x (identical results)")


if __name__ == "__main__":
    main()
