"""A seeded Monte Carlo rate experiment driven by the harness.

The grid grows the dimension with the per-split size (p = n/2) at zero
signal, so the mean squared-norm estimate should decay like the theoretical
null risk; the harness records every trial, aggregates per grid point, and
fits the log-log slope.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

import signalnorm as sn

config = sn.ExperimentConfig.from_dict({
    "seed": 31415,
    "task": "estimate-norm",
    "regime": "low",
    "replications": 150,
    "n": [64, 128, 256],
    "p_rule": "n/2",
    "s_rule": "p",          # dense branch
    "sigma": [1.0],
    "magnitude": [0.0],     # null signal
})

records = sn.run_trials(config)
errors = sum(r.error is not None for r in records)
print(f"ran {len(records)} trials ({errors} errored)")

by_n = {}
for rec in records:
    if rec.error is None:
        by_n.setdefault(rec.n, []).append(rec.lambda_hat**2)
points = [(n, float(np.mean(v))) for n, v in sorted(by_n.items())]
fit = sn.fit_rate(points)
print("mean squared-norm estimate per n:", [(n, round(y, 4)) for n, y in points])
print(f"log-log slope: {fit.slope:.3f}  (null risk here scales like sqrt(p)/n ~ n^-0.5)")

out_dir = Path(tempfile.mkdtemp(prefix="signalnorm_rates_"))
paths = sn.report(records, fits={"null_energy_vs_n": fit}, out_dir=out_dir)
print(f"\nwrote {paths['records']} and {paths['summary']}")
summary = json.loads(Path(paths["summary"]).read_text())
first = summary["points"][0]
print(f"first grid point aggregates: n={first['n']} p={first['p']} "
      f"mse_q={first['mse_q']:.5f} trials={first['trials']}")
