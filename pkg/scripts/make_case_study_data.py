"""Generate the synthetic daily river-flow data shipped with the package.

The file imitates the layout of a multi-gauge flow record (daily mean flow in
m^3/s, October to March, 1993-2020, six gauges with occasional gaps). The
values are simulated, not observed: a latent AR(1) Gaussian process per site
with cross-site correlation decaying with distance, plus a shared storm
component for the gauges closest to the reference site, mapped to lognormal
flows.

Usage: python scripts/make_case_study_data.py [output.csv]
"""

import datetime as dt
import sys
from pathlib import Path

import numpy as np

SITES = ("lune", "wenning", "ribble", "hodder", "kent", "eden")
DISTANCE_KM = np.array([0.0, 18.0, 30.0, 35.0, 40.0, 70.0])
SEED = 19931001


def daily_dates(start=dt.date(1993, 5, 1), end=dt.date(2020, 9, 30)):
    n = (end - start).days + 1
    return [start + dt.timedelta(days=i) for i in range(n)]


def simulate(seed=SEED):
    rng = np.random.default_rng(seed)
    dates = daily_dates()
    n, m = len(dates), len(SITES)
    corr = np.exp(-np.abs(DISTANCE_KM[:, None] - DISTANCE_KM[None, :]) / 60.0)
    chol = np.linalg.cholesky(corr)
    phi = 0.8
    z = np.empty((n, m))
    z[0] = chol @ rng.standard_normal(m)
    for t in range(1, n):
        z[t] = phi * z[t - 1] + np.sqrt(1 - phi ** 2) * (chol @ rng.standard_normal(m))
    # shared heavy storms tie the extremes of nearby gauges together
    storm = np.zeros(n)
    hits = rng.random(n) < 0.01
    storm[hits] = rng.exponential(1.2, hits.sum())
    storm = np.convolve(storm, [1.0, 0.6, 0.3], mode="full")[:n]
    weight = np.exp(-DISTANCE_KM / 25.0)
    level = np.log([35.0, 12.0, 30.0, 10.0, 15.0, 50.0])
    scale = np.array([0.9, 0.8, 0.85, 0.9, 0.7, 0.75])
    flow = np.exp(level + scale * z + weight * storm[:, None])
    missing = rng.random((n, m)) < 0.004
    flow[missing] = np.nan
    keep = [i for i, d in enumerate(dates) if d.month in (10, 11, 12, 1, 2, 3)]
    return [dates[i] for i in keep], flow[keep]


def write(path):
    dates, flow = simulate()
    lines = ["date," + ",".join(SITES)]
    for d, row in zip(dates, flow):
        cells = ["" if np.isnan(v) else f"{v:.3f}" for v in row]
        lines.append(d.isoformat() + "," + ",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    default = Path(__file__).resolve().parents[1] / "src" / "adfest" / "data" / "synthetic_river_flows.csv"
    write(sys.argv[1] if len(sys.argv) > 1 else default)
