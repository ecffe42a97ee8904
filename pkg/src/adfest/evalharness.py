"""Monte-Carlo evaluation of ADF estimators against known copulas.

Each replication draws a sample, fits and post-processes every requested
estimator on it, and records the integrated squared error (ISE) against the
true ADF. Reports give the RMISE, its split into integrated squared bias and
integrated variance, a delta-method Monte-Carlo standard error, and the
per-ray RMSE at a few rays.
"""

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from adfest._validation import check_count
from adfest.copulas import CopulaSpec, sample_copula, true_adf_curve
from adfest.estimators import make_estimator
from adfest.exceptions import StudyError
from adfest.minproj import DEFAULT_N_RAYS, MinProjectionTable, angular_grid

REPORT_RAYS = (0.1, 0.3, 0.5, 0.7, 0.9)
MAX_FAILURE_RATE = 0.05
TABLE_COLUMNS = ("copula", "estimator", "rmise_x100", "isb_x1000", "iv_x1000", "mc_error_x100",
                 "rmse_w10", "rmse_w30", "rmse_w50", "rmse_w70", "rmse_w90")


def ise(estimate, truth):
    """Integrated squared error by the trapezium rule on the shared grid."""
    if not np.array_equal(estimate.grid, truth.grid):
        raise ValueError("estimate and truth are on different grids")
    return float(np.trapezoid((estimate.values - truth.values) ** 2, estimate.grid))


@dataclass(frozen=True)
class EvalReport:
    """Summary of one estimator on one copula.

    ``rmise ** 2 == isb + iv`` up to rounding.
    """

    estimator: str
    copula: dict
    n: int
    n_rep: int
    rmise: float
    isb: float
    iv: float
    mc_error: float
    rmse_at_rays: dict
    n_failed: int = 0
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["rmse_at_rays"] = {f"{k:g}": v for k, v in self.rmse_at_rays.items()}
        return d

    def table_row(self, copula_label):
        rm = [self.rmse_at_rays[w] for w in REPORT_RAYS]
        return [copula_label, self.estimator, f"{100 * self.rmise:.4f}", f"{1000 * self.isb:.4f}",
                f"{1000 * self.iv:.4f}", f"{100 * self.mc_error:.4f}"] + [f"{v:.4f}" for v in rm]


def summarise(estimates, truth, estimator, spec, n, n_failed=0, meta=None):
    """Build an :class:`EvalReport` from a stack of estimated curves.

    Parameters
    ----------
    estimates : ndarray of shape (N, m)
        Processed estimates on ``truth.grid``.
    truth : AdfCurve
    """
    estimates = np.asarray(estimates, dtype=float)
    n_rep = estimates.shape[0]
    if n_rep < 2:
        raise StudyError("at least two successful replications are needed")
    grid = truth.grid
    err = estimates - truth.values
    ises = np.trapezoid(err ** 2, grid, axis=1)
    mise = float(ises.mean())
    isb = float(np.trapezoid((estimates.mean(axis=0) - truth.values) ** 2, grid))
    iv = mise - isb
    if iv < 0:
        if iv < -1e-12 * mise - 1e-24:
            warnings.warn(f"negative integrated variance {iv:.3g} clamped to 0", RuntimeWarning,
                          stacklevel=2)
        iv = 0.0
        isb = mise
    var_ise = float(ises.var(ddof=1))
    mc_error = float(np.sqrt(var_ise / n_rep / (4.0 * mise))) if mise > 0 else 0.0
    idx = [int(np.argmin(np.abs(grid - w))) for w in REPORT_RAYS]
    rmse = {w: float(np.sqrt(np.mean(err[:, i] ** 2))) for w, i in zip(REPORT_RAYS, idx)}
    return EvalReport(estimator=estimator, copula=spec.to_dict(), n=n, n_rep=n_rep,
                      rmise=float(np.sqrt(mise)), isb=isb, iv=iv, mc_error=mc_error,
                      rmse_at_rays=rmse, n_failed=n_failed, meta=dict(meta or {}))


def _replicate(spec, n, seed, index, estimators, n_rays, params):
    """Fit every estimator to one sample; failures are returned as None."""
    X = sample_copula(spec, n, seed=[seed, index])
    table = MinProjectionTable(X, angular_grid(n_rays))
    out = {}
    for name in estimators:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                est = make_estimator(name, n_rays=n_rays, **params.get(name, {}))
                out[name] = est.fit_table(table).curve_.values
        except (ArithmeticError, ValueError, RuntimeError):
            out[name] = None
    return out


def run_study(estimators, spec, n=10_000, n_rep=100, seed=0, n_rays=DEFAULT_N_RAYS,
              estimator_params=None, n_jobs=1, truth=None):
    """Monte-Carlo study of several estimators on shared samples.

    Parameters
    ----------
    estimators : sequence of str
        Names accepted by :func:`~adfest.estimators.make_estimator`.
    spec : CopulaSpec
    n : int, default=10000
        Sample size.
    n_rep : int, default=100
        Number of replications (at least 2).
    seed : int, default=0
        Replication ``i`` uses the stream ``default_rng([seed, i])``.
    n_rays : int, default=1001
    estimator_params : dict, optional
        Per-estimator keyword overrides.
    n_jobs : int, default=1
        Parallel workers; results do not depend on this.
    truth : AdfCurve, optional
        Reference curve; defaults to the true ADF of ``spec``.

    Returns
    -------
    dict of str to EvalReport
    """
    n = check_count(n, "n")
    n_rep = check_count(n_rep, "n_rep", minimum=2)
    estimators = list(estimators)
    params = estimator_params or {}
    truth = truth or true_adf_curve(spec, angular_grid(n_rays))
    reps = Parallel(n_jobs=n_jobs)(
        delayed(_replicate)(spec, n, seed, i, estimators, n_rays, params) for i in range(n_rep))
    reports = {}
    for name in estimators:
        curves = [r[name] for r in reps if r[name] is not None]
        n_failed = n_rep - len(curves)
        if n_failed > MAX_FAILURE_RATE * n_rep:
            raise StudyError(f"{name} failed on {n_failed} of {n_rep} replications")
        meta = {"seed": seed, "n_rays": n_rays, "postprocessed_before_ise": True,
                "params": params.get(name, {})}
        reports[name] = summarise(np.array(curves), truth, name, spec, n, n_failed, meta)
    return reports


def rmise_study(estimator, spec, n=10_000, n_rep=100, seed=0, **kwargs):
    """Monte-Carlo study of a single estimator; see :func:`run_study`."""
    return run_study([estimator], spec, n, n_rep, seed, **kwargs)[estimator]


def table_csv(rows):
    """Render ``(copula_label, EvalReport)`` pairs as the summary table CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for label, report in rows:
        writer.writerow(report.table_row(label))
    return buf.getvalue()


def write_reports(rows, csv_path, json_path, config):
    """Write the table CSV and a JSON file with the config and every report."""
    Path(csv_path).write_text(table_csv(rows))
    payload = {"config": config,
               "reports": [dict(r.to_dict(), copula_label=label) for label, r in rows]}
    Path(json_path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def parse_copula(value):
    """Copula from a study index (1-9), a dict, or a JSON string."""
    from adfest.copulas import STUDY_COPULAS

    if isinstance(value, CopulaSpec):
        return value
    if isinstance(value, dict):
        return CopulaSpec.from_dict(value)
    text = str(value).strip()
    if text.isdigit():
        if int(text) not in STUDY_COPULAS:
            raise ValueError(f"study copula index must be 1-9, got {text}")
        return STUDY_COPULAS[int(text)]
    return CopulaSpec.from_dict(json.loads(text))
