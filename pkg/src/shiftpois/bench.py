"""Monte Carlo risk benchmarking: MISE, replication harness, rate fits.

MISE is computed in the Fourier domain (Parseval): the squared coefficient
error on the estimate's band plus the truth's closed-form tail energy beyond
it.  No quadrature noise enters the rate fits.

Replication r of a run always uses the random stream (root_seed, r), and
results are written into a slot indexed by r before reduction, so reports
are bit-identical for any worker count or scheduling order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierTable
from .model import (IntensityModel, ShiftDensity, intensity_from_config,
                    shift_from_config)
from .simulate import SimSeed, sample_dataset
from .spectral import Filter, choose_cutoff, linear_estimate, linear_risk_exact
from .threshold import ThresholdParams, adaptive_estimate

__all__ = [
    "mise",
    "make_estimator",
    "RiskRow",
    "RiskReport",
    "monte_carlo_risk",
    "risk_ladder",
    "RateFit",
    "rate_fit",
    "theoretical_exponent",
]


def mise(estimate: FourierTable, truth: IntensityModel) -> float:
    """Integrated squared error of one estimate against the exact truth:
    sum over the estimate's band of |theta_hat - theta|^2 plus the truth's
    tail energy outside the band."""
    L = estimate.band_max
    diff = estimate.dense(L) - truth.theta_many(np.arange(-L, L + 1))
    return float(np.sum(np.abs(diff) ** 2) + truth.tail_energy(L))


# ---------------------------------------------------------------------------
# estimator registry: configs are JSON-safe dicts so they cross process
# boundaries; callables are also accepted (in-process runs only)
# ---------------------------------------------------------------------------


def make_estimator(cfg: dict):
    """Build an estimator callable (data, g) -> FourierTable from a config.

    kinds: {"kind": "linear", "cutoff": M} fixed spectral cut-off;
    {"kind": "linear_auto", "s": s} cutoff chosen from (n, s, nu) per call;
    {"kind": "adaptive", ...ThresholdParams fields} hard thresholding.
    """
    if not isinstance(cfg, dict):
        raise ValueError("estimator config must be an object")
    kind = cfg.get("kind")
    if kind == "linear":
        M = cfg.get("cutoff")
        if not isinstance(M, int) or M < 0:
            raise ValueError("linear estimator needs integer cutoff >= 0")
        extra = set(cfg) - {"kind", "cutoff"}
        if extra:
            raise ValueError(f"unknown linear estimator fields {sorted(extra)}")
        return lambda data, g: linear_estimate(data, g, M)
    if kind == "linear_auto":
        s = cfg.get("s")
        if not isinstance(s, (int, float)) or s <= 0:
            raise ValueError("linear_auto estimator needs s > 0")
        extra = set(cfg) - {"kind", "s"}
        if extra:
            raise ValueError(f"unknown linear_auto estimator fields {sorted(extra)}")

        def auto(data, g):
            M = choose_cutoff(data.n, s, g.ill_posedness)
            return linear_estimate(data, g, M)

        return auto
    if kind == "adaptive":
        fields_ = {k: v for k, v in cfg.items() if k != "kind"}
        if "levels" in fields_ and fields_["levels"] is not None:
            fields_["levels"] = tuple(fields_["levels"])
        try:
            params = ThresholdParams(**fields_)
        except TypeError as exc:
            raise ValueError(f"bad adaptive estimator config: {exc}") from exc
        return lambda data, g: adaptive_estimate(data, g, params)[0]
    raise ValueError(f"unknown estimator kind {kind!r}")


@dataclass(frozen=True)
class RiskRow:
    """One (estimator, n) cell of a risk table."""

    n: int
    R: int
    mise_mean: float
    mise_stderr: float
    exact_risk: float | None = None
    mises: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {"n": self.n, "R": self.R, "mise_mean": self.mise_mean,
             "mise_stderr": self.mise_stderr}
        if self.exact_risk is not None:
            d["exact_risk"] = self.exact_risk
        return d


@dataclass(frozen=True)
class RiskReport:
    """A full benchmark: design echo plus one RiskRow per sample size."""

    intensity: dict
    shift: dict
    estimator: dict
    root_seed: int
    rows: tuple

    def to_dict(self) -> dict:
        return {"intensity": self.intensity, "shift": self.shift,
                "estimator": self.estimator, "root_seed": self.root_seed,
                "rows": [r.to_dict() for r in self.rows]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)


# worker-side object cache, keyed by the canonical config JSON
_WORKER_CACHE: dict = {}


def _cached_build(intensity_cfg: str, shift_cfg: str, estimator_cfg: str):
    key = (intensity_cfg, shift_cfg, estimator_cfg)
    hit = _WORKER_CACHE.get(key)
    if hit is None:
        hit = (intensity_from_config(json.loads(intensity_cfg)),
               shift_from_config(json.loads(shift_cfg)),
               make_estimator(json.loads(estimator_cfg)))
        _WORKER_CACHE.clear()  # one design at a time; keep memory flat
        _WORKER_CACHE[key] = hit
    return hit


def _score_block(intensity, g, estimator, n, root_seed, ids) -> np.ndarray:
    out = np.empty(len(ids))
    for pos, r in enumerate(ids):
        data = sample_dataset(intensity, g, n, SimSeed(root_seed, r))
        out[pos] = mise(estimator(data, g), intensity)
    return out


def _worker_block(args):
    intensity_cfg, shift_cfg, estimator_cfg, n, root_seed, ids = args
    intensity, g, estimator = _cached_build(intensity_cfg, shift_cfg, estimator_cfg)
    return ids, _score_block(intensity, g, estimator, n, root_seed, ids)


def monte_carlo_risk(intensity: IntensityModel, g: ShiftDensity, estimator,
                     n: int, R: int, root_seed: int, workers: int = 1,
                     stream_offset: int = 0, keep_mises: bool = False) -> RiskRow:
    """Empirical MISE over R independent replications.

    Replication r uses stream (root_seed, stream_offset + r).  estimator is
    either a config dict (parallelizable) or a callable (run in-process).
    Results are identical for every workers value.
    """
    if R < 2:
        raise ValueError("need R >= 2 replications for a standard error")
    ids = list(range(stream_offset, stream_offset + R))
    if callable(estimator) and not isinstance(estimator, dict):
        values = _score_block(intensity, g, estimator, n, root_seed, ids)
    else:
        est_json = json.dumps(estimator, sort_keys=True)
        int_json = json.dumps(intensity.config(), sort_keys=True)
        shf_json = json.dumps(g.config(), sort_keys=True)
        if workers <= 1:
            _, values = _worker_block((int_json, shf_json, est_json, n, root_seed, ids))
        else:
            chunks = [ids[i::workers * 4] for i in range(workers * 4) if ids[i::workers * 4]]
            values = np.empty(R)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                jobs = [pool.submit(_worker_block,
                                    (int_json, shf_json, est_json, n, root_seed, chunk))
                        for chunk in chunks]
                for job in jobs:
                    done_ids, vals = job.result()
                    values[np.asarray(done_ids) - stream_offset] = vals
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(R))
    return RiskRow(n=int(n), R=int(R), mise_mean=mean, mise_stderr=stderr,
                   mises=values if keep_mises else None)


def _exact_risk_for(estimator_cfg, intensity, g, n):
    if not isinstance(estimator_cfg, dict):
        return None
    if estimator_cfg.get("kind") == "linear":
        filt = Filter.projection(estimator_cfg["cutoff"])
    elif estimator_cfg.get("kind") == "linear_auto":
        filt = Filter.projection(choose_cutoff(n, estimator_cfg["s"], g.ill_posedness))
    else:
        return None
    return linear_risk_exact(intensity, g, filt, n)


def risk_ladder(intensity: IntensityModel, g: ShiftDensity, estimator, ns,
                R: int, root_seed: int, workers: int = 1,
                with_exact: bool = True) -> RiskReport:
    """One RiskRow per sample size, disjoint streams across rows.

    Linear estimators also get their exact risk attached for comparison.
    """
    ns = [int(v) for v in ns]
    if len(ns) < 1:
        raise ValueError("need at least one sample size")
    rows = []
    for k, n in enumerate(ns):
        row = monte_carlo_risk(intensity, g, estimator, n, R, root_seed,
                               workers=workers, stream_offset=k * R)
        exact = _exact_risk_for(estimator, intensity, g, n) if with_exact else None
        rows.append(RiskRow(n=row.n, R=row.R, mise_mean=row.mise_mean,
                            mise_stderr=row.mise_stderr, exact_risk=exact))
    est_cfg = estimator if isinstance(estimator, dict) else {"kind": "custom"}
    return RiskReport(intensity=intensity.config(), shift=g.config(),
                      estimator=est_cfg, root_seed=int(root_seed), rows=tuple(rows))


@dataclass(frozen=True)
class RateFit:
    """Least-squares slopes of ln(MISE): against ln n and against ln(n/ln n)."""

    slope: float
    intercept: float
    slope_effective: float
    intercept_effective: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "slope_effective": self.slope_effective,
                "intercept_effective": self.intercept_effective}


def rate_fit(ns, values) -> RateFit:
    """Fit ln(value) ~ slope * ln(n) + intercept, and the same against
    ln(n / ln n) (the adaptive rate carries that logarithmic factor)."""
    ns = np.asarray(ns, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    if ns.ndim != 1 or ns.shape != vals.shape or ns.size < 3:
        raise ValueError("need at least 3 (n, value) pairs")
    if np.any(vals <= 0) or np.any(ns <= 1):
        raise ValueError("need n > 1 and positive values for a log-log fit")
    lny = np.log(vals)
    slope, intercept = np.polyfit(np.log(ns), lny, 1)
    slope_e, intercept_e = np.polyfit(np.log(ns / np.log(ns)), lny, 1)
    return RateFit(slope=float(slope), intercept=float(intercept),
                   slope_effective=float(slope_e),
                   intercept_effective=float(intercept_e))


def theoretical_exponent(s: float, nu: float) -> float:
    """Minimax MISE exponent 2s/(2s + 2 nu + 1) (modulo log factors)."""
    if s <= 0 or nu <= 0:
        raise ValueError("need s > 0 and nu > 0")
    return 2.0 * s / (2.0 * s + 2.0 * nu + 1.0)
