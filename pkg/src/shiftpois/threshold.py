"""Adaptive wavelet hard-thresholding estimator with data-driven thresholds.

All logarithms here are natural logs (the concentration bounds behind the
threshold are of the form e^{-gamma ln n} = n^{-gamma}).

Pipeline: empirical Fourier coefficients on the band needed by the level
schedule, unfiltered deconvolution theta_hat = y/gamma, wavelet analysis,
hard thresholding of the detail coefficients against the random thresholds
s_hat_j(n) (scaling coefficients always kept, ties kept), synthesis back to
a Fourier table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import meyer
from .fourier import FourierTable
from .model import ShiftDensity, TrajectorySet
from .spectral import empirical_fourier

__all__ = [
    "ScheduleError",
    "ThresholdParams",
    "ThresholdDiagnostics",
    "sigma2",
    "epsilon",
    "k_tilde",
    "random_threshold",
    "resolution_levels",
    "adaptive_estimate",
    "clipped_grid",
]


class ScheduleError(RuntimeError):
    """Raised when the sample size admits no detail-level schedule."""


@dataclass(frozen=True)
class ThresholdParams:
    """Tuning knobs of the thresholding estimator.

    gamma >= 2 is required by the concentration level of the thresholds;
    delta_offset is the positive offset added to the count bound inside the
    first radical.  clip_negative only affects grid renderings of the final
    estimate, never the coefficients.  levels, when given, overrides the
    (j0, j1) schedule — the automatic schedule needs very large n for
    ill-posedness nu >= 2, so desk-scale runs pin the levels explicitly.
    """

    gamma: float = 2.0
    delta_offset: float = 1.0
    clip_negative: bool = False
    levels: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.gamma >= 2.0:
            raise ValueError("gamma must be >= 2")
        if not self.delta_offset > 0.0:
            raise ValueError("delta_offset must be > 0")
        if self.levels is not None:
            j0, j1 = self.levels
            if not (0 <= j0 <= j1 <= meyer.MAX_LEVEL):
                raise ValueError(f"levels must satisfy 0 <= j0 <= j1 <= {meyer.MAX_LEVEL}")
            object.__setattr__(self, "levels", (int(j0), int(j1)))


def sigma2(j: int, g: ShiftDensity) -> float:
    """sigma_j^2 = 2^{-j} sum over the level-j detail band of |gamma_ell|^{-2}."""
    ells = meyer.omega_set(j)
    agam = np.abs(g.gamma_many(ells))
    return float(2.0 ** (-j) * np.sum(1.0 / agam ** 2))


def epsilon(j: int, g: ShiftDensity) -> float:
    """epsilon_j = 2^{-j/2} sum over the level-j detail band of |gamma_ell|^{-1}."""
    ells = meyer.omega_set(j)
    agam = np.abs(g.gamma_many(ells))
    return float(2.0 ** (-j / 2.0) * np.sum(1.0 / agam))


def k_tilde(counts, n: int, gamma: float) -> float:
    """Data-driven upper confidence bound on the mean total intensity.

    K_tilde = mean count + 4 gamma ln n/(3n)
              + sqrt(2 gamma ln n sum(K)/n^2 + 5 gamma^2 (ln n)^2/(3 n^2)).
    Valid for any gamma > 0 (the estimator itself uses gamma >= 2).
    """
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size != n:
        raise ValueError("counts must be a vector of length n")
    if n < 2:
        raise ValueError("need n >= 2 so that ln n > 0")
    if not gamma > 0.0:
        raise ValueError("gamma must be > 0")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    total = float(np.sum(counts))
    ln = math.log(n)
    return (total / n + 4.0 * gamma * ln / (3.0 * n)
            + math.sqrt(2.0 * gamma * ln * total / n ** 2
                        + 5.0 * gamma ** 2 * ln ** 2 / (3.0 * n ** 2)))


def random_threshold(j: int, n: int, params: ThresholdParams, g: ShiftDensity,
                     k_bound: float) -> float:
    """Level-j hard threshold s_hat_j(n) given the count bound K_tilde."""
    if j < 0:
        raise ValueError("j must be >= 0")
    if n < 2:
        raise ValueError("need n >= 2 so that ln n > 0")
    if k_bound < 0.0:
        raise ValueError("count bound must be nonnegative")
    ln = math.log(n)
    rate = 2.0 * params.gamma * ln / n
    radical = math.sqrt(sigma2(j, g) * rate * (g.sup_norm * k_bound + params.delta_offset))
    return 4.0 * (radical + (params.gamma * ln / (3.0 * n)) * epsilon(j, g))


def resolution_levels(n: int, nu: float) -> tuple[int, int]:
    """(j0, j1): largest j0 with 2^{j0} <= ln n, largest j1 with
    2^{j1} <= (n/ln n)^{1/(2 nu + 1)}.

    Raises ScheduleError when j0 > j1 (sample too small to carry any detail
    level); there is no silent fallback.
    """
    if n < 8:
        raise ValueError("need n >= 8 so that ln n >= 2")
    if not nu > 0.0:
        raise ValueError("nu must be > 0")
    ln = math.log(n)
    j0 = math.floor(math.log2(ln))
    j1 = math.floor(math.log2(n / ln) / (2.0 * nu + 1.0))
    if j0 > j1:
        raise ScheduleError(
            f"sample too small for level schedule: n={n}, nu={nu} give "
            f"j0={j0} > j1={j1}")
    return j0, j1


@dataclass(frozen=True)
class ThresholdDiagnostics:
    """What the thresholding pipeline decided, level by level."""

    j0: int
    j1: int
    n: int
    k_tilde: float
    thresholds: tuple[float, ...]
    kept: tuple[int, ...]
    level_sizes: tuple[int, ...]
    scaling_count: int
    clip_negative: bool = field(default=False)
    # post-threshold coefficients, for inspection/serialization; not part of
    # the JSON diagnostics
    coefficients: "meyer.WaveletCoefficients | None" = field(
        default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "j0": self.j0, "j1": self.j1, "n": self.n, "k_tilde": self.k_tilde,
            "thresholds": list(self.thresholds), "kept": list(self.kept),
            "level_sizes": list(self.level_sizes),
            "scaling_count": self.scaling_count,
            "clip_negative": self.clip_negative,
        }


def adaptive_estimate(data: TrajectorySet, g: ShiftDensity,
                      params: ThresholdParams | None = None,
                      ) -> tuple[FourierTable, ThresholdDiagnostics]:
    """Hard-thresholding estimate of the intensity plus diagnostics.

    Scaling coefficients at j0 are always kept; a detail coefficient at
    level j survives iff |beta_hat| >= s_hat_j(n) (boundary equality keeps).
    The returned table synthesizes the surviving coefficients; apply
    clipped_grid for a nonnegative grid rendering when requested.
    """
    if params is None:
        params = ThresholdParams()
    n = data.n
    if n < 2:
        raise ValueError("need n >= 2 trajectories")
    if params.levels is not None:
        j0, j1 = params.levels
    else:
        j0, j1 = resolution_levels(n, g.ill_posedness)
    band = meyer.omega_set(j1)
    L = int(band[-1])
    stats = empirical_fourier(data, L)
    ells = stats.ells
    gam = g.gamma_many(ells)
    if np.any(gam == 0):
        raise ZeroDivisionError("gamma_ell vanishes on the analysis band")
    theta_hat = FourierTable(ells=ells, values=stats.values / gam)
    coeffs = meyer.analyze(theta_hat, j0, j1)
    bound = k_tilde(data.counts, n, params.gamma)
    thresholds = []
    kept = []
    for off, j in enumerate(range(j0, j1 + 1)):
        s_j = random_threshold(j, n, params, g, bound)
        beta = coeffs.detail[off]
        survive = np.abs(beta) >= s_j
        coeffs.detail[off] = np.where(survive, beta, 0.0)
        thresholds.append(s_j)
        kept.append(int(np.sum(survive)))
    diag = ThresholdDiagnostics(
        j0=j0, j1=j1, n=n, k_tilde=bound,
        thresholds=tuple(thresholds), kept=tuple(kept),
        level_sizes=tuple(1 << j for j in range(j0, j1 + 1)),
        scaling_count=coeffs.scaling.size,
        clip_negative=params.clip_negative,
        coefficients=coeffs,
    )
    return meyer.synthesize(coeffs), diag


def clipped_grid(table: FourierTable, G: int) -> np.ndarray:
    """Grid rendering with negative values clipped to zero."""
    return np.maximum(table.grid_values(G), 0.0)
