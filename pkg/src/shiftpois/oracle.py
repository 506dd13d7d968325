"""Ground-truth machinery: Poisson likelihood ratios and the hypercube of
wavelet-bump test intensities used by the minimax lower bound.

The likelihood ratio between the unit-period Poisson models with intensity
rho (null) and rho + mu (alternative), observed on one period, is

    log Lambda = -integral(mu) + sum over events T of ln(1 + mu(T - tau)/rho).

mu is evaluated by exact finite Fourier synthesis at the event times, so the
ratio carries no quadrature error; mu must therefore be band-limited (a
coefficient table, or an intensity family with a finite band).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import FourierTable
from .model import IntensityModel, TrajectorySet, WaveletBumpIntensity
from .simulate import SimSeed, sample_dataset

__all__ = [
    "AssouadSpec",
    "assouad_intensity",
    "girsanov_log_ratio",
    "girsanov_log_ratios",
    "ChangeOfMeasureResult",
    "change_of_measure_check",
    "mass_scale_schedule",
]


@dataclass(frozen=True)
class AssouadSpec:
    """One vertex of the hypercube of test intensities.

    lambda_{D,omega} = A/2 + xi_D sum_k omega_k psi_{D,k} + xi_D 2^{D/2} c_psi
    with xi_D = c 2^{-D(s+1/2)}.  The constraint c <= A/(2 + c_psi) keeps
    every vertex nonnegative (c_psi bounds sup|sum omega_k psi_{D,k}|/2^{D/2}).
    """

    D: int
    omega: tuple
    s: float
    c: float
    A: float = 2.0
    c_psi: float | None = None

    def __post_init__(self):
        if not (0 <= self.D <= 10):
            raise ValueError("need 0 <= D <= 10")
        bits = tuple(int(b) for b in self.omega)
        if len(bits) != 1 << self.D or any(b not in (0, 1) for b in bits):
            raise ValueError(f"omega must be 2^{self.D} bits")
        object.__setattr__(self, "omega", bits)
        if not (self.s > 0 and self.A > 0):
            raise ValueError("need s > 0 and A > 0")
        if self.c_psi is not None and self.c_psi <= 0:
            raise ValueError("c_psi must be positive when given")
        cap = self.A / (2.0 + self.resolved_c_psi())
        if not (0 < self.c <= cap + 1e-12):
            raise ValueError(f"need 0 < c <= A/(2+c_psi) = {cap:.6g}")

    def resolved_c_psi(self) -> float:
        if self.c_psi is not None:
            return float(self.c_psi)
        from .model import _default_sup_constant
        return _default_sup_constant()

    @property
    def xi(self) -> float:
        """Per-coefficient bump height xi_D = c 2^{-D(s+1/2)}."""
        return self.c * 2.0 ** (-self.D * (self.s + 0.5))

    @property
    def mass_scale(self) -> float:
        """m_D = 2^{D/2} xi_D = c 2^{-D s}."""
        return self.c * 2.0 ** (-self.D * self.s)

    def config(self) -> dict:
        return {"D": self.D, "omega": list(self.omega), "s": self.s,
                "c": self.c, "A": self.A, "c_psi": self.resolved_c_psi()}


def assouad_intensity(spec: AssouadSpec) -> WaveletBumpIntensity:
    """The intensity at one hypercube vertex (band-limited, nonnegative)."""
    return WaveletBumpIntensity(D=spec.D, omega=spec.omega, s=spec.s,
                                c=spec.c, A=spec.A, c_psi=spec.resolved_c_psi())


def _as_table(mu) -> FourierTable:
    if isinstance(mu, FourierTable):
        return mu
    if isinstance(mu, IntensityModel):
        if mu.band_limit is None:
            raise ValueError(
                "mu must be band-limited for exact synthesis at event times; "
                "pass a finite coefficient table instead")
        return mu.fourier_table(mu.band_limit)
    raise TypeError("mu must be a FourierTable or an IntensityModel")


def _check_perturbation(vals: np.ndarray, rho: float) -> np.ndarray:
    if vals.size and vals.min() < -1e-9 * max(rho, 1.0):
        raise ValueError("mu takes negative values; the ratio requires mu >= 0")
    return np.maximum(vals, 0.0)


def girsanov_log_ratio(events, rho: float, mu, tau: float = 0.0) -> float:
    """log likelihood ratio of one trajectory, alternative over null."""
    if not rho > 0:
        raise ValueError("rho must be > 0")
    table = _as_table(mu)
    events = np.asarray(events, dtype=np.float64)
    vals = _check_perturbation(table.eval_at(events - tau), rho)
    return float(-table.mass + np.sum(np.log1p(vals / rho)))


def girsanov_log_ratios(data: TrajectorySet, rho: float, mu,
                        tau: float = 0.0) -> np.ndarray:
    """Vectorized log ratios, one per trajectory of the dataset."""
    if not rho > 0:
        raise ValueError("rho must be > 0")
    table = _as_table(mu)
    vals = _check_perturbation(table.eval_at(data.events - tau), rho)
    csum = np.concatenate([[0.0], np.cumsum(np.log1p(vals / rho))])
    return -table.mass + (csum[data.offsets[1:]] - csum[data.offsets[:-1]])


class _TableIntensity:
    """Adapter making a nonnegative coefficient table samplable."""

    def __init__(self, table: FourierTable):
        self.table = table

    @property
    def total_mass(self) -> float:
        return self.table.mass

    def grid_values(self, G: int) -> np.ndarray:
        return self.table.grid_values(G)


@dataclass(frozen=True)
class ChangeOfMeasureResult:
    """Monte Carlo estimates of E_alt[F] (lhs) and E_null[F Lambda] (rhs)."""

    lhs_mean: float
    lhs_stderr: float
    rhs_mean: float
    rhs_stderr: float

    @property
    def gap_sigmas(self) -> float:
        scale = math.hypot(self.lhs_stderr, self.rhs_stderr)
        return abs(self.lhs_mean - self.rhs_mean) / scale if scale else math.inf

    def to_dict(self) -> dict:
        return {"lhs_mean": self.lhs_mean, "lhs_stderr": self.lhs_stderr,
                "rhs_mean": self.rhs_mean, "rhs_stderr": self.rhs_stderr,
                "gap_sigmas": self.gap_sigmas}


def change_of_measure_check(F, rho: float, mu, R: int,
                            root_seed: int) -> ChangeOfMeasureResult:
    """Cross-validate simulator and ratio: E_alt[F] vs E_null[F Lambda].

    F maps one trajectory (sorted event-time array) to a real number.
    Simulates R unshifted trajectories under each measure on disjoint
    streams and returns both Monte Carlo means with standard errors.
    """
    if R < 2:
        raise ValueError("need R >= 2 replications")
    if not rho > 0:
        raise ValueError("rho must be > 0")
    table = _as_table(mu)
    zeros = np.zeros(R)
    alt = sample_dataset(_TableIntensity(table.add_constant(rho)), None, R,
                         SimSeed(root_seed, 0), shifts=zeros)
    null = sample_dataset(_TableIntensity(FourierTable.zero().add_constant(rho)),
                          None, R, SimSeed(root_seed, 1), shifts=zeros)
    lhs_vals = np.array([float(F(traj)) for traj in alt])
    weights = np.exp(girsanov_log_ratios(null, rho, table))
    rhs_vals = np.array([float(F(traj)) for traj in null]) * weights
    return ChangeOfMeasureResult(
        lhs_mean=float(lhs_vals.mean()),
        lhs_stderr=float(lhs_vals.std(ddof=1) / math.sqrt(R)),
        rhs_mean=float(rhs_vals.mean()),
        rhs_stderr=float(rhs_vals.std(ddof=1) / math.sqrt(R)),
    )


def mass_scale_schedule(s: float, nu: float, ns, c: float = 1.0):
    """(m_D, n m_D^3) along the calibration 2^D = n^{1/(2s+2nu+1)}.

    Evaluated with the real-valued level D(n) = log2(n)/(2s+2nu+1), so the
    decay predicted for s > 2 nu + 1 is monotone rather than staircase.
    Returns (m, n_m3) arrays aligned with ns.
    """
    ns = np.asarray(ns, dtype=np.float64)
    if np.any(ns < 2):
        raise ValueError("need n >= 2")
    d = 2.0 * s + 2.0 * nu + 1.0
    D = np.log2(ns) / d
    m = c * 2.0 ** (-D * s)
    return m, ns * m ** 3
