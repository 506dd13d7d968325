"""Forward model: periodic intensities, shift densities, observed trajectories.

An experiment is a pair (intensity, shift density).  Each of n trajectories
is a Poisson process on [0, 1) with intensity lambda(. - tau_i), tau_i drawn
i.i.d. from the shift density g.  Estimation sees only the event times; the
shifts are latent (samplers can retain them for diagnostics).

Fourier conventions follow fourier.py: theta_l = int lambda(t) e^{-2 pi i l t} dt
and gamma_l = E e^{-2 pi i l tau}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from . import meyer
from .fourier import FourierTable

__all__ = [
    "ConfigError",
    "IntensityModel",
    "CosineIntensity",
    "PolyDecayIntensity",
    "PiecewiseConstantIntensity",
    "WaveletBumpIntensity",
    "ShiftDensity",
    "LaplaceShift",
    "SymGammaShift",
    "TrajectorySet",
    "intensity_from_config",
    "shift_from_config",
]


class ConfigError(ValueError):
    """Invalid model or run configuration."""


def _check_grid(G: int) -> int:
    G = int(G)
    if G < 1 or (G & (G - 1)) != 0:
        raise ValueError(f"grid size must be a positive power of two, got {G}")
    return G


class IntensityModel:
    """Common interface of all intensity families.

    Subclasses provide theta_many, eval_on_grid, total_mass, l2_energy and
    tail_energy; band_limit is an integer L with theta_l = 0 for |l| > L, or
    None when the family is not treated as band-limited.
    """

    kind: str = ""
    band_limit: int | None = None

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def theta_many(self, ells) -> np.ndarray:
        raise NotImplementedError

    def theta(self, ell: int) -> complex:
        return complex(self.theta_many(np.array([int(ell)]))[0])

    def eval_on_grid(self, G: int) -> np.ndarray:
        raise NotImplementedError

    # alias so samplers can treat intensities and coefficient tables alike
    def grid_values(self, G: int) -> np.ndarray:
        return self.eval_on_grid(G)

    def l2_energy(self) -> float:
        """Squared L2 norm over one period."""
        raise NotImplementedError

    def tail_energy(self, M: int) -> float:
        """sum_{|l| > M} |theta_l|^2, exact per family."""
        raise NotImplementedError

    def fourier_table(self, L: int) -> FourierTable:
        ells = np.arange(-L, L + 1, dtype=np.int64)
        return FourierTable(ells, self.theta_many(ells))

    def config(self) -> dict:
        raise NotImplementedError

    def _band_synthesis(self, G: int) -> np.ndarray:
        G = _check_grid(G)
        if self.band_limit is not None and G < 2 * self.band_limit:
            raise ValueError(
                f"grid size {G} cannot resolve the band limit {self.band_limit}")
        return self.fourier_table(self.band_limit or 0).grid_values(G)


@dataclass(frozen=True)
class CosineIntensity(IntensityModel):
    """lambda(t) = a + b cos(2 pi t); requires a >= |b| for nonnegativity."""

    a: float
    b: float = 0.0
    kind = "cosine"

    def __post_init__(self):
        if not (self.a >= abs(self.b)):
            raise ConfigError(f"cosine intensity needs a >= |b|, got a={self.a}, b={self.b}")

    @property
    def band_limit(self) -> int:
        return 1 if self.b != 0.0 else 0

    @property
    def total_mass(self) -> float:
        return float(self.a)

    def theta_many(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        out = np.zeros(ells.shape, dtype=np.complex128)
        out[ells == 0] = self.a
        out[np.abs(ells) == 1] = self.b / 2.0
        return out

    def eval_on_grid(self, G: int) -> np.ndarray:
        G = _check_grid(G)
        t = np.arange(G) / G
        return self.a + self.b * np.cos(2 * np.pi * t)

    def l2_energy(self) -> float:
        return self.a**2 + self.b**2 / 2.0

    def tail_energy(self, M: int) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        return self.b**2 / 2.0 if M < 1 else 0.0

    def config(self) -> dict:
        return {"kind": "cosine", "a": self.a, "b": self.b}


class PolyDecayIntensity(IntensityModel):
    """Random-phase intensity with polynomially decaying spectrum.

    theta_l = l^-(s + 1/2) e^{i phi_l} / 2 for 1 <= l <= n_terms, phases drawn
    once from phase_seed; the constant a is set at construction so the minimum
    over a fine grid equals min_level.  Sobolev smoothness is s (up to the
    truncation at n_terms).
    """

    kind = "poly_decay"
    band_limit = None

    def __init__(self, s: float, phase_seed: int = 0, n_terms: int = 4096,
                 min_level: float = 0.1):
        if s <= 0:
            raise ConfigError("smoothness s must be positive")
        if n_terms < 1:
            raise ConfigError("n_terms must be positive")
        if min_level < 0:
            raise ConfigError("min_level must be nonnegative")
        self.s = float(s)
        self.phase_seed = int(phase_seed)
        self.n_terms = int(n_terms)
        self.min_level = float(min_level)

        rng = np.random.default_rng(self.phase_seed)
        phases = rng.uniform(0.0, 2 * np.pi, self.n_terms)
        ells = np.arange(1, self.n_terms + 1, dtype=np.float64)
        self._coeffs = 0.5 * ells ** (-(self.s + 0.5)) * np.exp(1j * phases)

        grid = 1 << max(14, (self.n_terms * 2 - 1).bit_length())
        fluct = self._fluct_on_grid(grid)
        self.a = self.min_level - float(np.min(fluct))

    def _fluct_on_grid(self, G: int) -> np.ndarray:
        ells = np.arange(1, self.n_terms + 1, dtype=np.int64)
        table = FourierTable(
            np.concatenate([-ells[::-1], ells]),
            np.concatenate([np.conj(self._coeffs[::-1]), self._coeffs]),
        )
        return table.grid_values(G)

    @property
    def total_mass(self) -> float:
        return float(self.a)

    def theta_many(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        out = np.zeros(ells.shape, dtype=np.complex128)
        out[ells == 0] = self.a
        pos = (ells >= 1) & (ells <= self.n_terms)
        out[pos] = self._coeffs[ells[pos] - 1]
        neg = (ells <= -1) & (ells >= -self.n_terms)
        out[neg] = np.conj(self._coeffs[-ells[neg] - 1])
        return out

    def eval_on_grid(self, G: int) -> np.ndarray:
        G = _check_grid(G)
        if G >= 2 * self.n_terms:
            return self.a + self._fluct_on_grid(G)
        # pointwise direct synthesis; exact for any grid since the expansion
        # is evaluated term by term rather than folded
        t = np.arange(G) / G
        out = np.full(G, self.a)
        step = max(1, int(4e6 // G))
        for start in range(1, self.n_terms + 1, step):
            ls = np.arange(start, min(start + step, self.n_terms + 1))
            block = self._coeffs[ls - 1] @ np.exp(2j * np.pi * np.outer(ls, t))
            out += 2.0 * np.real(block)
        return out

    def l2_energy(self) -> float:
        return self.a**2 + 2.0 * float(np.sum(np.abs(self._coeffs) ** 2))

    def tail_energy(self, M: int) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        if M >= self.n_terms:
            return 0.0
        x = 2 * self.s + 1
        # 0.5 * sum_{M < l <= n_terms} l^-x via a Hurwitz zeta difference
        return 0.5 * float(special.zeta(x, M + 1) - special.zeta(x, self.n_terms + 1))

    def config(self) -> dict:
        return {"kind": "poly_decay", "s": self.s, "phase_seed": self.phase_seed,
                "n_terms": self.n_terms, "min_level": self.min_level}


class PiecewiseConstantIntensity(IntensityModel):
    """Step intensity: level[k] on [breakpoints[k], breakpoints[k+1]), last piece to 1."""

    kind = "piecewise_constant"
    band_limit = None

    def __init__(self, breakpoints, levels):
        bps = np.asarray(breakpoints, dtype=np.float64)
        lvl = np.asarray(levels, dtype=np.float64)
        if bps.ndim != 1 or lvl.ndim != 1 or bps.size != lvl.size or bps.size == 0:
            raise ConfigError("breakpoints and levels must be equal-length 1-d sequences")
        if bps[0] != 0.0 or np.any(np.diff(bps) <= 0) or bps[-1] >= 1.0:
            raise ConfigError("breakpoints must start at 0, increase strictly, and stay below 1")
        if np.any(lvl < 0):
            raise ConfigError("levels must be nonnegative")
        self.breakpoints = bps
        self.levels = lvl
        self._edges = np.append(bps, 1.0)
        self._widths = np.diff(self._edges)

    @property
    def total_mass(self) -> float:
        return float(np.dot(self.levels, self._widths))

    def theta_many(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        out = np.empty(ells.shape, dtype=np.complex128)
        zero = ells == 0
        out[zero] = self.total_mass
        nz = ~zero
        if np.any(nz):
            l = ells[nz].astype(np.float64)
            # integral of v_k e^{-2 pi i l t} over each piece, summed
            phase = np.exp(-2j * np.pi * np.outer(l, self._edges))
            diffs = phase[:, 1:] - phase[:, :-1]
            out[nz] = (diffs @ self.levels) * (1j / (2 * np.pi * l))
        return out

    def eval_on_grid(self, G: int) -> np.ndarray:
        G = _check_grid(G)
        t = np.arange(G) / G
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return self.levels[idx]

    def l2_energy(self) -> float:
        return float(np.dot(self.levels**2, self._widths))

    def tail_energy(self, M: int) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        ells = np.arange(-M, M + 1, dtype=np.int64)
        head = float(np.sum(np.abs(self.theta_many(ells)) ** 2))
        return max(self.l2_energy() - head, 0.0)

    def config(self) -> dict:
        return {"kind": "piecewise_constant",
                "breakpoints": self.breakpoints.tolist(),
                "levels": self.levels.tolist()}


def _default_sup_constant() -> float:
    """Shared estimate of the binary-pattern sup constant, with a 10% margin."""
    global _SUP_CONSTANT
    if _SUP_CONSTANT is None:
        _SUP_CONSTANT = 1.1 * meyer.sup_bound_constant(8, trials=64, seed=20210)
    return _SUP_CONSTANT


_SUP_CONSTANT: float | None = None


class WaveletBumpIntensity(IntensityModel):
    """Baseline plus a signed-by-bits layer of detail atoms at one level.

    lambda = A/2 + xi * sum_k omega_k psi_{D,k} + xi * 2^(D/2) * c_psi with
    xi = c * 2^(-D(s+1/2)).  The constant offset xi 2^(D/2) c_psi dominates the
    worst negative excursion of the atom layer, keeping lambda nonnegative.
    """

    kind = "wavelet_bump"

    def __init__(self, D: int, omega, s: float, c: float, A: float,
                 c_psi: float | None = None):
        D = int(D)
        if not 0 <= D <= 10:
            raise ConfigError("level D must be between 0 and 10")
        bits = np.asarray(omega, dtype=np.int64)
        if bits.shape != (1 << D,) or not np.all((bits == 0) | (bits == 1)):
            raise ConfigError(f"omega must be 2^{D} bits")
        if s <= 0 or c <= 0 or A <= 0:
            raise ConfigError("s, c and A must be positive")
        self.D = D
        self.omega = bits
        self.s = float(s)
        self.c = float(c)
        self.A = float(A)
        self.c_psi = float(c_psi) if c_psi is not None else _default_sup_constant()
        self.xi = self.c * 2.0 ** (-D * (self.s + 0.5))

        theta0 = self.A / 2.0 + self.xi * 2.0 ** (D / 2.0) * self.c_psi
        detail = meyer.detail_band_table(D, self.xi * bits.astype(np.float64))
        self._table = detail.add_constant(theta0)

        grid = 1 << max(14, D + 8)
        low = float(np.min(self._table.grid_values(grid)))
        if low < -1e-9:
            raise ConfigError(
                f"intensity dips to {low:.3e}; offset constant c_psi={self.c_psi} too small")

    @property
    def band_limit(self) -> int:
        return self._table.band_max

    @property
    def total_mass(self) -> float:
        return self._table.mass

    def theta_many(self, ells) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        return np.array([self._table.value(int(l)) for l in ells], dtype=np.complex128)

    def eval_on_grid(self, G: int) -> np.ndarray:
        return self._band_synthesis(G)

    def l2_energy(self) -> float:
        return self._table.l2_energy()

    def tail_energy(self, M: int) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        mask = np.abs(self._table.ells) > M
        return float(np.sum(np.abs(self._table.values[mask]) ** 2))

    def fourier_table(self, L: int | None = None) -> FourierTable:
        if L is None:
            return self._table
        return super().fourier_table(L)

    def config(self) -> dict:
        return {"kind": "wavelet_bump", "D": self.D, "omega": self.omega.tolist(),
                "s": self.s, "c": self.c, "A": self.A, "c_psi": self.c_psi}


# ---------------------------------------------------------------------------
# shift densities
# ---------------------------------------------------------------------------


class ShiftDensity:
    """Known density g of the latent shifts; all shipped families are symmetric."""

    kind: str = ""
    ill_posedness: float = 0.0  # nu: |gamma_l| ~ |l|^-nu
    tail_exponent: float = 2.0  # some alpha > 1 with g(x) <= C (1 + |x|)^-alpha

    @property
    def sup_norm(self) -> float:
        raise NotImplementedError

    def gamma_many(self, ells) -> np.ndarray:
        raise NotImplementedError

    def gamma(self, ell: int) -> float:
        return float(self.gamma_many(np.array([int(ell)]))[0])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def config(self) -> dict:
        raise NotImplementedError

    @cached_property
    def decay_bracket(self) -> tuple[float, float]:
        """(C_lo, C_hi) with C_lo <= |gamma_l| |l|^nu <= C_hi on 1 <= |l| <= 2^16."""
        ells = np.arange(1, (1 << 16) + 1, dtype=np.int64)
        scaled = np.abs(self.gamma_many(ells)) * ells.astype(np.float64) ** self.ill_posedness
        return float(np.min(scaled)), float(np.max(scaled))


@dataclass(frozen=True)
class LaplaceShift(ShiftDensity):
    """Laplace(sigma): g(x) = e^{-|x|/sigma} / (2 sigma), gamma_l = 1/(1 + 4 pi^2 l^2 sigma^2)."""

    sigma: float
    kind = "laplace"
    ill_posedness = 2.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")

    @property
    def sup_norm(self) -> float:
        return 1.0 / (2.0 * self.sigma)

    def gamma_many(self, ells) -> np.ndarray:
        l = np.asarray(ells, dtype=np.float64)
        return 1.0 / (1.0 + (2 * np.pi * self.sigma * l) ** 2)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # inverse CDF applied to one uniform block
        u = rng.random(size)
        v = u - 0.5
        q = np.maximum(1.0 - 2.0 * np.abs(v), np.finfo(np.float64).tiny)
        return -self.sigma * np.sign(v) * np.log(q)

    def config(self) -> dict:
        return {"kind": "laplace", "sigma": self.sigma}


@dataclass(frozen=True)
class SymGammaShift(ShiftDensity):
    """Difference of two Gamma(nu/2, sigma) draws: gamma_l = (1 + 4 pi^2 l^2 sigma^2)^(-nu/2).

    Restricted to nu >= 2 so the density is bounded (it is a Bessel-K density,
    symmetric and maximal at 0).  nu = 2 coincides with Laplace(sigma).
    """

    nu: float
    sigma: float
    kind = "sym_gamma"

    def __post_init__(self):
        if self.nu < 2:
            raise ConfigError("sym_gamma requires nu >= 2 (bounded density)")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")

    @property
    def ill_posedness(self) -> float:
        return float(self.nu)

    def density(self, x) -> np.ndarray:
        """Bessel-K density of the symmetrized Gamma difference."""
        k = self.nu / 2.0
        ax = np.abs(np.asarray(x, dtype=np.float64))
        out = np.empty_like(ax)
        tiny = ax < 1e-290
        z = ax[~tiny] / self.sigma
        lognorm = -0.5 * math.log(math.pi) - special.gammaln(k) - math.log(self.sigma)
        out[~tiny] = np.exp(lognorm + (k - 0.5) * np.log(z / 2.0)) * special.kv(k - 0.5, z)
        out[tiny] = self._at_zero(k)
        return out

    def _at_zero(self, k: float) -> float:
        if k <= 0.5:
            return math.inf
        return math.exp(special.gammaln(k - 0.5) - special.gammaln(k)) / (
            2.0 * math.sqrt(math.pi) * self.sigma)

    @cached_property
    def sup_norm(self) -> float:
        # closed form at the mode, cross-checked by a grid search
        k = self.nu / 2.0
        xs = np.linspace(1e-12, 12.0 * self.sigma, 4097)
        return float(max(self._at_zero(k), np.max(self.density(xs))))

    def gamma_many(self, ells) -> np.ndarray:
        l = np.asarray(ells, dtype=np.float64)
        return (1.0 + (2 * np.pi * self.sigma * l) ** 2) ** (-self.nu / 2.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        k = self.nu / 2.0
        return rng.gamma(k, self.sigma, size) - rng.gamma(k, self.sigma, size)

    def config(self) -> dict:
        return {"kind": "sym_gamma", "nu": self.nu, "sigma": self.sigma}


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class TrajectorySet:
    """n trajectories stored flat: trajectory i is events[offsets[i]:offsets[i+1]].

    Event times live in [0, 1), sorted within each trajectory.  shifts, when
    present, holds the latent shift of each trajectory (diagnostics only).
    """

    events: np.ndarray
    offsets: np.ndarray
    shifts: np.ndarray | None = None

    def __post_init__(self):
        self.events = np.asarray(self.events, dtype=np.float64)
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        if self.offsets.ndim != 1 or self.offsets.size < 1 or self.offsets[0] != 0:
            raise ValueError("offsets must start at 0")
        if self.offsets[-1] != self.events.size or np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets inconsistent with event array")
        if self.shifts is not None:
            self.shifts = np.asarray(self.shifts, dtype=np.float64)
            if self.shifts.shape != (self.n,):
                raise ValueError("one shift per trajectory required")

    @classmethod
    def from_lists(cls, lists, shifts=None) -> "TrajectorySet":
        arrays = [np.sort(np.asarray(a, dtype=np.float64)) for a in lists]
        offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([a.size for a in arrays])
        events = np.concatenate(arrays) if arrays else np.zeros(0)
        return cls(events=events, offsets=offsets, shifts=shifts)

    @property
    def n(self) -> int:
        return self.offsets.size - 1

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def total_events(self) -> int:
        return int(self.events.size)

    def trajectory(self, i: int) -> np.ndarray:
        return self.events[self.offsets[i]:self.offsets[i + 1]]

    def __iter__(self):
        for i in range(self.n):
            yield self.trajectory(i)

    def validate(self):
        if self.events.size and (self.events.min() < 0.0 or self.events.max() >= 1.0):
            raise ValueError("event times must lie in [0, 1)")
        for i in range(self.n):
            seg = self.trajectory(i)
            if seg.size > 1 and np.any(np.diff(seg) < 0):
                raise ValueError(f"trajectory {i} is not sorted")
        return self


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_INTENSITY_KINDS = {
    "cosine": (CosineIntensity, {"a"}, {"b"}),
    "poly_decay": (PolyDecayIntensity, {"s"}, {"phase_seed", "n_terms", "min_level"}),
    "piecewise_constant": (PiecewiseConstantIntensity, {"breakpoints", "levels"}, set()),
    "wavelet_bump": (WaveletBumpIntensity, {"D", "omega", "s", "c", "A"}, {"c_psi"}),
}

_SHIFT_KINDS = {
    "laplace": (LaplaceShift, {"sigma"}, set()),
    "sym_gamma": (SymGammaShift, {"nu", "sigma"}, set()),
}


def _build_from_config(cfg: dict, registry: dict, what: str):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{what} config must be an object")
    kind = cfg.get("kind")
    if kind not in registry:
        raise ConfigError(f"unknown {what} kind {kind!r}; expected one of {sorted(registry)}")
    cls, required, optional = registry[kind]
    given = set(cfg) - {"kind"}
    missing = required - given
    extra = given - required - optional
    if missing:
        raise ConfigError(f"{what} config for {kind!r} missing fields {sorted(missing)}")
    if extra:
        raise ConfigError(f"{what} config for {kind!r} has unknown fields {sorted(extra)}")
    try:
        return cls(**{k: v for k, v in cfg.items() if k != "kind"})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {what} config for {kind!r}: {exc}") from exc


def intensity_from_config(cfg: dict) -> IntensityModel:
    return _build_from_config(cfg, _INTENSITY_KINDS, "intensity")


def shift_from_config(cfg: dict) -> ShiftDensity:
    return _build_from_config(cfg, _SHIFT_KINDS, "shift")
